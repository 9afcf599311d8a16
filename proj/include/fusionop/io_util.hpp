#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace fusionop::io {

/// Writes `m` as little-endian 64-bit floats in row-major order.
void write_f64(const std::filesystem::path& path, const Eigen::MatrixXd& m);

/// Reads a rows x cols row-major blob; throws FormatError on a size mismatch.
Eigen::MatrixXd read_f64(const std::filesystem::path& path, Eigen::Index rows, Eigen::Index cols);

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never observe a partial file.
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

std::string read_text(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::span<const std::byte> bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a(std::string_view text, std::uint64_t h = 0xcbf29ce484222325ULL);

std::string hex64(std::uint64_t v);

} // namespace fusionop::io
