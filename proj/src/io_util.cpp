#include "fusionop/io_util.hpp"

#include "fusionop/error.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace fusionop::io {

static_assert(std::endian::native == std::endian::little,
              "blob I/O assumes a little-endian host");

void write_f64(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const RowMajor rm = m;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(rm.data()),
              static_cast<std::streamsize>(rm.size() * sizeof(double)));
    if (!out) throw Error("failed writing " + path.string());
}

Eigen::MatrixXd read_f64(const std::filesystem::path& path, Eigen::Index rows, Eigen::Index cols) {
    std::error_code ec;
    const auto bytes = std::filesystem::file_size(path, ec);
    if (ec) throw FormatError("cannot stat " + path.string() + ": " + ec.message());
    const auto expected = static_cast<std::uintmax_t>(rows * cols) * sizeof(double);
    if (bytes != expected) {
        throw FormatError(path.filename().string() + ": expected " + std::to_string(expected) +
                          " bytes for " + std::to_string(rows) + "x" + std::to_string(cols) +
                          ", found " + std::to_string(bytes));
    }
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(expected));
    if (!in) throw FormatError("short read from " + path.string());
    return rm;
}

void write_text_atomic(const std::filesystem::path& path, std::string_view text) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw Error("failed writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t fnv1a(std::span<const std::byte> bytes, std::uint64_t h) {
    for (std::byte b : bytes) {
        h ^= static_cast<std::uint64_t>(b);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a(std::string_view text, std::uint64_t h) {
    return fnv1a(std::as_bytes(std::span(text.data(), text.size())), h);
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace fusionop::io
