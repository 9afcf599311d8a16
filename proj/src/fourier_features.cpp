#include "fusionop/fourier_features.hpp"

#include "fusionop/error.hpp"
#include "fusionop/rng.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

namespace fusionop::features {

FrequencyMatrix sample_frequencies(int d, int m, double scale, std::uint64_t seed) {
    if (d < 1 || m < 1) throw InvalidArgument("frequency matrix needs d >= 1 and m >= 1");
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw InvalidArgument("frequency scale must be positive and finite");
    }
    FrequencyMatrix f;
    f.scale = scale;
    f.seed = seed;
    f.b.resize(d, m);
    CounterRng rng(seed);
    for (int i = 0; i < m; ++i) {
        for (int r = 0; r < d; ++r) f.b(r, i) = scale * rng.normal();
    }
    return f;
}

EncodedCoordinates encode(const FrequencyMatrix& freq, const Eigen::MatrixXd& points) {
    if (points.cols() != freq.dim()) {
        throw DimensionError("encode: points have dimension " + std::to_string(points.cols()) +
                             ", frequencies expect " + std::to_string(freq.dim()));
    }
    const int m = freq.count();
    const Eigen::MatrixXd phase = (2.0 * std::numbers::pi) * (points * freq.b);
    EncodedCoordinates out;
    out.points = points;
    out.features.resize(points.rows(), 2 * m);
    out.features.leftCols(m) = phase.array().cos().matrix();
    out.features.rightCols(m) = phase.array().sin().matrix();
    return out;
}

std::vector<double> geometric_scale_schedule(int n, double smin, double smax) {
    if (n < 1) throw InvalidArgument("scale schedule needs at least one band");
    if (!(smin > 0.0) || !(smax > 0.0)) throw InvalidArgument("scale bounds must be positive");
    std::vector<double> s(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        s[k] = n == 1 ? smin : smin * std::pow(smax / smin, static_cast<double>(k) / (n - 1));
    }
    return s;
}

Eigen::MatrixXd feature_subspace_basis(const FrequencyMatrix& freq, const Grid& grid) {
    const EncodedCoordinates enc = encode(freq, grid.coordinates());
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(enc.features);
    const Eigen::VectorXd diag = qr.matrixQR().diagonal().cwiseAbs();
    const double largest = diag.size() > 0 ? diag[0] : 0.0;
    Eigen::Index rank = 0;
    while (rank < diag.size() && diag[rank] > 1e-10 * largest) ++rank;
    if (rank == 0) throw NumericalError("encoded feature matrix has rank zero");

    const Eigen::MatrixXd q =
        qr.householderQ() * Eigen::MatrixXd::Identity(enc.features.rows(), rank);
    if (grid.channels == 1) return q;

    const Eigen::Index p = grid.points();
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(grid.size(), rank * grid.channels);
    for (int c = 0; c < grid.channels; ++c) block.block(c * p, c * rank, p, rank) = q;
    return block;
}

std::vector<SubspaceData> build_subspaces(const Eigen::MatrixXd& snapshots, const Grid& grid,
                                          int n_subspaces, int m_per_subspace,
                                          const std::vector<double>& scales, std::uint64_t seed) {
    if (n_subspaces < 1) throw InvalidArgument("need at least one subspace");
    if (static_cast<int>(scales.size()) != n_subspaces) {
        throw InvalidArgument("scale schedule has " + std::to_string(scales.size()) +
                              " entries for " + std::to_string(n_subspaces) + " subspaces");
    }
    if (snapshots.rows() != grid.size()) {
        throw DimensionError("snapshot length " + std::to_string(snapshots.rows()) +
                             " does not match grid size " + std::to_string(grid.size()));
    }
    std::vector<SubspaceData> out;
    out.reserve(static_cast<std::size_t>(n_subspaces));
    for (int k = 0; k < n_subspaces; ++k) {
        if (grid.points() < 2 * m_per_subspace) {
            throw InvalidArgument("subspace " + std::to_string(k) + ": grid has " +
                                  std::to_string(grid.points()) + " points, fewer than the " +
                                  std::to_string(2 * m_per_subspace) + " encoded features");
        }
        SubspaceData sd;
        sd.frequencies =
            sample_frequencies(grid.dim(), m_per_subspace, scales[k], subspace_seed(seed, k));
        sd.projector_basis = feature_subspace_basis(sd.frequencies, grid);
        sd.snapshots_projected =
            sd.projector_basis * (sd.projector_basis.transpose() * snapshots);
        out.push_back(std::move(sd));
    }
    return out;
}

void write_pgm(const std::filesystem::path& path, int width, int height,
               const std::vector<std::uint8_t>& pixels) {
    if (static_cast<std::size_t>(width) * height != pixels.size()) {
        throw DimensionError("pgm pixel count does not match width x height");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "P5\n" << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
    if (!out) throw Error("failed writing " + path.string());
}

std::vector<std::filesystem::path> export_encoding_demo(const FrequencyMatrix& freq,
                                                        const GridFunction& field,
                                                        const std::filesystem::path& dir) {
    const Grid& g = field.grid;
    if (g.dim() != 2) throw InvalidArgument("encoding demo needs a two-dimensional field");
    if (freq.dim() != 2) throw DimensionError("encoding demo needs two-dimensional frequencies");

    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());

    const EncodedCoordinates enc = encode(freq, g.coordinates());
    const Eigen::VectorXd base = field.values.head(g.points());
    const int m = freq.count();

    std::vector<std::filesystem::path> written;
    for (int c = 0; c < 2 * m; ++c) {
        const Eigen::VectorXd channel = base.cwiseProduct(enc.features.col(c));
        const double lo = channel.minCoeff();
        const double hi = channel.maxCoeff();
        const double range = hi - lo;

        // Image rows run from y = 1 (top) down to y = 0; columns follow x.
        std::vector<std::uint8_t> px(static_cast<std::size_t>(g.points()));
        for (int row = 0; row < g.ny; ++row) {
            const int j = g.ny - 1 - row;
            for (int i = 0; i < g.nx; ++i) {
                const double t = range > 0.0 ? (channel[g.index(i, j)] - lo) / range : 0.0;
                px[static_cast<std::size_t>(row) * g.nx + i] =
                    static_cast<std::uint8_t>(std::lround(255.0 * t));
            }
        }
        const bool is_cos = c < m;
        char name[64];
        std::snprintf(name, sizeof name, "channel_%02d_%s.pgm", is_cos ? c : c - m,
                      is_cos ? "cos" : "sin");
        const auto path = dir / name;
        write_pgm(path, g.nx, g.ny, px);
        written.push_back(path);
    }
    return written;
}

} // namespace fusionop::features
