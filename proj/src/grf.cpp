#include "fusionop/error.hpp"
#include "fusionop/pde_data.hpp"
#include "fusionop/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace fusionop::pde {

MaternSampler::MaternSampler(int resolution, double alpha, double tau)
    : grid_(Grid::square(resolution)) {
    grid_.validate();
    if (!(alpha > 1.0)) {
        throw InvalidArgument("Matern-type field needs alpha > 1 in two dimensions (got " +
                              std::to_string(alpha) + "); the variance diverges otherwise");
    }
    if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");

    const int n = resolution;
    const double pi = std::numbers::pi;
    cosines_.resize(n, n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const double norm = k == 0 ? 1.0 : std::numbers::sqrt2;
            cosines_(i, k) = norm * std::cos(pi * k * grid_.x(i));
        }
    }
    sqrt_eig_.resize(n, n);
    for (int k1 = 0; k1 < n; ++k1) {
        for (int k2 = 0; k2 < n; ++k2) {
            const double lam = pi * pi * (k1 * k1 + k2 * k2) + tau * tau;
            sqrt_eig_(k1, k2) = std::pow(lam, -alpha / 2.0);
        }
    }
}

GridFunction MaternSampler::sample(std::uint64_t seed) const {
    const int n = grid_.nx;
    CounterRng rng(seed);
    Eigen::MatrixXd coeffs(n, n);
    for (int k1 = 0; k1 < n; ++k1) {
        for (int k2 = 0; k2 < n; ++k2) coeffs(k1, k2) = rng.normal() * sqrt_eig_(k1, k2);
    }
    // field(i, j) = sum_{k1,k2} C(i,k1) coeffs(k1,k2) C(j,k2)
    const Eigen::MatrixXd field = cosines_ * coeffs * cosines_.transpose();
    Eigen::VectorXd values(n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) values[grid_.index(i, j)] = field(i, j);
    }
    return {grid_, std::move(values)};
}

GridFunction sample_grf_matern(int resolution, double alpha, double tau, std::uint64_t seed) {
    return MaternSampler(resolution, alpha, tau).sample(seed);
}

double sqexp_kernel(std::span<const double> a, std::span<const double> b, double length,
                    bool periodic) {
    const double two_l2 = 2.0 * length * length;
    if (!periodic) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
        return std::exp(-d2 / two_l2);
    }
    // Periodization over images x' + m keeps the kernel positive semidefinite on the torus.
    const double d = a[0] - b[0];
    double sum = 0.0;
    for (int m = -3; m <= 3; ++m) sum += std::exp(-(d + m) * (d + m) / two_l2);
    return sum;
}

SqExpSampler::SqExpSampler(const Grid& grid, double length) : grid_(grid) {
    grid_.validate();
    if (!(length > 0.0)) throw InvalidArgument("correlation length must be positive");
    const Eigen::MatrixXd xy = grid_.coordinates();
    const Eigen::Index p = xy.rows();
    Eigen::MatrixXd cov(p, p);
    std::vector<double> a(static_cast<std::size_t>(xy.cols()));
    std::vector<double> b(a.size());
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            for (Eigen::Index k = 0; k < xy.cols(); ++k) {
                a[k] = xy(i, k);
                b[k] = xy(j, k);
            }
            cov(i, j) = cov(j, i) = sqexp_kernel(a, b, length, grid_.periodic);
        }
    }
    for (double jitter = 1e-10; jitter <= 1e-6 * 1.0001; jitter *= 10.0) {
        Eigen::MatrixXd shifted = cov;
        shifted.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(shifted);
        if (llt.info() == Eigen::Success) {
            factor_ = llt.matrixL();
            jitter_ = jitter;
            return;
        }
    }
    throw NumericalError("squared-exponential covariance factorization failed even with jitter 1e-6");
}

Eigen::VectorXd SqExpSampler::sample_values(std::uint64_t seed) const {
    CounterRng rng(seed);
    Eigen::VectorXd xi(factor_.rows());
    for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = rng.normal();
    return factor_.triangularView<Eigen::Lower>() * xi;
}

GridFunction sample_grf_sqexp(int resolution, double length, std::uint64_t seed) {
    return SqExpSampler(Grid::square(resolution), length).sample(seed);
}

} // namespace fusionop::pde
