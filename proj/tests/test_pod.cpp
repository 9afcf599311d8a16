#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fusionop/error.hpp"
#include "fusionop/pod.hpp"
#include "fusionop/rng.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

using namespace fusionop;
using namespace fusionop::pod;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
    CounterRng rng(seed);
    MatrixXd m(rows, cols);
    for (int i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

// Independent oracle: singular values from the eigenvalues of the Gram matrix.
VectorXd oracle_singular_values(const MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(a.transpose() * a);
    VectorXd ev = eig.eigenvalues().reverse().cwiseMax(0.0);
    return ev.cwiseSqrt();
}

MatrixXd centered(const MatrixXd& y) { return y.colwise() - y.rowwise().mean(); }

} // namespace

TEST_CASE("two antipodal snapshots") {
    VectorXd v(3);
    v << 0.6, -0.8, 0.0;
    MatrixXd y(3, 2);
    y << v, -v;
    const auto b = compute_pod(y, 1);
    CHECK(b.mean_mode.isZero(1e-15));
    CHECK(b.singular_values[0] == doctest::Approx(std::sqrt(2.0)));
    // Largest-magnitude entry of v is -0.8, so the signed mode is -v.
    CHECK((b.modes.col(0) + v).norm() < 1e-12);
    Eigen::Index imax;
    b.modes.col(0).cwiseAbs().maxCoeff(&imax);
    CHECK(b.modes(imax, 0) > 0.0);
}

TEST_CASE("identical snapshots keep the mean and zero singular values") {
    VectorXd v(4);
    v << 1, 2, 3, 4;
    const MatrixXd y = v.replicate(1, 3);
    const auto b = compute_pod(y, 2);
    CHECK((b.mean_mode - v).norm() < 1e-14);
    CHECK(b.singular_values.isZero(1e-12));
    CHECK(b.numerical_rank == 0);
    CHECK(b.rank_deficient());
}

TEST_CASE("full rank reconstructs every snapshot") {
    const MatrixXd y = random_matrix(5, 4, 1);
    const auto b = compute_pod(y, 4);
    for (int j = 0; j < 4; ++j) CHECK((reconstruct(b, project(b, y.col(j))) - y.col(j)).norm() < 1e-10);
    CHECK(energy_fraction(b, centered_energy(y)) == doctest::Approx(1.0));
}

TEST_CASE("mode count must be in range") {
    const MatrixXd y = random_matrix(5, 3, 2);
    CHECK_THROWS_AS(compute_pod(y, 0), InvalidArgument);
    CHECK_THROWS_AS(compute_pod(y, 4), InvalidArgument);
    MatrixXd bad = y;
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(compute_pod(bad, 1), NumericalError);
}

TEST_CASE("project and reconstruct") {
    const MatrixXd y = random_matrix(6, 8, 3);
    const auto b = compute_pod(y, 3);
    CHECK(project(b, b.mean_mode).isZero(1e-14));

    const VectorXd f = b.mean_mode + b.singular_values[0] * b.modes.col(0);
    const VectorXd c = project(b, f);
    CHECK(c[0] == doctest::Approx(b.singular_values[0]));
    CHECK(std::abs(c[1]) < 1e-12);
    CHECK(std::abs(c[2]) < 1e-12);

    CHECK((reconstruct(b, VectorXd::Zero(3)) - b.mean_mode).norm() == 0.0);
    CHECK((reconstruct(b, VectorXd::Unit(3, 1)) - (b.mean_mode + b.modes.col(1))).norm() < 1e-15);

    // Least-squares property: the residual is orthogonal to every mode.
    const VectorXd g = random_matrix(6, 1, 99).col(0);
    const VectorXd resid = g - reconstruct(b, project(b, g));
    CHECK((b.modes.transpose() * resid).norm() < 1e-12);

    const VectorXd in_span = b.mean_mode + b.modes * Eigen::Vector3d(0.3, -1.0, 2.0);
    CHECK((reconstruct(b, project(b, in_span)) - in_span).norm() < 1e-10);

    CHECK_THROWS_AS(project(b, VectorXd::Zero(5)), DimensionError);
    CHECK_THROWS_AS(reconstruct(b, VectorXd::Zero(2)), DimensionError);
}

TEST_CASE("energy fraction") {
    VectorXd u(4);
    u << 1, 0, 0, 0;
    MatrixXd rank1(4, 5);
    for (int j = 0; j < 5; ++j) rank1.col(j) = (j - 2.0) * u;
    const auto b = compute_pod(rank1, 1);
    CHECK(energy_fraction(b, centered_energy(rank1)) == doctest::Approx(1.0));
    PODBasis empty;
    empty.mean_mode = VectorXd::Zero(4);
    empty.modes = MatrixXd(4, 0);
    empty.singular_values = VectorXd(0);
    CHECK(energy_fraction(empty, 3.0) == 0.0);
    CHECK_THROWS_AS(energy_fraction(b, 0.0), InvalidArgument);
}

TEST_CASE("property: Eckart-Young tail against an eigenvalue oracle") {
    for (std::uint64_t t = 0; t < 30; ++t) {
        const int p = 2 + static_cast<int>(t % 7);
        const int n = 2 + static_cast<int>((t / 7) % 7);
        const MatrixXd y = random_matrix(p, n, 500 + t);
        const VectorXd sv = oracle_singular_values(centered(y));
        const int rmax = std::min(p, n);
        for (int r = 1; r <= rmax; ++r) {
            const auto b = compute_pod(y, r);
            MatrixXd recon(p, n);
            for (int j = 0; j < n; ++j) recon.col(j) = reconstruct(b, project(b, y.col(j)));
            const double err = (y - recon).squaredNorm();
            double tail = 0.0;
            for (int k = r; k < sv.size(); ++k) tail += sv[k] * sv[k];
            CHECK(std::abs(err - tail) < 1e-9 * std::max(1.0, y.squaredNorm()));

            CHECK((b.modes.transpose() * b.modes - MatrixXd::Identity(r, r)).norm() < 1e-10);
            for (int k = 0; k + 1 < r; ++k) CHECK(b.singular_values[k] >= b.singular_values[k + 1]);
            CHECK(b.singular_values.minCoeff() >= 0.0);
            // Gram eigenvalues carry absolute error ~ eps * sigma_max^2.
            for (int k = 0; k < r; ++k) {
                CHECK(std::abs(b.singular_values[k] * b.singular_values[k] - sv[k] * sv[k]) <
                      1e-12 * std::max(1.0, sv[0] * sv[0]));
            }
        }
    }
}

TEST_CASE("property: POD is deterministic") {
    const MatrixXd y = random_matrix(20, 12, 8);
    const auto a = compute_pod(y, 5);
    const auto b = compute_pod(y, 5);
    CHECK(a.modes == b.modes);
    CHECK(a.singular_values == b.singular_values);
    CHECK(a.mean_mode == b.mean_mode);
}

TEST_CASE("POD inside a subspace") {
    const MatrixXd y = random_matrix(10, 6, 4);
    Eigen::HouseholderQR<MatrixXd> qr(random_matrix(10, 4, 5));
    const MatrixXd q = qr.householderQ() * MatrixXd::Identity(10, 4);
    const auto b = compute_pod_in_subspace(q, y, 3);
    const auto direct = compute_pod(q * q.transpose() * y, 3);
    CHECK((b.mean_mode - direct.mean_mode).norm() < 1e-12);
    CHECK((b.singular_values - direct.singular_values).norm() < 1e-10);
    CHECK((b.modes - direct.modes).norm() < 1e-8);
    // r is clamped to the subspace dimension.
    CHECK(compute_pod_in_subspace(q, y, 9).size() == 4);
    CHECK_THROWS_AS(compute_pod_in_subspace(q, MatrixXd::Zero(9, 3), 2), DimensionError);
}
