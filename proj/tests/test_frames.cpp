#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fusionop/error.hpp"
#include "fusionop/frames.hpp"
#include "fusionop/rng.hpp"

#include <cmath>

using namespace fusionop;
using namespace fusionop::frames;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd mercedes_benz() {
    MatrixXd f(2, 3);
    const double s = std::sqrt(3.0) / 2.0;
    f << 0.0, -s, s, 1.0, -0.5, -0.5;
    return f;
}

MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
    CounterRng rng(seed);
    MatrixXd m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = rng.normal();
    return m;
}

VectorXd random_vector(int n, std::uint64_t seed) { return random_matrix(n, 1, seed).col(0); }

MatrixXd orthonormal_columns(int d, int k, std::uint64_t seed) {
    Eigen::HouseholderQR<MatrixXd> qr(random_matrix(d, k, seed));
    return qr.householderQ() * MatrixXd::Identity(d, k);
}

} // namespace

TEST_CASE("analysis returns inner products with the frame vectors") {
    FrameSpec ortho(MatrixXd::Identity(2, 2));
    CHECK(analysis(ortho, Eigen::Vector2d(3, 4)).isApprox(Eigen::Vector2d(3, 4)));

    FrameSpec mb(mercedes_benz());
    CHECK(analysis(mb, VectorXd::Zero(2)).isZero(0.0));
    const VectorXd c = analysis(mb, Eigen::Vector2d(1, 0));
    // Independent oracle: explicit dot products.
    for (int i = 0; i < 3; ++i) CHECK(c[i] == doctest::Approx(mercedes_benz()(0, i)).epsilon(1e-15));
    CHECK(c[1] == doctest::Approx(-std::sqrt(3.0) / 2.0));
    CHECK(c[2] == doctest::Approx(std::sqrt(3.0) / 2.0));

    CHECK_THROWS_AS(analysis(mb, VectorXd::Zero(3)), DimensionError);
}

TEST_CASE("frame operator of small frames") {
    FrameSpec ortho(MatrixXd::Identity(3, 3));
    const VectorXd f = random_vector(3, 1);
    CHECK((frame_operator_apply(ortho, f) - f).norm() < 1e-15);

    FrameSpec mb(mercedes_benz());
    const VectorXd s = frame_operator_apply(mb, Eigen::Vector2d(1, 0));
    CHECK(s[0] == doctest::Approx(1.5));
    CHECK(std::abs(s[1]) < 1e-15);

    MatrixXd rep(2, 3);
    rep << 1, 1, 0, 0, 0, 1;
    const VectorXd r = frame_operator_apply(FrameSpec(rep), Eigen::Vector2d(1, 1));
    CHECK(r[0] == doctest::Approx(2.0));
    CHECK(r[1] == doctest::Approx(1.0));

    CHECK_THROWS_AS(frame_operator_apply(mb, VectorXd::Zero(4)), DimensionError);
}

TEST_CASE("frame bounds") {
    const Bounds ortho = frame_bounds(FrameSpec(MatrixXd::Identity(4, 4)));
    CHECK(ortho.lower == doctest::Approx(1.0));
    CHECK(ortho.upper == doctest::Approx(1.0));
    CHECK(ortho.tight());

    const Bounds mb = frame_bounds(FrameSpec(mercedes_benz()));
    CHECK(std::abs(mb.lower - 1.5) < 1e-12);
    CHECK(std::abs(mb.upper - 1.5) < 1e-12);
    CHECK(mb.tight());

    MatrixXd f(2, 3);
    f << 1, 1, 0, 0, 0, 1;
    const Bounds b = frame_bounds(FrameSpec(f));
    CHECK(b.lower == doctest::Approx(1.0));
    CHECK(b.upper == doctest::Approx(2.0));
    CHECK_FALSE(b.tight());

    MatrixXd degenerate(2, 2);
    degenerate << 1, 2, 0, 0;
    const Bounds nf = frame_bounds(FrameSpec(degenerate));
    CHECK_FALSE(nf.is_frame);
    CHECK(nf.lower == 0.0);

    CHECK_THROWS_AS(FrameSpec(MatrixXd(2, 0)), InvalidArgument);
    MatrixXd bad = MatrixXd::Identity(2, 2);
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(FrameSpec{bad}, InvalidArgument);
}

TEST_CASE("dual frames") {
    const FrameSpec ortho(MatrixXd::Identity(3, 3));
    CHECK(dual_frame(ortho).vectors().isApprox(MatrixXd::Identity(3, 3)));

    const FrameSpec mb(mercedes_benz());
    CHECK(dual_frame(mb).vectors().isApprox(mercedes_benz() / 1.5, 1e-14));

    MatrixXd f(2, 3);
    f << 1, 1, 0, 0, 0, 1;
    MatrixXd expected(2, 3);
    expected << 0.5, 0.5, 0, 0, 0, 1;
    CHECK(dual_frame(FrameSpec(f)).vectors().isApprox(expected, 1e-14));

    MatrixXd degenerate(2, 2);
    degenerate << 1, 2, 0, 0;
    CHECK_THROWS_AS(dual_frame(FrameSpec(degenerate)), NumericalError);
    CHECK_THROWS_AS(reconstruct(FrameSpec(degenerate), VectorXd::Zero(2)), NumericalError);
}

TEST_CASE("reconstruction from analysis coefficients") {
    const FrameSpec mb(mercedes_benz());
    const VectorXd f = random_vector(2, 9);
    CHECK((reconstruct(mb, analysis(mb, f)) - f).norm() <= 1e-10 * f.norm());
    CHECK(reconstruct(mb, VectorXd::Zero(3)).isZero(0.0));
    CHECK(reconstruct(FrameSpec(MatrixXd::Identity(2, 2)), Eigen::Vector2d(3, 4))
              .isApprox(Eigen::Vector2d(3, 4)));
    CHECK_THROWS_AS(reconstruct(mb, VectorXd::Zero(2)), DimensionError);
}

TEST_CASE("subspace projection") {
    const SubspaceBasis e1(VectorXd::Unit(2, 0));
    CHECK(project_subspace(e1, Eigen::Vector2d(2, 5)).isApprox(Eigen::Vector2d(2, 0)));
    CHECK(project_subspace(e1, Eigen::Vector2d(7, 0)).isApprox(Eigen::Vector2d(7, 0)));

    const SubspaceBasis diag(Eigen::Vector2d(1, 1) / std::sqrt(2.0));
    const VectorXd p = project_subspace(diag, Eigen::Vector2d(1, 0));
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));
    CHECK_THROWS_AS(project_subspace(diag, VectorXd::Zero(3)), DimensionError);

    // Non-orthonormal input is re-orthonormalized on construction.
    MatrixXd skew(3, 2);
    skew << 1, 1, 0, 1, 0, 0;
    const SubspaceBasis w(skew);
    CHECK((w.basis().transpose() * w.basis() - MatrixXd::Identity(2, 2)).norm() < 1e-10);
    CHECK(project_subspace(w, Eigen::Vector3d(3, 4, 5)).isApprox(Eigen::Vector3d(3, 4, 0)));
}

TEST_CASE("fusion frame operator and reconstruction") {
    std::vector<SubspaceBasis> axes = {SubspaceBasis(VectorXd::Unit(2, 0)), SubspaceBasis(VectorXd::Unit(2, 1))};
    const FusionFrameSpec ortho(axes, {1.0, 1.0});
    const VectorXd f = random_vector(2, 3);
    CHECK((fusion_frame_operator_apply(ortho, f) - f).norm() < 1e-15);
    CHECK((fusion_reconstruct(ortho, f) - f).norm() < 1e-15);

    const FusionFrameSpec nested({SubspaceBasis(VectorXd::Unit(2, 0)), SubspaceBasis(MatrixXd::Identity(2, 2))},
                                 {1.0, 1.0});
    const VectorXd s = fusion_frame_operator_apply(nested, Eigen::Vector2d(1, 1));
    CHECK(s[0] == doctest::Approx(2.0));
    CHECK(s[1] == doctest::Approx(1.0));
    const Bounds nb = fusion_frame_bounds(nested);
    CHECK(nb.lower == doctest::Approx(1.0));
    CHECK(nb.upper == doctest::Approx(2.0));

    const FusionFrameSpec zero(axes, {0.0, 0.0});
    CHECK(fusion_frame_operator_apply(zero, f).isZero(0.0));

    const double w = 0.7;
    const Bounds scaled = fusion_frame_bounds(FusionFrameSpec(axes, {w, w}));
    CHECK(scaled.lower == doctest::Approx(w * w));
    CHECK(scaled.upper == doctest::Approx(w * w));

    // Overlapping, non-orthogonal subspaces: oracle assembles S explicitly.
    const VectorXd d = Eigen::Vector2d(1, 1) / std::sqrt(2.0);
    const FusionFrameSpec overlap({SubspaceBasis(VectorXd::Unit(2, 0)), SubspaceBasis(d)}, {1.0, 2.0});
    MatrixXd s_oracle = VectorXd::Unit(2, 0) * VectorXd::Unit(2, 0).transpose() + 4.0 * d * d.transpose();
    const VectorXd g = random_vector(2, 17);
    CHECK((fusion_frame_operator_apply(overlap, g) - s_oracle * g).norm() < 1e-14);
    CHECK((fusion_reconstruct(overlap, g) - g).norm() <= 1e-10 * g.norm());

    const FusionFrameSpec deficient({SubspaceBasis(VectorXd::Unit(3, 0)), SubspaceBasis(VectorXd::Unit(3, 1))},
                                    {1.0, 1.0});
    CHECK_FALSE(fusion_frame_bounds(deficient).is_frame);
    CHECK_THROWS_AS(fusion_reconstruct(deficient, random_vector(3, 2)), NumericalError);

    CHECK_THROWS_AS(FusionFrameSpec(axes, {1.0}), DimensionError);
    CHECK_THROWS_AS(FusionFrameSpec(axes, {1.0, -1.0}), InvalidArgument);
    CHECK_THROWS_AS(fusion_frame_operator_apply(ortho, VectorXd::Zero(3)), DimensionError);
}

TEST_CASE("property: frame energy bounds, dual operator and round trip on random frames") {
    for (std::uint64_t t = 0; t < 20; ++t) {
        const int d = 2 + static_cast<int>(t % 7);
        const int n = d + static_cast<int>(t % 5);
        const FrameSpec frame(random_matrix(d, n, 100 + t));
        const Bounds b = frame_bounds(frame);
        REQUIRE(b.is_frame);
        for (std::uint64_t k = 0; k < 100; ++k) {
            const VectorXd f = random_vector(d, 1000 * t + k);
            const double energy = analysis(frame, f).squaredNorm();
            CHECK(energy >= b.lower * f.squaredNorm() * (1 - 1e-12));
            CHECK(energy <= b.upper * f.squaredNorm() * (1 + 1e-12));
        }
        const MatrixXd s = frame_operator(frame);
        const MatrixXd sd = frame_operator(dual_frame(frame));
        CHECK((sd * s - MatrixXd::Identity(d, d)).norm() < 1e-10 * std::max(1.0, s.norm() / b.lower));
        const VectorXd f = random_vector(d, 77 + t);
        CHECK((reconstruct(frame, analysis(frame, f)) - f).norm() <= 1e-10 * f.norm());
    }
}

TEST_CASE("property: projections are idempotent and fusion operators symmetric") {
    for (std::uint64_t t = 0; t < 10; ++t) {
        const int d = 6 + static_cast<int>(t);
        std::vector<SubspaceBasis> subs;
        std::vector<double> weights;
        for (int i = 0; i < 4; ++i) {
            subs.emplace_back(orthonormal_columns(d, 2 + i, 50 * t + static_cast<std::uint64_t>(i)));
            weights.push_back(0.5 + i);
        }
        const VectorXd f = random_vector(d, 3 * t + 1);
        const VectorXd g = random_vector(d, 3 * t + 2);
        const VectorXd p = project_subspace(subs[0], f);
        CHECK((project_subspace(subs[0], p) - p).norm() < 1e-12 * f.norm());
        CHECK(p.norm() <= f.norm() * (1 + 1e-14));
        const FusionFrameSpec ff(subs, weights);
        CHECK(std::abs(fusion_frame_operator_apply(ff, f).dot(g) - f.dot(fusion_frame_operator_apply(ff, g))) <
              1e-10 * f.norm() * g.norm() * 100);
    }
}

TEST_CASE("property: tight frames act as a scalar multiple of the identity") {
    // Union of two orthonormal bases with equal weight scaling is tight with A = 2.
    const MatrixXd q = orthonormal_columns(5, 5, 4);
    MatrixXd vectors(5, 10);
    vectors << MatrixXd::Identity(5, 5), q;
    const FrameSpec frame(vectors);
    const Bounds b = frame_bounds(frame);
    REQUIRE(b.tight(1e-12));
    for (std::uint64_t k = 0; k < 10; ++k) {
        const VectorXd f = random_vector(5, k);
        CHECK((frame_operator_apply(frame, f) - b.lower * f).norm() < 1e-12 * f.norm());
    }
}
