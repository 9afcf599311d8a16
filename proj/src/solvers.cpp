#include "fusionop/error.hpp"
#include "fusionop/pde_data.hpp"

#include <Eigen/SparseCholesky>
#include <fftw3.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

namespace fusionop::pde {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

double relative_residual(const SpMat& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
    const double bn = b.norm();
    const double rn = (a * x - b).norm();
    return bn > 0.0 ? rn / bn : rn;
}

} // namespace

// ---------------------------------------------------------------------------
// Darcy

GridFunction solve_darcy(const GridFunction& a, const GridFunction& f) {
    const Grid& g = a.grid;
    if (g.dim() != 2 || g.nx != g.ny || g.channels != 1) {
        throw InvalidArgument("Darcy solver expects a single-channel square grid");
    }
    if (!(f.grid == g)) throw DimensionError("permeability and forcing grids differ");
    if (a.values.minCoeff() <= 0.0) {
        throw InvalidArgument("permeability must be strictly positive everywhere");
    }

    const int n = g.nx;
    const int m = n - 2; // interior nodes per axis
    const double h2 = g.spacing() * g.spacing();
    auto unknown = [m](int i, int j) { return (i - 1) * m + (j - 1); };
    auto face = [&](int i0, int j0, int i1, int j1) {
        const double a0 = a.at(i0, j0);
        const double a1 = a.at(i1, j1);
        return 2.0 * a0 * a1 / (a0 + a1);
    };

    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(5 * m * m));
    Eigen::VectorXd rhs(m * m);
    for (int i = 1; i <= m; ++i) {
        for (int j = 1; j <= m; ++j) {
            const int row = unknown(i, j);
            double diag = 0.0;
            const int nbrs[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
            for (const auto& nb : nbrs) {
                const double t = face(i, j, nb[0], nb[1]) / h2;
                diag += t;
                const bool interior = nb[0] >= 1 && nb[0] <= m && nb[1] >= 1 && nb[1] <= m;
                if (interior) entries.emplace_back(row, unknown(nb[0], nb[1]), -t);
            }
            entries.emplace_back(row, row, diag);
            rhs[row] = f.at(i, j);
        }
    }

    Eigen::VectorXd u_full = Eigen::VectorXd::Zero(g.points());
    if (rhs.norm() == 0.0) return {g, u_full};

    SpMat mat(m * m, m * m);
    mat.setFromTriplets(entries.begin(), entries.end());
    Eigen::SimplicialLLT<SpMat> solver(mat);
    if (solver.info() != Eigen::Success) throw NumericalError("Darcy system factorization failed");
    const Eigen::VectorXd u = solver.solve(rhs);
    const double res = relative_residual(mat, u, rhs);
    if (!(res <= 1e-10)) {
        throw NumericalError("Darcy solve residual " + std::to_string(res) + " exceeds 1e-10");
    }
    for (int i = 1; i <= m; ++i) {
        for (int j = 1; j <= m; ++j) u_full[g.index(i, j)] = u[unknown(i, j)];
    }
    return {g, std::move(u_full)};
}

// ---------------------------------------------------------------------------
// Burgers

namespace {

class RealFFT {
public:
    explicit RealFFT(int n) : n_(n), modes_(n / 2 + 1) {
        real_ = fftw_alloc_real(static_cast<std::size_t>(n));
        spec_ = fftw_alloc_complex(static_cast<std::size_t>(modes_));
        forward_ = fftw_plan_dft_r2c_1d(n, real_, spec_, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_c2r_1d(n, spec_, real_, FFTW_ESTIMATE);
    }
    ~RealFFT() {
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        fftw_free(real_);
        fftw_free(spec_);
    }
    RealFFT(const RealFFT&) = delete;
    RealFFT& operator=(const RealFFT&) = delete;

    Eigen::VectorXcd forward(const Eigen::VectorXd& x) {
        for (int i = 0; i < n_; ++i) real_[i] = x[i];
        fftw_execute(forward_);
        Eigen::VectorXcd out(modes_);
        for (int k = 0; k < modes_; ++k) out[k] = {spec_[k][0], spec_[k][1]};
        return out;
    }

    // Normalized inverse.
    Eigen::VectorXd backward(const Eigen::VectorXcd& s) {
        for (int k = 0; k < modes_; ++k) {
            spec_[k][0] = s[k].real();
            spec_[k][1] = s[k].imag();
        }
        fftw_execute(backward_);
        Eigen::VectorXd out(n_);
        for (int i = 0; i < n_; ++i) out[i] = real_[i] / n_;
        return out;
    }

private:
    int n_;
    int modes_;
    double* real_;
    fftw_complex* spec_;
    fftw_plan forward_;
    fftw_plan backward_;
};

} // namespace

int burgers_steps_for(const GridFunction& u0, double t_final) {
    const double umax = u0.values.cwiseAbs().maxCoeff();
    const double dx = u0.grid.spacing();
    if (umax == 0.0) return 100;
    return std::max(100, static_cast<int>(std::ceil(t_final * umax / (0.25 * dx) * 2.0)));
}

std::vector<GridFunction> solve_burgers(const GridFunction& u0, double nu, double t_final,
                                        int n_steps, std::span<const double> output_times) {
    const Grid& g = u0.grid;
    if (!g.periodic || g.dim() != 1) throw InvalidArgument("Burgers solver needs a periodic 1-D grid");
    if (!(nu > 0.0)) throw InvalidArgument("viscosity must be positive");
    if (!(t_final > 0.0) || n_steps < 1) throw InvalidArgument("need t_final > 0 and n_steps >= 1");

    const int n = g.nx;
    const double dt = t_final / n_steps;
    const double dx = g.spacing();
    const double two_pi = 2.0 * std::numbers::pi;

    std::vector<int> record_steps;
    if (output_times.empty()) {
        record_steps.push_back(n_steps);
    } else {
        for (double t : output_times) {
            if (t < 0.0 || t > t_final * (1.0 + 1e-12)) {
                throw InvalidArgument("output time " + std::to_string(t) + " outside [0, t_final]");
            }
            record_steps.push_back(static_cast<int>(std::lround(t / dt)));
        }
    }

    const int modes = n / 2 + 1;
    Eigen::VectorXcd ik(modes);
    Eigen::VectorXd half_decay(modes);
    Eigen::VectorXd dealias(modes);
    for (int k = 0; k < modes; ++k) {
        const double wave = two_pi * k;
        ik[k] = {0.0, (k == n / 2 && n % 2 == 0) ? 0.0 : wave};
        half_decay[k] = std::exp(-nu * wave * wave * dt / 2.0);
        dealias[k] = 3 * k < n ? 1.0 : 0.0;
    }

    RealFFT fft(n);
    auto nonlinear = [&](const Eigen::VectorXcd& s) {
        const Eigen::VectorXd u = fft.backward(s);
        const Eigen::VectorXcd flux = fft.forward((0.5 * u.array().square()).matrix());
        return Eigen::VectorXcd((-(ik.array() * flux.array()) * dealias.array()).matrix());
    };

    auto check_cfl = [&](const Eigen::VectorXd& u, int step) {
        const double umax = u.cwiseAbs().maxCoeff();
        if (umax * dt > 0.25 * dx) {
            throw NumericalError("Burgers CFL limit violated at step " + std::to_string(step) +
                                 " (dt=" + std::to_string(dt) + ", max|u|=" + std::to_string(umax) +
                                 "); increase n_steps to at least " +
                                 std::to_string(static_cast<int>(std::ceil(t_final * umax / (0.25 * dx)))));
        }
    };

    std::vector<GridFunction> out(record_steps.size());
    auto record = [&](int step, const Eigen::VectorXd& u) {
        for (std::size_t r = 0; r < record_steps.size(); ++r) {
            if (record_steps[r] == step) out[r] = GridFunction(g, u);
        }
    };

    check_cfl(u0.values, 0);
    record(0, u0.values);
    Eigen::VectorXcd v = fft.forward(u0.values);
    const Eigen::ArrayXcd e = half_decay.cast<std::complex<double>>().array();
    const Eigen::ArrayXcd e2 = e * e;
    for (int step = 1; step <= n_steps; ++step) {
        const Eigen::ArrayXcd a = dt * nonlinear(v).array();
        const Eigen::ArrayXcd b = dt * nonlinear((e * (v.array() + a / 2.0)).matrix()).array();
        const Eigen::ArrayXcd c = dt * nonlinear((e * v.array() + b / 2.0).matrix()).array();
        const Eigen::ArrayXcd d = dt * nonlinear((e2 * v.array() + e * c).matrix()).array();
        v = (e2 * v.array() + (e2 * a + 2.0 * e * (b + c) + d) / 6.0).matrix();

        const bool wanted = std::find(record_steps.begin(), record_steps.end(), step) != record_steps.end();
        if (wanted || step % 16 == 0) {
            const Eigen::VectorXd u = fft.backward(v);
            if (!u.allFinite()) throw NumericalError("Burgers solution became non-finite");
            check_cfl(u, step);
            if (wanted) record(step, u);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Elasticity

ElasticitySolver::ElasticitySolver(int resolution, double youngs, double poisson)
    : grid_(Grid::square(resolution)), youngs_(youngs), poisson_(poisson) {
    grid_.validate();
    if (!(youngs > 0.0)) throw InvalidArgument("Young's modulus must be positive");
    if (!(poisson > 0.0 && poisson < 0.5)) throw InvalidArgument("Poisson ratio must lie in (0, 0.5)");

    const int n = resolution;
    const int m = n - 2;
    const double h2 = grid_.spacing() * grid_.spacing();
    const double c = youngs / (1.0 - poisson * poisson);
    const double shear = c * (1.0 - poisson) / 2.0; // coefficient of the off-axis second derivative
    const double mixed = c * (1.0 + poisson) / 2.0; // coefficient of the cross derivative
    auto unknown = [m](int i, int j, int comp) { return 2 * ((i - 1) * m + (j - 1)) + comp; };
    auto interior = [m](int i, int j) { return i >= 1 && i <= m && j >= 1 && j <= m; };

    // Rows hold -(div sigma) so the assembled matrix is symmetric positive definite.
    std::vector<Triplet> entries;
    for (int i = 1; i <= m; ++i) {
        for (int j = 1; j <= m; ++j) {
            for (int comp = 0; comp < 2; ++comp) {
                const int row = unknown(i, j, comp);
                // u-row: c u_xx + shear u_yy ; v-row: shear v_xx + c v_yy
                const double cx = comp == 0 ? c : shear;
                const double cy = comp == 0 ? shear : c;
                entries.emplace_back(row, row, 2.0 * (cx + cy) / h2);
                const int axis[4][3] = {{i - 1, j, 0}, {i + 1, j, 0}, {i, j - 1, 1}, {i, j + 1, 1}};
                for (const auto& nb : axis) {
                    if (!interior(nb[0], nb[1])) continue;
                    const double coef = nb[2] == 0 ? cx : cy;
                    entries.emplace_back(row, unknown(nb[0], nb[1], comp), -coef / h2);
                }
                // mixed * d2(other)/dxdy with the four-point cross stencil
                const int other = 1 - comp;
                const int diag[4][3] = {{i + 1, j + 1, 1}, {i - 1, j - 1, 1}, {i + 1, j - 1, -1}, {i - 1, j + 1, -1}};
                for (const auto& nb : diag) {
                    if (!interior(nb[0], nb[1])) continue;
                    entries.emplace_back(row, unknown(nb[0], nb[1], other), -mixed * nb[2] / (4.0 * h2));
                }
            }
        }
    }
    matrix_.resize(2 * m * m, 2 * m * m);
    matrix_.setFromTriplets(entries.begin(), entries.end());
    lu_ = std::make_shared<Eigen::SparseLU<SpMat>>();
    lu_->analyzePattern(matrix_);
    lu_->factorize(matrix_);
    if (lu_->info() != Eigen::Success) {
        throw NumericalError("elasticity system is singular: " + lu_->lastErrorMessage());
    }
}

std::pair<GridFunction, GridFunction> ElasticitySolver::solve(const GridFunction& fx,
                                                              const GridFunction& fy) const {
    if (!(fx.grid == grid_) || !(fy.grid == grid_)) {
        throw DimensionError("body force grids do not match the elasticity solver grid");
    }
    const int m = grid_.nx - 2;
    Eigen::VectorXd rhs(2 * m * m);
    for (int i = 1; i <= m; ++i) {
        for (int j = 1; j <= m; ++j) {
            const int k = (i - 1) * m + (j - 1);
            rhs[2 * k] = fx.at(i, j);
            rhs[2 * k + 1] = fy.at(i, j);
        }
    }
    Eigen::VectorXd u = Eigen::VectorXd::Zero(rhs.size());
    if (rhs.norm() > 0.0) {
        u = lu_->solve(rhs);
        const double res = relative_residual(matrix_, u, rhs);
        if (!(res <= 1e-10)) {
            throw NumericalError("elasticity residual " + std::to_string(res) + " exceeds 1e-10");
        }
    }
    Eigen::VectorXd ux = Eigen::VectorXd::Zero(grid_.points());
    Eigen::VectorXd uy = Eigen::VectorXd::Zero(grid_.points());
    for (int i = 1; i <= m; ++i) {
        for (int j = 1; j <= m; ++j) {
            const int k = (i - 1) * m + (j - 1);
            ux[grid_.index(i, j)] = u[2 * k];
            uy[grid_.index(i, j)] = u[2 * k + 1];
        }
    }
    return {GridFunction(grid_, std::move(ux)), GridFunction(grid_, std::move(uy))};
}

std::pair<GridFunction, GridFunction> solve_elasticity(const GridFunction& fx,
                                                       const GridFunction& fy, double youngs,
                                                       double poisson) {
    if (fx.grid.dim() != 2 || fx.grid.nx != fx.grid.ny) {
        throw InvalidArgument("elasticity solver expects a square grid");
    }
    return ElasticitySolver(fx.grid.nx, youngs, poisson).solve(fx, fy);
}

} // namespace fusionop::pde
