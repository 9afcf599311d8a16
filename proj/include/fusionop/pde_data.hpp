#pragma once

// Synthetic operator-learning data: Gaussian random fields, Darcy / Burgers /
// plane-stress elasticity solvers, and paired source/target datasets.

#include "fusionop/grid.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fusionop::pde {

// ---------------------------------------------------------------------------
// Gaussian random fields

/// Karhunen-Loeve sampler for the covariance (-Laplace + tau^2)^(-alpha) on the
/// unit square with Neumann cosine eigenfunctions, truncated at the grid's
/// Nyquist index (k1, k2 < resolution). Zero mean.
class MaternSampler {
public:
    MaternSampler(int resolution, double alpha, double tau);

    GridFunction sample(std::uint64_t seed) const;
    const Grid& grid() const noexcept { return grid_; }

private:
    Grid grid_;
    Eigen::MatrixXd cosines_; // node i, wavenumber k: c_k cos(pi k x_i)
    Eigen::MatrixXd sqrt_eig_;
};

GridFunction sample_grf_matern(int resolution, double alpha, double tau, std::uint64_t seed);

/// Dense-covariance sampler for exp(-||x - x'||^2 / (2 l^2)): symmetric
/// (Cholesky) factorization with diagonal jitter 1e-10, escalated tenfold up to
/// 1e-6 before giving up. On the periodic 1-D grid the kernel is periodized.
class SqExpSampler {
public:
    SqExpSampler(const Grid& grid, double length);

    Eigen::VectorXd sample_values(std::uint64_t seed) const;
    GridFunction sample(std::uint64_t seed) const { return {grid_, sample_values(seed)}; }
    double jitter() const noexcept { return jitter_; }
    const Grid& grid() const noexcept { return grid_; }

private:
    Grid grid_;
    Eigen::MatrixXd factor_;
    double jitter_ = 0.0;
};

GridFunction sample_grf_sqexp(int resolution, double length, std::uint64_t seed);

/// Covariance entry between two points under the (periodized) squared exponential.
double sqexp_kernel(std::span<const double> a, std::span<const double> b, double length,
                    bool periodic);

// ---------------------------------------------------------------------------
// Solvers

/// -div(a grad u) = f on the unit square, u = 0 on the boundary. Five-point
/// finite volumes with harmonic face averages of a, sparse Cholesky solve.
GridFunction solve_darcy(const GridFunction& a, const GridFunction& f);

/// Viscous Burgers u_t + (u^2/2)_x = nu u_xx on the unit torus. Pseudo-spectral
/// in space (2/3-rule dealiased flux), fourth-order Runge-Kutta with an
/// integrating factor for diffusion. Returns snapshots at `output_times`
/// (rounded to the nearest step; default: t_final only).
std::vector<GridFunction> solve_burgers(const GridFunction& u0, double nu, double t_final,
                                        int n_steps, std::span<const double> output_times = {});

/// Step count giving dt <= 0.125 dx / max|u0| (at least 100); the factor-2 margin
/// absorbs overshoot of under-resolved low-viscosity solutions.
int burgers_steps_for(const GridFunction& u0, double t_final);

/// Plane-stress Navier equations, displacement form, clamped boundary,
/// second-order central differences. The sparse LU factorization depends only
/// on (resolution, E, poisson) and is reused across right-hand sides.
class ElasticitySolver {
public:
    ElasticitySolver(int resolution, double youngs, double poisson);

    /// Displacements (u, v) for the body force (fx, fy).
    std::pair<GridFunction, GridFunction> solve(const GridFunction& fx, const GridFunction& fy) const;
    const Grid& grid() const noexcept { return grid_; }

private:
    Grid grid_;
    double youngs_;
    double poisson_;
    Eigen::SparseMatrix<double> matrix_;
    std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

std::pair<GridFunction, GridFunction> solve_elasticity(const GridFunction& fx,
                                                       const GridFunction& fy, double youngs,
                                                       double poisson);

// ---------------------------------------------------------------------------
// Datasets

enum class Equation { darcy, burgers, elasticity };
enum class Role { source, target };

std::string to_string(Equation e);
std::string to_string(Role r);
Equation parse_equation(const std::string& s);
Role parse_role(const std::string& s);

struct ScenarioSpec {
    Equation equation = Equation::darcy;
    Role role = Role::source;
    // Darcy: permeability a = exp(g), g ~ GRF(alpha, tau); forcing "one" or "5xy".
    double alpha = 2.2;
    double tau = 2.2;
    std::string forcing = "one";
    // Burgers: viscosity, initial-condition correlation length, final time.
    double nu = 0.001;
    double u0_length = 0.1;
    double t_final = 1.0;
    // Elasticity: load correlation length and material.
    double length = 0.04;
    double youngs = 1.0;
    double poisson = 0.3;

    int resolution = 32;
    int n_samples = 1;
    std::uint64_t seed = 0;

    void validate() const;
    Grid input_grid() const;
    Grid output_grid() const;
};

struct PairedDataset {
    ScenarioSpec spec;
    Eigen::MatrixXd inputs;  // input_grid().size() x N
    Eigen::MatrixXd outputs; // output_grid().size() x N

    int size() const noexcept { return static_cast<int>(inputs.cols()); }
    Grid input_grid() const { return spec.input_grid(); }
    Grid output_grid() const { return spec.output_grid(); }
};

/// Forcing used by the Darcy scenarios ("one" -> 1, "5xy" -> 5 x y at nodes).
GridFunction darcy_forcing(const std::string& name, int resolution);

/// Generates spec.n_samples pairs; sample i draws from seed spec.seed ^ i.
PairedDataset make_dataset(const ScenarioSpec& spec);

/// Columns [first, first + count).
PairedDataset slice(const PairedDataset& ds, int first, int count);
PairedDataset subset(const PairedDataset& ds, std::span<const int> indices);

inline constexpr int kDatasetVersion = 1;

/// Directory with manifest.json plus inputs.f64 / outputs.f64 (little-endian,
/// row-major, one sample per row).
void save_dataset(const PairedDataset& ds, const std::filesystem::path& dir);
PairedDataset load_dataset(const std::filesystem::path& dir);

} // namespace fusionop::pde
