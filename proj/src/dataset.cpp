#include "fusionop/error.hpp"
#include "fusionop/io_util.hpp"
#include "fusionop/pde_data.hpp"
#include "fusionop/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <optional>
#include <string>

namespace fusionop::pde {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Equation e) {
    switch (e) {
    case Equation::darcy: return "darcy";
    case Equation::burgers: return "burgers";
    case Equation::elasticity: return "elasticity";
    }
    return "?";
}

std::string to_string(Role r) { return r == Role::source ? "source" : "target"; }

Equation parse_equation(const std::string& s) {
    if (s == "darcy") return Equation::darcy;
    if (s == "burgers") return Equation::burgers;
    if (s == "elasticity") return Equation::elasticity;
    throw InvalidArgument("unknown equation '" + s + "'");
}

Role parse_role(const std::string& s) {
    if (s == "source") return Role::source;
    if (s == "target") return Role::target;
    throw InvalidArgument("unknown role '" + s + "'");
}

void ScenarioSpec::validate() const {
    if (resolution < 4) throw InvalidArgument("resolution must be at least 4");
    if (n_samples < 1) throw InvalidArgument("n_samples must be at least 1");
    switch (equation) {
    case Equation::darcy:
        if (!(alpha > 1.0)) throw InvalidArgument("Matern alpha must exceed 1 in two dimensions");
        if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
        if (forcing != "one" && forcing != "5xy") {
            throw InvalidArgument("Darcy forcing must be 'one' or '5xy', got '" + forcing + "'");
        }
        break;
    case Equation::burgers:
        if (!(nu > 0.0)) throw InvalidArgument("viscosity must be positive");
        if (!(u0_length > 0.0)) throw InvalidArgument("initial-condition length must be positive");
        if (!(t_final > 0.0)) throw InvalidArgument("t_final must be positive");
        break;
    case Equation::elasticity:
        if (!(length > 0.0)) throw InvalidArgument("correlation length must be positive");
        if (!(youngs > 0.0)) throw InvalidArgument("Young's modulus must be positive");
        if (!(poisson > 0.0 && poisson < 0.5)) throw InvalidArgument("Poisson ratio must lie in (0, 0.5)");
        break;
    }
}

Grid ScenarioSpec::input_grid() const {
    switch (equation) {
    case Equation::darcy: return Grid::square(resolution);
    case Equation::burgers: return Grid::torus(resolution);
    case Equation::elasticity: return Grid::square(resolution, 2);
    }
    return {};
}

Grid ScenarioSpec::output_grid() const { return input_grid(); }

GridFunction darcy_forcing(const std::string& name, int resolution) {
    const Grid g = Grid::square(resolution);
    Eigen::VectorXd f(g.points());
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) {
            if (name == "one") {
                f[g.index(i, j)] = 1.0;
            } else if (name == "5xy") {
                f[g.index(i, j)] = 5.0 * g.x(i) * g.y(j);
            } else {
                throw InvalidArgument("unknown Darcy forcing '" + name + "'");
            }
        }
    }
    return {g, std::move(f)};
}

PairedDataset make_dataset(const ScenarioSpec& spec) {
    spec.validate();
    const Grid in_grid = spec.input_grid();
    const Grid out_grid = spec.output_grid();
    PairedDataset ds{spec, Eigen::MatrixXd(in_grid.size(), spec.n_samples),
                     Eigen::MatrixXd(out_grid.size(), spec.n_samples)};

    std::optional<MaternSampler> matern;
    std::optional<SqExpSampler> sqexp;
    std::optional<ElasticitySolver> elastic;
    GridFunction forcing;
    switch (spec.equation) {
    case Equation::darcy:
        matern.emplace(spec.resolution, spec.alpha, spec.tau);
        forcing = darcy_forcing(spec.forcing, spec.resolution);
        break;
    case Equation::burgers:
        sqexp.emplace(in_grid, spec.u0_length);
        break;
    case Equation::elasticity:
        sqexp.emplace(Grid::square(spec.resolution), spec.length);
        elastic.emplace(spec.resolution, spec.youngs, spec.poisson);
        break;
    }

    for (int i = 0; i < spec.n_samples; ++i) {
        const std::uint64_t s = spec.seed ^ static_cast<std::uint64_t>(i);
        try {
            switch (spec.equation) {
            case Equation::darcy: {
                GridFunction a = matern->sample(s);
                a.values = a.values.array().exp().matrix();
                ds.inputs.col(i) = a.values;
                ds.outputs.col(i) = solve_darcy(a, forcing).values;
                break;
            }
            case Equation::burgers: {
                const GridFunction u0 = sqexp->sample(s);
                const int steps = burgers_steps_for(u0, spec.t_final);
                const auto snaps = solve_burgers(u0, spec.nu, spec.t_final, steps);
                ds.inputs.col(i) = u0.values;
                ds.outputs.col(i) = snaps.back().values;
                break;
            }
            case Equation::elasticity: {
                const GridFunction fx = sqexp->sample(s);
                const GridFunction fy = sqexp->sample(derive_seed(s, 1));
                const auto [u, v] = elastic->solve(fx, fy);
                const int p = fx.grid.points();
                ds.inputs.col(i).head(p) = fx.values;
                ds.inputs.col(i).tail(p) = fy.values;
                ds.outputs.col(i).head(p) = u.values;
                ds.outputs.col(i).tail(p) = v.values;
                break;
            }
            }
        } catch (const Error& e) {
            throw NumericalError("sample " + std::to_string(i) + ": " + e.what());
        }
    }
    return ds;
}

PairedDataset slice(const PairedDataset& ds, int first, int count) {
    if (first < 0 || count < 0 || first + count > ds.size()) {
        throw InvalidArgument("slice [" + std::to_string(first) + ", " +
                              std::to_string(first + count) + ") exceeds dataset of size " +
                              std::to_string(ds.size()));
    }
    PairedDataset out{ds.spec, ds.inputs.middleCols(first, count), ds.outputs.middleCols(first, count)};
    out.spec.n_samples = count;
    return out;
}

PairedDataset subset(const PairedDataset& ds, std::span<const int> indices) {
    PairedDataset out{ds.spec, Eigen::MatrixXd(ds.inputs.rows(), static_cast<Eigen::Index>(indices.size())),
                      Eigen::MatrixXd(ds.outputs.rows(), static_cast<Eigen::Index>(indices.size()))};
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const int i = indices[k];
        if (i < 0 || i >= ds.size()) {
            throw InvalidArgument("sample index " + std::to_string(i) + " out of range [0, " +
                                  std::to_string(ds.size()) + ")");
        }
        out.inputs.col(static_cast<Eigen::Index>(k)) = ds.inputs.col(i);
        out.outputs.col(static_cast<Eigen::Index>(k)) = ds.outputs.col(i);
    }
    out.spec.n_samples = static_cast<int>(indices.size());
    return out;
}

namespace {

json spec_to_json(const ScenarioSpec& s) {
    return {{"equation", to_string(s.equation)},
            {"role", to_string(s.role)},
            {"alpha", s.alpha},
            {"tau", s.tau},
            {"forcing", s.forcing},
            {"nu", s.nu},
            {"u0_length", s.u0_length},
            {"t_final", s.t_final},
            {"length", s.length},
            {"youngs", s.youngs},
            {"poisson", s.poisson},
            {"resolution", s.resolution},
            {"n_samples", s.n_samples},
            {"seed", s.seed}};
}

ScenarioSpec spec_from_json(const json& j) {
    ScenarioSpec s;
    s.equation = parse_equation(j.at("equation").get<std::string>());
    s.role = parse_role(j.at("role").get<std::string>());
    s.alpha = j.at("alpha").get<double>();
    s.tau = j.at("tau").get<double>();
    s.forcing = j.at("forcing").get<std::string>();
    s.nu = j.at("nu").get<double>();
    s.u0_length = j.at("u0_length").get<double>();
    s.t_final = j.at("t_final").get<double>();
    s.length = j.at("length").get<double>();
    s.youngs = j.at("youngs").get<double>();
    s.poisson = j.at("poisson").get<double>();
    s.resolution = j.at("resolution").get<int>();
    s.n_samples = j.at("n_samples").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.validate();
    return s;
}

} // namespace

void save_dataset(const PairedDataset& ds, const fs::path& dir) {
    fs::create_directories(dir);
    json manifest;
    manifest["format"] = "fusionop-dataset";
    manifest["format_version"] = kDatasetVersion;
    manifest["spec"] = spec_to_json(ds.spec);
    manifest["n_samples"] = ds.size();
    manifest["resolution"] = ds.spec.resolution;
    manifest["input_width"] = ds.inputs.rows();
    manifest["output_width"] = ds.outputs.rows();
    // Blobs first so a manifest never points at missing data.
    io::write_f64(dir / "inputs.f64", ds.inputs.transpose());
    io::write_f64(dir / "outputs.f64", ds.outputs.transpose());
    io::write_text_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

PairedDataset load_dataset(const fs::path& dir) {
    json manifest;
    try {
        manifest = json::parse(io::read_text(dir / "manifest.json"));
    } catch (const json::exception& e) {
        throw FormatError("malformed dataset manifest in " + dir.string() + ": " + e.what());
    }
    if (manifest.value("format", std::string()) != "fusionop-dataset") {
        throw FormatError(dir.string() + " is not a dataset directory");
    }
    const int version = manifest.value("format_version", -1);
    if (version != kDatasetVersion) {
        throw FormatError("dataset format version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kDatasetVersion) + ")");
    }
    PairedDataset ds;
    try {
        ds.spec = spec_from_json(manifest.at("spec"));
    } catch (const json::exception& e) {
        throw FormatError("dataset manifest spec: " + std::string(e.what()));
    }
    const int n = manifest.at("n_samples").get<int>();
    if (n != ds.spec.n_samples) throw FormatError("manifest sample count disagrees with its spec");
    const int in_w = ds.spec.input_grid().size();
    const int out_w = ds.spec.output_grid().size();
    if (manifest.at("input_width").get<int>() != in_w || manifest.at("output_width").get<int>() != out_w) {
        throw FormatError("manifest widths disagree with the scenario grid");
    }
    ds.inputs = io::read_f64(dir / "inputs.f64", n, in_w).transpose();
    ds.outputs = io::read_f64(dir / "outputs.f64", n, out_w).transpose();
    return ds;
}

} // namespace fusionop::pde
