#include "ftme/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include "ftme/entropy.hpp"
#include "ftme/errors.hpp"
#include "ftme/parallel.hpp"
#include "ftme/rng.hpp"
#include "ftme/spectra.hpp"

#ifndef FTME_VERSION
#define FTME_VERSION "0.0.0"
#endif

namespace ftme::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string> kFieldKinds = {"ftme-weighted", "ftle-forward", "ftle-backward", "stretching-rate"};

void require_positive(double v, const char* name)
{
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError(std::string(name) + " must be positive");
    }
}

int steps_from(const RunConfig& cfg)
{
    return steps_for(cfg.T, cfg.steps_per_unit);
}

Grid2D grid_from(const RunConfig& cfg)
{
    try {
        return Grid2D::parse(cfg.grid);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

VectorField planar_field(const RunConfig& cfg)
{
    const BuiltinSystem sys = system_from_config(cfg);
    VectorField f;
    try {
        f = make_field(sys);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (f.dimension != 2) {
        throw ConfigError("field computations need a planar system");
    }
    return f;
}

ScalarField2D compute_field(const VectorField& f, const std::string& kind, const Grid2D& grid, double T, int steps,
                            AlphaPolicy policy)
{
    if (kind == "ftme-weighted") {
        return weighted_ftme_field(f, grid, T, steps, policy);
    }
    if (kind == "ftle-forward") {
        return ftle_field(f, grid, T, steps, FtleDirection::forward);
    }
    if (kind == "ftle-backward") {
        return ftle_field(f, grid, T, steps, FtleDirection::backward);
    }
    return stretching_rate_field(f, grid, T, steps);
}

json field_summary(const ScalarField2D& field, const std::string& system)
{
    json s;
    s["kind"] = field.meta.kind;
    s["system"] = system;
    s["T"] = field.meta.T;
    s["grid"] = field.grid.to_spec();
    s["valid"] = field.valid_count();
    s["total"] = field.grid.size();
    if (const auto range = field.valid_range()) {
        s["min"] = range->first;
        s["max"] = range->second;
    } else {
        s["min"] = nullptr;
        s["max"] = nullptr;
    }
    return s;
}

void validate_field_config(const RunConfig& cfg)
{
    require_positive(cfg.T, "T");
    require_positive(cfg.steps_per_unit, "steps-per-unit");
    if (std::find(kFieldKinds.begin(), kFieldKinds.end(), cfg.kind) == kFieldKinds.end()) {
        throw ConfigError("unknown field kind '" + cfg.kind + "'");
    }
    grid_from(cfg);
    planar_field(cfg);
    alpha_policy_from_config(cfg);
}

// ---- verification sweeps --------------------------------------------------------

struct Check {
    json line;
    bool pass = false;
};

double uniform_in(CounterRng& rng, double lo, double hi)
{
    return lo + (hi - lo) * rng.uniform();
}

struct Draw {
    double l1, l2, alpha, T;
};

Draw random_draw(std::uint64_t seed, std::uint64_t index)
{
    CounterRng rng(seed, index);
    double a = uniform_in(rng, -2.0, 2.0);
    double b = uniform_in(rng, -2.0, 2.0);
    if (a < b) {
        std::swap(a, b);
    }
    return Draw{a, b, uniform_in(rng, -1.0, 1.0), uniform_in(rng, 0.5, 4.0)};
}

Check check_pesin(int draws, std::uint64_t seed)
{
    int passed = 0;
    double worst_excess = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < draws; ++k) {
        const Draw d = random_draw(seed, static_cast<std::uint64_t>(k));
        const EntropyResult h = ftme_2d_exact(d.l1, d.l2, d.alpha, d.T);
        const PesinGap g = pesin_gap({d.l1, d.l2}, d.alpha, h, 2, d.T);
        passed += g.ok ? 1 : 0;
        worst_excess = std::max({worst_excess, -g.gap, g.gap - g.bound});
    }
    Check c;
    c.pass = passed == draws;
    c.line = {{"check", "pesin"}, {"draws", draws}, {"passed", passed}, {"seed", seed},
              {"worst_excess", worst_excess}, {"pass", c.pass}};
    return c;
}

Check check_mc(double kappa1, double kappa2, double T, std::uint64_t samples, std::uint64_t seed)
{
    const double l1 = std::log(kappa1) / T;
    const double l2 = std::log(kappa2) / T;
    const EntropyResult exact = ftme_2d_exact(l1, l2, 0.0, T);
    const TimeSet J = TimeSet::two_point(0.0, T);
    MonteCarloOptions opts;
    opts.samples = samples;
    opts.seed = seed;
    const EntropyResult mc =
        ftme_monte_carlo({{0.0, Mat::Identity(2, 2)}, {T, mat2(kappa1, 0.0, 0.0, kappa2)}}, 0.0, J, opts);
    Check c;
    c.pass = !mc.empty_intersection && std::abs(mc.h - exact.h) <= 3.0 * mc.std_error;
    c.line = {{"check", "mc"},      {"kappa1", kappa1},        {"kappa2", kappa2},  {"T", T},
              {"h_exact", exact.h}, {"h_mc", mc.h},            {"sigma", mc.std_error},
              {"samples", samples}, {"seed", seed},            {"pass", c.pass}};
    return c;
}

Check check_exact_vs_mc(int draws, std::uint64_t samples, std::uint64_t seed)
{
    int within = 0;
    for (int k = 0; k < draws; ++k) {
        const Draw d = random_draw(seed, static_cast<std::uint64_t>(k));
        const double exact = ftme_2d_exact(d.l1, d.l2, d.alpha, d.T).h;
        const TimeSet J = TimeSet::two_point(0.0, d.T);
        MonteCarloOptions opts;
        opts.samples = samples;
        opts.seed = seed + 1000003ULL * static_cast<std::uint64_t>(k + 1);
        const Mat Phi = mat2(std::exp(d.l1 * d.T), 0.0, 0.0, std::exp(d.l2 * d.T));
        const EntropyResult mc = ftme_monte_carlo({{0.0, Mat::Identity(2, 2)}, {d.T, Phi}}, d.alpha, J, opts);
        if (!mc.empty_intersection && std::abs(mc.h - exact) <= 4.0 * mc.std_error + 1e-12) {
            ++within;
        }
    }
    Check c;
    const double fraction = draws > 0 ? static_cast<double>(within) / draws : 1.0;
    c.pass = fraction >= 0.95;
    c.line = {{"check", "exact-mc"}, {"draws", draws},   {"within_4sigma", within},
              {"fraction", fraction}, {"samples", samples}, {"seed", seed}, {"pass", c.pass}};
    return c;
}

Mat random_spd(std::uint64_t seed, std::uint64_t index)
{
    CounterRng rng(seed, index);
    const double theta = uniform_in(rng, 0.0, std::numbers::pi);
    const double e1 = std::exp(uniform_in(rng, -1.0, 1.0));
    const double e2 = std::exp(uniform_in(rng, -1.0, 1.0));
    const Mat Q = mat2(std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta));
    Mat G = Q * mat2(e1, 0.0, 0.0, e2) * Q.transpose();
    return 0.5 * (G + G.transpose());
}

Check check_gamma(int draws, std::uint64_t samples, std::uint64_t seed)
{
    const TimeSet J = TimeSet::two_point(0.0, 1.0);
    const std::vector<TimedMatrix> mats = {{0.0, Mat::Identity(2, 2)}, {1.0, mat2(2.0, 0.0, 0.0, 0.5)}};
    MonteCarloOptions base;
    base.samples = samples;
    base.seed = seed;
    const EntropyResult h = ftme_monte_carlo(mats, 0.0, J, base);
    int passed = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < draws; ++k) {
        MonteCarloOptions opts = base;
        opts.gamma = random_spd(seed, static_cast<std::uint64_t>(k));
        const EntropyResult hg = ftme_monte_carlo(mats, 0.0, J, opts);
        const double bound = gamma_norm_deviation(*opts.gamma, 2, J.length());
        const double margin = bound + 4.0 * (h.std_error + hg.std_error) - std::abs(hg.h - h.h);
        worst_margin = std::min(worst_margin, margin);
        passed += (!hg.empty_intersection && margin >= 0.0) ? 1 : 0;
    }
    Check c;
    c.pass = passed == draws;
    c.line = {{"check", "gamma"}, {"draws", draws}, {"passed", passed}, {"samples", samples},
              {"worst_margin", worst_margin}, {"seed", seed}, {"pass", c.pass}};
    return c;
}

Check check_cones(const RunConfig& cfg, const std::string& system_name)
{
    RunConfig local = cfg;
    local.system = system_name;
    const BuiltinSystem sys = system_from_config(local);
    const VectorField f = make_field(sys);
    const ConeSetup setup = make_cone_setup(sys, cfg.eps, cfg.T, cfg.delta, 12, 200, cfg.seed, cfg.steps_per_unit);
    const std::vector<ConeReport> reports = cone_check(f, setup.params, setup.points);
    int passed = 0;
    int judged = 0;
    double max_h = 0.0;
    double max_h_unstable = 0.0;
    double min_h_stable = std::numeric_limits<double>::infinity();
    for (const ConeReport& r : reports) {
        if (!r.in_ball) {
            continue;
        }
        ++judged;
        passed += r.ok() ? 1 : 0;
        max_h = std::max(max_h, r.H);
        if (r.tag == ManifoldTag::unstable) {
            max_h_unstable = std::max(max_h_unstable, r.H);
        }
        if (r.tag == ManifoldTag::stable) {
            min_h_stable = std::min(min_h_stable, r.H);
        }
    }
    Check c;
    c.pass = judged > 0 && passed == judged;
    c.line = {{"check", "cones"},        {"system", system_name},   {"eps", cfg.eps},
              {"T", cfg.T},              {"delta", cfg.delta},      {"points", judged},
              {"passed", passed},        {"max_H", max_h},          {"max_H_unstable", max_h_unstable},
              {"min_H_stable", min_h_stable}, {"pass", c.pass}};
    return c;
}

}  // namespace

std::string version()
{
    return FTME_VERSION;
}

BuiltinSystem system_from_config(const RunConfig& cfg)
{
    if (cfg.system == "linear-saddle") {
        return LinearSaddle{};
    }
    if (cfg.system == "parabola") {
        if (!(cfg.gamma > 0.0)) {
            throw ConfigError("gamma must be positive");
        }
        return Parabola{cfg.beta, cfg.gamma};
    }
    if (cfg.system == "linear") {
        if (cfg.matrix.size() != 4) {
            throw ConfigError("--matrix needs four entries a,b,c,d (row-major 2x2)");
        }
        return LinearGeneral{mat2(cfg.matrix[0], cfg.matrix[1], cfg.matrix[2], cfg.matrix[3])};
    }
    throw ConfigError("unknown system '" + cfg.system + "' (linear-saddle, parabola, linear)");
}

AlphaPolicy alpha_policy_from_config(const RunConfig& cfg)
{
    if (cfg.alpha == "stretching") {
        return AlphaPolicy::stretching();
    }
    if (cfg.alpha == "lambda2") {
        return AlphaPolicy::lambda2();
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(cfg.alpha, &used);
        if (used == cfg.alpha.size() && std::isfinite(v)) {
            return AlphaPolicy::fixed(v);
        }
    } catch (const std::logic_error&) {
    }
    throw ConfigError("alpha policy must be 'stretching', 'lambda2' or a number");
}

int cmd_field(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    try {
        validate_field_config(cfg);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    const VectorField f = planar_field(cfg);
    const Grid2D grid = grid_from(cfg);
    ScalarField2D field = compute_field(f, cfg.kind, grid, cfg.T, steps_from(cfg), alpha_policy_from_config(cfg));
    field.meta.seed = cfg.seed;

    out << field_summary(field, cfg.system).dump() << "\n";
    if (field.valid_count() == 0) {
        err << "error: every node is masked\n";
        return kExitNumerical;
    }
    try {
        if (!cfg.csv_path.empty()) {
            export_csv(field, cfg.csv_path);
        }
        if (!cfg.pgm_path.empty()) {
            export_pgm(field, cfg.pgm_path);
        }
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    static const std::vector<std::string> checks = {"all", "pesin", "mc", "exact-mc", "gamma", "cones"};
    try {
        if (std::find(checks.begin(), checks.end(), cfg.check) == checks.end()) {
            throw ConfigError("unknown check '" + cfg.check + "'");
        }
        require_positive(cfg.T, "T");
        require_positive(cfg.steps_per_unit, "steps-per-unit");
        require_positive(cfg.eps, "eps");
        require_positive(cfg.delta, "delta");
        require_positive(cfg.kappa1, "kappa1");
        require_positive(cfg.kappa2, "kappa2");
        if (cfg.kappa1 < cfg.kappa2) {
            throw ConfigError("kappa1 must be >= kappa2");
        }
        if (cfg.draws < 0) {
            throw ConfigError("draws must be non-negative");
        }
        if (cfg.check == "cones" || cfg.check == "all") {
            if (cfg.check == "cones") {
                system_from_config(cfg);
            }
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    const bool all = cfg.check == "all";
    std::vector<Check> results;
    try {
        if (all || cfg.check == "pesin") {
            results.push_back(check_pesin(cfg.draws > 0 ? cfg.draws : 200, cfg.seed));
        }
        if (all || cfg.check == "mc") {
            const double T = cfg.check == "mc" ? cfg.T : 1.0;
            results.push_back(
                check_mc(cfg.kappa1, cfg.kappa2, T, cfg.samples > 0 ? cfg.samples : 10'000'000, cfg.seed));
        }
        if (all || cfg.check == "exact-mc") {
            results.push_back(
                check_exact_vs_mc(cfg.draws > 0 ? cfg.draws : 200, cfg.samples > 0 ? cfg.samples : 1'000'000, cfg.seed));
        }
        if (all || cfg.check == "gamma") {
            results.push_back(check_gamma(cfg.draws > 0 ? cfg.draws : 20, cfg.samples > 0 ? cfg.samples : 1'000'000,
                                          cfg.seed));
        }
        if (cfg.check == "cones") {
            results.push_back(check_cones(cfg, cfg.system));
        } else if (all) {
            RunConfig cone_cfg = cfg;
            cone_cfg.T = 8.0;
            results.push_back(check_cones(cone_cfg, "linear-saddle"));
            results.push_back(check_cones(cone_cfg, "parabola"));
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    }

    bool ok = true;
    for (const Check& c : results) {
        out << c.line.dump() << "\n";
        ok = ok && c.pass;
    }
    return ok ? kExitOk : kExitCheckFailed;
}

int cmd_figures(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    Grid2D grid;
    try {
        require_positive(cfg.T, "T");
        require_positive(cfg.steps_per_unit, "steps-per-unit");
        grid = grid_from(cfg);
        if (cfg.out_dir.empty()) {
            throw ConfigError("output directory must not be empty");
        }
        std::error_code ec;
        fs::create_directories(cfg.out_dir, ec);
        if (ec || !fs::is_directory(cfg.out_dir)) {
            throw ConfigError("cannot create output directory '" + cfg.out_dir + "'");
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    const int steps = steps_from(cfg);
    const std::vector<std::pair<std::string, BuiltinSystem>> systems = {
        {"linear-saddle", LinearSaddle{}},
        {"parabola", Parabola{1.0, 1.0}},
    };
    const std::vector<std::string> kinds = {"ftme-weighted", "ftle-forward", "ftle-backward"};

    json manifest;
    manifest["version"] = version();
    manifest["T"] = cfg.T;
    manifest["grid"] = grid.to_spec();
    manifest["steps_per_unit"] = cfg.steps_per_unit;
    manifest["steps"] = steps;
    manifest["seed"] = cfg.seed;
    manifest["alpha_policy"] = "stretching";
    manifest["files"] = json::array();

    for (const auto& [name, sys] : systems) {
        const VectorField f = make_field(sys);
        for (const std::string& kind : kinds) {
            ScalarField2D field = compute_field(f, kind, grid, cfg.T, steps, AlphaPolicy::stretching());
            field.meta.seed = cfg.seed;
            if (field.valid_count() == 0) {
                err << "error: every node of " << name << "/" << kind << " is masked\n";
                return kExitNumerical;
            }
            const std::string stem = name + "_" + kind;
            const fs::path csv = fs::path(cfg.out_dir) / (stem + ".csv");
            const fs::path pgm = fs::path(cfg.out_dir) / (stem + ".pgm");
            try {
                export_csv(field, csv);
                export_pgm(field, pgm);
            } catch (const IoError& e) {
                err << "error: " << e.what() << "\n";
                return kExitConfig;
            }
            json entry = field_summary(field, name);
            entry["csv"] = csv.filename().string();
            entry["pgm"] = pgm.filename().string();
            manifest["files"].push_back(entry);
            out << entry.dump() << "\n";
        }
    }

    std::ofstream mf(fs::path(cfg.out_dir) / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!mf) {
        err << "error: cannot write manifest\n";
        return kExitConfig;
    }
    mf << manifest.dump(2) << "\n";
    return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    RunConfig cfg;
    std::string threads;
    CLI::App app{"Finite-time metric entropy and FTLE fields for planar flows"};
    app.set_version_flag("--version", version());
    app.require_subcommand(1);

    auto add_system = [&](CLI::App* sub) {
        sub->add_option("--system", cfg.system, "linear-saddle | parabola | linear")->capture_default_str();
        sub->add_option("--beta", cfg.beta, "parabola beta")->capture_default_str();
        sub->add_option("--gamma", cfg.gamma, "parabola gamma (> 0)")->capture_default_str();
        sub->add_option("--matrix", cfg.matrix, "2x2 matrix a,b,c,d for --system linear")->delimiter(',');
    };
    auto add_numerics = [&](CLI::App* sub) {
        sub->add_option("--T", cfg.T, "time horizon")->capture_default_str();
        sub->add_option("--steps-per-unit", cfg.steps_per_unit, "RK4 steps per unit time")->capture_default_str();
        sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    };

    CLI::App* field = app.add_subcommand("field", "compute one scalar field on a grid");
    add_system(field);
    add_numerics(field);
    field->add_option("--kind", cfg.kind, "ftme-weighted | ftle-forward | ftle-backward | stretching-rate")
        ->capture_default_str();
    field->add_option("--grid", cfg.grid, "xmin:xmax:ymin:ymax:NXxNY")->capture_default_str();
    field->add_option("--alpha", cfg.alpha, "stretching | lambda2 | <number>")->capture_default_str();
    field->add_option("--csv", cfg.csv_path, "CSV output path");
    field->add_option("--pgm", cfg.pgm_path, "PGM output path");

    CLI::App* verify = app.add_subcommand("verify", "run randomized verification sweeps");
    verify->add_option("check", cfg.check, "all | pesin | mc | exact-mc | gamma | cones")->capture_default_str();
    add_system(verify);
    add_numerics(verify);
    verify->add_option("--draws", cfg.draws, "number of random draws");
    verify->add_option("--samples", cfg.samples, "Monte Carlo samples");
    verify->add_option("--kappa1", cfg.kappa1)->capture_default_str();
    verify->add_option("--kappa2", cfg.kappa2)->capture_default_str();
    verify->add_option("--eps", cfg.eps)->capture_default_str();
    verify->add_option("--delta", cfg.delta)->capture_default_str();

    CLI::App* figures = app.add_subcommand("figures", "regenerate the example field data");
    add_numerics(figures);
    figures->add_option("--grid", cfg.grid, "xmin:xmax:ymin:ymax:NXxNY")->capture_default_str();
    figures->add_option("--out", cfg.out_dir, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (verify->parsed()) {
        cfg.subcommand = "verify";
        if (verify->count("--T") == 0 && cfg.check == "cones") {
            cfg.T = 8.0;
        }
        if (verify->count("--T") == 0 && cfg.check == "mc") {
            cfg.T = 1.0;
        }
        if (verify->count("--system") == 0 && cfg.check == "cones") {
            cfg.system = "linear-saddle";
        }
        return cmd_verify(cfg, out, err);
    }
    if (figures->parsed()) {
        cfg.subcommand = "figures";
        return cmd_figures(cfg, out, err);
    }
    cfg.subcommand = "field";
    return cmd_field(cfg, out, err);
}

}  // namespace ftme::cli
