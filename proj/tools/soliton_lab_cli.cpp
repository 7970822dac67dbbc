#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

using soliton::cli::RunConfig;

// Applies a flat JSON object of option values to a parsed subcommand.
// Flags given on the command line win; unknown keys are an error.
void apply_config(CLI::App* sub, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CLI::FileError::Missing(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw CLI::ConversionError(path + ": not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError(path + ": config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        auto* opt = it.key() == "config" ? nullptr : sub->get_option_no_throw("--" + it.key());
        if (!opt) throw CLI::ConversionError(path + ": unknown key '" + it.key() + "'");
        const auto& v = it.value();
        if (!(v.is_string() || v.is_number() || v.is_boolean())) {
            throw CLI::ConversionError(path + ": key '" + it.key() + "' must be a scalar");
        }
        if (opt->count() > 0) continue;
        opt->add_result(v.is_string() ? v.get<std::string>() : v.dump());
        opt->run_callback();
    }
}

struct Grid {
    double tmin;
    double tmax;
    std::size_t count;
    double tol;
};

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help, RunConfig& cfg,
                      std::string& out_flag) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", cfg.config_path, "JSON file of option values (keys are long option names)");
    sub->add_option("--out", out_flag, "Output directory (default: $SOLITON_LAB_OUT or soliton_lab_out)");
    sub->add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->callback([&cfg, name] { cfg.command = name; });
    return sub;
}

void add_cone(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--n", cfg.n, "Complex dimension")->capture_default_str();
    sub->add_option("--a", cfg.a, "Soliton parameter a = lim φ at the apex")->capture_default_str();
}

void add_grid(CLI::App* sub, Grid& g) {
    sub->add_option("--tmin", g.tmin, "Grid start")->capture_default_str();
    sub->add_option("--tmax", g.tmax, "Grid end")->capture_default_str();
    sub->add_option("--count", g.count, "Grid nodes")->capture_default_str();
    sub->add_option("--tol", g.tol, "Solver tolerance")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Soliton profiles, asymptotic checks, drift modes and the radial Monge-Ampère continuity path"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string out_flag;
    Grid profile_grid{-10.0, 200.0, 4096, 1e-10};
    Grid verify_grid{-10.0, 1e4, 20021, 1e-10};
    Grid poincare_grid{-10.0, 30.0, 512, 1e-12};
    double modes_tol = 1e-8;

    auto* profile = add_command(app, "profile", "Build a soliton profile and check its invariants", cfg, out_flag);
    add_cone(profile, cfg);
    add_grid(profile, profile_grid);

    auto* verify = add_command(app, "verify", "Run the asymptotic and geometric checks on a profile", cfg, out_flag);
    add_cone(verify, cfg);
    add_grid(verify, verify_grid);
    verify->add_option("--profile", cfg.profile_path, "Read the profile from this CSV instead of building it");
    verify->add_option("--eps", cfg.eps, "Curvature floor slack")->capture_default_str();

    auto* modes = add_command(app, "modes", "Solve a batch of drift-Laplacian mode equations", cfg, out_flag);
    add_cone(modes, cfg);
    modes->add_option("--spec", cfg.spec_path, "Cone JSON {n, a, link_spectrum, link_volume}");
    modes->add_option("--batch", cfg.batch_path, "Batch JSON array of modes");
    modes->add_option("--tol", modes_tol, "Tail tolerance")->capture_default_str();

    auto* poincare = add_command(app, "poincare", "Weighted Poincaré gap and subsolution check", cfg, out_flag);
    add_cone(poincare, cfg);
    add_grid(poincare, poincare_grid);
    poincare->add_option("--beta", cfg.beta, "Weight exponent")->capture_default_str();

    auto* solve = add_command(app, "solve-ma", "Run the continuity path for the radial Monge-Ampère problem", cfg,
                              out_flag);
    solve->add_option("--problem", cfg.problem_path, "Problem JSON");

    auto* energies = add_command(app, "energies", "Energy functionals on the continuity endpoint", cfg, out_flag);
    energies->add_option("--problem", cfg.problem_path, "Problem JSON");
    energies->add_option("--u-nodes", cfg.u_nodes, "Quadrature nodes along the path")->capture_default_str();

    auto* report = add_command(app, "report", "Aggregate outputs into an acceptance summary", cfg, out_flag);
    report->add_flag("--run-all", cfg.run_all, "Regenerate every output before aggregating");

    try {
        app.parse(argc, argv);
        if (!cfg.config_path.empty()) {
            for (auto* sub : app.get_subcommands()) apply_config(sub, cfg.config_path);
        }
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return soliton::cli::kConfigError;
    }

    const Grid* grid = nullptr;
    if (cfg.command == "profile") grid = &profile_grid;
    if (cfg.command == "verify") grid = &verify_grid;
    if (cfg.command == "poincare") grid = &poincare_grid;
    if (grid) {
        cfg.tmin = grid->tmin;
        cfg.tmax = grid->tmax;
        cfg.count = grid->count;
        cfg.tol = grid->tol;
    }
    if (cfg.command == "modes") cfg.tol = modes_tol;
    cfg.out = soliton::cli::resolve_out_dir(out_flag, "soliton_lab_out");
    return soliton::cli::dispatch(cfg);
}
