#include "commands.hpp"

#include "soliton/cone_geometry.hpp"
#include "soliton/drift_spectral.hpp"
#include "soliton/energy_functionals.hpp"
#include "soliton/errors.hpp"
#include "soliton/io.hpp"
#include "soliton/ma_solver.hpp"
#include "soliton/soliton_profile.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <stdexcept>

namespace soliton::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument:
        case ErrorKind::DomainError:
        case ErrorKind::InsufficientRange:
        case ErrorKind::InsufficientFarField:
        case ErrorKind::Unsupported:
        case ErrorKind::SpectrumTooShort:
            return kConfigError;
        case ErrorKind::Violation:
            return kVerificationFailure;
        default:
            return kSolverFailure;
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& what) {
    if (!obj.is_object()) throw ConfigError(what + " must be a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) throw ConfigError(what + ": unknown key '" + it.key() + "'");
    }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& what) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(what + ": bad value for '" + key + "'");
    }
}

template <class T>
T get_required(const json& obj, const char* key, const std::string& what) {
    if (!obj.contains(key)) throw ConfigError(what + ": missing '" + key + "'");
    return get_or<T>(obj, key, T{}, what);
}

void write_file(const std::string& dir, const std::string& name, const std::function<void(std::ostream&)>& fn) {
    fs::create_directories(dir);
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + (fs::path(dir) / name).string());
    fn(out);
}

void write_json_file(const std::string& dir, const std::string& name, const json& value) {
    write_file(dir, name, [&](std::ostream& out) { write_json(value, out); });
}

ConeSpec make_spec(int n, double a) {
    ConeSpec spec;
    spec.n = n;
    spec.a = a;
    spec.validate();
    return spec;
}

void require_positive_tol(double tol) {
    if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol > 0 required");
}

json grid_json(const RadialGrid& g) {
    return json{{"tmin", g.t_min()}, {"tmax", g.t_max()}, {"count", g.size()}};
}

const char* verdict(bool pass) { return pass ? "PASS" : "FAIL"; }

// ---------------------------------------------------------------- profile

int cmd_profile(const RunConfig& c) {
    const auto spec = make_spec(c.n, c.a);
    require_positive_tol(c.tol);
    const RadialGrid grid(c.tmin, c.tmax, c.count);
    const auto p = build_profile(spec, grid, c.tol);
    const auto inv = check_profile_invariants(p, c.tol);

    write_file(c.out, "profile.csv", [&](std::ostream& out) { write_profile_csv(p, out); });
    json r;
    r["n"] = c.n;
    r["a"] = c.a;
    r["grid"] = grid_json(grid);
    r["tol"] = c.tol;
    r["residual_max"] = inv.residual_max;
    r["above_a"] = inv.above_a;
    r["monotone"] = inv.monotone;
    r["slope_bounds"] = inv.slope_bounds;
    r["residual_ok"] = inv.residual_ok;
    r["failures"] = inv.failures;
    r["pass"] = inv.ok();
    write_json_file(c.out, "profile_report.json", r);

    std::cout << "profile n=" << c.n << " a=" << format_double(c.a)
              << " residual_max=" << format_double(inv.residual_max) << " " << verdict(inv.ok()) << "\n";
    for (const auto& f : inv.failures) std::cerr << "invariant failed: " << f << "\n";
    return inv.ok() ? kOk : kVerificationFailure;
}

// ---------------------------------------------------------------- verify

template <class Record, class Guarded>
void run_asymptotic_checks(const Profile& p, const ConeSpec& spec, const RunConfig& c, Record& record,
                           Guarded& guarded) {
    guarded("expansion_exponent", [&] {
        const double e = expansion_error_exponent(p);
        record("expansion_exponent", e >= -2.3 && e <= -1.7, json{{"value", e}, {"lo", -2.3}, {"hi", -1.7}});
    });
    guarded("expansion_spread", [&] {
        const auto s = expansion_error_spread(p);
        record("expansion_spread", s.spread <= 0.2,
               json{{"min_ratio", s.min_ratio}, {"max_ratio", s.max_ratio}, {"spread", s.spread}, {"limit", 0.2}});
    });
    guarded("curvature_expansion", [&] {
        const double r = curvature_expansion_ratio(p);
        record("curvature_expansion", r <= 3.0, json{{"ratio", r}, {"limit", 3.0}});
    });
    guarded("curvature_floor", [&] {
        const auto f = curvature_floor_check(p, c.eps);
        record("curvature_floor", f.holds, json{{"eps", c.eps}, {"threshold_t", f.threshold_t}});
    });
    guarded("metric_rate", [&] {
        const auto m = metric_difference_rate(p);
        const bool pass = std::isfinite(m.max_scaled) && std::abs(m.constant - m.expected) <= 0.3 * m.expected;
        record("metric_rate", pass,
               json{{"constant", m.constant}, {"expected", m.expected}, {"max_scaled", m.max_scaled},
                    {"tolerance", 0.3}});
    });
    guarded("charge_identity", [&] {
        const auto d = charge_identity(p);
        const double worst = d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
        record("charge_identity", worst <= 1e-12, json{{"max_defect", worst}, {"limit", 1e-12}});
    });
    guarded("volume_growth", [&] {
        const auto v = volume_growth(p, spec);
        record("volume_growth", std::abs(v.slope - c.n) <= 0.05 * c.n,
               json{{"slope", v.slope}, {"target", c.n}, {"tolerance", 0.05}});
    });
    guarded("frame_decay", [&] {
        const auto r = frame_decay_rates(c.n);
        bool pass = true;
        for (std::size_t k = 0; k < r.size(); ++k) pass = pass && std::abs(r[k] + (k + 1.0)) <= 0.05;
        record("frame_decay", pass, json{{"rates", r}, {"expected", {-1, -2, -3}}});
    });
    guarded("geometry_report", [&] {
        const auto g = geometry_report(p);
        write_file(c.out, "geometry.csv", [&](std::ostream& out) { write_geometry_csv(g, out); });
    });
}

int cmd_verify(const RunConfig& c) {
    const auto spec = make_spec(c.n, c.a);
    require_positive_tol(c.tol);
    Profile p = [&] {
        if (c.profile_path.empty()) return build_profile(spec, RadialGrid(c.tmin, c.tmax, c.count), c.tol);
        std::ifstream in(c.profile_path);
        if (!in) throw ConfigError("cannot open " + c.profile_path);
        return read_profile_csv(in, spec);
    }();

    json checks = json::object();
    std::vector<std::string> failed;
    auto record = [&](const std::string& name, bool pass, json values) {
        values["pass"] = pass;
        checks[name] = std::move(values);
        if (!pass) failed.push_back(name);
    };
    auto guarded = [&](const std::string& name, const std::function<void()>& fn) {
        try {
            fn();
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::InsufficientRange) throw;
            record(name, false, json{{"error", e.what()}});
        }
    };

    const auto inv = check_profile_invariants(p, c.tol);
    record("above_a", inv.above_a, json::object());
    record("monotone", inv.monotone, json::object());
    record("slope_bounds", inv.slope_bounds, json::object());
    record("residual", inv.residual_ok, json{{"residual_max", inv.residual_max}, {"limit", c.tol}});
    // asymptotic checks on a profile that breaks its own invariants are skipped
    if (inv.ok()) run_asymptotic_checks(p, spec, c, record, guarded);

    json r;
    r["n"] = c.n;
    r["a"] = c.a;
    r["source"] = c.profile_path.empty() ? "inline" : "file";
    r["grid"] = grid_json(p.grid);
    r["checks"] = checks;
    r["failed"] = failed;
    r["pass"] = failed.empty();
    write_json_file(c.out, "verify_report.json", r);

    std::cout << "verify n=" << c.n << " a=" << format_double(c.a) << " " << verdict(failed.empty()) << "\n";
    for (const auto& f : failed) std::cerr << "check failed: " << f << "\n";
    return failed.empty() ? kOk : kVerificationFailure;
}

// ---------------------------------------------------------------- modes

ConeSpec read_spec(const RunConfig& c) {
    if (c.spec_path.empty()) return make_spec(c.n, c.a);
    const auto j = read_json_file(c.spec_path);
    check_keys(j, {"n", "a", "link_spectrum", "link_volume"}, "spec");
    ConeSpec spec;
    spec.n = get_or(j, "n", 2, "spec");
    spec.a = get_or(j, "a", 0.0, "spec");
    spec.link_spectrum = get_or(j, "link_spectrum", std::vector<double>{0.0}, "spec");
    spec.link_volume = get_or(j, "link_volume", 1.0, "spec");
    spec.validate();
    return spec;
}

struct ModeEntry {
    ModeData data;
    std::optional<PowerLaw> exact;
};

RadialGrid read_grid(const json& j, const RadialGrid& fallback, const std::string& what) {
    if (!j.contains("grid")) return fallback;
    const auto& g = j.at("grid");
    check_keys(g, {"tmin", "tmax", "count"}, what + ".grid");
    return RadialGrid(get_required<double>(g, "tmin", what + ".grid"), get_required<double>(g, "tmax", what + ".grid"),
                      get_required<std::size_t>(g, "count", what + ".grid"));
}

ModeEntry read_mode(const json& j, std::size_t index) {
    const std::string what = "batch[" + std::to_string(index) + "]";
    check_keys(j, {"lambda", "beta", "Q", "coefficient", "envelope", "grid", "exact"}, what);
    const double lambda = get_required<double>(j, "lambda", what);
    const double beta = get_or(j, "beta", 0.5, what);
    const auto grid = read_grid(j, RadialGrid(1.0, 1000.0, 20001), what);
    if (!j.contains("Q")) throw ConfigError(what + ": missing 'Q'");
    const auto& q = j.at("Q");
    ModeEntry entry;
    if (q.is_array()) {
        std::vector<double> samples;
        try {
            samples = q.get<std::vector<double>>();
        } catch (const json::exception&) {
            throw ConfigError(what + ": Q samples must be numbers");
        }
        if (samples.size() != grid.size()) {
            throw ConfigError(what + ": Q has " + std::to_string(samples.size()) + " samples for a grid of " +
                              std::to_string(grid.size()));
        }
        entry.data = ModeData::sampled(lambda, beta, grid, std::move(samples), get_or(j, "envelope", 0.0, what));
    } else if (q.is_string() && q.get<std::string>().rfind("power:", 0) == 0) {
        double power = 0.0;
        try {
            power = std::stod(q.get<std::string>().substr(6));
        } catch (const std::exception&) {
            throw ConfigError(what + ": bad power in '" + q.get<std::string>() + "'");
        }
        entry.data = ModeData::power_law(lambda, beta, grid, PowerLaw{get_or(j, "coefficient", 1.0, what), power});
    } else {
        throw ConfigError(what + ": Q must be an array of samples or \"power:p\"");
    }
    if (j.contains("exact")) {
        const auto& e = j.at("exact");
        check_keys(e, {"coefficient", "power"}, what + ".exact");
        entry.exact = PowerLaw{get_required<double>(e, "coefficient", what + ".exact"),
                               get_required<double>(e, "power", what + ".exact")};
    }
    return entry;
}

int cmd_modes(const RunConfig& c) {
    if (c.batch_path.empty()) throw ConfigError("modes needs --batch");
    if (c.threads < 1) throw ConfigError("--threads must be >= 1");
    require_positive_tol(c.tol);
    const auto spec = read_spec(c);
    const auto batch_json = read_json_file(c.batch_path);
    if (!batch_json.is_array()) throw ConfigError("batch must be a JSON array");
    std::vector<ModeEntry> entries;
    for (std::size_t i = 0; i < batch_json.size(); ++i) entries.push_back(read_mode(batch_json[i], i));
    std::vector<ModeData> batch;
    for (const auto& e : entries) batch.push_back(e.data);

    const auto sols = solve_modes(batch, spec, c.tol, c.threads);
    json modes = json::array();
    for (std::size_t i = 0; i < sols.size(); ++i) {
        const auto& sol = sols[i];
        const std::string file = "mode_" + std::to_string(i) + ".csv";
        write_file(c.out, file, [&](std::ostream& out) { write_mode_csv(sol, out); });
        const auto rem = second_order_residual(sol, batch[i], spec);
        json m;
        m["index"] = i;
        m["file"] = file;
        m["lambda"] = batch[i].lambda;
        m["beta"] = batch[i].beta;
        m["Q"] = batch[i].analytic ? "power_law" : "sampled";
        m["grid"] = grid_json(sol.grid);
        m["branch"] = to_string(sol.branch);
        m["tail_bound"] = sol.tail_bound;
        m["fitted_C"] = sol.fitted_c;
        m["residual_max"] = sol.residual_max;
        m["remainder"] = json{{"max_norm", rem.max_norm}, {"exponent", rem.exponent}};
        if (sol.branch == Branch::Backward) {
            const auto ref = mode_refinement_check(batch[i], spec, c.tol);
            m["refinement"] = json{{"fitted_C_coarse", ref.fitted_c_coarse}, {"relative_change", ref.relative_change}};
        }
        if (entries[i].exact) m["exact_relative_error"] = max_relative_deviation(sol, *entries[i].exact);
        modes.push_back(m);
    }
    json summary;
    summary["n"] = spec.n;
    summary["tol"] = c.tol;
    summary["modes"] = modes;
    write_json_file(c.out, "modes_summary.json", summary);
    std::cout << "modes solved=" << sols.size() << "\n";
    return kOk;
}

// ---------------------------------------------------------------- poincare

int cmd_poincare(const RunConfig& c) {
    const auto spec = make_spec(c.n, c.a);
    require_positive_tol(c.tol);
    const RadialGrid grid(c.tmin, c.tmax, c.count);
    const auto p = build_profile(spec, grid, c.tol);
    const auto gap = poincare_gap(p, c.beta);
    const double floor = 0.8 * gap.certified_constant;
    const bool pass = gap.discrete_gap >= floor && gap.subsolution_holds;
    json r;
    r["n"] = c.n;
    r["a"] = c.a;
    r["grid"] = grid_json(grid);
    r["beta"] = gap.beta;
    r["discrete_gap"] = gap.discrete_gap;
    r["certified_constant"] = gap.certified_constant;
    r["gap_floor"] = floor;
    r["subsolution_holds"] = gap.subsolution_holds;
    r["compact_set_t"] = gap.compact_set_t;
    r["pass"] = pass;
    write_json_file(c.out, "poincare.json", r);
    std::cout << "poincare n=" << c.n << " gap=" << format_double(gap.discrete_gap) << " " << verdict(pass) << "\n";
    return pass ? kOk : kVerificationFailure;
}

// ---------------------------------------------------------------- solve-ma / energies

struct ProblemConfig {
    int n = 2;
    double a = 0.0;
    RadialGrid grid{0.5, 60.0, 2048};
    std::string kind = "bump";
    double amplitude = 0.1;
    double lo = 5.0;
    double hi = 8.0;
    std::vector<double> values;
    int steps = 20;
    double tol = 1e-9;
    double profile_tol = 1e-12;
};

ProblemConfig read_problem(const std::string& path) {
    if (path.empty()) throw ConfigError("--problem is required");
    const auto j = read_json_file(path);
    check_keys(j, {"n", "a", "grid", "F", "steps", "tol", "profile_tol"}, "problem");
    ProblemConfig pc;
    pc.n = get_or(j, "n", pc.n, "problem");
    pc.a = get_or(j, "a", pc.a, "problem");
    pc.grid = read_grid(j, pc.grid, "problem");
    pc.steps = get_or(j, "steps", pc.steps, "problem");
    pc.tol = get_or(j, "tol", pc.tol, "problem");
    pc.profile_tol = get_or(j, "profile_tol", pc.profile_tol, "problem");
    if (!j.contains("F")) throw ConfigError("problem: missing 'F'");
    const auto& f = j.at("F");
    check_keys(f, {"kind", "amplitude", "lo", "hi", "values"}, "problem.F");
    pc.kind = get_required<std::string>(f, "kind", "problem.F");
    pc.lo = get_required<double>(f, "lo", "problem.F");
    pc.hi = get_required<double>(f, "hi", "problem.F");
    if (pc.kind == "bump") {
        pc.amplitude = get_required<double>(f, "amplitude", "problem.F");
    } else if (pc.kind == "table") {
        pc.values = get_required<std::vector<double>>(f, "values", "problem.F");
    } else {
        throw ConfigError("problem.F: kind must be \"bump\" or \"table\"");
    }
    if (pc.steps < 1) throw ConfigError("problem: steps must be >= 1");
    require_positive_tol(pc.tol);
    require_positive_tol(pc.profile_tol);
    return pc;
}

MAProblem make_problem(const ProblemConfig& pc, std::size_t count) {
    const auto spec = make_spec(pc.n, pc.a);
    const RadialGrid grid(pc.grid.t_min(), pc.grid.t_max(), count);
    auto profile = build_profile(spec, grid, pc.profile_tol);
    if (pc.kind == "bump") return MAProblem::bump(std::move(profile), pc.amplitude, pc.lo, pc.hi);
    if (pc.values.size() != count) {
        throw ConfigError("problem.F: table has " + std::to_string(pc.values.size()) + " values for " +
                          std::to_string(count) + " nodes");
    }
    return MAProblem::table(std::move(profile), pc.values, pc.lo, pc.hi);
}

json trace_json(const ContinuityTrace& trace) {
    json records = json::array();
    for (const auto& r : trace.records) {
        records.push_back(json{{"s", r.s},
                               {"newton_iters", r.newton_iters},
                               {"residual_max", r.residual_max},
                               {"sup_psi", r.sup_psi},
                               {"inf_psi", r.inf_psi},
                               {"arg_sup_in_support", r.arg_sup_in_support},
                               {"arg_inf_in_support", r.arg_inf_in_support},
                               {"energy_I", r.energy_i},
                               {"energy_J", r.energy_j},
                               {"step_change", r.step_change}});
    }
    return json{{"records", records}};
}

int cmd_solve_ma(const RunConfig& c) {
    const auto pc = read_problem(c.problem_path);
    const auto prob = make_problem(pc, pc.grid.size());
    const auto run = continuity_solve(prob, pc.steps, pc.tol);

    write_file(c.out, "solution.csv", [&](std::ostream& out) { write_solution_csv(run.psi, prob, out); });
    write_json_file(c.out, "trace.json", trace_json(run.trace));

    json v;
    std::vector<std::string> failed;
    const double residual = max_abs(ma_residual(run.psi, prob));
    v["s"] = run.trace.records.back().s;
    v["residual_max"] = residual;
    v["tol"] = pc.tol;
    if (!(residual <= pc.tol)) failed.push_back("residual");
    try {
        const auto e = verify_extrema_localization(run.psi, prob, pc.tol);
        v["extrema"] = json{{"sup", e.sup},
                            {"inf", e.inf},
                            {"arg_sup_t", e.arg_sup_t},
                            {"arg_inf_t", e.arg_inf_t},
                            {"sup_branch", e.sup_branch},
                            {"inf_branch", e.inf_branch},
                            {"pass", true}};
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Violation) throw;
        v["extrema"] = json{{"error", e.what()}, {"pass", false}};
        failed.push_back("extrema");
    }
    try {
        const auto b = verify_radial_derivative_bound(run.psi, prob, pc.tol);
        v["derivative_bound"] = json{{"margin", b.margin}, {"siepmann_c", b.siepmann_c}, {"pass", true}};
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Violation) throw;
        v["derivative_bound"] = json{{"error", e.what()}, {"pass", false}};
        failed.push_back("derivative_bound");
    }
    const auto d = verify_exponential_decay(run.psi, prob);
    const bool decay_ok = d.degenerate || (d.slope >= 0.85 && d.slope <= 1.15);
    v["decay"] = json{{"slope", d.slope},       {"degenerate", d.degenerate},         {"fit_lo", d.fit_lo},
                      {"fit_hi", d.fit_hi},     {"barrier_defect", d.barrier_defect}, {"lo", 0.85},
                      {"hi", 1.15},             {"pass", decay_ok}};
    if (!decay_ok) failed.push_back("decay");
    const auto path = verify_path_continuity(run.trace);
    v["path_continuity"] = json{{"max_quotient", path.max_quotient}, {"max_ratio", path.max_ratio}};
    v["steps_taken"] = run.trace.records.size();
    v["failed"] = failed;
    v["pass"] = failed.empty();
    write_json_file(c.out, "verification.json", v);

    std::cout << "solve-ma residual_max=" << format_double(residual) << " slope=" << format_double(d.slope) << " "
              << verdict(failed.empty()) << "\n";
    for (const auto& f : failed) std::cerr << "check failed: " << f << "\n";
    return failed.empty() ? kOk : kVerificationFailure;
}

int cmd_energies(const RunConfig& c) {
    if (c.u_nodes < 2) throw ConfigError("--u-nodes must be >= 2");
    const auto pc = read_problem(c.problem_path);
    const auto prob = make_problem(pc, pc.grid.size());
    const auto run = continuity_solve(prob, pc.steps, pc.tol);
    const auto coarse_prob = make_problem(pc, pc.grid.size() / 2);
    const auto coarse = continuity_solve(coarse_prob, pc.steps, pc.tol);

    const auto square = [](double u) { return u * u; };
    const auto square_prime = [](double u) { return 2.0 * u; };
    const auto linear = PotentialPath::linear(run.psi.psi);
    const auto reparam = PotentialPath::reparam(run.psi.psi, square, square_prime);

    const double i_value = energy_I(run.psi, prob);
    const auto j_lin = energy_J(linear, prob, c.u_nodes);
    const auto j_rep = energy_J(reparam, prob, c.u_nodes);
    const double difference = std::abs(j_lin.value - j_rep.value);
    const double allowance = 10.0 * std::max(j_lin.error_estimate, j_rep.error_estimate);
    const double fv_fine = first_variation_check(linear, prob, c.u_nodes);
    const double fv_reparam = first_variation_check(reparam, prob, c.u_nodes);
    const double fv_coarse = first_variation_check(PotentialPath::linear(coarse.psi.psi), coarse_prob, c.u_nodes / 2);
    const double i_minus_j = i_value - j_lin.value;
    const double ck50 = ck_ratio(3, 50.0);
    const double dk200 = ck_difference_ratio(3, 200.0);
    const auto claim = claim_lower_bound(pc.n);

    json r;
    std::vector<std::string> failed;
    auto check = [&](const char* name, bool pass) {
        if (!pass) failed.push_back(name);
    };
    r["I"] = i_value;
    r["J_linear"] = json{{"value", j_lin.value}, {"error_estimate", j_lin.error_estimate}};
    r["J_reparam"] = json{{"value", j_rep.value}, {"error_estimate", j_rep.error_estimate}};
    r["path_difference"] = difference;
    r["path_allowance"] = allowance;
    check("path_independence", difference <= allowance);
    r["I_minus_J"] = i_minus_j;
    check("I_minus_J", i_minus_j >= 0.0);
    r["first_variation_defect"] = fv_fine;
    r["first_variation_defect_reparam"] = fv_reparam;
    r["first_variation_defect_coarse"] =
        json{{"count", coarse_prob.profile.size()}, {"u_nodes", c.u_nodes / 2}, {"value", fv_coarse}};
    check("first_variation", fv_fine <= 1e-3 && fv_reparam <= 1e-3 && fv_fine < fv_coarse);
    r["ck_table"] = json::array({json{{"k", 3}, {"f", 50.0}, {"quantity", "c_k f e^-f"}, {"ratio", ck50}},
                                 json{{"k", 3}, {"f", 200.0}, {"quantity", "(c_{k-1} - c_k) f^2 e^-f"}, {"ratio", dk200}}});
    check("ck_ratios", std::abs(ck50 - 1.0) <= 0.1 && std::abs(dk200 - 1.0) <= 0.1);
    r["claim_bound"] = json{{"n", pc.n}, {"constant", claim.constant}};
    check("claim_bound", claim.constant > 0.0);
    r["failed"] = failed;
    r["pass"] = failed.empty();
    write_json_file(c.out, "energies.json", r);

    std::cout << "energies I=" << format_double(i_value) << " J=" << format_double(j_lin.value) << " "
              << verdict(failed.empty()) << "\n";
    for (const auto& f : failed) std::cerr << "check failed: " << f << "\n";
    return failed.empty() ? kOk : kVerificationFailure;
}

// ---------------------------------------------------------------- report

json reference_problem() {
    return json{{"n", 2},
                {"a", 0.0},
                {"grid", {{"tmin", 0.5}, {"tmax", 60.0}, {"count", 2048}}},
                {"F", {{"kind", "bump"}, {"amplitude", 0.1}, {"lo", 5.0}, {"hi", 8.0}}},
                {"steps", 20},
                {"tol", 1e-9}};
}

json reference_spec() { return json{{"n", 2}, {"a", 0.0}, {"link_spectrum", {0.0, 8.0, 12.0}}}; }

json reference_batch() {
    const json grid = {{"tmin", 1.0}, {"tmax", 1000.0}, {"count", 20001}};
    return json::array({
        json{{"lambda", 8.0}, {"beta", 0.5}, {"Q", "power:0.5"}, {"grid", grid},
             {"exact", {{"coefficient", -0.5}, {"power", -0.5}}}},
        json{{"lambda", 12.0}, {"beta", 0.5}, {"Q", "power:0.5"}, {"grid", grid}},
        json{{"lambda", 0.0}, {"beta", 0.5}, {"Q", std::vector<double>(491, 3.0)},
             {"grid", {{"tmin", 1.0}, {"tmax", 50.0}, {"count", 491}}}},
    });
}

std::string sub(const std::string& root, const std::string& rel) { return (fs::path(root) / rel).string(); }

int run_all(const std::string& root, int threads) {
    int worst = kOk;
    auto run = [&](RunConfig c) {
        int code = kOk;
        try {
            code = dispatch(c);
        } catch (...) {
            code = kSolverFailure;
        }
        worst = std::max(worst, code);
    };
    for (int n : {2, 3}) {
        for (double a : {0.0, 1.0}) {
            RunConfig c;
            c.command = "profile";
            c.n = n;
            c.a = a;
            c.tmin = -10.0;
            c.tmax = 300.0;
            c.count = 4096;
            c.tol = 1e-10;
            c.out = sub(root, "profile/n" + std::to_string(n) + "_a" + (a == 0.0 ? "0" : "1"));
            run(c);
        }
    }
    for (int n : {2, 3}) {
        RunConfig c;
        c.command = "verify";
        c.n = n;
        c.tmin = -10.0;
        c.tmax = 1e4;
        c.count = 20021;
        c.tol = 1e-10;
        c.out = sub(root, "verify/n" + std::to_string(n));
        run(c);
    }
    {
        const std::string dir = sub(root, "modes");
        write_json_file(dir, "spec.json", reference_spec());
        write_json_file(dir, "batch.json", reference_batch());
        RunConfig c;
        c.command = "modes";
        c.spec_path = sub(dir, "spec.json");
        c.batch_path = sub(dir, "batch.json");
        c.tol = 1e-8;
        c.threads = threads;
        c.out = dir;
        run(c);
    }
    for (int n : {2, 3}) {
        RunConfig c;
        c.command = "poincare";
        c.n = n;
        c.tmin = -10.0;
        c.tmax = 30.0;
        c.count = 512;
        c.tol = 1e-12;
        c.out = sub(root, "poincare/n" + std::to_string(n));
        run(c);
    }
    for (const char* cmd : {"solve-ma", "energies"}) {
        const std::string dir = sub(root, cmd);
        write_json_file(dir, "problem.json", reference_problem());
        RunConfig c;
        c.command = cmd;
        c.problem_path = sub(dir, "problem.json");
        c.out = dir;
        run(c);
    }
    return worst;
}

struct Aggregator {
    std::string root;
    json criteria = json::array();
    bool all = true;

    std::optional<json> load(const std::string& rel, std::vector<std::string>& notes) const {
        const auto path = fs::path(root) / rel;
        std::ifstream in(path);
        if (!in) {
            notes.push_back("missing " + rel);
            return std::nullopt;
        }
        try {
            return json::parse(in);
        } catch (const json::exception&) {
            notes.push_back("unreadable " + rel);
            return std::nullopt;
        }
    }

    void add(int id, const std::string& name, bool pass, const std::vector<std::string>& notes) {
        json c{{"id", id}, {"name", name}, {"pass", pass}};
        if (!notes.empty()) c["notes"] = notes;
        criteria.push_back(c);
        all = all && pass;
        std::cout << "criterion " << id << " " << name << ": " << verdict(pass) << "\n";
    }
};

bool flag(const json& j, const char* key) { return j.contains(key) && j.at(key).is_boolean() && j.at(key).get<bool>(); }

bool check_pass(const json& report, const char* check) {
    return report.contains("checks") && report["checks"].contains(check) && flag(report["checks"][check], "pass");
}

int aggregate(const std::string& root) {
    Aggregator agg{root};

    {
        std::vector<std::string> notes;
        bool pass = true;
        for (const char* d : {"n2_a0", "n2_a1", "n3_a0", "n3_a1"}) {
            const auto r = agg.load(std::string("profile/") + d + "/profile_report.json", notes);
            const bool ok = r && (*r)["residual_max"].is_number() && (*r)["residual_max"].get<double>() <= 1e-10 &&
                            flag(*r, "pass");
            if (r && !ok) notes.push_back(std::string(d) + " residual or invariants");
            pass = pass && ok;
        }
        agg.add(1, "implicit_equation_residual", pass, notes);
    }

    struct Geo {
        int id;
        const char* name;
        std::vector<const char*> checks;
    };
    const Geo geo[] = {{2, "expansion", {"expansion_exponent", "expansion_spread"}},
                       {3, "curvature", {"curvature_expansion", "curvature_floor"}},
                       {4, "metric_difference_rate", {"metric_rate"}},
                       {5, "charge_and_volume", {"charge_identity", "volume_growth"}}};
    for (const auto& g : geo) {
        std::vector<std::string> notes;
        bool pass = true;
        for (const char* n : {"n2", "n3"}) {
            const auto r = agg.load(std::string("verify/") + n + "/verify_report.json", notes);
            for (const char* check : g.checks) {
                const bool ok = r && check_pass(*r, check);
                if (r && !ok) notes.push_back(std::string(n) + " " + check);
                pass = pass && ok;
            }
        }
        agg.add(g.id, g.name, pass, notes);
    }

    {
        std::vector<std::string> notes;
        const auto r = agg.load("modes/modes_summary.json", notes);
        bool pass = r.has_value() && (*r)["modes"].is_array() && !(*r)["modes"].empty();
        if (pass) {
            for (const auto& m : (*r)["modes"]) {
                const std::string tag = "mode " + m["index"].dump();
                if (!(m["residual_max"].is_number() && m["residual_max"].get<double>() <= 1e-8)) {
                    notes.push_back(tag + " residual");
                    pass = false;
                }
                if (m.contains("exact_relative_error") &&
                    !(m["exact_relative_error"].is_number() && m["exact_relative_error"].get<double>() <= 1e-8)) {
                    notes.push_back(tag + " closed form");
                    pass = false;
                }
                if (m.contains("refinement") && !(m["refinement"]["relative_change"].is_number() &&
                                                  m["refinement"]["relative_change"].get<double>() <= 0.1)) {
                    notes.push_back(tag + " refinement");
                    pass = false;
                }
            }
        }
        agg.add(6, "mode_solver", pass, notes);
    }

    {
        std::vector<std::string> notes;
        bool pass = true;
        for (const char* n : {"n2", "n3"}) {
            const auto r = agg.load(std::string("poincare/") + n + "/poincare.json", notes);
            const bool ok = r && flag(*r, "pass");
            if (r && !ok) notes.push_back(std::string(n) + " gap or subsolution");
            pass = pass && ok;
        }
        agg.add(7, "poincare_gap", pass, notes);
    }

    {
        std::vector<std::string> notes;
        const auto r = agg.load("solve-ma/verification.json", notes);
        const bool pass = r && flag(*r, "pass") && (*r)["s"].is_number() && (*r)["s"].get<double>() == 1.0;
        if (r && !pass) {
            for (const auto& f : (*r)["failed"]) notes.push_back(f.get<std::string>());
        }
        agg.add(8, "continuity_method", pass, notes);
    }

    {
        std::vector<std::string> notes;
        const auto r = agg.load("energies/energies.json", notes);
        const bool pass = r && flag(*r, "pass");
        if (r && !pass) {
            for (const auto& f : (*r)["failed"]) notes.push_back(f.get<std::string>());
        }
        agg.add(9, "energy_functionals", pass, notes);
    }

    json out{{"criteria", agg.criteria}, {"pass", agg.all}};
    write_json_file(root, "report.json", out);
    return agg.all ? kOk : kVerificationFailure;
}

int cmd_report(const RunConfig& c) {
    if (c.threads < 1) throw ConfigError("--threads must be >= 1");
    if (c.run_all) run_all(c.out, c.threads);
    return aggregate(c.out);
}

int run(const RunConfig& c) {
    if (c.command == "profile") return cmd_profile(c);
    if (c.command == "verify") return cmd_verify(c);
    if (c.command == "modes") return cmd_modes(c);
    if (c.command == "poincare") return cmd_poincare(c);
    if (c.command == "solve-ma") return cmd_solve_ma(c);
    if (c.command == "energies") return cmd_energies(c);
    if (c.command == "report") return cmd_report(c);
    throw ConfigError("unknown command " + c.command);
}

}  // namespace

std::string resolve_out_dir(const std::string& flag, const std::string& fallback) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("SOLITON_LAB_OUT"); env && *env) return env;
    return fallback;
}

int dispatch(const RunConfig& config) {
    try {
        return run(config);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
}

}  // namespace soliton::cli
