#include <doctest.h>

#include "soliton/drift_spectral.hpp"
#include "soliton/errors.hpp"
#include "soliton/ma_solver.hpp"

#include <cmath>
#include <functional>
#include <sstream>

using namespace soliton;

namespace {

ConeSpec plain(int n) {
    ConeSpec s;
    s.n = n;
    return s;
}

const Profile& reference_profile() {
    static const Profile p = build_profile(plain(2), RadialGrid(0.5, 60.0, 2048), 1e-12);
    return p;
}

const ContinuityResult& reference_run() {
    static const ContinuityResult r =
        continuity_solve(MAProblem::bump(reference_profile(), 0.1, 5.0, 8.0), 20, 1e-9);
    return r;
}

// Residual recomputed from scratch: central differences, ghost node at t_min.
double oracle_residual_max(const std::vector<double>& psi, const MAProblem& prob) {
    const auto& p = prob.profile;
    const double h = p.grid.spacing();
    const int n = p.spec.n;
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < psi.size(); ++k) {
        const double left = k == 0 ? psi[1] : psi[k - 1];
        const double d1 = (psi[k + 1] - left) / (2 * h);
        const double d2 = (psi[k + 1] - 2 * psi[k] + left) / (h * h);
        const double vol = std::pow((p.phi[k] + 2 * d1) / p.phi[k], n - 1) * (p.phi1[k] + 2 * d2) / p.phi1[k];
        worst = std::max(worst, std::abs(std::log(vol) + 2 * d1 - prob.s * prob.f[k]));
    }
    return worst;
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error thrown");
    return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("problem construction") {
    const auto p = build_profile(plain(2), RadialGrid(0.5, 30.0, 128), 1e-12);
    const auto prob = MAProblem::bump(p, 0.1, 2.0, 4.0);
    double top = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (!prob.in_support(p.t(k))) CHECK(prob.f[k] == 0.0);
        top = std::max(top, prob.f[k]);
    }
    CHECK(top == doctest::Approx(0.1).epsilon(0.01));
    CHECK_THROWS_AS(MAProblem::bump(p, 0.1, 0.5, 4.0), Error);   // touches t_min
    CHECK_THROWS_AS(MAProblem::bump(p, 0.1, 2.0, 15.0), Error);  // less than 20 of far field
    std::vector<double> stray(p.size(), 0.0);
    stray[100] = 1.0;
    CHECK_THROWS_AS(MAProblem::table(p, stray, 2.0, 4.0), Error);
}

TEST_CASE("residual examples") {
    const auto p = build_profile(plain(2), RadialGrid(0.5, 30.0, 128), 1e-12);
    auto prob = MAProblem::bump(p, 0.1, 2.0, 4.0);
    const auto zero = make_potential(p, std::vector<double>(p.size(), 0.0));
    CHECK(zero.admissible);
    prob.s = 0.0;
    CHECK(max_abs(ma_residual(zero, prob)) == 0.0);
    prob.s = 0.7;
    const auto r = ma_residual(zero, prob);
    for (std::size_t k = 0; k + 1 < p.size(); ++k) CHECK(r[k] == -0.7 * prob.f[k]);

    std::vector<double> bad(p.size(), 0.0);
    bad[40] = -10.0;
    const auto inadmissible = make_potential(p, bad);
    CHECK_FALSE(inadmissible.admissible);
    CHECK(kind_of([&] { ma_residual(inadmissible, prob); }) == ErrorKind::Inadmissible);
}

TEST_CASE("residual converges to the smooth operator") {
    // ψ = ε e^{-(t-3)^2}: exact derivatives give the continuum residual.
    const double eps = 0.01;
    auto exact = [&](const Profile& p, std::size_t k) {
        const double t = p.t(k);
        const double g = eps * std::exp(-(t - 3) * (t - 3));
        const double d1 = -2 * (t - 3) * g;
        const double d2 = (4 * (t - 3) * (t - 3) - 2) * g;
        return std::log1p(2 * d1 / p.phi[k]) + std::log1p(2 * d2 / p.phi1[k]) + 2 * d1;
    };
    double errs[2];
    int i = 0;
    for (std::size_t count : {256u, 511u}) {
        const auto p = build_profile(plain(2), RadialGrid(0.5, 30.0, count), 1e-12);
        std::vector<double> psi(count);
        for (std::size_t k = 0; k < count; ++k) psi[k] = eps * std::exp(-(p.t(k) - 3) * (p.t(k) - 3));
        psi.back() = 0.0;
        const auto r = weight_log_ratio(make_potential(p, psi), p);
        double worst = 0.0;
        for (std::size_t k = 1; k + 1 < count; ++k) worst = std::max(worst, std::abs(r[k] - exact(p, k)));
        errs[i++] = worst;
    }
    CHECK(errs[0] / errs[1] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("linearized operator is the Jacobian of the residual") {
    const auto p = build_profile(plain(3), RadialGrid(0.5, 30.0, 128), 1e-12);
    const auto prob = MAProblem::bump(p, 0.3, 2.0, 4.0);
    std::vector<double> psi(p.size()), dir(p.size());
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
        psi[k] = 0.02 * std::exp(-(p.t(k) - 3) * (p.t(k) - 3));
        dir[k] = std::sin(0.3 * p.t(k)) * std::exp(-0.1 * p.t(k));
    }
    const auto pot = make_potential(p, psi);
    const auto lv = linearize(pot, p).apply(dir);
    const double e = 1e-6;
    auto shifted = [&](double c) {
        auto v = psi;
        for (std::size_t k = 0; k < v.size(); ++k) v[k] += c * dir[k];
        return ma_residual(make_potential(p, v), prob);
    };
    const auto plus = shifted(e);
    const auto minus = shifted(-e);
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
        CHECK(lv[k] == doctest::Approx((plus[k] - minus[k]) / (2 * e)).epsilon(1e-6).scale(1e-3));
    }
    CHECK(lv.back() == 0.0);
}

TEST_CASE("Newton step") {
    const auto p = build_profile(plain(2), RadialGrid(0.5, 30.0, 128), 1e-12);
    const auto prob = MAProblem::bump(p, 0.01, 2.0, 4.0);
    const auto zero = make_potential(p, std::vector<double>(p.size(), 0.0));
    const auto step = newton_step(zero, prob, 1e-12);
    CHECK(step.damping == 1.0);
    CHECK(step.residual_after * 10.0 <= step.residual_before);
    // quadratic convergence: the next step squares the error (up to a constant)
    const auto second = newton_step(step.psi, prob, 1e-14);
    CHECK(second.residual_after <= 10.0 * step.residual_after * step.residual_after / step.residual_before + 1e-13);

    // zero residual in, zero step out
    auto off = prob;
    off.s = 0.0;
    const auto idle = newton_step(zero, off, 1e-12);
    CHECK(idle.damping == 0.0);
    CHECK(idle.psi.psi == zero.psi);

    // a large negative F pushes the undamped step past φ' + 2ψ'' = 0
    const auto harsh = MAProblem::bump(p, -5.0, 2.0, 4.0);
    const auto damped = newton_step(zero, harsh, 1e-12);
    CHECK(damped.damping < 1.0);
    CHECK(damped.psi.admissible);
    CHECK(damped.residual_after < damped.residual_before);
}

TEST_CASE("continuity with F = 0 takes one step") {
    const auto p = build_profile(plain(2), RadialGrid(0.5, 30.0, 128), 1e-12);
    const auto prob = MAProblem::table(p, std::vector<double>(p.size(), 0.0), 2.0, 4.0);
    const auto run = continuity_solve(prob, 20, 1e-9);
    REQUIRE(run.trace.records.size() == 1);
    CHECK(run.trace.records[0].s == 1.0);
    for (double v : run.psi.psi) CHECK(v == 0.0);
    const auto ext = verify_extrema_localization(run.psi, prob);
    CHECK(ext.sup == 0.0);
    CHECK(ext.inf == 0.0);
    CHECK(verify_radial_derivative_bound(run.psi, prob).margin == 0.0);
    CHECK(verify_exponential_decay(run.psi, prob).degenerate);
}

TEST_CASE("reference continuity run") {
    const auto& run = reference_run();
    const auto prob = MAProblem::bump(reference_profile(), 0.1, 5.0, 8.0);
    double prev = 0.0;
    for (const auto& rec : run.trace.records) {
        CHECK(rec.s > prev);
        CHECK(rec.residual_max <= 1e-9);
        prev = rec.s;
    }
    CHECK(prev == 1.0);
    CHECK(oracle_residual_max(run.psi.psi, prob) <= 1e-9);
    CHECK(run.psi.admissible);
    // F >= 0 makes ψ subharmonic for the drift operator, so ψ <= 0
    CHECK(run.trace.records.back().sup_psi == 0.0);
    CHECK(run.trace.records.back().inf_psi < 0.0);

    const auto ext = verify_extrema_localization(run.psi, prob);
    CHECK(ext.sup_branch == "nonpositive");
    CHECK(ext.inf_branch == "in_support");
    CHECK(verify_radial_derivative_bound(run.psi, prob).margin >= -1e-9);
    const auto decay = verify_exponential_decay(run.psi, prob);
    CHECK(decay.slope >= 0.85);
    CHECK(decay.slope <= 1.15);
    CHECK(decay.barrier_defect <= 1e-10);
    const auto pc = verify_path_continuity(run.trace);
    CHECK(pc.max_ratio < 1.1);

    std::ostringstream out;
    write_solution_csv(run.psi, prob, out);
    CHECK(out.str().rfind("t,psi,psi1,psi2,residual\n", 0) == 0);
}

TEST_CASE("discretization converges under refinement") {
    // 1024 and 2047 nodes share every other node with the 4093-node grid.
    std::vector<std::vector<double>> sols;
    for (std::size_t count : {1024u, 2047u, 4093u}) {
        const auto p = build_profile(plain(2), RadialGrid(0.5, 60.0, count), 1e-12);
        sols.push_back(continuity_solve(MAProblem::bump(p, 0.1, 5.0, 8.0), 5, 1e-10).psi.psi);
    }
    double e1 = 0.0, e2 = 0.0;
    for (std::size_t k = 0; k < 1024; ++k) {
        e1 = std::max(e1, std::abs(sols[0][k] - sols[2][4 * k]));
        e2 = std::max(e2, std::abs(sols[1][2 * k] - sols[2][4 * k]));
    }
    // second order: (4 - 1)/(4^{1/2}... ) ratio of errors against the finest grid is 5
    CHECK(e1 / e2 == doctest::Approx(5.0).epsilon(0.1));
}

TEST_CASE("small amplitude follows the linearized Dirichlet solve") {
    const auto& p = reference_profile();
    double rel[2];
    double sup[2];
    int i = 0;
    for (double amp : {0.05, 0.1}) {
        const auto prob = MAProblem::bump(p, amp, 5.0, 8.0);
        const auto psi = continuity_solve(prob, 10, 1e-10).psi.psi;
        const auto lin = dirichlet_drift_solve(p, prob.f, p.grid.t_max(), 1e-12).u;
        double diff = 0.0, top = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) {
            diff = std::max(diff, std::abs(psi[k] - lin[k]));
            top = std::max(top, std::abs(psi[k]));
        }
        rel[i] = diff / top;
        sup[i++] = top;
    }
    CHECK(rel[0] < 0.05);
    CHECK(rel[1] / rel[0] == doctest::Approx(2.0).epsilon(0.05));
    CHECK(sup[1] / sup[0] == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("extrema localization on other signs") {
    const auto p = build_profile(plain(2), RadialGrid(0.5, 40.0, 1024), 1e-12);
    {
        const auto prob = MAProblem::bump(p, -0.1, 5.0, 8.0);
        const auto run = continuity_solve(prob, 10, 1e-9);
        const auto ext = verify_extrema_localization(run.psi, prob);
        CHECK(ext.sup_branch == "in_support");
        CHECK(ext.sup > 0.0);
        CHECK(ext.inf_branch == "nonnegative");
    }
    {
        std::vector<double> f(p.size(), 0.0);
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double t = p.t(k);
            if (t > 5.0 && t < 8.0) f[k] = 0.2 * std::sin(2.0 * M_PI * (t - 5.0) / 3.0) * std::exp(-1.0 / ((t - 5) * (8 - t)));
        }
        const auto prob = MAProblem::table(p, f, 5.0, 8.0);
        const auto run = continuity_solve(prob, 10, 1e-9);
        const auto ext = verify_extrema_localization(run.psi, prob);
        CHECK((ext.sup_branch == "in_support" || ext.sup <= 1e-9));
        CHECK((ext.inf_branch == "in_support" || ext.inf >= -1e-9));
    }
    {
        // a positive bump far from supp F breaks the dichotomy
        const auto prob = MAProblem::bump(p, 0.1, 5.0, 8.0);
        std::vector<double> psi(p.size(), 0.0);
        for (std::size_t k = 0; k < p.size(); ++k) psi[k] = 1e-3 * std::exp(-(p.t(k) - 15) * (p.t(k) - 15));
        psi.back() = 0.0;
        CHECK(kind_of([&] { verify_extrema_localization(make_potential(p, psi), prob); }) ==
              ErrorKind::Violation);
    }
}

TEST_CASE("derivative bound margin stable under refinement") {
    double margin[2];
    double c[2];
    int i = 0;
    for (std::size_t count : {1024u, 2047u}) {
        const auto p = build_profile(plain(2), RadialGrid(0.5, 60.0, count), 1e-12);
        const auto prob = MAProblem::bump(p, 0.1, 5.0, 8.0);
        const auto rep = verify_radial_derivative_bound(continuity_solve(prob, 5, 1e-10).psi, prob);
        margin[i] = rep.margin;
        c[i++] = rep.siepmann_c;
    }
    CHECK(std::abs(margin[0]) <= 1e-9);
    CHECK(std::abs(margin[1]) <= 1e-9);
    CHECK(c[0] == doctest::Approx(c[1]).epsilon(0.01));
}

TEST_CASE("decay check needs far field") {
    const auto& p = reference_profile();
    auto prob = MAProblem::bump(p, 0.1, 5.0, 8.0);
    prob.support_hi = 45.0;
    CHECK(kind_of([&] { verify_exponential_decay(reference_run().psi, prob); }) ==
          ErrorKind::InsufficientFarField);
    for (std::size_t k = 0; k < p.size(); k += 97) CHECK(barrier_defect(p, k) <= 1e-12);
}

TEST_CASE("continuity gives up when Newton cannot follow") {
    // amplitude far beyond what the grid can represent: steps shrink until stuck
    const auto p = build_profile(plain(2), RadialGrid(0.5, 30.0, 16), 1e-12);
    const auto prob = MAProblem::bump(p, -400.0, 2.0, 4.0);
    CHECK(kind_of([&] { continuity_solve(prob, 1, 1e-9); }) == ErrorKind::PathStuck);
}
