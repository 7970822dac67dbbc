#include "soliton/ma_solver.hpp"

#include "soliton/energy_functionals.hpp"
#include "soliton/errors.hpp"
#include "soliton/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace soliton {

RadialPotential make_potential(const Profile& profile, std::vector<double> psi) {
    const std::size_t count = profile.size();
    if (psi.size() != count) throw Error(ErrorKind::InvalidArgument, "psi must have one sample per node");
    if (count < 4) throw Error(ErrorKind::InvalidArgument, "potential needs at least 4 nodes");
    const double h = profile.grid.spacing();
    RadialPotential out;
    out.grid = profile.grid;
    out.psi = std::move(psi);
    const auto& v = out.psi;
    out.psi1.resize(count);
    out.psi2.resize(count);
    out.psi1[0] = 0.0;
    out.psi2[0] = 2.0 * (v[1] - v[0]) / (h * h);
    for (std::size_t k = 1; k + 1 < count; ++k) {
        out.psi1[k] = (v[k + 1] - v[k - 1]) / (2.0 * h);
        out.psi2[k] = (v[k + 1] - 2.0 * v[k] + v[k - 1]) / (h * h);
    }
    const std::size_t e = count - 1;
    out.psi1[e] = (3.0 * v[e] - 4.0 * v[e - 1] + v[e - 2]) / (2.0 * h);
    out.psi2[e] = (2.0 * v[e] - 5.0 * v[e - 1] + 4.0 * v[e - 2] - v[e - 3]) / (h * h);
    out.admissible = true;
    for (std::size_t k = 0; k < count; ++k) {
        if (!(profile.phi[k] + 2.0 * out.psi1[k] > 0.0) || !(profile.phi1[k] + 2.0 * out.psi2[k] > 0.0)) {
            out.admissible = false;
            break;
        }
    }
    return out;
}

namespace {

void check_support(const Profile& profile, const std::vector<double>& f, double lo, double hi) {
    const auto& g = profile.grid;
    if (f.size() != profile.size()) throw Error(ErrorKind::InvalidArgument, "F must have one sample per node");
    if (!(lo < hi)) throw Error(ErrorKind::InvalidArgument, "support must satisfy lo < hi");
    if (!(lo > g.t_min() && hi < g.t_max())) {
        throw Error(ErrorKind::InvalidArgument, "supp F must lie strictly inside the grid");
    }
    if (g.t_max() < hi + 20.0) {
        throw Error(ErrorKind::InvalidArgument, "t_max must be at least 20 beyond the support of F");
    }
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (!std::isfinite(f[k])) throw Error(ErrorKind::InvalidArgument, "F must be finite");
        if (f[k] != 0.0 && (g[k] < lo || g[k] > hi)) {
            throw Error(ErrorKind::InvalidArgument, "F must vanish outside its declared support");
        }
    }
}

}  // namespace

MAProblem MAProblem::bump(Profile profile, double amplitude, double lo, double hi) {
    std::vector<double> f(profile.size(), 0.0);
    for (std::size_t k = 0; k < profile.size(); ++k) {
        const double x = (2.0 * profile.t(k) - lo - hi) / (hi - lo);
        if (std::abs(x) < 1.0) f[k] = amplitude * std::exp(1.0 - 1.0 / (1.0 - x * x));
    }
    return table(std::move(profile), std::move(f), lo, hi);
}

MAProblem MAProblem::table(Profile profile, std::vector<double> f, double lo, double hi) {
    check_support(profile, f, lo, hi);
    MAProblem p{std::move(profile), std::move(f), lo, hi, 1.0};
    return p;
}

std::vector<double> weight_log_ratio(const RadialPotential& psi, const Profile& profile) {
    const int n = profile.spec.n;
    std::vector<double> out(psi.psi.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double x = 2.0 * psi.psi1[k] / profile.phi[k];
        const double y = 2.0 * psi.psi2[k] / profile.phi1[k];
        if (!(x > -1.0) || !(y > -1.0)) {
            throw Error(ErrorKind::Inadmissible, "tau_psi loses positivity at node " + std::to_string(k));
        }
        out[k] = (n - 1) * std::log1p(x) + std::log1p(y) + 2.0 * psi.psi1[k];
    }
    return out;
}

std::vector<double> ma_residual(const RadialPotential& psi, const MAProblem& prob) {
    auto r = weight_log_ratio(psi, prob.profile);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] -= prob.s * prob.f[k];
    r.back() = 0.0;
    return r;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

LinearizedOperator linearize(const RadialPotential& psi, const Profile& profile) {
    const int n = profile.spec.n;
    const std::size_t size = psi.psi.size() - 1;
    const double h = profile.grid.spacing();
    LinearizedOperator op;
    op.sub.assign(size, 0.0);
    op.diag.assign(size, 0.0);
    op.super.assign(size, 0.0);
    for (std::size_t k = 0; k < size; ++k) {
        const double b = 2.0 / (profile.phi1[k] + 2.0 * psi.psi2[k]);
        const double c = 2.0 * (n - 1) / (profile.phi[k] + 2.0 * psi.psi1[k]) + 2.0;
        op.diag[k] = -2.0 * b / (h * h);
        if (k == 0) {
            op.super[k] = 2.0 * b / (h * h);
        } else {
            op.sub[k] = b / (h * h) - c / (2.0 * h);
            op.super[k] = b / (h * h) + c / (2.0 * h);
        }
    }
    return op;
}

std::vector<double> LinearizedOperator::apply(const std::vector<double>& v) const {
    const std::size_t size = diag.size();
    std::vector<double> out(size + 1, 0.0);
    for (std::size_t k = 0; k < size; ++k) {
        double acc = diag[k] * v[k] + super[k] * (k + 1 < size ? v[k + 1] : 0.0);
        if (k > 0) acc += sub[k] * v[k - 1];
        out[k] = acc;
    }
    return out;
}

NewtonResult newton_step(const RadialPotential& psi, const MAProblem& prob, double tol) {
    if (!psi.admissible) throw Error(ErrorKind::Inadmissible, "Newton step from an inadmissible potential");
    const auto r = ma_residual(psi, prob);
    const double before = max_abs(r);
    NewtonResult out{psi, 1.0, before, before};
    if (before <= tol) {
        out.damping = 0.0;
        return out;
    }
    const auto op = linearize(psi, prob.profile);
    const std::size_t size = op.diag.size();
    std::vector<double> delta(size);
    for (std::size_t k = 0; k < size; ++k) delta[k] = -r[k];
    if (!solve_tridiagonal(op.sub, op.diag, op.super, delta)) {
        throw Error(ErrorKind::SingularSystem, "zero pivot in the linearized Monge-Ampere system");
    }
    const double floor = std::ldexp(1.0, -20);
    for (double alpha = 1.0; alpha >= floor; alpha *= 0.5) {
        std::vector<double> trial = psi.psi;
        for (std::size_t k = 0; k < size; ++k) trial[k] += alpha * delta[k];
        auto candidate = make_potential(prob.profile, std::move(trial));
        if (!candidate.admissible) continue;
        const double after = max_abs(ma_residual(candidate, prob));
        if (after < before) {
            out.psi = std::move(candidate);
            out.damping = alpha;
            out.residual_after = after;
            return out;
        }
    }
    throw Error(ErrorKind::LineSearchFailed, "no admissible step above 2^-20 reduces the residual");
}

namespace {

struct Extremum {
    double value;
    std::size_t arg;
    bool in_support;
};

Extremum locate(const RadialPotential& psi, const MAProblem& prob, bool upper, double tol) {
    const auto& v = psi.psi;
    const auto it = upper ? std::max_element(v.begin(), v.end()) : std::min_element(v.begin(), v.end());
    Extremum e{*it, static_cast<std::size_t>(it - v.begin()), false};
    // ties within tol count as attained on the support (ψ is flat left of supp F)
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (!prob.in_support(psi.grid[k])) continue;
        if (upper ? v[k] >= e.value - tol : v[k] <= e.value + tol) {
            e.in_support = true;
            break;
        }
    }
    return e;
}

TraceRecord make_record(const RadialPotential& psi, const MAProblem& prob, double s, int iters,
                        double residual, const std::vector<double>& previous) {
    TraceRecord rec;
    rec.s = s;
    rec.newton_iters = iters;
    rec.residual_max = residual;
    const double tol = 1e-9;
    const auto hi = locate(psi, prob, true, tol);
    const auto lo = locate(psi, prob, false, tol);
    rec.sup_psi = hi.value;
    rec.inf_psi = lo.value;
    rec.arg_sup_in_support = hi.in_support;
    rec.arg_inf_in_support = lo.in_support;
    rec.energy_i = energy_I(psi, prob);
    rec.energy_j = energy_J(PotentialPath::linear(psi.psi), prob).value;
    for (std::size_t k = 0; k < previous.size(); ++k) {
        rec.step_change = std::max(rec.step_change, std::abs(psi.psi[k] - previous[k]));
    }
    return rec;
}

}  // namespace

ContinuityResult continuity_solve(const MAProblem& prob, int steps, double tol) {
    if (steps < 1) throw Error(ErrorKind::InvalidArgument, "steps must be >= 1");
    const std::size_t count = prob.profile.size();
    ContinuityResult out;
    out.psi = make_potential(prob.profile, std::vector<double>(count, 0.0));
    if (max_abs(prob.f) == 0.0) {
        MAProblem at_one = prob;
        at_one.s = 1.0;
        out.trace.records.push_back(make_record(out.psi, at_one, 1.0, 0, 0.0, out.psi.psi));
        return out;
    }
    const double max_step = 1.0 / steps;
    const double min_step = std::ldexp(1.0, -20);
    constexpr int max_iters = 40;
    double s = 0.0;
    double ds = max_step;
    int easy = 0;
    MAProblem work = prob;
    while (s < 1.0) {
        const double target = std::min(1.0, s + ds);
        work.s = target;
        RadialPotential trial = out.psi;
        int iters = 0;
        double residual = max_abs(ma_residual(trial, work));
        bool ok = true;
        try {
            while (residual > tol) {
                if (++iters > max_iters) {
                    ok = false;
                    break;
                }
                auto step = newton_step(trial, work, tol);
                trial = std::move(step.psi);
                residual = step.residual_after;
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::LineSearchFailed && e.kind() != ErrorKind::Inadmissible &&
                e.kind() != ErrorKind::SingularSystem) {
                throw;
            }
            ok = false;
        }
        if (!ok) {
            easy = 0;
            ds *= 0.5;
            if (ds < min_step) {
                throw Error(ErrorKind::PathStuck,
                            "continuity step fell below 2^-20 at s = " + std::to_string(s));
            }
            continue;
        }
        out.trace.records.push_back(make_record(trial, work, target, iters, residual, out.psi.psi));
        out.psi = std::move(trial);
        s = target;
        if (iters <= 3) {
            if (++easy >= 3) {
                ds = std::min(2.0 * ds, max_step);
                easy = 0;
            }
        } else {
            easy = 0;
        }
    }
    return out;
}

ExtremaReport verify_extrema_localization(const RadialPotential& psi, const MAProblem& prob, double tol) {
    const auto hi = locate(psi, prob, true, tol);
    const auto lo = locate(psi, prob, false, tol);
    ExtremaReport rep;
    rep.sup = hi.value;
    rep.inf = lo.value;
    rep.arg_sup_t = psi.grid[hi.arg];
    rep.arg_inf_t = psi.grid[lo.arg];
    if (hi.in_support && hi.value >= -tol) {
        rep.sup_branch = "in_support";
    } else if (hi.value <= tol) {
        rep.sup_branch = "nonpositive";
    } else {
        throw Error(ErrorKind::Violation, "positive supremum attained off the support of F");
    }
    if (lo.in_support && lo.value <= tol) {
        rep.inf_branch = "in_support";
    } else if (lo.value >= -tol) {
        rep.inf_branch = "nonnegative";
    } else {
        throw Error(ErrorKind::Violation, "negative infimum attained off the support of F");
    }
    return rep;
}

DerivativeBoundReport verify_radial_derivative_bound(const RadialPotential& psi, const MAProblem& prob,
                                                     double tol) {
    const auto& p = prob.profile;
    double min_phi = std::numeric_limits<double>::infinity();
    double min_shifted = std::numeric_limits<double>::infinity();
    double sup_d = 0.0;
    double sup_psi = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        min_phi = std::min(min_phi, p.phi[k]);
        min_shifted = std::min(min_shifted, p.phi[k] + 2.0 * psi.psi1[k]);
        sup_d = std::max(sup_d, std::abs(4.0 * psi.psi1[k]));
        sup_psi = std::max(sup_psi, std::abs(psi.psi[k]));
    }
    DerivativeBoundReport rep;
    rep.margin = min_shifted - min_phi;
    rep.siepmann_c = sup_psi > 0.0 ? sup_d / std::sqrt(sup_psi) : 0.0;
    if (rep.margin < -tol) {
        throw Error(ErrorKind::Violation, "phi + 2 psi' drops below min phi by " + std::to_string(-rep.margin));
    }
    return rep;
}

double barrier_defect(const Profile& p, std::size_t k) {
    const int n = p.spec.n;
    const double phi = p.phi[k];
    const double d1 = p.phi1[k];
    const double d2 = p.phi2[k];
    // each term divided by e^{-φ}
    const double laplace_barrier = 2.0 * (d1 * d1 - d2) / d1 - 2.0 * (n - 1) * d1 / phi;
    const double drift_barrier = -2.0 * d1;
    const double laplace_phi = 2.0 * d2 / d1 + 2.0 * (n - 1) * d1 / phi;
    const double scale = std::abs(laplace_barrier) + std::abs(drift_barrier) + std::abs(laplace_phi);
    return std::abs(laplace_barrier + drift_barrier + laplace_phi) / scale;
}

DecayReport verify_exponential_decay(const RadialPotential& psi, const MAProblem& prob) {
    const auto& p = prob.profile;
    if (p.grid.t_max() < prob.support_hi + 20.0) {
        throw Error(ErrorKind::InsufficientFarField, "grid must extend 20 beyond the support of F");
    }
    DecayReport rep;
    rep.fit_lo = prob.support_hi + 2.0;
    rep.fit_hi = p.grid.t_max() - 8.0;
    std::vector<double> x, y;
    for (std::size_t k = 0; k < p.size(); ++k) {
        rep.barrier_defect = std::max(rep.barrier_defect, barrier_defect(p, k));
        const double t = p.t(k);
        if (t < rep.fit_lo || t > rep.fit_hi) continue;
        if (std::abs(psi.psi[k]) > 1e-300) {
            x.push_back(-p.phi[k]);
            y.push_back(std::log(std::abs(psi.psi[k])));
        }
    }
    if (x.size() < 8) {
        rep.degenerate = true;
        rep.slope = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }
    rep.slope = least_squares(x, y).slope;
    return rep;
}

PathContinuity verify_path_continuity(const ContinuityTrace& trace) {
    PathContinuity out;
    std::vector<double> q;
    double prev_s = 0.0;
    for (const auto& rec : trace.records) {
        if (rec.s > prev_s) q.push_back(rec.step_change / (rec.s - prev_s));
        prev_s = rec.s;
    }
    for (std::size_t i = 0; i < q.size(); ++i) {
        out.max_quotient = std::max(out.max_quotient, q[i]);
        if (i > 0 && q[i] > 0.0 && q[i - 1] > 0.0) {
            out.max_ratio = std::max({out.max_ratio, q[i] / q[i - 1], q[i - 1] / q[i]});
        }
    }
    return out;
}

void write_solution_csv(const RadialPotential& psi, const MAProblem& prob, std::ostream& out) {
    const auto r = ma_residual(psi, prob);
    out << "t,psi,psi1,psi2,residual\n";
    char buf[160];
    for (std::size_t k = 0; k < psi.psi.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", psi.grid[k], psi.psi[k], psi.psi1[k],
                      psi.psi2[k], r[k]);
        out << buf;
    }
}

}  // namespace soliton
