#include "soliton/drift_spectral.hpp"

#include "soliton/errors.hpp"
#include "soliton/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>

namespace soliton {

double PowerLaw::operator()(double s) const { return coefficient * std::pow(s, -power); }

ModeData ModeData::sampled(double lambda, double beta, const RadialGrid& grid,
                           std::vector<double> q, double envelope) {
    if (q.size() != grid.size()) {
        throw Error(ErrorKind::InvalidArgument, "Q must have one sample per grid node");
    }
    ModeData d;
    d.lambda = lambda;
    d.beta = beta;
    d.grid = grid;
    d.q = std::move(q);
    if (envelope <= 0.0) {
        for (std::size_t k = 0; k < grid.size(); ++k) {
            envelope = std::max(envelope, std::abs(d.q[k]) * std::pow(grid[k], beta));
        }
    }
    d.envelope = envelope;
    return d;
}

ModeData ModeData::power_law(double lambda, double beta, const RadialGrid& grid, PowerLaw law) {
    if (law.power < beta) {
        throw Error(ErrorKind::InvalidArgument, "power-law Q must decay at least like t^{-beta}");
    }
    ModeData d;
    d.lambda = lambda;
    d.beta = beta;
    d.grid = grid;
    d.q.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) d.q[k] = law(grid[k]);
    d.envelope = std::abs(law.coefficient);
    d.analytic = law;
    return d;
}

double mode_exponent_margin(double lambda, double beta, int n) {
    return 1.0 - beta - lambda / (4.0 * n);
}

namespace {

void check_mode(const ModeData& data, const ConeSpec& spec) {
    if (!(data.beta > 0.0 && data.beta < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "beta must lie in (0, 1)");
    }
    if (!(data.lambda >= 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be >= 0");
    const auto& sp = spec.link_spectrum;
    const bool listed = std::any_of(sp.begin(), sp.end(), [&](double l) {
        return std::abs(l - data.lambda) <= 1e-12 * std::max(1.0, l);
    });
    if (!listed) throw Error(ErrorKind::InvalidArgument, "lambda is not in the link spectrum");
    if (data.grid.t_min() != 1.0) throw Error(ErrorKind::InvalidArgument, "mode grids must start at t = 1");
    if (data.q.size() != data.grid.size()) {
        throw Error(ErrorKind::InvalidArgument, "Q must have one sample per grid node");
    }
    if (data.grid.size() < 7) throw Error(ErrorKind::InvalidArgument, "mode grids need at least 7 nodes");
}

// ∫ over each grid interval of Q(s)s^{-p}.
std::vector<double> interval_integrals(const ModeData& data, double p) {
    const auto& g = data.grid;
    const std::size_t count = g.size();
    std::vector<double> out(count - 1);
    if (data.analytic) {
        static const GaussRule rule = gauss_legendre(10);
        const PowerLaw law = *data.analytic;
        for (std::size_t k = 0; k + 1 < count; ++k) {
            const double lo = g[k];
            const double w = g[k + 1] - lo;
            double acc = 0.0;
            for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
                const double s = lo + w * rule.nodes[j];
                acc += rule.weights[j] * law.coefficient * std::pow(s, -(law.power + p));
            }
            out[k] = acc * w;
        }
    } else {
        std::vector<double> integrand(count);
        for (std::size_t k = 0; k < count; ++k) integrand[k] = data.q[k] * std::pow(g[k], -p);
        const auto cum = cumulative_integral(integrand, g.spacing());
        for (std::size_t k = 0; k + 1 < count; ++k) out[k] = cum[k + 1] - cum[k];
    }
    return out;
}

}  // namespace

ModeSolution solve_mode(const ModeData& data, const ConeSpec& spec, double tol) {
    check_mode(data, spec);
    const int n = spec.n;
    const double p = data.lambda / (4.0 * n);
    const double margin = mode_exponent_margin(data.lambda, data.beta, n);
    if (std::abs(margin) < 1e-9) {
        throw Error(ErrorKind::CriticalExponent, "1 - beta - lambda/(4n) is within 1e-9 of zero");
    }
    const auto& g = data.grid;
    const std::size_t count = g.size();
    const auto pieces = interval_integrals(data, p);

    ModeSolution sol;
    sol.grid = g;
    sol.u.assign(count, 0.0);
    const double t_max = g.t_max();
    const double t_half = 0.5 * t_max;
    if (margin > 0.0) {
        sol.branch = Branch::Forward;
        CompensatedSum acc;
        for (std::size_t k = 1; k < count; ++k) {
            acc.add(pieces[k - 1]);
            sol.u[k] = 0.25 * std::pow(g[k], p) * acc.value();
        }
        sol.tail_bound = 0.0;
    } else {
        sol.branch = Branch::Backward;
        const double decay = data.beta + p - 1.0;  // > 0
        double tail = 0.0;
        if (data.analytic) {
            const PowerLaw law = *data.analytic;
            const double e = law.power + p - 1.0;
            tail = law.coefficient * std::pow(t_max, -e) / e;
            // only rounding of the closed form remains
            sol.tail_bound = 0.25 * std::pow(t_half, p) * 8.0 * std::numeric_limits<double>::epsilon() *
                             std::abs(tail);
        } else {
            sol.tail_bound = 0.25 * std::pow(t_half, p) * data.envelope * std::pow(t_max, -decay) / decay;
        }
        CompensatedSum acc;
        acc.add(tail);
        sol.u[count - 1] = -0.25 * std::pow(g[count - 1], p) * tail;
        for (std::size_t k = count - 1; k-- > 0;) {
            acc.add(pieces[k]);
            sol.u[k] = -0.25 * std::pow(g[k], p) * acc.value();
        }
        // u at t_max/2 by linear interpolation between nodes
        const double pos = (t_half - g.t_min()) / g.spacing();
        const std::size_t i = std::min(static_cast<std::size_t>(pos), count - 2);
        const double frac = pos - static_cast<double>(i);
        const double u_half = (1.0 - frac) * sol.u[i] + frac * sol.u[i + 1];
        if (sol.tail_bound > tol * std::abs(u_half)) {
            throw Error(ErrorKind::TailDominates,
                        "truncated tail bound " + std::to_string(sol.tail_bound) +
                            " exceeds tol * |u(t_max/2)|");
        }
    }

    const auto du = differentiate(sol.u, g.spacing(), 1);
    sol.residual.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double nq = n * data.q[k];
        const double r = 4.0 * n * du[k] - data.lambda / g[k] * sol.u[k] - nq;
        sol.residual[k] = std::abs(r) / (1.0 + std::abs(nq));
        // interior nodes: the ones with a centred stencil
        if (k >= 3 && k + 3 < count) sol.residual_max = std::max(sol.residual_max, sol.residual[k]);
        sol.fitted_c = std::max(sol.fitted_c, std::abs(sol.u[k]) * std::pow(g[k], data.beta - 1.0));
    }
    return sol;
}

std::vector<ModeSolution> solve_modes(const std::vector<ModeData>& batch, const ConeSpec& spec,
                                      double tol, int threads) {
    std::vector<ModeSolution> out(batch.size());
    std::vector<std::exception_ptr> errors(batch.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < batch.size(); i = next++) {
            try {
                out[i] = solve_mode(batch[i], spec, tol);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int count = std::max(1, std::min<int>(threads, static_cast<int>(batch.size())));
    std::vector<std::thread> pool;
    for (int i = 1; i < count; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

double max_relative_deviation(const ModeSolution& sol, const PowerLaw& exact) {
    double worst = 0.0;
    for (std::size_t k = 0; k < sol.u.size(); ++k) {
        const double e = exact(sol.grid[k]);
        if (e == 0.0) throw Error(ErrorKind::DomainError, "closed form vanishes on the grid");
        worst = std::max(worst, std::abs(sol.u[k] / e - 1.0));
    }
    return worst;
}

ModeRefinement mode_refinement_check(const ModeData& data, const ConeSpec& spec, double tol) {
    const auto& g = data.grid;
    const std::size_t count = (g.size() + 1) / 2;
    const RadialGrid coarse(g.t_min(), g[2 * (count - 1)], count);
    ModeData half;
    if (data.analytic) {
        half = ModeData::power_law(data.lambda, data.beta, coarse, *data.analytic);
    } else {
        std::vector<double> q(count);
        for (std::size_t k = 0; k < count; ++k) q[k] = data.q[2 * k];
        half = ModeData::sampled(data.lambda, data.beta, coarse, std::move(q), data.envelope);
    }
    ModeRefinement out;
    out.fitted_c_fine = solve_mode(data, spec, tol).fitted_c;
    out.fitted_c_coarse = solve_mode(half, spec, tol).fitted_c;
    const double scale = std::max(std::abs(out.fitted_c_fine), std::abs(out.fitted_c_coarse));
    out.relative_change = scale > 0.0 ? std::abs(out.fitted_c_fine - out.fitted_c_coarse) / scale : 0.0;
    return out;
}

SecondOrderRemainder second_order_residual(const ModeSolution& sol, const ModeData& data,
                                           const ConeSpec& spec) {
    const int n = spec.n;
    const auto& g = sol.grid;
    const auto du = differentiate(sol.u, g.spacing(), 1);
    const auto ddu = differentiate(sol.u, g.spacing(), 2);
    SecondOrderRemainder out;
    std::vector<double> x, y;
    const double fit_from = g.t_max() >= 100.0 ? 10.0 : g[g.size() / 2];
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double t = g[k];
        const double r = 4.0 * ddu[k] + (4.0 * n + 4.0 * (n - 1) / t) * du[k] - data.lambda / t * sol.u[k] -
                         n * data.q[k];
        out.max_norm = std::max(out.max_norm, std::abs(r));
        if (t >= fit_from && r != 0.0) {
            x.push_back(std::log(t));
            y.push_back(std::log(std::abs(r)));
        }
    }
    if (out.max_norm == 0.0) {
        out.exponent = -std::numeric_limits<double>::infinity();
    } else {
        out.exponent = x.size() >= 2 ? least_squares(x, y).slope : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

double weyl_constant(const ConeSpec& spec) {
    const auto& sp = spec.link_spectrum;
    const double alpha = 2.0 / (2.0 * spec.n - 1.0);
    double c = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < sp.size(); ++i) {
        c = std::min(c, sp[i] / std::pow(static_cast<double>(i), alpha));
    }
    return c;
}

std::size_t weyl_truncation(const ConeSpec& spec, int k_target) {
    spec.validate();
    const auto& sp = spec.link_spectrum;
    const std::size_t len = sp.size();
    if (len == 1) return 1;
    if (k_target < 1) throw Error(ErrorKind::InvalidArgument, "k_target must be >= 1");
    constexpr double threshold = 1e-10;
    const double alpha = 2.0 / (2.0 * spec.n - 1.0);
    const double ak = alpha * k_target;
    const double c = weyl_constant(spec);
    if (!(c > 0.0)) throw Error(ErrorKind::SpectrumTooShort, "spectrum violates the Weyl lower bound");
    if (ak <= 1.0) {
        throw Error(ErrorKind::SpectrumTooShort,
                    "k_target * 2/(2n-1) <= 1: the Weyl tail does not converge");
    }
    // Σ_{i >= len} (c i^α)^{-k} <= c^{-k} ∫_{len-1}^∞ x^{-αk} dx
    const double beyond =
        std::pow(c, -k_target) * std::pow(static_cast<double>(len - 1), 1.0 - ak) / (ak - 1.0);
    if (!(beyond < threshold)) {
        throw Error(ErrorKind::SpectrumTooShort,
                    "extrapolated tail past the supplied spectrum is " + std::to_string(beyond));
    }
    // tail[N] = Σ_{i >= N} over the supplied values, accumulated from the end
    double tail = 0.0;
    std::size_t keep = len;
    for (std::size_t i = len; i-- > 1;) {
        const double with_i = tail + std::pow(sp[i], -k_target);
        if (!(with_i + beyond < threshold)) break;
        tail = with_i;
        keep = i;
    }
    return keep;
}

DirichletSolution dirichlet_drift_solve(const Profile& profile, const std::vector<double>& f,
                                        double r_cut, double tol) {
    const auto& g = profile.grid;
    const std::size_t count = profile.size();
    if (f.size() != count) throw Error(ErrorKind::InvalidArgument, "F must have one sample per node");
    if (!(r_cut > g.t_min() && r_cut <= g.t_max())) {
        throw Error(ErrorKind::InvalidArgument, "R_cut must lie inside the grid");
    }
    std::size_t m = static_cast<std::size_t>((r_cut - g.t_min()) / g.spacing());
    m = std::min(m, count - 1);
    while (m + 1 < count && g[m + 1] <= r_cut) ++m;
    while (m > 0 && g[m] > r_cut) --m;
    if (m < 2) throw Error(ErrorKind::InvalidArgument, "R_cut leaves fewer than 3 nodes");
    for (std::size_t k = m; k < count; ++k) {
        if (f[k] != 0.0) throw Error(ErrorKind::InvalidArgument, "F must vanish for t >= R_cut");
    }

    const int n = profile.spec.n;
    const double h = g.spacing();
    // rows 0..m-1 are unknowns, u_m = 0
    std::vector<double> sub(m), diag(m), sup(m), rhs(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double a = 4.0 / profile.phi1[k];
        const double b = 4.0 * (n - 1) / profile.phi[k] + 4.0;
        const double lower = a / (h * h) - b / (2.0 * h);
        const double upper = a / (h * h) + b / (2.0 * h);
        if (!(lower > 0.0) || !(upper > 0.0)) {
            throw Error(ErrorKind::SingularSystem,
                        "central differences lose diagonal dominance at node " + std::to_string(k) +
                            "; refine the grid");
        }
        diag[k] = -2.0 * a / (h * h);
        if (k == 0) {
            // ghost node u_{-1} = u_1
            sub[k] = 0.0;
            sup[k] = 2.0 * a / (h * h);
        } else {
            sub[k] = lower;
            sup[k] = upper;
        }
        rhs[k] = 2.0 * f[k];
    }
    auto u = rhs;
    if (!solve_tridiagonal(sub, diag, sup, u)) {
        throw Error(ErrorKind::SingularSystem, "zero pivot in the Dirichlet system");
    }
    DirichletSolution out;
    out.boundary = m;
    out.u.assign(count, 0.0);
    std::copy(u.begin(), u.end(), out.u.begin());
    for (std::size_t k = 0; k < m; ++k) {
        const double left = k > 0 ? sub[k] * out.u[k - 1] : 0.0;
        const double right = sup[k] * out.u[k + 1];
        const double centre = diag[k] * out.u[k];
        const double scale = std::abs(left) + std::abs(right) + std::abs(centre) + std::abs(rhs[k]);
        const double r = left + centre + right - rhs[k];
        if (scale > 0.0) out.residual_max = std::max(out.residual_max, std::abs(r) / scale);
    }
    if (out.residual_max > tol) {
        throw Error(ErrorKind::NoConvergence,
                    "Dirichlet residual " + std::to_string(out.residual_max) + " above tol");
    }
    return out;
}

double subsolution_ratio(const Profile& p, std::size_t k, double beta) {
    const int n = p.spec.n;
    const double phi = p.phi[k];
    const double d1 = p.phi1[k];
    const double d2 = p.phi2[k];
    return 4.0 * beta * beta * d1 - 4.0 * beta * d2 / d1 - 4.0 * (n - 1) * beta * d1 / phi - 4.0 * beta * d1;
}

namespace {

// Smallest generalized eigenvalue of the symmetric tridiagonal pencil (K, M),
// M positive definite, by Sturm-count bisection.
double smallest_pencil_eigenvalue(const std::vector<double>& kd, const std::vector<double>& ko,
                                  const std::vector<double>& md, const std::vector<double>& mo) {
    const std::size_t size = kd.size();
    auto below = [&](double sigma) {
        std::size_t negatives = 0;
        double d = kd[0] - sigma * md[0];
        for (std::size_t i = 0;;) {
            if (d < 0.0) ++negatives;
            if (++i == size) break;
            if (d == 0.0) d = std::numeric_limits<double>::min();
            const double off = ko[i - 1] - sigma * mo[i - 1];
            d = kd[i] - sigma * md[i] - off * off / d;
        }
        return negatives;
    };
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size; ++i) hi = std::min(hi, kd[i] / md[i]);
    while (below(hi) == 0) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (below(mid) > 0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

PoincareGap poincare_gap(const Profile& profile, double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw Error(ErrorKind::InvalidArgument, "beta must lie in (0, 1)");
    const auto& spec = profile.spec;
    const int n = spec.n;
    const std::size_t count = profile.size();
    PoincareGap out;
    out.beta = beta;
    out.certified_constant = beta * (1.0 - beta) * 4.0 * n / 2.0;

    std::size_t first = count;
    for (std::size_t k = count; k-- > 0;) {
        if (subsolution_ratio(profile, k, beta) <= -out.certified_constant) {
            first = k;
        } else {
            break;
        }
    }
    out.subsolution_holds = first < count;
    out.compact_set_t = out.subsolution_holds ? profile.t(first) : std::numeric_limits<double>::infinity();

    // P1 elements; unknowns are nodes 0..count-2 (u vanishes at t_max).
    // Entries are scaled by e^{-(φ_i+φ_j)/2} so nothing overflows.
    static const GaussRule rule = gauss_legendre(8);
    const std::size_t size = count - 1;
    std::vector<double> kd(size, 0.0), ko(size, 0.0), md(size, 0.0), mo(size, 0.0);
    const double h = profile.grid.spacing();
    for (std::size_t e = 0; e + 1 < count; ++e) {
        const double t0 = profile.t(e);
        const double p0 = profile.phi[e];
        const double p1 = profile.phi[e + 1];
        double k00 = 0, k01 = 0, k11 = 0, m00 = 0, m01 = 0, m11 = 0;
        double offset = p0 - spec.a;
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            const double x = rule.nodes[j];
            const double t = t0 + h * x;
            offset = solve_phi_offset(t, spec, 1e-13, offset);
            const double phi = spec.a + offset;
            const double phi1 = derivatives(phi, t, spec).phi1;
            const double log_w = (n - 1) * std::log(phi);
            const double w = rule.weights[j] * h;
            const double n0 = 1.0 - x;
            const double n1 = x;
            // stiffness: 4 e^φ φ^{n-1} (u')², basis slopes ∓1/h
            k00 += w * 4.0 * std::exp(phi - p0 + log_w) / (h * h);
            k11 += w * 4.0 * std::exp(phi - p1 + log_w) / (h * h);
            k01 -= w * 4.0 * std::exp(phi - 0.5 * (p0 + p1) + log_w) / (h * h);
            m00 += w * std::exp(phi - p0 + log_w) * phi1 * n0 * n0;
            m11 += w * std::exp(phi - p1 + log_w) * phi1 * n1 * n1;
            m01 += w * std::exp(phi - 0.5 * (p0 + p1) + log_w) * phi1 * n0 * n1;
        }
        kd[e] += k00;
        md[e] += m00;
        if (e + 1 < size) {
            kd[e + 1] += k11;
            md[e + 1] += m11;
            ko[e] = k01;
            mo[e] = m01;
        }
    }
    out.discrete_gap = smallest_pencil_eigenvalue(kd, ko, md, mo);
    return out;
}

const char* to_string(Branch branch) { return branch == Branch::Forward ? "forward" : "backward"; }

void write_mode_csv(const ModeSolution& sol, std::ostream& out) {
    out << "t,u,residual\n";
    char buf[128];
    for (std::size_t k = 0; k < sol.u.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", sol.grid[k], sol.u[k], sol.residual[k]);
        out << buf;
    }
}

}  // namespace soliton
