#include "soliton/soliton_profile.hpp"

#include "soliton/errors.hpp"
#include "soliton/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

namespace soliton {

namespace {

constexpr double kBracketOffset = 1e-14;
constexpr double kBisectionBelow = 1e-6;
constexpr int kMaxIterations = 400;

double factorial(int k) {
    double f = 1.0;
    for (int j = 2; j <= k; ++j) f *= j;
    return f;
}

// H(s) = ∫_0^s x^{n-1} e^x dx as a positive series; used for moderate s only.
double h_series(double s, int n) {
    if (s <= 0.0) return 0.0;
    double term = std::pow(s, n);  // s^{n+j}/j!
    CompensatedSum acc;
    for (int j = 0; j < 400; ++j) {
        const double contribution = term / (n + j);
        acc.add(contribution);
        if (contribution < 1e-18 * acc.value()) break;
        term *= s / (j + 1);
    }
    return acc.value();
}

// E = G(a + d) e^{-(a + d)} = ∫_a^{a+d} x^{n-1} e^{x-a-d} dx, positive for d > 0.
// Taking the offset d rather than s keeps full relative precision near the apex.
double scaled_G(double d, int n, double a) {
    const double s = a + d;
    if (d <= 1.0) {
        static const GaussRule rule = gauss_legendre(24);
        CompensatedSum acc;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double u = d * rule.nodes[q];
            acc.add(rule.weights[q] * std::pow(a + u, n - 1) * std::exp(u - d));
        }
        return d * acc.value();
    }
    if (s <= n + 2.0) {
        return (h_series(s, n) - h_series(a, n)) * std::exp(-s);
    }
    return eval_F(s, n) - eval_F(a, n) * std::exp(-d);
}

double target_log(double t, int n) { return n * t - std::log(static_cast<double>(n)); }

}  // namespace

double eval_F(double s, int n) {
    if (n < 2) throw Error(ErrorKind::InvalidArgument, "eval_F requires n >= 2");
    // Horner on coefficients c_k = (-1)^{n-k-1} (n-1)!/k!.
    const double top = factorial(n - 1);
    double acc = 0.0;
    for (int k = n - 1; k >= 0; --k) {
        const double c = ((n - k - 1) % 2 == 0 ? 1.0 : -1.0) * top / factorial(k);
        acc = acc * s + c;
    }
    return acc;
}

double log_G_offset(double offset, int n, double a) {
    if (!(offset > 0.0)) return -std::numeric_limits<double>::infinity();
    return a + offset + std::log(scaled_G(offset, n, a));
}

double log_G(double s, int n, double a) { return log_G_offset(s - a, n, a); }

double implicit_residual_offset(double offset, double t, const ConeSpec& spec) {
    const double target = target_log(t, spec.n);
    const double defect = std::expm1(log_G_offset(offset, spec.n, spec.a) - target);
    const double fa = std::abs(eval_F(spec.a, spec.n));
    const double other = fa > 0.0 ? std::exp(std::log(fa) + spec.a - target) : 0.0;
    return std::abs(defect) / (1.0 + other);
}

double implicit_residual(double phi, double t, const ConeSpec& spec) {
    return implicit_residual_offset(phi - spec.a, t, spec);
}

double solve_phi_offset(double t, const ConeSpec& spec, double tol, std::optional<double> guess) {
    if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
    const int n = spec.n;
    const double a = spec.a;
    const double target = target_log(t, n);
    auto h = [&](double d) { return log_G_offset(d, n, a) - target; };

    double lo = kBracketOffset;
    double hi = n * std::max(t, 1.0) + n - a;
    if (!(hi > lo) || !(h(lo) < 0.0) || !(h(hi) > 0.0)) {
        throw Error(ErrorKind::NoBracket, "root not bracketed in [a + 1e-14, n max(t,1) + n] at t = " +
                                              std::to_string(t));
    }

    double d = guess.value_or(0.5 * (lo + hi));
    if (!(d > lo && d < hi)) d = 0.5 * (lo + hi);

    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (int iter = 0;; ++iter) {
        if (iter == kMaxIterations) {
            throw Error(ErrorKind::NoConvergence, "iteration cap reached at t = " + std::to_string(t));
        }
        const double hd = h(d);
        if (hd == 0.0) break;
        if (hd < 0.0) lo = d; else hi = d;
        double next = d;
        // Newton's basin shrinks at the degenerate a = 0 root; bisect there.
        bool use_newton = a + d >= kBisectionBelow;
        if (use_newton) {
            const double slope = std::pow(a + d, n - 1) / scaled_G(d, n, a);
            next = d - hd / slope;
            if (!(next > lo && next < hi) || !std::isfinite(next)) use_newton = false;
        }
        if (!use_newton) {
            next = (hi > 16.0 * lo) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        }
        const bool settled = std::abs(next - d) <= 64.0 * eps * d;
        d = next;
        if (settled) break;
    }
    if (implicit_residual_offset(d, t, spec) <= tol) return d;
    throw Error(ErrorKind::NoConvergence, "residual above tolerance at t = " + std::to_string(t));
}

double solve_phi(double t, const ConeSpec& spec, double tol, std::optional<double> guess) {
    std::optional<double> offset_guess;
    if (guess) offset_guess = *guess - spec.a;
    return spec.a + solve_phi_offset(t, spec, tol, offset_guess);
}

PhiDerivatives derivatives(double phi, double t, const ConeSpec& spec) {
    if (!(phi > 0.0)) throw Error(ErrorKind::DomainError, "derivatives need phi > 0");
    const int n = spec.n;
    const double phi1 = std::exp(n * t - phi - (n - 1) * std::log(phi));
    const double bracket = n - phi1 - (n - 1) * phi1 / phi;
    const double phi2 = phi1 * bracket;
    const double ratio = phi1 / phi;
    const double phi3 = phi2 * bracket - phi1 * (phi2 + (n - 1) * (phi2 / phi - ratio * ratio));
    return {phi1, phi2, phi3};
}

Profile build_profile(const ConeSpec& spec, const RadialGrid& grid, double tol) {
    spec.validate();
    if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
    Profile p{spec, grid, {}, {}, {}, {}, {}, 0.0};
    const std::size_t count = grid.size();
    p.phi.resize(count);
    p.phi1.resize(count);
    p.phi2.resize(count);
    p.phi3.resize(count);
    p.residual.resize(count);

    std::optional<double> guess;
    for (std::size_t k = 0; k < count; ++k) {
        const double t = grid[k];
        double offset = 0.0;
        try {
            offset = solve_phi_offset(t, spec, tol, guess);
        } catch (const Error& e) {
            throw Error(e.kind(), "node " + std::to_string(k) + ": " + e.what());
        }
        const double phi = spec.a + offset;
        const auto d = derivatives(phi, t, spec);
        p.phi[k] = phi;
        p.phi1[k] = d.phi1;
        p.phi2[k] = d.phi2;
        p.phi3[k] = d.phi3;
        p.residual[k] = implicit_residual_offset(offset, t, spec);
        p.residual_max = std::max(p.residual_max, p.residual[k]);
        if (k + 1 < count) guess = offset + d.phi1 * (grid[k + 1] - t);
    }
    return p;
}

Profile profile_from_samples(const ConeSpec& spec, const RadialGrid& grid,
                             std::vector<double> phi, std::vector<double> phi1,
                             std::vector<double> phi2, std::vector<double> phi3,
                             std::vector<double> residual) {
    const std::size_t count = grid.size();
    if (phi.size() != count || phi1.size() != count || phi2.size() != count ||
        phi3.size() != count || residual.size() != count) {
        throw Error(ErrorKind::InvalidArgument, "profile arrays must match the grid size");
    }
    double rmax = 0.0;
    for (double r : residual) rmax = std::max(rmax, r);
    return Profile{spec, grid, std::move(phi), std::move(phi1), std::move(phi2),
                   std::move(phi3), std::move(residual), rmax};
}

ProfileInvariants check_profile_invariants(const Profile& p, double tol) {
    ProfileInvariants inv;
    const double n = p.spec.n;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (!(p.phi[k] > p.spec.a) && inv.above_a) {
            inv.above_a = false;
            inv.failures.push_back("phi > a violated at node " + std::to_string(k));
        }
        if (k > 0 && !(p.phi[k] > p.phi[k - 1]) && inv.monotone) {
            inv.monotone = false;
            inv.failures.push_back("phi not strictly increasing at node " + std::to_string(k));
        }
        if (!(p.phi1[k] > 0.0 && p.phi1[k] < n) && inv.slope_bounds) {
            inv.slope_bounds = false;
            inv.failures.push_back("0 < phi' < n violated at node " + std::to_string(k));
        }
        inv.residual_max = std::max(inv.residual_max, p.residual[k]);
    }
    if (!(inv.residual_max <= tol)) {
        inv.residual_ok = false;
        inv.failures.push_back("implicit-equation residual above tolerance");
    }
    return inv;
}

Expansion asymptotic_phi(double t, int n) {
    if (!(t > 1.0)) throw Error(ErrorKind::DomainError, "asymptotic_phi needs t > 1");
    const double nn = n;
    const double lt = std::log(t);
    const double ln = std::log(nn);
    const double value = nn * t - (nn - 1.0) * lt - nn * ln +
                         ((nn - 1.0) * (nn - 1.0) / nn) * lt / t +
                         ((nn - 1.0) / nn + (nn - 1.0) * ln) / t;
    return {value, lt * lt / (t * t)};
}

double expansion_error_exponent(const Profile& p) {
    if (p.grid.t_max() < 1e3) {
        throw Error(ErrorKind::InsufficientRange, "expansion fit needs t_max >= 1e3");
    }
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double t = p.t(k);
        if (t < 50.0) continue;
        const double err = std::abs(p.phi[k] - asymptotic_phi(t, p.spec.n).value);
        if (!(err > 0.0)) continue;
        const double lt = std::log(t);
        x.push_back(lt);
        y.push_back(std::log(err / (lt * lt)));
    }
    if (x.size() < 16) {
        throw Error(ErrorKind::InsufficientRange,
                    "expansion fit window has " + std::to_string(x.size()) + " usable nodes (< 16)");
    }
    return least_squares(x, y).slope;
}

ExpansionSpread expansion_error_spread(const Profile& p) {
    if (p.grid.t_max() < 1e3) {
        throw Error(ErrorKind::InsufficientRange, "expansion spread needs t_max >= 1e3");
    }
    ExpansionSpread out;
    out.min_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double t = p.t(k);
        if (t < 50.0) continue;
        const auto e = asymptotic_phi(t, p.spec.n);
        const double ratio = std::abs(p.phi[k] - e.value) / e.order;
        out.min_ratio = std::min(out.min_ratio, ratio);
        out.max_ratio = std::max(out.max_ratio, ratio);
    }
    out.spread = (out.max_ratio - out.min_ratio) / (out.max_ratio + out.min_ratio);
    return out;
}

void write_profile_csv(const Profile& p, std::ostream& out) {
    out << "t,phi,phi1,phi2,phi3,residual\n";
    char line[256];
    for (std::size_t k = 0; k < p.size(); ++k) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", p.t(k),
                      p.phi[k], p.phi1[k], p.phi2[k], p.phi3[k], p.residual[k]);
        out << line;
    }
}

}  // namespace soliton
