#include "soliton/energy_functionals.hpp"

#include "soliton/errors.hpp"
#include "soliton/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace soliton {

PotentialPath PotentialPath::linear(std::vector<double> psi) {
    PotentialPath p;
    p.kind = Kind::Linear;
    p.endpoint = std::move(psi);
    return p;
}

PotentialPath PotentialPath::reparam(std::vector<double> psi, std::function<double(double)> gamma,
                                     std::function<double(double)> gamma_prime) {
    PotentialPath p;
    p.kind = Kind::Reparam;
    p.endpoint = std::move(psi);
    p.gamma = std::move(gamma);
    p.gamma_prime = std::move(gamma_prime);
    return p;
}

PotentialPath PotentialPath::custom(std::function<std::vector<double>(double)> psi,
                                    std::function<std::vector<double>(double)> velocity) {
    PotentialPath p;
    p.kind = Kind::Custom;
    p.custom_psi = std::move(psi);
    p.custom_velocity = std::move(velocity);
    return p;
}

std::vector<double> PotentialPath::at(double u) const {
    if (kind == Kind::Custom) return custom_psi(u);
    const double c = kind == Kind::Linear ? u : gamma(u);
    std::vector<double> out(endpoint.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = c * endpoint[k];
    return out;
}

std::vector<double> PotentialPath::velocity(double u) const {
    if (kind == Kind::Custom) return custom_velocity(u);
    const double c = kind == Kind::Linear ? 1.0 : gamma_prime(u);
    std::vector<double> out(endpoint.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = c * endpoint[k];
    return out;
}

std::vector<double> log_reference_weight(const Profile& p) {
    const int n = p.spec.n;
    const double base = std::log(0.5 * n * p.spec.link_volume);
    std::vector<double> out(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        out[k] = base + p.phi[k] + (n - 1) * std::log(p.phi[k]) + std::log(p.phi1[k]);
    }
    return out;
}

namespace {

// -a_k · w0_k · expm1(L_k), formed through logarithms.
double weighted_term(double a, double log_w0, double log_ratio) {
    const double m = std::expm1(log_ratio);
    if (a == 0.0 || m == 0.0) return 0.0;
    const double sign = (a > 0.0) == (m > 0.0) ? -1.0 : 1.0;
    return sign * std::exp(std::log(std::abs(a)) + log_w0 + std::log(std::abs(m)));
}

// ∫ a (e^f τⁿ - e^{f_ψ} τ_ψⁿ) dt with a divergence guard on the last tenth of the grid.
double weighted_integral(const Profile& p, const std::vector<double>& a, const std::vector<double>& psi) {
    const auto pot = make_potential(p, psi);
    const auto ratio = weight_log_ratio(pot, p);
    const auto log_w0 = log_reference_weight(p);
    std::vector<double> integrand(p.size());
    double peak = 0.0;
    double tail = 0.0;
    const std::size_t tail_from = p.size() - p.size() / 10;
    for (std::size_t k = 0; k < p.size(); ++k) {
        integrand[k] = weighted_term(a[k], log_w0[k], ratio[k]);
        if (!std::isfinite(integrand[k])) {
            throw Error(ErrorKind::Divergent, "weighted integrand overflows at node " + std::to_string(k));
        }
        peak = std::max(peak, std::abs(integrand[k]));
        if (k >= tail_from) tail = std::max(tail, std::abs(integrand[k]));
    }
    if (peak > 0.0 && tail > 1e-6 * peak) {
        throw Error(ErrorKind::Divergent, "weighted integrand does not decay on the far field");
    }
    return simpson(integrand, p.grid.spacing());
}

Profile coarsen(const Profile& p) {
    const std::size_t count = (p.size() + 1) / 2;
    const double t_last = p.t(2 * (count - 1));
    std::vector<double> phi(count), phi1(count), phi2(count), phi3(count), res(count);
    for (std::size_t k = 0; k < count; ++k) {
        phi[k] = p.phi[2 * k];
        phi1[k] = p.phi1[2 * k];
        phi2[k] = p.phi2[2 * k];
        phi3[k] = p.phi3[2 * k];
        res[k] = p.residual[2 * k];
    }
    return profile_from_samples(p.spec, RadialGrid(p.grid.t_min(), t_last, count), phi, phi1, phi2, phi3, res);
}

std::vector<double> every_other(const std::vector<double>& v) {
    std::vector<double> out((v.size() + 1) / 2);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = v[2 * k];
    return out;
}

double j_on(const PotentialPath& path, const Profile& p, const GaussRule& rule, bool coarse) {
    CompensatedSum acc;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        const double u = rule.nodes[j];
        auto psi = path.at(u);
        auto vel = path.velocity(u);
        if (coarse) {
            psi = every_other(psi);
            vel = every_other(vel);
        }
        acc.add(rule.weights[j] * weighted_integral(p, vel, psi));
    }
    return acc.value();
}

}  // namespace

double energy_I(const RadialPotential& psi, const MAProblem& prob) {
    return weighted_integral(prob.profile, psi.psi, psi.psi);
}

double energy_J_density(const PotentialPath& path, const MAProblem& prob, double u) {
    return weighted_integral(prob.profile, path.velocity(u), path.at(u));
}

EnergyJ energy_J(const PotentialPath& path, const MAProblem& prob, int u_nodes) {
    const auto rule = gauss_legendre(u_nodes);
    const auto half = gauss_legendre(std::max(2, u_nodes / 2));
    EnergyJ out;
    out.value = j_on(path, prob.profile, rule, false);
    const double u_error = std::abs(out.value - j_on(path, prob.profile, half, false));
    // second-order grid error from a solve on every other node
    const double coarse = j_on(path, coarsen(prob.profile), rule, true);
    const double t_error = std::abs(out.value - coarse) / 3.0;
    out.error_estimate = u_error + t_error;
    return out;
}

double first_variation_check(const PotentialPath& path, const MAProblem& prob, int u_samples) {
    if (u_samples < 1) throw Error(ErrorKind::InvalidArgument, "u_samples must be >= 1");
    const auto& p = prob.profile;
    const double hu = 0.25 / u_samples;
    static const GaussRule rule = gauss_legendre(8);
    const auto log_w0 = log_reference_weight(p);
    double worst = 0.0;
    double scale = 0.0;
    for (int j = 0; j < u_samples; ++j) {
        const double u = (j + 0.5) / u_samples;
        const double i_plus = energy_I(make_potential(p, path.at(u + hu)), prob);
        const double i_minus = energy_I(make_potential(p, path.at(u - hu)), prob);
        CompensatedSum dj;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double v = u - hu + 2.0 * hu * rule.nodes[q];
            dj.add(rule.weights[q] * 2.0 * hu * energy_J_density(path, prob, v));
        }
        const double derivative = (i_plus - i_minus - dj.value()) / (2.0 * hu);

        const auto pot = make_potential(p, path.at(u));
        const auto ratio = weight_log_ratio(pot, p);
        const auto lv = linearize(pot, p).apply(path.velocity(u));
        std::vector<double> term(p.size()), magnitude(p.size());
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double a = pot.psi[k] * lv[k];
            term[k] = a == 0.0 ? 0.0 : std::copysign(std::exp(std::log(std::abs(a)) + log_w0[k] + ratio[k]), a);
            magnitude[k] = std::abs(term[k]);
        }
        const double pairing = simpson(term, p.grid.spacing());
        worst = std::max(worst, std::abs(derivative + pairing));
        scale = std::max(scale, simpson(magnitude, p.grid.spacing()));
    }
    return scale > 0.0 ? worst / scale : 0.0;
}

namespace {

// ĉ_k = c_k e^{-f}, stable upward recursion for f >= max(k, 1)
double ck_scaled(int k, double f) {
    double c = -std::expm1(-f) / f;
    for (int j = 1; j <= k; ++j) c = 1.0 / f - (j / f) * c;
    return c;
}

// Σ_j f^j / (j! d(j)) until the terms stop contributing
template <typename Denominator>
double ck_series(double f, Denominator d) {
    CompensatedSum acc;
    double power = 1.0;  // f^j / j!
    for (int j = 0; j < 2000; ++j) {
        const double term = power / d(j);
        acc.add(term);
        if (j > f && term < 1e-18 * acc.value()) break;
        power *= f / (j + 1);
    }
    return acc.value();
}

bool use_series(int k, double f) { return f < std::max(1.0, static_cast<double>(k)); }

}  // namespace

double ck_coefficient(int k, double f) {
    if (k < 0) throw Error(ErrorKind::InvalidArgument, "k must be >= 0");
    if (!(f > 0.0)) throw Error(ErrorKind::InvalidArgument, "f must be > 0");
    if (use_series(k, f)) return ck_series(f, [k](int j) { return static_cast<double>(k + j + 1); });
    return ck_scaled(k, f) * std::exp(f);
}

double ck_difference(int k, double f) {
    if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1 for c_{k-1} - c_k");
    if (!(f > 0.0)) throw Error(ErrorKind::InvalidArgument, "f must be > 0");
    if (use_series(k, f)) {
        return ck_series(f, [k](int j) { return static_cast<double>(k + j) * (k + j + 1); });
    }
    return (ck_scaled(k - 1, f) - ck_scaled(k, f)) * std::exp(f);
}

double ck_ratio(int k, double f) {
    if (k < 0) throw Error(ErrorKind::InvalidArgument, "k must be >= 0");
    if (!(f > 0.0)) throw Error(ErrorKind::InvalidArgument, "f must be > 0");
    if (use_series(k, f)) return ck_coefficient(k, f) * f * std::exp(-f);
    return ck_scaled(k, f) * f;
}

double ck_difference_ratio(int k, double f) {
    if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1 for c_{k-1} - c_k");
    if (!(f > 0.0)) throw Error(ErrorKind::InvalidArgument, "f must be > 0");
    if (use_series(k, f)) return ck_difference(k, f) * f * f * std::exp(-f);
    return (ck_scaled(k - 1, f) - ck_scaled(k, f)) * f * f;
}

double ck_quadrature(int k, double f) {
    static const GaussRule rule = gauss_legendre(10);
    constexpr int pieces = 256;
    CompensatedSum acc;
    for (int i = 0; i < pieces; ++i) {
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double s = (i + rule.nodes[q]) / pieces;
            acc.add(rule.weights[q] * std::pow(s, k) * std::exp(s * f) / pieces);
        }
    }
    return acc.value();
}

ClaimBound claim_lower_bound(int n) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be >= 1");
    static const GaussRule rule = gauss_legendre(10);
    constexpr int pieces = 512;
    ClaimBound out;
    out.constant = std::numeric_limits<double>::infinity();
    for (int fi = 10; fi <= 300; ++fi) {
        const double f = fi;
        // ∫ t(1-t)^{n-1} e^{(1-t)f} dt · f² e^{-f} = f² ∫ t(1-t)^{n-1} e^{-tf} dt
        CompensatedSum acc;
        for (int i = 0; i < pieces; ++i) {
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                const double t = (i + rule.nodes[q]) / pieces;
                acc.add(rule.weights[q] * t * std::pow(1.0 - t, n - 1) * std::exp(-t * f) / pieces);
            }
        }
        const double ratio = f * f * acc.value();
        out.f.push_back(f);
        out.ratio.push_back(ratio);
        out.constant = std::min(out.constant, ratio);
    }
    return out;
}

}  // namespace soliton
