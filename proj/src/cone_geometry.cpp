#include "soliton/cone_geometry.hpp"

#include "soliton/errors.hpp"
#include "soliton/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace soliton {

MetricSample cao_metric(const Profile& p, std::size_t k) {
    return {p.t(k), p.phi1[k], p.phi1[k], p.phi[k]};
}

MetricSample model_metric(double t, int n) {
    return {t, static_cast<double>(n), static_cast<double>(n), n * t};
}

std::vector<double> scalar_curvature(const Profile& p) {
    const double n = p.spec.n;
    std::vector<double> r(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) r[k] = 4.0 * n - 4.0 * p.phi1[k];
    return r;
}

CurvatureFloor curvature_floor_check(const Profile& p, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) {
        throw Error(ErrorKind::InvalidArgument,
                    "eps must lie in (0, 1); eps = 0 leaves no margin to certify");
    }
    if (p.grid.t_max() < 100.0) {
        throw Error(ErrorKind::InsufficientRange, "curvature floor needs the profile to reach t = 100");
    }
    const double n = p.spec.n;
    const auto r = scalar_curvature(p);
    CurvatureFloor out;
    // Walk down from the far end while the bound holds.
    std::size_t first = p.size();
    for (std::size_t k = p.size(); k-- > 0;) {
        const double t = p.t(k);
        if (t <= 0.0) break;
        if (r[k] >= 4.0 * (n - 1.0 - eps) / t) {
            first = k;
        } else {
            break;
        }
    }
    if (first < p.size()) {
        out.holds = true;
        out.threshold_t = p.t(first);
    } else {
        out.threshold_t = std::numeric_limits<double>::infinity();
    }
    return out;
}

double metric_difference_at(double phi, double phi1, double t, int n) {
    if (!(t > 0.0)) throw Error(ErrorKind::DomainError, "metric difference needs t > 0");
    const double nt = n * t;
    const double trans = (phi - nt) / nt;
    const double rad = (phi1 - n) / n;
    return std::sqrt((2.0 * n - 2.0) * trans * trans + 2.0 * rad * rad);
}

double curvature_expansion_ratio(const Profile& p) {
    if (p.grid.t_max() < 100.0) {
        throw Error(ErrorKind::InsufficientRange, "curvature expansion needs the profile to reach t = 100");
    }
    const double n = p.spec.n;
    double worst = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double t = p.t(k);
        if (t < 100.0) continue;
        const double lt = std::log(t);
        worst = std::max(worst, std::abs(t * (n - p.phi1[k]) - (n - 1.0)) / (lt * lt / t));
    }
    return worst;
}

MetricRate metric_difference_rate(const Profile& p) {
    if (p.grid.t_max() < 1e3) throw Error(ErrorKind::InsufficientRange, "metric rate needs t_max >= 1e3");
    const int n = p.spec.n;
    MetricRate out;
    out.expected = std::sqrt(2.0 * n - 2.0) * (n - 1.0) / n;
    std::vector<double> x, y;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double t = p.t(k);
        if (t < 100.0) continue;
        const double d = metric_difference_at(p.phi[k], p.phi1[k], t, n);
        out.max_scaled = std::max(out.max_scaled, d * t / std::log(t));
        x.push_back(std::log(t));
        y.push_back(d * t);
    }
    out.constant = least_squares(x, y).slope;
    return out;
}

std::vector<double> metric_difference(const Profile& p) {
    std::vector<double> out(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        out[k] = metric_difference_at(p.phi[k], p.phi1[k], p.t(k), p.spec.n);
    }
    return out;
}

std::vector<double> charge_identity(const Profile& p) {
    const double n = p.spec.n;
    std::vector<double> out(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double norm_x = 4.0 * p.phi1[k];
        const double r = 4.0 * n - 4.0 * p.phi1[k];
        out[k] = std::abs(norm_x + r - 4.0 * n);
    }
    return out;
}

double soliton_charge(const Profile& p) {
    return 4.0 * p.phi1.front() + (4.0 * p.spec.n - 4.0 * p.phi1.front());
}

VolumeGrowth volume_growth(const Profile& p, const ConeSpec& spec) {
    if (p.grid.t_max() < 1e3) {
        throw Error(ErrorKind::InsufficientRange, "volume growth needs t_max >= 1e3");
    }
    const int n = spec.n;
    const double h = p.grid.spacing();
    std::vector<double> density(p.size());
    std::vector<double> speed(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        density[k] = spec.link_volume * 0.5 * n * std::pow(p.phi[k], n - 1) * p.phi1[k];
        speed[k] = 0.5 * std::sqrt(p.phi1[k]);
    }
    VolumeGrowth out;
    out.volume = cumulative_integral(density, h);
    out.geodesic_s = cumulative_integral(speed, h);

    const double s_top = out.geodesic_s.back();
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (out.geodesic_s[k] >= 0.1 * s_top && out.volume[k] > 0.0) {
            x.push_back(std::log(out.geodesic_s[k]));
            y.push_back(std::log(out.volume[k]));
        }
    }
    if (x.size() < 16) {
        throw Error(ErrorKind::InsufficientRange, "top decade of s holds fewer than 16 nodes");
    }
    out.slope = least_squares(x, y).slope;
    return out;
}

double hat_frame_decay(double t, int k, int n) {
    if (!(t > 1.0)) throw Error(ErrorKind::DomainError, "hat_frame_decay needs t > 1");
    const double nn = n;
    switch (k) {
        case 0:
            return 1.0 / t;
        case 1:
            // ∇̂ t^{-1} = -t^{-2} dt, |dt|_ĝ = 2/√n
            return 2.0 / (t * t * std::sqrt(nn));
        case 2: {
            // ∇̂dt = Hess t = ½ L_{∇t} ĝ = 2 g^T, so
            // ∇̂²(t^{-1}) = 2t^{-3} dt⊗dt - 2t^{-2} g^T with |dt⊗dt|_ĝ = 4/n and
            // |g^T|_ĝ = √(2n-2)/(nt).
            const double radial = 2.0 / (t * t * t) * (4.0 / nn);
            const double transverse = 2.0 / (t * t) * std::sqrt(2.0 * nn - 2.0) / (nn * t);
            return std::sqrt(radial * radial + transverse * transverse);
        }
        default:
            throw Error(ErrorKind::Unsupported, "frame decay implemented for k <= 2 only");
    }
}

std::vector<double> frame_decay_rates(int n) {
    std::vector<double> rates;
    for (int k = 0; k <= 2; ++k) {
        std::vector<double> x, y;
        for (double t = 10.0; t <= 1e4 * (1.0 + 1e-12); t *= 1.25) {
            x.push_back(std::log(t));
            y.push_back(std::log(hat_frame_decay(t, k, n)));
        }
        rates.push_back(least_squares(x, y).slope);
    }
    return rates;
}

GeometryReport geometry_report(const Profile& p) {
    GeometryReport rep;
    rep.t = p.grid.nodes();
    rep.scalar_curvature = scalar_curvature(p);
    rep.charge_defect = charge_identity(p);
    rep.diff_norm.resize(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        rep.diff_norm[k] = p.t(k) > 0.0 ? metric_difference_at(p.phi[k], p.phi1[k], p.t(k), p.spec.n)
                                        : std::numeric_limits<double>::quiet_NaN();
    }
    try {
        auto vol = volume_growth(p, p.spec);
        rep.volume = std::move(vol.volume);
        rep.geodesic_s = std::move(vol.geodesic_s);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::InsufficientRange) throw;
    }
    return rep;
}

void write_geometry_csv(const GeometryReport& rep, std::ostream& out) {
    out << "t,R,diff_norm,charge_defect,volume,geodesic_s\n";
    const bool has_volume = rep.volume.size() == rep.t.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    char line[320];
    for (std::size_t k = 0; k < rep.t.size(); ++k) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", rep.t[k],
                      rep.scalar_curvature[k], rep.diff_norm[k], rep.charge_defect[k],
                      has_volume ? rep.volume[k] : nan, has_volume ? rep.geodesic_s[k] : nan);
        out << line;
    }
}

}  // namespace soliton
