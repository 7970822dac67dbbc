#pragma once

#include "soliton/soliton_profile.hpp"

#include <iosfwd>
#include <vector>

namespace soliton {

/// Coefficients of a cohomogeneity-one metric c_rad·dt²/4 + c_reeb·η² + c_trans·g^T.
struct MetricSample {
    double t;
    double c_rad;
    double c_reeb;
    double c_trans;

    bool kahler() const noexcept { return c_rad > 0.0 && c_reeb > 0.0 && c_trans > 0.0; }
};

/// Cao's metric at node k: (φ', φ', φ).
MetricSample cao_metric(const Profile& profile, std::size_t k);

/// The model metric ĝ: (n, n, nt).
MetricSample model_metric(double t, int n);

/// R = 4n - 4φ' per node.
std::vector<double> scalar_curvature(const Profile& profile);

struct CurvatureFloor {
    bool holds = false;
    double threshold_t = 0.0;  // smallest node T with R >= 4(n-1-eps)/t on every node t >= T
};

/// Lower bound R >= 4(n-1-eps)/t at large t. eps must lie in (0, 1); eps = 0 is
/// rejected because the strict inequality then has no margin to certify.
/// Throws InsufficientRange if the profile stops short of t = 100.
CurvatureFloor curvature_floor_check(const Profile& profile, double eps);

/// max over nodes t >= 100 of |t(n - φ') - (n-1)| / ((log t)^2 / t).
/// Throws InsufficientRange if the profile stops short of t = 100.
double curvature_expansion_ratio(const Profile& profile);

/// |g̃ - ĝ|_ĝ at a single point.
double metric_difference_at(double phi, double phi1, double t, int n);

/// |g̃ - ĝ|_ĝ per node. Throws DomainError if any node has t <= 0.
std::vector<double> metric_difference(const Profile& profile);

struct MetricRate {
    double max_scaled = 0.0;  // max of |g̃ - ĝ| t / log t over t >= 100
    double constant = 0.0;    // c in the fit |g̃ - ĝ| t ≈ c log t + d over t >= 100
    double expected = 0.0;    // √(2n-2)(n-1)/n
};

/// Throws InsufficientRange if t_max < 1e3.
MetricRate metric_difference_rate(const Profile& profile);

/// Per-node defect | |X|² + R - 4n | with |X|² = 4φ'.
std::vector<double> charge_identity(const Profile& profile);

/// c(g̃) = |X|² + R read off the first node.
double soliton_charge(const Profile& profile);

struct VolumeGrowth {
    double slope = 0.0;
    std::vector<double> volume;      // V(t) = |S|·(n/2)·∫ φ^{n-1}φ' dt from t_min
    std::vector<double> geodesic_s;  // ∫ sqrt(φ')/2 dt from t_min
};

/// log-log slope of V against s over the top decade of s.
/// Throws InsufficientRange if t_max < 1e3 or the decade holds fewer than 16 nodes.
VolumeGrowth volume_growth(const Profile& profile, const ConeSpec& spec);

/// |∇̂^k (t^{-1})|_ĝ for k ∈ {0, 1, 2}; Unsupported for k >= 3.
double hat_frame_decay(double t, int k, int n);

/// Fitted exponents of |∇̂^k t^{-1}| in t over [10, 1e4] for k = 0, 1, 2.
std::vector<double> frame_decay_rates(int n);

struct GeometryReport {
    std::vector<double> t;
    std::vector<double> scalar_curvature;
    std::vector<double> diff_norm;  // NaN where t <= 0
    std::vector<double> charge_defect;
    std::vector<double> volume;
    std::vector<double> geodesic_s;
};

/// Volume and geodesic columns are left empty when the profile is too short
/// for volume_growth; everything else is always filled.
GeometryReport geometry_report(const Profile& profile);

void write_geometry_csv(const GeometryReport& report, std::ostream& out);

}  // namespace soliton
