#pragma once

#include "soliton/soliton_profile.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace soliton {

/// Q(s) = coefficient · s^{-power}.
struct PowerLaw {
    double coefficient = 1.0;
    double power = 0.0;

    double operator()(double s) const;
};

/// Right-hand side of one mode equation 4n u' - (λ/t)u = nQ on a grid starting at t = 1.
/// Q is either sampled on the grid or a power law; samples are always filled.
struct ModeData {
    double lambda = 0.0;
    double beta = 0.5;
    RadialGrid grid{1.0, 2.0, 3};
    std::vector<double> q;
    double envelope = 0.0;  // C in |Q| <= C t^{-β}
    std::optional<PowerLaw> analytic;

    /// envelope <= 0 fits C = max |Q| t^β from the samples.
    static ModeData sampled(double lambda, double beta, const RadialGrid& grid,
                            std::vector<double> q, double envelope = 0.0);
    /// Requires power >= beta so that |Q| <= |coefficient| t^{-β} on t >= 1.
    static ModeData power_law(double lambda, double beta, const RadialGrid& grid, PowerLaw law);
};

enum class Branch { Forward, Backward };

struct ModeSolution {
    RadialGrid grid{1.0, 2.0, 3};
    std::vector<double> u;
    std::vector<double> residual;  // |4n u' - (λ/t)u - nQ| / (1 + |nQ|), u' by finite differences
    double residual_max = 0.0;     // over interior nodes (centred stencils)
    Branch branch = Branch::Forward;
    double tail_bound = 0.0;
    double fitted_c = 0.0;  // max |u| t^{β-1}
};

/// 1 - β - λ/(4n).
double mode_exponent_margin(double lambda, double beta, int n);

/// Integral representation of the mode solution. A power-law Q is integrated
/// per interval with Gauss-Legendre and its tail past t_max in closed form;
/// sampled Q uses the fourth-order cumulative rule and only the envelope bound
/// for the truncated tail.
/// Throws CriticalExponent, TailDominates, InvalidArgument (λ not in the link
/// spectrum, grid not starting at 1).
ModeSolution solve_mode(const ModeData& data, const ConeSpec& spec, double tol);

/// Solves independent modes on up to `threads` worker threads. Results are in
/// input order and do not depend on the thread count.
std::vector<ModeSolution> solve_modes(const std::vector<ModeData>& batch, const ConeSpec& spec,
                                      double tol, int threads = 1);

/// max_k |u_k / exact(t_k) - 1| against a closed-form mode u = c t^{-p}.
/// Throws DomainError if the closed form vanishes on the grid.
double max_relative_deviation(const ModeSolution& sol, const PowerLaw& exact);

struct ModeRefinement {
    double fitted_c_fine = 0.0;
    double fitted_c_coarse = 0.0;  // same mode on every other node
    double relative_change = 0.0;
};

ModeRefinement mode_refinement_check(const ModeData& data, const ConeSpec& spec, double tol);

struct SecondOrderRemainder {
    double max_norm = 0.0;
    double exponent = 0.0;  // -inf when the remainder vanishes identically
};

/// Remainder 4u'' + 4(n-1)u'/t left when the first-order solution is put into
/// the second-order mode equation, and its fitted decay exponent over t >= 10.
SecondOrderRemainder second_order_residual(const ModeSolution& sol, const ModeData& data,
                                           const ConeSpec& spec);

/// Number of leading modes to keep so that Σ_{i>=N} λ_i^{-k} (extrapolated past
/// the supplied spectrum with λ_i >= C i^{2/(2n-1)}) drops below 1e-10.
/// Throws SpectrumTooShort when the supplied spectrum cannot certify that.
std::size_t weyl_truncation(const ConeSpec& spec, int k_target);

/// Largest C with λ_i >= C i^{2/(2n-1)} for all i >= 1 of the spectrum.
double weyl_constant(const ConeSpec& spec);

struct DirichletSolution {
    std::vector<double> u;  // zero from the boundary node on
    std::size_t boundary = 0;
    double residual_max = 0.0;
};

/// Δ_f u = 2F on t < R_cut, u(R_cut) = 0, u'(t_min) = 0, central differences.
/// The boundary is the last node with t <= R_cut. Throws SingularSystem when an
/// off-diagonal coefficient turns nonpositive and InvalidArgument when F does
/// not vanish from the boundary on.
DirichletSolution dirichlet_drift_solve(const Profile& profile, const std::vector<double>& f,
                                        double r_cut, double tol);

struct PoincareGap {
    double beta = 0.5;
    double certified_constant = 0.0;  // β(1-β)·c/2 with c = 4n
    bool subsolution_holds = false;
    double compact_set_t = 0.0;       // inequality holds at every node t >= this
    double discrete_gap = 0.0;        // smallest discrete Rayleigh quotient
};

/// Rayleigh quotient ∫4u'²e^φφ^{n-1} / ∫u²e^φφ^{n-1}φ' over piecewise-linear u
/// vanishing at t_max, with the weights integrated by Gauss-Legendre per element.
PoincareGap poincare_gap(const Profile& profile, double beta);

/// Δ_f e^{-βφ} / e^{-βφ} at node k.
double subsolution_ratio(const Profile& profile, std::size_t k, double beta);

void write_mode_csv(const ModeSolution& sol, std::ostream& out);

const char* to_string(Branch branch);

}  // namespace soliton
