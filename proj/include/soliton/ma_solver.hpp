#pragma once

#include "soliton/soliton_profile.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace soliton {

/// Radial perturbation ψ of the Kähler potential with its discrete derivatives:
/// central differences, ψ' = 0 at t_min (ghost node ψ_{-1} = ψ_1) and one-sided
/// second-order formulas at t_max.
struct RadialPotential {
    RadialGrid grid{1.0, 2.0, 3};
    std::vector<double> psi;
    std::vector<double> psi1;
    std::vector<double> psi2;
    bool admissible = true;  // φ + 2ψ' > 0 and φ' + 2ψ'' > 0 at every node
};

RadialPotential make_potential(const Profile& profile, std::vector<double> psi);

/// Right-hand side of the continuity path, F ≡ 0 outside [support_lo, support_hi].
/// t_max must leave at least 20 units of far field past support_hi.
struct MAProblem {
    Profile profile;
    std::vector<double> f;
    double support_lo = 0.0;
    double support_hi = 0.0;
    double s = 1.0;

    /// amplitude · exp(1 - 1/(1 - x²)) on [lo, hi], x the rescaled coordinate.
    static MAProblem bump(Profile profile, double amplitude, double lo, double hi);
    static MAProblem table(Profile profile, std::vector<double> f, double lo, double hi);

    bool in_support(double t) const noexcept { return t >= support_lo && t <= support_hi; }
};

/// log(e^{f_ψ}τ_ψⁿ / e^f τⁿ) = (n-1)log(1 + 2ψ'/φ) + log(1 + 2ψ''/φ') + 2ψ' per node.
std::vector<double> weight_log_ratio(const RadialPotential& psi, const Profile& profile);

/// weight_log_ratio - sF; zero at the Dirichlet node. Throws Inadmissible.
std::vector<double> ma_residual(const RadialPotential& psi, const MAProblem& prob);

double max_abs(const std::vector<double>& v);

/// Tridiagonal matrix of the linearization Δ_{τ_ψ} + X/2 acting on grid
/// functions that vanish at t_max, in the same discretization as ma_residual.
struct LinearizedOperator {
    std::vector<double> sub;
    std::vector<double> diag;
    std::vector<double> super;

    /// (Δ_{τ_ψ} + X/2)v; the Dirichlet node maps to 0.
    std::vector<double> apply(const std::vector<double>& v) const;
};

LinearizedOperator linearize(const RadialPotential& psi, const Profile& profile);

struct NewtonResult {
    RadialPotential psi;
    double damping = 1.0;
    double residual_before = 0.0;
    double residual_after = 0.0;
};

/// One damped Newton step. Returns psi unchanged when its residual is already
/// <= tol. Throws Inadmissible, LineSearchFailed.
NewtonResult newton_step(const RadialPotential& psi, const MAProblem& prob, double tol);

struct TraceRecord {
    double s = 0.0;
    int newton_iters = 0;
    double residual_max = 0.0;
    double sup_psi = 0.0;
    double inf_psi = 0.0;
    bool arg_sup_in_support = false;
    bool arg_inf_in_support = false;
    double energy_i = 0.0;
    double energy_j = 0.0;
    double step_change = 0.0;  // sup |ψ_s - ψ_{previous s}|
};

struct ContinuityTrace {
    std::vector<TraceRecord> records;
};

struct ContinuityResult {
    RadialPotential psi;
    ContinuityTrace trace;
};

/// Marches s from 0 to 1 in steps of 1/steps, halving on Newton failure and
/// doubling (up to 1/steps) after three consecutive steps that converge in at
/// most three iterations. Throws PathStuck below a step of 2^-20.
ContinuityResult continuity_solve(const MAProblem& prob, int steps, double tol);

struct ExtremaReport {
    double sup = 0.0;
    double inf = 0.0;
    double arg_sup_t = 0.0;
    double arg_inf_t = 0.0;
    std::string sup_branch;  // "in_support" or "nonpositive"
    std::string inf_branch;  // "in_support" or "nonnegative"
};

/// Either the extremum is attained (within tol) on supp F with the right sign,
/// or it is bounded by 0 (within tol). Throws Violation otherwise.
ExtremaReport verify_extrema_localization(const RadialPotential& psi, const MAProblem& prob,
                                          double tol = 1e-9);

struct DerivativeBoundReport {
    double margin = 0.0;       // min(φ + 2ψ') - min φ
    double siepmann_c = 0.0;   // sup|4ψ'| / sup|ψ|^{1/2}, 0 for ψ ≡ 0
};

/// Throws Violation if margin < -tol.
DerivativeBoundReport verify_radial_derivative_bound(const RadialPotential& psi, const MAProblem& prob,
                                                     double tol = 1e-9);

struct DecayReport {
    double slope = 0.0;
    bool degenerate = false;   // ψ vanishes on the far field
    double fit_lo = 0.0;
    double fit_hi = 0.0;
    double barrier_defect = 0.0;
};

/// Fits log|ψ| against -φ over [support_hi + 2, t_max - 8]. Throws
/// InsufficientFarField when t_max < support_hi + 20.
DecayReport verify_exponential_decay(const RadialPotential& psi, const MAProblem& prob);

/// Relative defect of (Δ_τ + X/2)e^{-φ} + (Δ_τ φ)e^{-φ} = 0 at node k.
double barrier_defect(const Profile& profile, std::size_t k);

/// Largest sup|ψ_s - ψ_s'| / |s - s'| over adjacent accepted steps, and the
/// largest ratio between two consecutive such quotients.
struct PathContinuity {
    double max_quotient = 0.0;
    double max_ratio = 1.0;
};

PathContinuity verify_path_continuity(const ContinuityTrace& trace);

void write_solution_csv(const RadialPotential& psi, const MAProblem& prob, std::ostream& out);

}  // namespace soliton
