#pragma once

#include "soliton/ma_solver.hpp"

#include <functional>
#include <vector>

namespace soliton {

/// Family ψ_u, u ∈ [0, 1], with ψ_0 = 0. Linear is uψ, Reparam is γ(u)ψ, and
/// Custom supplies ψ_u and dψ_u/du directly.
struct PotentialPath {
    enum class Kind { Linear, Reparam, Custom };

    Kind kind = Kind::Linear;
    std::vector<double> endpoint;
    std::function<double(double)> gamma;
    std::function<double(double)> gamma_prime;
    std::function<std::vector<double>(double)> custom_psi;
    std::function<std::vector<double>(double)> custom_velocity;

    static PotentialPath linear(std::vector<double> psi);
    static PotentialPath reparam(std::vector<double> psi, std::function<double(double)> gamma,
                                 std::function<double(double)> gamma_prime);
    static PotentialPath custom(std::function<std::vector<double>(double)> psi,
                                std::function<std::vector<double>(double)> velocity);

    std::vector<double> at(double u) const;
    std::vector<double> velocity(double u) const;
};

/// (n/2)·|S|·e^φ φ^{n-1} φ' per node, as logarithms.
std::vector<double> log_reference_weight(const Profile& profile);

/// I(ψ) = ∫ ψ (e^f τⁿ - e^{f_ψ} τ_ψⁿ). Throws Inadmissible, Divergent.
double energy_I(const RadialPotential& psi, const MAProblem& prob);

struct EnergyJ {
    double value = 0.0;
    double error_estimate = 0.0;  // u-rule difference (32 vs 16 nodes) plus grid-halving estimate
};

/// J(ψ_1) = ∫₀¹ ∫ ψ̇_u (e^f τⁿ - e^{f_{ψ_u}} τ_{ψ_u}ⁿ) dt du with Gauss-Legendre in u.
EnergyJ energy_J(const PotentialPath& path, const MAProblem& prob, int u_nodes = 32);

/// Inner integrand of J at one u: ∫ ψ̇_u (e^f τⁿ - e^{f_{ψ_u}} τ_{ψ_u}ⁿ) dt.
double energy_J_density(const PotentialPath& path, const MAProblem& prob, double u);

/// Max over u_j = (j + 1/2)/m of
///   | d/du (I - J)(ψ_u) + ∫ ψ_u (Δ_{τ_{ψ_u}} + X/2)ψ̇_u e^{f_{ψ_u}} τ_{ψ_u}ⁿ |
/// with d/du by central differences of step 1/(4m), normalized by the largest
/// ∫ |ψ_u (Δ + X/2)ψ̇_u| e^{f_{ψ_u}} τ_{ψ_u}ⁿ over the samples.
double first_variation_check(const PotentialPath& path, const MAProblem& prob, int u_samples = 32);

/// c_k(f) = ∫₀¹ s^k e^{sf} ds.
double ck_coefficient(int k, double f);

/// c_{k-1}(f) - c_k(f) = ∫₀¹ s^{k-1}(1 - s) e^{sf} ds.
double ck_difference(int k, double f);

/// c_k by composite Gauss-Legendre, for cross-checking the recursion.
/// c_k(f)·f e^{-f} and (c_{k-1} - c_k)(f)·f² e^{-f}; both tend to 1 as f grows.
double ck_ratio(int k, double f);
double ck_difference_ratio(int k, double f);

double ck_quadrature(int k, double f);

struct ClaimBound {
    double constant = 0.0;           // min over f of the ratio below
    std::vector<double> f;
    std::vector<double> ratio;       // ∫₀¹ t(1-t)^{n-1} e^{(1-t)f} dt / (e^f / f²)
};

/// Ratios on f = 10, 11, ..., 300 by quadrature.
ClaimBound claim_lower_bound(int n);

}  // namespace soliton
