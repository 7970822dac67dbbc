#pragma once

#include "soliton/cone_spec.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace soliton {

/// F(s) = Σ_{k<n} (-1)^{n-k-1} (n-1)!/k! s^k, the polynomial with (F(s)e^s)' = s^{n-1}e^s.
double eval_F(double s, int n);

/// log G(s) with G(s) = F(s)e^s - F(a)e^a = ∫_a^s x^{n-1}e^x dx. Returns -inf for s <= a.
/// Never forms e^s, so it is safe for any s.
double log_G(double s, int n, double a);

/// log G(a + offset); keeps full precision when φ sits within rounding of a.
double log_G_offset(double offset, int n, double a);

/// Relative residual of F(φ)e^φ = e^{nt}/n + F(a)e^a, measured against the
/// magnitude e^{nt}/n + |F(a)|e^a of the right-hand side terms.
double implicit_residual(double phi, double t, const ConeSpec& spec);
double implicit_residual_offset(double offset, double t, const ConeSpec& spec);

/// Root of the implicit equation at t. `guess` warm-starts the iteration.
/// Throws NoBracket / NoConvergence.
double solve_phi(double t, const ConeSpec& spec, double tol,
                 std::optional<double> guess = std::nullopt);

/// Same root expressed as the offset φ - a > 0.
double solve_phi_offset(double t, const ConeSpec& spec, double tol,
                        std::optional<double> guess = std::nullopt);

struct PhiDerivatives {
    double phi1;
    double phi2;
    double phi3;
};

/// Closed-form φ', φ'', φ''' from the soliton ODE φ^{n-1}φ'e^φ = e^{nt}.
/// Throws DomainError if phi <= 0.
PhiDerivatives derivatives(double phi, double t, const ConeSpec& spec);

/// Sampled soliton potential on a grid. Immutable once built.
struct Profile {
    ConeSpec spec;
    RadialGrid grid;
    std::vector<double> phi;
    std::vector<double> phi1;
    std::vector<double> phi2;
    std::vector<double> phi3;
    std::vector<double> residual;  // evaluated from the exact offset φ - a
    double residual_max = 0.0;

    std::size_t size() const noexcept { return phi.size(); }
    double t(std::size_t k) const noexcept { return grid[k]; }
};

/// Solves node by node, warm-starting each root-find from its left neighbour.
/// Solver errors are rethrown with the offending node index.
Profile build_profile(const ConeSpec& spec, const RadialGrid& grid, double tol);

/// Builds a profile from externally supplied arrays (e.g. a CSV round trip).
/// No invariant is enforced; see check_profile_invariants.
Profile profile_from_samples(const ConeSpec& spec, const RadialGrid& grid,
                             std::vector<double> phi, std::vector<double> phi1,
                             std::vector<double> phi2, std::vector<double> phi3,
                             std::vector<double> residual);

struct ProfileInvariants {
    bool above_a = true;          // φ > a
    bool monotone = true;         // φ strictly increasing
    bool slope_bounds = true;     // 0 < φ' < n
    double residual_max = 0.0;
    bool residual_ok = true;
    std::vector<std::string> failures;

    bool ok() const noexcept { return failures.empty(); }
};

ProfileInvariants check_profile_invariants(const Profile& profile, double tol);

struct Expansion {
    double value;
    double order;  // magnitude (log t)^2 / t^2 of the neglected terms
};

/// Large-t expansion of φ through order 1/t. Throws DomainError for t <= 1.
Expansion asymptotic_phi(double t, int n);

/// Fitted exponent p in |φ - expansion| ≈ C (log t)^2 t^p over nodes with t >= 50.
/// Throws InsufficientRange if t_max < 1e3 or fewer than 16 usable nodes remain
/// (nodes where the error vanishes to the last bit carry no slope information).
double expansion_error_exponent(const Profile& profile);

struct ExpansionSpread {
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    double spread = 0.0;  // (max - min) / (max + min)
};

/// Range of |φ - expansion| / ((log t)^2 / t^2) over nodes with t >= 50.
/// Throws InsufficientRange if t_max < 1e3.
ExpansionSpread expansion_error_spread(const Profile& profile);

void write_profile_csv(const Profile& profile, std::ostream& out);

}  // namespace soliton
