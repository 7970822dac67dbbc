#pragma once

#include <span>
#include <vector>

namespace soliton {

/// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    void add(double x) noexcept;
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

double log_sum_exp(double a, double b) noexcept;

/// Composite Simpson rule on uniformly spaced samples. An even sample count
/// closes the last three intervals with the 3/8 rule. Needs at least 2 samples
/// (2 samples degrade to the trapezoid rule).
double simpson(std::span<const double> values, double h);

/// Running integral from the first node: out[k] = ∫_{x_0}^{x_k} f.
/// Fourth-order: each interval integrates the cubic through the four nearest nodes.
std::vector<double> cumulative_integral(std::span<const double> values, double h);

/// Finite-difference weights for the m-th derivative at x0 from samples at xs (Fornberg).
std::vector<double> fd_weights(double x0, std::span<const double> xs, int m);

/// m-th derivative (m = 1 or 2) on a uniform grid from 7-point stencils,
/// centred in the interior and shifted inward near the ends. Needs 7 samples.
std::vector<double> differentiate(std::span<const double> values, double h, int m);

struct GaussRule {
    std::vector<double> nodes;    // on [0, 1]
    std::vector<double> weights;  // sum to 1
};

/// Gauss-Legendre rule with `order` nodes mapped to [0, 1].
GaussRule gauss_legendre(int order);

struct LinearFit {
    double slope;
    double intercept;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

/// Solves a tridiagonal system in place. sub[0] and super[n-1] are ignored.
/// Returns false when a pivot vanishes.
bool solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                       std::span<const double> super, std::span<double> rhs);

}  // namespace soliton
