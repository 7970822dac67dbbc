#include "soliton/numerics.hpp"

#include "soliton/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace soliton {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::NoBracket: return "NoBracket";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::InsufficientRange: return "InsufficientRange";
        case ErrorKind::Unsupported: return "Unsupported";
        case ErrorKind::CriticalExponent: return "CriticalExponent";
        case ErrorKind::TailDominates: return "TailDominates";
        case ErrorKind::SpectrumTooShort: return "SpectrumTooShort";
        case ErrorKind::SingularSystem: return "SingularSystem";
        case ErrorKind::Inadmissible: return "Inadmissible";
        case ErrorKind::LineSearchFailed: return "LineSearchFailed";
        case ErrorKind::PathStuck: return "PathStuck";
        case ErrorKind::Violation: return "Violation";
        case ErrorKind::Divergent: return "Divergent";
        case ErrorKind::InsufficientFarField: return "InsufficientFarField";
    }
    return "Unknown";
}

void CompensatedSum::add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
        comp_ += (sum_ - t) + x;
    } else {
        comp_ += (x - t) + sum_;
    }
    sum_ = t;
}

double log_sum_exp(double a, double b) noexcept {
    if (a == -INFINITY) return b;
    if (b == -INFINITY) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

double simpson(std::span<const double> f, double h) {
    const std::size_t n = f.size();
    if (n < 2) {
        throw Error(ErrorKind::InvalidArgument, "simpson needs at least 2 samples");
    }
    if (n == 2) return 0.5 * h * (f[0] + f[1]);
    if (n == 4) return 3.0 * h / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3]);

    // Simpson over an even number of intervals, then 3/8 on the remainder.
    const std::size_t simpson_end = (n % 2 == 1) ? n - 1 : n - 4;
    CompensatedSum acc;
    acc.add(f[0]);
    acc.add(f[simpson_end]);
    for (std::size_t k = 1; k < simpson_end; ++k) {
        acc.add((k % 2 == 1 ? 4.0 : 2.0) * f[k]);
    }
    double total = acc.value() * h / 3.0;
    if (simpson_end != n - 1) {
        const std::size_t k = simpson_end;
        total += 3.0 * h / 8.0 * (f[k] + 3.0 * f[k + 1] + 3.0 * f[k + 2] + f[k + 3]);
    }
    return total;
}

std::vector<double> cumulative_integral(std::span<const double> f, double h) {
    const std::size_t n = f.size();
    std::vector<double> out(n, 0.0);
    if (n < 2) return out;
    if (n < 4) {
        for (std::size_t k = 1; k < n; ++k) out[k] = out[k - 1] + 0.5 * h * (f[k - 1] + f[k]);
        return out;
    }
    CompensatedSum acc;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        double piece;
        if (k == 0) {
            piece = 9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3];
        } else if (k + 2 == n) {
            piece = f[k - 2] - 5.0 * f[k - 1] + 19.0 * f[k] + 9.0 * f[k + 1];
        } else {
            piece = -f[k - 1] + 13.0 * f[k] + 13.0 * f[k + 1] - f[k + 2];
        }
        acc.add(piece * h / 24.0);
        out[k + 1] = acc.value();
    }
    return out;
}

std::vector<double> fd_weights(double x0, std::span<const double> xs, int m) {
    const std::size_t count = xs.size();
    if (count == 0 || m < 0 || static_cast<std::size_t>(m) >= count) {
        throw Error(ErrorKind::InvalidArgument, "fd_weights needs more samples than the derivative order");
    }
    // c[j][k]: weight of xs[j] for the k-th derivative
    std::vector<std::vector<double>> c(count, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0;
    double c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < count; ++i) {
        const int mn = std::min<int>(static_cast<int>(i), m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = xs[i] - x0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) {
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) {
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(count);
    for (std::size_t j = 0; j < count; ++j) w[j] = c[j][m];
    return w;
}

std::vector<double> differentiate(std::span<const double> v, double h, int m) {
    constexpr std::size_t width = 7;
    if (v.size() < width) throw Error(ErrorKind::InvalidArgument, "differentiate needs 7 samples");
    if (m != 1 && m != 2) throw Error(ErrorKind::Unsupported, "only first and second derivatives");
    // Stencil weights depend only on the offset of the node inside its window.
    std::vector<std::vector<double>> table(width);
    const double offsets[width] = {0, 1, 2, 3, 4, 5, 6};
    for (std::size_t pos = 0; pos < width; ++pos) {
        table[pos] = fd_weights(static_cast<double>(pos), offsets, m);
    }
    const double scale = m == 1 ? 1.0 / h : 1.0 / (h * h);
    const std::size_t count = v.size();
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t start = std::min(k >= 3 ? k - 3 : 0, count - width);
        const auto& w = table[k - start];
        double acc = 0.0;
        for (std::size_t j = 0; j < width; ++j) acc += w[j] * v[start + j];
        out[k] = acc * scale;
    }
    return out;
}

GaussRule gauss_legendre(int order) {
    if (order < 1) throw Error(ErrorKind::InvalidArgument, "Gauss-Legendre order must be >= 1");
    GaussRule rule;
    rule.nodes.resize(static_cast<std::size_t>(order));
    rule.weights.resize(static_cast<std::size_t>(order));
    const int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (int j = 1; j <= order; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p2) / j;
            }
            dp = order * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        rule.nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
        rule.nodes[static_cast<std::size_t>(order - 1 - i)] = 0.5 * (1.0 + x);
        rule.weights[static_cast<std::size_t>(i)] = 0.5 * w;
        rule.weights[static_cast<std::size_t>(order - 1 - i)] = 0.5 * w;
    }
    return rule;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) {
        throw Error(ErrorKind::InsufficientRange, "least squares needs >= 2 paired samples");
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    if (sxx == 0.0) throw Error(ErrorKind::InsufficientRange, "degenerate abscissae");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

bool solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                       std::span<const double> super, std::span<double> rhs) {
    const std::size_t n = diag.size();
    if (n == 0) return true;
    std::vector<double> c(n, 0.0);
    double beta = diag[0];
    if (beta == 0.0 || !std::isfinite(beta)) return false;
    rhs[0] /= beta;
    for (std::size_t i = 1; i < n; ++i) {
        c[i - 1] = super[i - 1] / beta;
        beta = diag[i] - sub[i] * c[i - 1];
        if (beta == 0.0 || !std::isfinite(beta)) return false;
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / beta;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    return true;
}

}  // namespace soliton
