#include <doctest.h>

#include "soliton/numerics.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace soliton;

TEST_CASE("simpson integrates cubics exactly for odd and even counts") {
    for (std::size_t count : {5u, 6u, 101u, 100u}) {
        const double h = 2.0 / static_cast<double>(count - 1);
        std::vector<double> f(count);
        for (std::size_t k = 0; k < count; ++k) {
            const double x = k * h;
            f[k] = x * x * x - 2.0 * x + 1.0;
        }
        CHECK(simpson(f, h) == doctest::Approx(4.0 - 4.0 + 2.0).epsilon(1e-13));
    }
}

TEST_CASE("cumulative integral is fourth order") {
    auto err_at = [](std::size_t count) {
        const double h = std::numbers::pi / static_cast<double>(count - 1);
        std::vector<double> f(count);
        for (std::size_t k = 0; k < count; ++k) f[k] = std::sin(k * h);
        const auto cum = cumulative_integral(f, h);
        double worst = 0.0;
        for (std::size_t k = 0; k < count; ++k) {
            worst = std::max(worst, std::abs(cum[k] - (1.0 - std::cos(k * h))));
        }
        return worst;
    };
    const double coarse = err_at(65);
    const double fine = err_at(129);
    CHECK(coarse < 1e-6);
    CHECK(coarse / fine > 12.0);
}

TEST_CASE("gauss-legendre rule integrates polynomials of degree 2m-1") {
    const auto rule = gauss_legendre(8);
    double sum_w = 0.0;
    double moment = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        sum_w += rule.weights[q];
        moment += rule.weights[q] * std::pow(rule.nodes[q], 15);
    }
    CHECK(sum_w == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(moment == doctest::Approx(1.0 / 16.0).epsilon(1e-14));
}

TEST_CASE("tridiagonal solve matches a known solution") {
    const std::vector<double> sub{0.0, -1.0, -1.0, -1.0};
    const std::vector<double> diag{2.0, 2.0, 2.0, 2.0};
    const std::vector<double> sup{-1.0, -1.0, -1.0, 0.0};
    const std::vector<double> x{1.0, -2.0, 3.0, 0.5};
    std::vector<double> rhs(4);
    for (std::size_t i = 0; i < 4; ++i) {
        rhs[i] = diag[i] * x[i] + (i > 0 ? sub[i] * x[i - 1] : 0.0) + (i < 3 ? sup[i] * x[i + 1] : 0.0);
    }
    REQUIRE(solve_tridiagonal(sub, diag, sup, rhs));
    for (std::size_t i = 0; i < 4; ++i) CHECK(rhs[i] == doctest::Approx(x[i]).epsilon(1e-14));

    std::vector<double> zero_pivot{0.0, 2.0, 2.0, 2.0};
    std::vector<double> r2 = rhs;
    CHECK_FALSE(solve_tridiagonal(sub, zero_pivot, sup, r2));
}

TEST_CASE("log_sum_exp and compensated sum") {
    CHECK(log_sum_exp(1000.0, 1000.0) == doctest::Approx(1000.0 + std::log(2.0)));
    CHECK(log_sum_exp(-INFINITY, 3.0) == 3.0);
    CompensatedSum s;
    s.add(1e16);
    for (int i = 0; i < 1000; ++i) s.add(1.0);
    s.add(-1e16);
    CHECK(s.value() == 1000.0);
}

TEST_CASE("least squares recovers a line") {
    const std::vector<double> x{0.0, 1.0, 2.0, 3.0};
    const std::vector<double> y{1.0, 3.0, 5.0, 7.0};
    const auto fit = least_squares(x, y);
    CHECK(fit.slope == doctest::Approx(2.0));
    CHECK(fit.intercept == doctest::Approx(1.0));
}
