#include <doctest.h>

#include "oracles.hpp"
#include "soliton/energy_functionals.hpp"
#include "soliton/errors.hpp"

#include <cmath>

using namespace soliton;

namespace {

ConeSpec plain(int n) {
    ConeSpec s;
    s.n = n;
    return s;
}

struct Reference {
    MAProblem prob;
    std::vector<double> psi;
};

Reference solve(std::size_t count, double amplitude = 0.1) {
    const auto p = build_profile(plain(2), RadialGrid(0.5, 60.0, count), 1e-12);
    auto prob = MAProblem::bump(p, amplitude, 5.0, 8.0);
    auto psi = continuity_solve(prob, 10, 1e-10).psi.psi;
    return {std::move(prob), std::move(psi)};
}

const Reference& reference() {
    static const Reference r = solve(2048);
    return r;
}

// ∫ a (w_0 - w_ψ) dt straight from the definition: own differences, plain
// exponentials (t <= 60 keeps e^φ finite), composite trapezoid with endpoint
// corrections replaced by Simpson on an odd node count.
double direct_weighted(const Profile& p, const std::vector<double>& a, const std::vector<double>& psi) {
    const std::size_t count = p.size();
    const double h = p.grid.spacing();
    const int n = p.spec.n;
    std::vector<long double> g(count);
    for (std::size_t k = 0; k < count; ++k) {
        double d1, d2;
        if (k == 0) {
            d1 = 0.0;
            d2 = 2 * (psi[1] - psi[0]) / (h * h);
        } else if (k + 1 == count) {
            d1 = (3 * psi[k] - 4 * psi[k - 1] + psi[k - 2]) / (2 * h);
            d2 = (2 * psi[k] - 5 * psi[k - 1] + 4 * psi[k - 2] - psi[k - 3]) / (h * h);
        } else {
            d1 = (psi[k + 1] - psi[k - 1]) / (2 * h);
            d2 = (psi[k + 1] - 2 * psi[k] + psi[k - 1]) / (h * h);
        }
        const long double w0 = 0.5L * n * std::exp((long double)p.phi[k]) *
                               std::pow((long double)p.phi[k], n - 1) * p.phi1[k];
        const long double wp = 0.5L * n * std::exp((long double)p.phi[k] + 2 * d1) *
                               std::pow((long double)p.phi[k] + 2 * d1, n - 1) * (p.phi1[k] + 2 * d2);
        g[k] = a[k] * (w0 - wp);
    }
    // Simpson with a 3/8 tail when the interval count is odd
    long double total = 0.0L;
    std::size_t end = count - 1;
    if (end % 2 == 1) {
        total += 3.0L * h / 8.0L * (g[end - 3] + 3 * g[end - 2] + 3 * g[end - 1] + g[end]);
        end -= 3;
    }
    for (std::size_t k = 0; k + 2 <= end; k += 2) total += h / 3.0L * (g[k] + 4 * g[k + 1] + g[k + 2]);
    return static_cast<double>(total);
}

}  // namespace

TEST_CASE("energies of the zero potential vanish") {
    const auto& r = reference();
    const auto zero = std::vector<double>(r.psi.size(), 0.0);
    CHECK(energy_I(make_potential(r.prob.profile, zero), r.prob) == 0.0);
    CHECK(energy_J(PotentialPath::linear(zero), r.prob).value == 0.0);
    CHECK(first_variation_check(PotentialPath::linear(zero), r.prob, 8) == 0.0);
}

TEST_CASE("I against the direct formula") {
    const auto& r = reference();
    const double direct = direct_weighted(r.prob.profile, r.psi, r.psi);
    CHECK(energy_I(make_potential(r.prob.profile, r.psi), r.prob) == doctest::Approx(direct).epsilon(1e-9));
}

TEST_CASE("I is quadratic in the linear regime") {
    const auto& r = reference();
    double vals[3];
    int i = 0;
    for (double eps : {0.4, 0.2, 0.1}) {
        auto v = r.psi;
        for (auto& x : v) x *= eps;
        vals[i++] = energy_I(make_potential(r.prob.profile, v), r.prob);
    }
    const double order = std::log2((vals[0] - vals[1]) / (vals[1] - vals[2]));
    CHECK(order == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("J against nested oracle quadrature") {
    const auto& r = reference();
    const auto j = energy_J(PotentialPath::linear(r.psi), r.prob);
    const double nested = oracle::integrate(
        [&](double u) {
            std::vector<double> v = r.psi;
            for (auto& x : v) x *= u;
            return direct_weighted(r.prob.profile, r.psi, v);
        },
        0.0, 1.0, 8);
    CHECK(j.value == doctest::Approx(nested).epsilon(1e-9));
    CHECK(j.error_estimate > 0.0);
    CHECK(j.error_estimate < 1e-3 * std::abs(j.value));
}

TEST_CASE("J is path independent") {
    const auto& r = reference();
    const auto lin = energy_J(PotentialPath::linear(r.psi), r.prob);
    const auto rep = energy_J(
        PotentialPath::reparam(r.psi, [](double u) { return u * u; }, [](double u) { return 2 * u; }), r.prob);
    CHECK(std::abs(lin.value - rep.value) <= 10.0 * std::max(lin.error_estimate, rep.error_estimate));

    // a curved path with the same endpoint: uψ + u(1-u)χ
    std::vector<double> chi(r.psi.size(), 0.0);
    const auto& p = r.prob.profile;
    for (std::size_t k = 0; k + 1 < chi.size(); ++k) chi[k] = 0.05 * std::exp(-(p.t(k) - 10) * (p.t(k) - 10) / 4);
    const auto curved = PotentialPath::custom(
        [&](double u) {
            auto v = r.psi;
            for (std::size_t k = 0; k < v.size(); ++k) v[k] = u * r.psi[k] + u * (1 - u) * chi[k];
            return v;
        },
        [&](double u) {
            auto v = r.psi;
            for (std::size_t k = 0; k < v.size(); ++k) v[k] = r.psi[k] + (1 - 2 * u) * chi[k];
            return v;
        });
    const auto bent = energy_J(curved, r.prob);
    CHECK(std::abs(bent.value - lin.value) <= 10.0 * std::max(lin.error_estimate, bent.error_estimate));

    // a closed loop returns J = 0: out along sin(πu)ψ + sin(2πu)χ and back
    const auto loop = PotentialPath::custom(
        [&](double u) {
            auto v = r.psi;
            for (std::size_t k = 0; k < v.size(); ++k) {
                v[k] = std::sin(M_PI * u) * r.psi[k] + std::sin(2 * M_PI * u) * chi[k];
            }
            return v;
        },
        [&](double u) {
            auto v = r.psi;
            for (std::size_t k = 0; k < v.size(); ++k) {
                v[k] = M_PI * std::cos(M_PI * u) * r.psi[k] + 2 * M_PI * std::cos(2 * M_PI * u) * chi[k];
            }
            return v;
        });
    const auto closed = energy_J(loop, r.prob);
    CHECK(std::abs(closed.value) <= 10.0 * closed.error_estimate + 1e-12 * std::abs(lin.value));
}

TEST_CASE("I - J is nonnegative on converged solutions") {
    for (double amp : {0.1, -0.1, 0.02}) {
        const auto r = solve(1024, amp);
        const double i = energy_I(make_potential(r.prob.profile, r.psi), r.prob);
        const double j = energy_J(PotentialPath::linear(r.psi), r.prob).value;
        CHECK(i - j >= 0.0);
    }
}

TEST_CASE("first variation identity") {
    const auto coarse = solve(1024);
    const auto& fine = reference();
    const double d_coarse = first_variation_check(PotentialPath::linear(coarse.psi), coarse.prob, 16);
    const double d_fine = first_variation_check(PotentialPath::linear(fine.psi), fine.prob, 32);
    CHECK(d_fine <= 1e-3);
    CHECK(d_fine < d_coarse);
    const double d_rep = first_variation_check(
        PotentialPath::reparam(fine.psi, [](double u) { return u * u; }, [](double u) { return 2 * u; }),
        fine.prob, 32);
    CHECK(d_rep <= 1e-3);
}

TEST_CASE("divergent integrands are rejected") {
    const auto& r = reference();
    // ψ growing linearly towards t_max has no decaying weight
    std::vector<double> grow(r.psi.size());
    const auto& p = r.prob.profile;
    for (std::size_t k = 0; k < grow.size(); ++k) grow[k] = 1e-3 * (p.t(k) - 0.5);
    CHECK_THROWS_AS(energy_I(make_potential(p, grow), r.prob), Error);
}

TEST_CASE("c_k coefficients") {
    for (double f : {0.25, 1.0, 7.0, 50.0}) {
        CHECK(ck_coefficient(0, f) == doctest::Approx(std::expm1(f) / f).epsilon(1e-14));
    }
    // recursion (and series) against quadrature, and against a long-double oracle
    for (int k = 0; k <= 6; ++k) {
        for (double f : {0.5, 1.0, 3.0, 10.0, 30.0}) {
            const double oracle = oracle::integrate([&](double s) { return std::pow(s, k) * std::exp(s * f); },
                                                    0.0, 1.0, 400);
            CHECK(ck_coefficient(k, f) == doctest::Approx(oracle).epsilon(1e-8));
            CHECK(ck_coefficient(k, f) == doctest::Approx(ck_quadrature(k, f)).epsilon(1e-8));
            if (k >= 1) {
                const double diff = oracle::integrate(
                    [&](double s) { return std::pow(s, k - 1) * (1 - s) * std::exp(s * f); }, 0.0, 1.0, 400);
                CHECK(ck_difference(k, f) == doctest::Approx(diff).epsilon(1e-8));
            }
        }
    }
    // large k at small f goes through the series
    CHECK(ck_coefficient(40, 2.0) == doctest::Approx(ck_quadrature(40, 2.0)).epsilon(1e-10));

    CHECK(ck_coefficient(3, 50.0) * 50.0 * std::exp(-50.0) == doctest::Approx(1.0).epsilon(0.1));
    CHECK(ck_difference(3, 200.0) * 200.0 * 200.0 * std::exp(-200.0) == doctest::Approx(1.0).epsilon(0.1));
    for (double f : {0.5, 50.0, 200.0}) {
        CHECK(ck_ratio(3, f) == doctest::Approx(ck_coefficient(3, f) * f * std::exp(-f)).epsilon(1e-13));
        CHECK(ck_difference_ratio(3, f) ==
              doctest::Approx(ck_difference(3, f) * f * f * std::exp(-f)).epsilon(1e-12));
    }
    // no overflow past the exponent range of double
    CHECK(ck_ratio(3, 1000.0) == doctest::Approx(1.0 - 3.0 / 1000.0).epsilon(1e-4));
    CHECK(ck_difference_ratio(3, 1000.0) == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("Claim lower bound") {
    for (int n : {2, 3}) {
        const auto bound = claim_lower_bound(n);
        CHECK(bound.constant > 0.0);
        REQUIRE(bound.f.size() == 291);
        for (std::size_t i = 0; i < bound.f.size(); i += 29) {
            // ∫ t(1-t)^{n-1} e^{(1-t)f} dt = c_{n-1} - c_n in s = 1 - t
            const double f = bound.f[i];
            CHECK(bound.ratio[i] == doctest::Approx(ck_difference(n, f) * f * f * std::exp(-f)).epsilon(1e-9));
        }
        CHECK(bound.ratio.back() == doctest::Approx(1.0).epsilon(0.02));
    }
}
