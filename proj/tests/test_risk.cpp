#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mecsim/error.hpp"
#include "mecsim/risk.hpp"
#include "mecsim/rng.hpp"

using namespace mecsim;

namespace {

std::vector<double> one_to_hundred() {
    std::vector<double> v(100);
    for (int i = 0; i < 100; ++i) v[static_cast<std::size_t>(i)] = static_cast<double>(i + 1);
    return v;
}

}  // namespace

TEST_CASE("empirical VaR picks the smallest threshold with tail mass <= alpha") {
    const auto v = one_to_hundred();
    CHECK(var_empirical(v, 0.1) == 90.0);
    CHECK(var_empirical(std::vector<double>{7, 7, 7}, 0.3) == 7.0);
    // alpha close to 1 admits (almost) everything above the minimum
    CHECK(var_empirical(v, 0.999) == 1.0);
    CHECK_THROWS_AS((void)var_empirical(std::vector<double>{}, 0.1), Error);
    CHECK_THROWS_AS((void)var_empirical(v, 0.0), Error);
}

TEST_CASE("empirical CVaR averages the strict tail") {
    const auto v = one_to_hundred();
    CHECK(cvar_empirical(v, 0.1) == 95.5);
    CHECK(cvar_empirical(std::vector<double>{4, 4, 4, 4}, 0.25) == 4.0);  // empty tail falls back to VaR
}

TEST_CASE("CVaR dominates VaR on arbitrary samples") {
    Rng rng(123);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> v(1 + rng.below(200));
        for (auto& x : v) x = rng.lognormal_median(10.0, 0.8);
        const double alpha = rng.uniform(0.02, 0.5);
        CHECK(cvar_empirical(v, alpha) >= var_empirical(v, alpha));
    }
}

TEST_CASE("the threshold-minimization form reproduces the tail mean") {
    const auto v = one_to_hundred();
    const auto r = cvar_rockafellar(v, 0.1);
    CHECK(r.cvar == doctest::Approx(95.5).epsilon(1e-12));
    CHECK(r.tau_th == 90.0);

    const std::vector<double> constant{3, 3, 3};
    const auto rc = cvar_rockafellar(constant, 0.2);
    CHECK(rc.cvar == 3.0);
    CHECK(rc.tau_th == 3.0);
}

TEST_CASE("minimization form agrees with the tail mean when alpha*n is integral") {
    Rng rng(777);
    for (int rep = 0; rep < 100; ++rep) {
        // Sizes are multiples of 1/alpha: the auxiliary objective's minimum
        // blends the atom at the quantile otherwise, and the two estimators
        // only coincide when alpha*n is an integer.
        const double alpha = 0.1;
        const std::size_t n = 10 * (1 + rng.below(40));
        std::vector<double> v(n);
        for (auto& x : v) x = rng.uniform(0.0, 50.0) + rng.exponential(5.0);
        const double tail = cvar_empirical(v, alpha);
        const auto r = cvar_rockafellar(v, alpha);
        CHECK(r.cvar == doctest::Approx(tail).epsilon(1e-9));
    }
}

TEST_CASE("gaussian CVaR matches the standard-normal reference value") {
    CHECK(cvar_gaussian(0.0, 1.0, 0.05) == doctest::Approx(2.0627128).epsilon(5e-3));
    CHECK(cvar_gaussian(10.0, 0.0, 0.3) == 10.0);
    CHECK_THROWS_AS((void)cvar_gaussian(0.0, -1.0, 0.1), Error);
    CHECK_THROWS_AS((void)cvar_gaussian(0.0, 1.0, 1.0), Error);
}

TEST_CASE("risk measures are positively homogeneous and translation equivariant") {
    Rng rng(99);
    std::vector<double> v(400);
    for (auto& x : v) x = rng.exponential(3.0);
    const double alpha = 0.08;
    const double base = cvar_empirical(v, alpha);

    std::vector<double> scaled(v), shifted(v);
    for (auto& x : scaled) x *= 4.0;
    for (auto& x : shifted) x += 11.0;
    CHECK(cvar_empirical(scaled, alpha) == doctest::Approx(4.0 * base).epsilon(1e-12));
    CHECK(cvar_empirical(shifted, alpha) == doctest::Approx(base + 11.0).epsilon(1e-12));

    CHECK(cvar_gaussian(2.0 * 3.0, 4.0 * 5.0, alpha) ==
          doctest::Approx(2.0 * cvar_gaussian(3.0, 5.0, alpha)).epsilon(1e-12));
    CHECK(cvar_gaussian(3.0 + 7.0, 5.0, alpha) ==
          doctest::Approx(cvar_gaussian(3.0, 5.0, alpha) + 7.0).epsilon(1e-12));
}

TEST_CASE("tighter tails give larger CVaR") {
    Rng rng(5);
    std::vector<double> v(1000);
    for (auto& x : v) x = rng.lognormal_median(20.0, 0.6);
    CHECK(cvar_empirical(v, 0.01) >= cvar_empirical(v, 0.05));
    CHECK(cvar_empirical(v, 0.05) >= cvar_empirical(v, 0.2));
    CHECK(cvar_gaussian(0, 1, 0.01) >= cvar_gaussian(0, 1, 0.05));
}

TEST_CASE("normal quantile inverts the CDF to high accuracy") {
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-9));
    for (double p : {1e-6, 1e-3, 0.12, 0.5, 0.77, 0.999, 1.0 - 1e-7}) {
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
    }
    CHECK_THROWS_AS((void)normal_quantile(0.0), Error);
}

TEST_CASE("risk estimates keep cvar above var") {
    Rng rng(31);
    std::vector<double> v(500);
    for (auto& x : v) x = rng.exponential(2.0) + rng.uniform(0.0, 1.0);
    const auto e = estimate_risk_empirical(v, 0.05);
    CHECK(e.cvar_ms >= e.var_ms);
    CHECK(e.source == RiskEstimate::Source::Empirical);
    const auto g = estimate_risk_gaussian(5.0, 2.0, 0.05);
    CHECK(g.cvar_ms >= g.var_ms);
    CHECK(g.source == RiskEstimate::Source::Gaussian);
}
