#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "trendlab/analysis.hpp"
#include "trendlab/filters.hpp"
#include "trendlab/rng.hpp"

using namespace trendlab;

TEST_CASE("timescale and decay conventions are exact") {
    const FilterSpec f = FilterSpec::from_tau(10.0);
    CHECK(f.alpha == doctest::Approx(1.0 - 2.0 / 11.0).epsilon(1e-15));
    // tau' is the timescale whose decay is alpha^2
    const double a2 = f.alpha * f.alpha;
    const double tau_of_a2 = 2.0 / (1.0 - a2) - 1.0;
    CHECK(f.tau_prime == doctest::Approx(tau_of_a2).epsilon(1e-14));
    CHECK(f.tau_prime == doctest::Approx(10.0 / 2 + 1.0 / 20).epsilon(1e-15));

    const FilterSpec g = FilterSpec::from_alpha(f.alpha);
    CHECK(g.tau == doctest::Approx(10.0).epsilon(1e-13));

    CHECK_THROWS_AS(FilterSpec::from_tau(1.0), std::invalid_argument);
    CHECK_THROWS_AS(FilterSpec::from_alpha(1.0), std::invalid_argument);
    CHECK_THROWS_AS(FilterSpec::from_alpha(-0.1), std::invalid_argument);
}

TEST_CASE("ema hand values, tau = 3 (alpha = 1/2)") {
    const auto y = ema(std::vector<double>{1.0, 0.0, 0.0, 0.0}, 0.5);
    CHECK(y[0] == doctest::Approx(0.5));
    CHECK(y[1] == doctest::Approx(0.25));
    CHECK(y[2] == doctest::Approx(0.125));
    CHECK(y[3] == doctest::Approx(0.0625));
    // constant input converges to the constant
    const auto c = ema(std::vector<double>(200, 3.0), 0.5);
    CHECK(c.back() == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("ema equals the explicit geometric sum") {
    const auto x = gauss_vector(300, 11);
    const double alpha = FilterSpec::from_tau(7.5).alpha;
    const auto y = ema(x, alpha);
    const auto raw = ema_raw(x, alpha);
    for (std::size_t t : {0ul, 1ul, 5ul, 100ul, 299ul}) {
        double acc = 0.0;
        for (std::size_t i = 0; i <= t; ++i)
            acc += std::pow(alpha, static_cast<double>(i)) * x[t - i];
        CHECK(raw[t] == doctest::Approx(acc).epsilon(1e-12));
        CHECK(y[t] == doctest::Approx((1.0 - alpha) * acc).epsilon(1e-12));
    }
}

TEST_CASE("lagged-product filter identity vanishes pathwise") {
    for (double tau : {2.0, 3.7, 10.0, 180.0, 500.0}) {
        const auto x = gauss_vector(3000, 77 + static_cast<unsigned>(tau));
        const auto res = filter_identity_residual(x, tau);
        double m = 0.0;
        for (double r : res) m = std::max(m, std::fabs(r));
        CHECK(m < 1e-12);
    }
}

TEST_CASE("filter identity holds at the very first sample") {
    // t=0 is the base case of the zero-init recursion: both sides reduce to
    // (1-1/tau)*0 vs (1-a)^2 x0^2 - (1-a^2)x0^2/tau, which cancel exactly
    const std::vector<double> x{2.5};
    const auto res = filter_identity_residual(x, 9.0);
    CHECK(std::fabs(res[0]) < 1e-15);
}

TEST_CASE("warmup length convention") {
    CHECK(warmup_length(10.0) == 30);
    CHECK(warmup_length(180.0) == 540);
    CHECK(warmup_length(2.5, 3.0) == 8); // ceil(7.5)
    CHECK(warmup_length(0.0) == 0);
}

TEST_CASE("realized vol tracks a constant-vol series") {
    // constant |d| = 2: EMA of d^2 converges to 4, sigma -> gamma * 2
    std::vector<double> d(500, 2.0);
    VolEstimatorSpec spec;
    const auto sigma = realized_vol(d, spec);
    CHECK(sigma.back() == doctest::Approx(2.0 * spec.gamma).epsilon(1e-10));
}

TEST_CASE("realized vol is scale covariant and floored") {
    const auto d = gauss_vector(400, 5);
    std::vector<double> d10(d.begin(), d.end());
    for (auto& v : d10) v *= 10.0;
    const auto s1 = realized_vol(d);
    const auto s10 = realized_vol(d10);
    for (std::size_t t = 0; t < d.size(); ++t)
        CHECK(s10[t] == doctest::Approx(10.0 * s1[t]).epsilon(1e-12));

    // all-zero changes: the absolute floor keeps sigma positive
    std::vector<double> zeros(50, 0.0);
    const auto sz = realized_vol(zeros);
    for (double s : sz) CHECK(s > 0.0);

    // a flat stretch after activity floors at 1e-8 * mean |d|
    std::vector<double> mixed(2000, 1.0);
    for (std::size_t t = 1000; t < 2000; ++t) mixed[t] = 0.0;
    const auto sm = realized_vol(mixed);
    CHECK(sm.back() >= 1e-8 * 0.5 * 0.9);
    CHECK(sm.back() < 1e-3);
}

TEST_CASE("normalized returns carry unit variance on a Gaussian walk") {
    // the gamma = 1.05 unbiasing is calibrated to within 2 percent of 1
    const auto d = gauss_vector(1000000, 20240801);
    VolEstimatorSpec spec;
    const auto r = risk_normalize(d, spec);
    std::vector<double> post(r.begin() + spec.warmup(), r.end());
    CHECK(variance(post) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("risk_normalize lags the vol estimate by one tick") {
    const auto d = gauss_vector(50, 9);
    const auto sigma = realized_vol(d);
    const auto r = risk_normalize(d);
    CHECK(r[0] == 0.0);
    for (std::size_t t = 1; t < d.size(); ++t)
        CHECK(r[t] == doctest::Approx(d[t] / sigma[t - 1]).epsilon(1e-14));
}

TEST_CASE("vol estimator rejects bad parameters") {
    VolEstimatorSpec bad;
    bad.tau_sigma = 0.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = VolEstimatorSpec{};
    bad.gamma = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
