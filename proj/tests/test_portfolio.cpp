#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "trendlab/analysis.hpp"
#include "trendlab/portfolio.hpp"
#include "trendlab/rng.hpp"
#include "trendlab/synth.hpp"

using namespace trendlab;

namespace {

// correlated Gaussian price panel from a one-factor model
AssetPanel correlated_panel(std::size_t n_assets, std::size_t n_ticks,
                            double rho, std::uint64_t seed) {
    GaussRng common(seed, 1000);
    std::vector<GaussRng> own;
    for (std::size_t k = 0; k < n_assets; ++k) own.emplace_back(seed, k);
    AssetPanel p;
    p.ticks.resize(n_ticks);
    for (std::size_t i = 0; i < n_ticks; ++i)
        p.ticks[i] = static_cast<std::int64_t>(i);
    p.columns.assign(n_assets, std::vector<double>(n_ticks));
    const double a = std::sqrt(rho), b = std::sqrt(1.0 - rho);
    for (std::size_t i = 0; i < n_ticks; ++i) {
        const double f = common.gauss();
        for (std::size_t k = 0; k < n_assets; ++k) {
            const double d = a * f + b * own[k].gauss();
            p.columns[k][i] = i == 0 ? 0.0 : p.columns[k][i - 1] + d;
        }
    }
    for (std::size_t k = 0; k < n_assets; ++k)
        p.names.push_back("a" + std::to_string(k));
    return p;
}

PortfolioConfig base_config(double tau) {
    PortfolioConfig cfg;
    cfg.trend.tau = tau;
    return cfg;
}

} // namespace

TEST_CASE("fee drag: zero gross over one year loses the flat costs") {
    FeeSchedule fees; // 2% + 1%, 20% incentive, zero risk-free
    std::vector<double> gross(252, 0.0);
    const auto net = apply_fees(gross, fees);
    double cum = 0.0;
    for (double v : net) cum += v;
    CHECK(cum == doctest::Approx(-0.03).epsilon(1e-10));
}

TEST_CASE("incentive fee takes 20% of new gains") {
    FeeSchedule fees;
    fees.transaction_cost_rate = 0.0;
    fees.management_fee = 0.0;
    // +10% spread evenly over the year
    std::vector<double> gross(252, 0.10 / 252.0);
    const auto net = apply_fees(gross, fees);
    double cum = 0.0;
    for (double v : net) cum += v;
    CHECK(cum == doctest::Approx(0.08).epsilon(1e-10));
}

TEST_CASE("incentive accrual reverses when gains evaporate") {
    FeeSchedule fees;
    fees.transaction_cost_rate = 0.0;
    fees.management_fee = 0.0;
    std::vector<double> gross(252, 0.0);
    for (std::size_t t = 0; t < 100; ++t) gross[t] = 0.001;   // +10%
    for (std::size_t t = 100; t < 200; ++t) gross[t] = -0.001; // back to 0
    const auto net = apply_fees(gross, fees);
    double cum = 0.0, cum_mid = 0.0;
    for (std::size_t t = 0; t < net.size(); ++t) {
        cum += net[t];
        if (t == 99) cum_mid = cum;
    }
    // mid-year the accrual is active (net lags gross by 20% of gains) ...
    CHECK(cum_mid == doctest::Approx(0.08).epsilon(1e-9));
    // ... and fully reverses before crystallization
    CHECK(cum == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("high-water mark blocks incentive on recovered losses") {
    FeeSchedule fees;
    fees.transaction_cost_rate = 0.0;
    fees.management_fee = 0.0;
    // year 1: +10% (2% incentive paid, HWM = 0.10)
    // year 2: -10% then +10% back to the old mark: no new incentive
    std::vector<double> gross(504, 0.0);
    for (std::size_t t = 0; t < 252; ++t) gross[t] = 0.10 / 252.0;
    for (std::size_t t = 252; t < 378; ++t) gross[t] = -0.10 / 126.0;
    for (std::size_t t = 378; t < 504; ++t) gross[t] = 0.10 / 126.0;
    const auto net = apply_fees(gross, fees);
    double cum = 0.0;
    for (double v : net) cum += v;
    CHECK(cum == doctest::Approx(0.08).epsilon(1e-9));
}

TEST_CASE("risk-free leg credits per tick") {
    FeeSchedule fees;
    fees.transaction_cost_rate = 0.0;
    fees.management_fee = 0.0;
    fees.incentive_fee = 0.0;
    fees.risk_free_rate = 0.0252;
    std::vector<double> gross(10, 0.0);
    const auto net = apply_fees(gross, fees);
    for (double v : net) CHECK(v == doctest::Approx(0.0001).epsilon(1e-12));

    fees.risk_free_series.assign(10, 0.5);
    const auto net2 = apply_fees(gross, fees);
    for (double v : net2) CHECK(v == doctest::Approx(0.5));
    fees.risk_free_series.resize(3);
    CHECK_THROWS_AS(apply_fees(gross, fees), std::invalid_argument);
}

TEST_CASE("fee schedule validation") {
    FeeSchedule fees;
    fees.incentive_fee = 1.0;
    CHECK_THROWS_AS(fees.validate(), std::invalid_argument);
    fees = FeeSchedule{};
    fees.ticks_per_year = 0;
    CHECK_THROWS_AS(fees.validate(), std::invalid_argument);
}

TEST_CASE("single-asset portfolio is bit-identical to the single run") {
    const auto panel = correlated_panel(1, 3000, 0.0, 7);
    const auto cfg = base_config(30.0);
    const auto led = run_multi_trend(panel, cfg);
    const auto solo = ema_trend(panel.series(0), cfg.trend);
    REQUIRE(led.gross.size() == solo.gain.size());
    for (std::size_t t = 0; t < led.gross.size(); ++t) {
        CHECK(led.gross[t] == solo.gain[t]);
        CHECK(led.rp[t] == solo.returns[t]);
    }
    CHECK(led.warmup == solo.warmup);
}

TEST_CASE("two identical assets at half weight equal one asset") {
    auto panel = correlated_panel(1, 2000, 0.0, 8);
    panel.names.push_back("copy");
    panel.columns.push_back(panel.columns[0]);
    const auto cfg = base_config(20.0);
    const auto led2 = run_multi_trend(panel, cfg);
    const auto led1 = ema_trend(panel.series(0), cfg.trend);
    for (std::size_t t = 0; t < led2.gross.size(); ++t)
        CHECK(led2.gross[t] == doctest::Approx(led1.gain[t]).epsilon(1e-12));
}

TEST_CASE("diversification: N iid assets cut portfolio variance by N") {
    const std::size_t n_assets = 16;
    const auto panel = correlated_panel(n_assets, 60000, 0.0, 9);
    const auto cfg = base_config(20.0);
    const auto led = run_multi_trend(panel, cfg);
    const auto solo = ema_trend(panel.series(0), cfg.trend);
    std::vector<double> pg(led.gross.begin() + led.warmup, led.gross.end());
    std::vector<double> sg(solo.gain.begin() + solo.warmup, solo.gain.end());
    const double ratio = variance(sg) / variance(pg);
    CHECK(ratio == doctest::Approx(static_cast<double>(n_assets)).epsilon(0.15));
}

TEST_CASE("portfolio weights validation") {
    const auto panel = correlated_panel(3, 500, 0.2, 10);
    auto cfg = base_config(10.0);
    cfg.weights = {0.5, 0.5}; // wrong count
    CHECK_THROWS_AS(run_multi_trend(panel, cfg), std::invalid_argument);
    cfg.weights = {0.7, 0.6, -0.3}; // negative
    CHECK_THROWS_AS(run_multi_trend(panel, cfg), std::invalid_argument);
    cfg.weights = {0.5, 0.4, 0.3}; // sums to 1.2
    CHECK_THROWS_AS(run_multi_trend(panel, cfg), std::invalid_argument);
    cfg.weights = {0.5, 0.3, 0.2};
    CHECK_NOTHROW(run_multi_trend(panel, cfg));
}

TEST_CASE("risk parity returns are the weighted normalized returns") {
    const auto panel = correlated_panel(4, 2000, 0.3, 11);
    PortfolioConfig cfg = base_config(15.0);
    cfg.rp_weights = {0.4, 0.3, 0.2, 0.1};
    const auto led = run_multi_trend(panel, cfg);
    for (std::size_t t : {100ul, 500ul, 1999ul - 1ul}) {
        double acc = 0.0;
        for (std::size_t k = 0; k < 4; ++k)
            acc += cfg.rp_weights[k] * led.per_asset[k].returns[t];
        CHECK(led.rp[t] == doctest::Approx(acc).epsilon(1e-12));
    }
    // the standalone benchmark runner returns exactly that series
    const auto rp = run_risk_parity(panel, cfg);
    REQUIRE(rp.size() == led.rp.size());
    for (std::size_t t = 0; t < rp.size(); ++t) CHECK(rp[t] == led.rp[t]);

    // identical assets: any convex weights give back the single asset
    auto twin = correlated_panel(1, 1000, 0.0, 12);
    twin.names.push_back("b");
    twin.columns.push_back(twin.columns[0]);
    PortfolioConfig tcfg = base_config(15.0);
    tcfg.rp_weights = {0.9, 0.1};
    const auto tled = run_multi_trend(twin, tcfg);
    for (std::size_t t = 0; t < tled.rp.size(); ++t)
        CHECK(tled.rp[t] ==
              doctest::Approx(tled.per_asset[0].returns[t]).epsilon(1e-12));
}

TEST_CASE("convexity bound holds pointwise on correlated panels") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto panel = correlated_panel(2 + seed * 3, 20000,
                                            0.15 * static_cast<double>(seed), 100 + seed);
        const auto cfg = base_config(10.0 + 37.0 * static_cast<double>(seed));
        const auto led = run_multi_trend(panel, cfg);
        const auto rep = convexity_bound_check(led, cfg);
        CHECK(rep.checked > 0);
        CHECK(rep.violations == 0);
        CHECK(rep.min_gap > -1e-10);
    }
}

TEST_CASE("convexity bound is tight for N=1 and identical assets") {
    const auto solo = correlated_panel(1, 5000, 0.0, 13);
    const auto cfg = base_config(25.0);
    const auto rep1 = convexity_bound_check(run_multi_trend(solo, cfg), cfg);
    CHECK(rep1.max_abs_gap < 1e-10);

    auto same = correlated_panel(1, 5000, 0.0, 14);
    for (int k = 0; k < 3; ++k) {
        same.names.push_back("c" + std::to_string(k));
        same.columns.push_back(same.columns[0]);
    }
    const auto rep4 = convexity_bound_check(run_multi_trend(same, cfg), cfg);
    CHECK(rep4.max_abs_gap < 1e-10);
}

TEST_CASE("convexity bound requires the linear shape") {
    const auto panel = correlated_panel(2, 2000, 0.1, 15);
    auto cfg = base_config(10.0);
    cfg.trend.shape = PositionShape::parse("sign");
    const auto led = run_multi_trend(panel, cfg);
    CHECK_THROWS_AS(convexity_bound_check(led, cfg), std::invalid_argument);
}

TEST_CASE("vol match and sharpe") {
    const auto x = gauss_vector(10000, 51);
    std::vector<double> half(x);
    for (auto& v : half) v *= 0.5;
    CHECK(vol_match(half, x) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(vol_match(x, x) == doctest::Approx(1.0));
    // scaled candidate reproduces the reference vol exactly
    const double f = vol_match(half, x);
    std::vector<double> scaled(half);
    for (auto& v : scaled) v *= f;
    CHECK(std::sqrt(variance(scaled)) ==
          doctest::Approx(std::sqrt(variance(x))).epsilon(1e-12));
    CHECK_THROWS_AS(vol_match(std::vector<double>(100, 1.0), x),
                    std::invalid_argument);

    std::vector<double> drift(1000);
    for (std::size_t i = 0; i < drift.size(); ++i)
        drift[i] = 0.01 + x[i] * 0.1;
    CHECK(sharpe_ratio(drift) > 0.0);
}

TEST_CASE("tau scan recovers a planted timescale") {
    const auto panel = correlated_panel(6, 30000, 0.4, 16);
    // hidden reference: tau=60 trend on the first three assets, gross of fees
    PortfolioConfig ref_cfg = base_config(60.0);
    ref_cfg.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0, 0.0, 0.0};
    const auto ref = run_multi_trend(panel, ref_cfg);

    PortfolioConfig cfg = base_config(60.0);
    FeeSchedule fees;
    const std::vector<double> taus{15.0, 30.0, 60.0, 120.0, 240.0};
    const auto scan = tau_scan(panel, ref.gross, taus, cfg, fees);
    REQUIRE(scan.points.size() == taus.size());
    CHECK(scan.best_tau() == 60.0);
    CHECK(scan.best_correlation() > 0.8);
    for (const auto& p : scan.points) CHECK(p.matched_lambda > 0.0);

    // affine rescaling of the reference leaves the curve unchanged
    std::vector<double> ref2(ref.gross);
    for (auto& v : ref2) v = 3.0 * v;
    const auto scan2 = tau_scan(panel, ref2, taus, cfg, fees);
    for (std::size_t i = 0; i < taus.size(); ++i)
        CHECK(scan2.points[i].correlation ==
              doctest::Approx(scan.points[i].correlation).epsilon(1e-9));
}

TEST_CASE("tau scan rejects short overlaps and bad references") {
    // 499 changes - 30 warm-up ticks < 2 * 252: too short to correlate
    const auto panel = correlated_panel(2, 500, 0.2, 17);
    PortfolioConfig cfg = base_config(10.0);
    FeeSchedule fees;
    std::vector<double> ref(panel.n_ticks() - 1, 0.1);
    const std::vector<double> taus{10.0};
    CHECK_THROWS_AS(tau_scan(panel, ref, taus, cfg, fees),
                    std::invalid_argument); // < 2 years after warm-up
    std::vector<double> short_ref(10, 0.1);
    CHECK_THROWS_AS(tau_scan(panel, short_ref, taus, cfg, fees),
                    std::invalid_argument);
}
