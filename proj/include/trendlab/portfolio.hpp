#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "trendlab/strategy.hpp"
#include "trendlab/timeseries.hpp"

namespace trendlab {

struct FeeSchedule {
    double transaction_cost_rate = 0.02; // annualized drag
    double management_fee = 0.01;        // annualized
    double incentive_fee = 0.20;         // share of new gains above the high-water mark
    double risk_free_rate = 0.0;         // flat annualized rate credited per tick
    std::vector<double> risk_free_series; // optional per-tick r_t; overrides the flat rate
    std::size_t ticks_per_year = 252;

    void validate() const; // all rates in [0, 1)
};

// Net-of-fees per-tick P&L. Transaction and management costs accrue pro rata
// (rate / ticks_per_year); the incentive fee accrues per tick against the
// high-water mark of cumulative pre-incentive performance — accruals reverse
// if gains evaporate — and crystallizes at each year end.
std::vector<double> apply_fees(std::span<const double> gross,
                               const FeeSchedule& fees);

struct PortfolioConfig {
    TrendConfig trend;               // shared across assets
    std::vector<double> weights;     // empty -> 1/N; must be >= 0, sum to 1
    std::vector<double> rp_weights;  // risk-parity leg weights, empty -> 1/N

    void validate(std::size_t n_assets) const;
    std::vector<double> resolved_weights(std::size_t n_assets) const;
    std::vector<double> resolved_rp_weights(std::size_t n_assets) const;
};

struct PortfolioLedger {
    std::vector<StrategyLedger> per_asset;
    std::vector<std::int64_t> ticks;
    std::vector<double> gross;        // sum_k w_k G_{k,t}
    std::vector<double> rp;           // risk-parity returns sum_k w_k R_{k,t}
    std::vector<double> rp_indicator; // sqrt(tau) * L_tau[rp]
    std::size_t warmup = 0;
};

// Runs the same trend configuration on every panel column and aggregates with
// the configured weights. Per-asset runs are independent; the reduction order
// is fixed so results do not depend on scheduling.
PortfolioLedger run_multi_trend(const AssetPanel& panel,
                                const PortfolioConfig& config);

// Long-only risk-parity benchmark: returns sum_k w_k R_{k,t}.
std::vector<double> run_risk_parity(const AssetPanel& panel,
                                    const PortfolioConfig& config);

// Pointwise check of the convexity lower bound
//   sum_k w_k GA_k(t)  >=  Upsilon * ( (sum_k w_k T_k(t))^2 - sum_k w_k L_tau'[R_k^2](t) )
// where GA_k is each asset's exact aggregated-P&L parabola. A Jensen
// inequality at the level of the implemented sums, so it must hold path by
// path; the report lists anything beyond tolerance.
struct BoundReport {
    std::size_t checked = 0;
    std::size_t violations = 0;
    double min_gap = 0;     // most negative lhs - rhs seen (0 if none checked)
    double max_abs_gap = 0; // for equality cases (N=1, identical assets)
    double tolerance = 1e-10;

    bool passed() const { return violations == 0; }
};

BoundReport convexity_bound_check(const PortfolioLedger& ledger,
                                  const PortfolioConfig& config);

// Correlation-maximizing timescale scan against a reference return series
// aligned with the panel's change index. Correlations are computed net of
// fees over the common window, excluding warm-up.
struct TauScanPoint {
    double tau = 0;
    double correlation = 0;
    double matched_lambda = 0; // scale equalizing net vol with the reference
    double sharpe_gross = 0;
    double sharpe_net = 0;
};

struct TauScanResult {
    std::vector<TauScanPoint> points;
    std::size_t best_index = 0;

    double best_tau() const { return points.at(best_index).tau; }
    double best_correlation() const { return points.at(best_index).correlation; }
};

TauScanResult tau_scan(const AssetPanel& panel,
                       std::span<const double> reference_returns,
                       std::span<const double> taus,
                       const PortfolioConfig& base, const FeeSchedule& fees);

// std(reference)/std(candidate): scaling the candidate by this factor
// equalizes sample volatilities exactly.
double vol_match(std::span<const double> candidate,
                 std::span<const double> reference);

double sharpe_ratio(std::span<const double> returns,
                    std::size_t ticks_per_year = 252);

} // namespace trendlab
