#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trendlab/filters.hpp"
#include "trendlab/timeseries.hpp"

namespace trendlab {

// Position transform phi applied to the normalized trend indicator.
struct PositionShape {
    enum class Kind { linear, sign, capped, tanh_shape };

    Kind kind = Kind::linear;
    double cap = 1.0; // saturation level for capped

    double apply(double t) const;
    std::string name() const;
    static PositionShape parse(const std::string& name, double cap = 1.0);
};

struct TrendConfig {
    double tau = 180.0;   // lookback timescale of the trend EMA
    double lambda = 1.0;  // risk scale
    PositionShape shape{};
    VolEstimatorSpec vol{};
    double capital = 1.0;
    std::size_t rebalance_every = 1; // hold the position n ticks between updates
    // when true the input series already holds unit-variance returns R_t and
    // the volatility layer is skipped (sigma == 1)
    bool normalized_input = false;

    void validate() const;
};

// Per-tick record of one EMA-trend run. All vectors share one index: in price
// mode it is the index of the change series (one shorter than the prices),
// in normalized mode the index of the input returns.
struct StrategyLedger {
    FilterSpec filter;
    std::vector<std::int64_t> ticks;
    std::vector<double> changes;    // D_t (== returns in normalized mode)
    std::vector<double> sigma;      // vol estimate; all 1 in normalized mode
    std::vector<double> returns;    // R_t = D_t / sigma_{t-1}
    std::vector<double> indicator;  // T_t = sqrt(tau) * L_tau[R]_t, unit variance
    std::vector<double> position;   // Pi_t = capital * lambda * sqrt(tau) * phi(T_t) / sigma_t
    std::vector<double> gain;       // G_t = Pi_{t-1} * D_t, G_0 = 0
    std::vector<double> aggregated; // tau' * L_tau'[G]_t, the ledger P&L average
    std::size_t warmup = 0;

    // sampling stride that decorrelates consecutive aggregated-P&L readings
    std::size_t decorrelation_stride() const;
};

StrategyLedger ema_trend(const TimeSeries& input, const TrendConfig& config);

// Prefactor of the aggregated-P&L parabola: Upsilon = lambda * tau * tau' / (tau - 1).
double upsilon(double tau, double lambda);

// Residual of the exact aggregated-P&L identity
//   tau' L_tau'[G]_t - Upsilon * ( T_t^2 - L_tau'[R^2]_t )
// valid for the linear shape on normalized input; throws otherwise.
std::vector<double> theorem_residual(const StrategyLedger& ledger,
                                     const TrendConfig& config);

// Closed-form conditional P&L profile E[aggregated | T = x] for shapes that
// have one: linear -> Upsilon * (x^2 - 1), sign -> lambda * tau * (|x| - sqrt(2/pi)).
// Throws std::invalid_argument for capped/tanh (use Monte Carlo binning).
std::vector<double> theoretical_profile(const PositionShape& shape, double tau,
                                        double lambda,
                                        std::span<const double> grid);

// Toy trend: position proportional to the running sum of past changes,
// optionally reset to zero every reset_every ticks (block anchoring). The
// cumulative P&L obeys  sum G = (lambda/2) * ((S_T - S_0)^2 - sum D^2)
// path by path, and per block when resetting.
struct ToyRun {
    std::vector<std::int64_t> ticks;
    std::vector<double> working;   // series the toy trades on (D or R)
    std::vector<double> position;
    std::vector<double> gain;
    std::vector<double> block_pnl; // one entry per reset block
    double total_gain = 0.0;
    double identity_value = 0.0;   // (lambda/2) * ((sum x)^2 - sum x^2), full sample
    std::size_t warmup = 0;
};

ToyRun toy_trend(const TimeSeries& prices, double lambda,
                 std::size_t reset_every = 0, bool normalize_input = false,
                 const VolEstimatorSpec& vol = {});

} // namespace trendlab
