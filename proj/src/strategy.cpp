#include "trendlab/strategy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace trendlab {

double PositionShape::apply(double t) const {
    switch (kind) {
    case Kind::linear:
        return t;
    case Kind::sign:
        return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
    case Kind::capped:
        return std::clamp(t, -cap, cap);
    case Kind::tanh_shape:
        return std::tanh(t);
    }
    throw std::logic_error("PositionShape: bad kind");
}

std::string PositionShape::name() const {
    switch (kind) {
    case Kind::linear: return "linear";
    case Kind::sign: return "sign";
    case Kind::capped: return "cap";
    case Kind::tanh_shape: return "tanh";
    }
    throw std::logic_error("PositionShape: bad kind");
}

PositionShape PositionShape::parse(const std::string& name, double cap) {
    PositionShape s;
    s.cap = cap;
    if (name == "linear") s.kind = Kind::linear;
    else if (name == "sign") s.kind = Kind::sign;
    else if (name == "cap") s.kind = Kind::capped;
    else if (name == "tanh") s.kind = Kind::tanh_shape;
    else
        throw std::invalid_argument("PositionShape: unknown shape '" + name +
                                    "' (expected linear|sign|cap|tanh)");
    if (s.kind == Kind::capped && !(cap > 0.0))
        throw std::invalid_argument("PositionShape: cap must be > 0");
    return s;
}

void TrendConfig::validate() const {
    if (!(tau > 1.0))
        throw std::invalid_argument("TrendConfig: tau must be > 1");
    if (!std::isfinite(lambda))
        throw std::invalid_argument("TrendConfig: lambda must be finite");
    if (!(capital > 0.0))
        throw std::invalid_argument("TrendConfig: capital must be > 0");
    if (rebalance_every == 0)
        throw std::invalid_argument("TrendConfig: rebalance_every must be >= 1");
    vol.validate();
}

std::size_t StrategyLedger::decorrelation_stride() const {
    return static_cast<std::size_t>(std::ceil(filter.tau_prime));
}

double upsilon(double tau, double lambda) {
    if (!(tau > 1.0))
        throw std::invalid_argument("upsilon: tau must be > 1");
    const double tau_prime = tau / 2.0 + 1.0 / (2.0 * tau);
    return lambda * tau * tau_prime / (tau - 1.0);
}

StrategyLedger ema_trend(const TimeSeries& input, const TrendConfig& config) {
    config.validate();
    input.validate();
    if (input.size() < 2)
        throw std::invalid_argument("ema_trend: need at least two samples");

    StrategyLedger led;
    led.filter = FilterSpec::from_tau(config.tau);

    if (config.normalized_input) {
        led.ticks = input.ticks;
        led.changes = input.values;
        led.sigma.assign(input.size(), 1.0);
        led.returns = input.values;
    } else {
        TimeSeries d = diff(input);
        led.ticks = d.ticks;
        led.changes = d.values;
        led.sigma = realized_vol(d.values, config.vol);
        led.returns = risk_normalize(d.values, config.vol);
    }

    const std::size_t m = led.changes.size();
    const double sqrt_tau = std::sqrt(config.tau);
    const double alpha = led.filter.alpha;
    const double a2 = alpha * alpha;

    // indicator T_t = sqrt(tau) L_tau[R]_t — unit variance for iid unit R
    led.indicator = ema(led.returns, alpha);
    for (auto& v : led.indicator) v *= sqrt_tau;

    led.position.resize(m);
    led.gain.resize(m);
    double held = 0.0;
    const double scale = config.capital * config.lambda * sqrt_tau;
    for (std::size_t t = 0; t < m; ++t) {
        led.gain[t] = t == 0 ? 0.0 : held * led.changes[t];
        if (t % config.rebalance_every == 0)
            held = scale * config.shape.apply(led.indicator[t]) / led.sigma[t];
        led.position[t] = held;
    }

    led.aggregated = ema(led.gain, a2);
    for (auto& v : led.aggregated) v *= led.filter.tau_prime;

    const double slow = config.normalized_input
                            ? config.tau
                            : std::max(config.tau, config.vol.tau_sigma);
    led.warmup = std::min<std::size_t>(m, warmup_length(slow, 3.0));
    return led;
}

std::vector<double> theorem_residual(const StrategyLedger& ledger,
                                     const TrendConfig& config) {
    if (config.shape.kind != PositionShape::Kind::linear)
        throw std::invalid_argument(
            "theorem_residual: exact identity requires the linear shape");
    if (!config.normalized_input)
        throw std::invalid_argument(
            "theorem_residual: exact identity lives in normalized-return space");
    if (config.rebalance_every != 1)
        throw std::invalid_argument(
            "theorem_residual: exact identity requires per-tick rebalancing");

    const double tau = config.tau;
    const double ups = upsilon(tau, config.lambda * config.capital);
    const double a2 = ledger.filter.alpha * ledger.filter.alpha;

    std::vector<double> r2(ledger.returns.size());
    for (std::size_t t = 0; t < r2.size(); ++t)
        r2[t] = ledger.returns[t] * ledger.returns[t];
    const std::vector<double> lr2 = ema(r2, a2); // L_tau'[R^2]

    std::vector<double> res(ledger.returns.size());
    for (std::size_t t = 0; t < res.size(); ++t) {
        const double ind = ledger.indicator[t];
        res[t] = ledger.aggregated[t] - ups * (ind * ind - lr2[t]);
    }
    return res;
}

std::vector<double> theoretical_profile(const PositionShape& shape, double tau,
                                        double lambda,
                                        std::span<const double> grid) {
    std::vector<double> out(grid.size());
    switch (shape.kind) {
    case PositionShape::Kind::linear: {
        const double ups = upsilon(tau, lambda);
        for (std::size_t i = 0; i < grid.size(); ++i)
            out[i] = ups * (grid[i] * grid[i] - 1.0);
        return out;
    }
    case PositionShape::Kind::sign: {
        const double kink = std::sqrt(2.0 / std::numbers::pi);
        for (std::size_t i = 0; i < grid.size(); ++i)
            out[i] = lambda * tau * (std::fabs(grid[i]) - kink);
        return out;
    }
    default:
        throw std::invalid_argument(
            "theoretical_profile: no closed form for shape '" + shape.name() +
            "'; bin a Monte Carlo run instead");
    }
}

ToyRun toy_trend(const TimeSeries& prices, double lambda,
                 std::size_t reset_every, bool normalize_input,
                 const VolEstimatorSpec& vol) {
    prices.validate();
    if (prices.size() < 2)
        throw std::invalid_argument("toy_trend: need at least two samples");
    if (!std::isfinite(lambda))
        throw std::invalid_argument("toy_trend: lambda must be finite");

    TimeSeries d = diff(prices);
    ToyRun run;
    run.ticks = d.ticks;
    run.working = normalize_input ? risk_normalize(d.values, vol) : d.values;
    run.warmup = normalize_input ? vol.warmup() : 0;

    const std::size_t m = run.working.size();
    run.position.resize(m);
    run.gain.resize(m);

    double anchor_sum = 0.0; // running sum of the current block
    double block_gain = 0.0;
    double total_sum = 0.0, total_sq = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
        const bool block_start = reset_every != 0 && t % reset_every == 0;
        if (block_start && t != 0) {
            run.block_pnl.push_back(block_gain);
            block_gain = 0.0;
            anchor_sum = 0.0;
        }
        const double x = run.working[t];
        // no position is carried into a fresh block (or the very first tick)
        run.gain[t] = (t == 0 || block_start) ? 0.0 : run.position[t - 1] * x;
        anchor_sum += x;
        run.position[t] = lambda * anchor_sum;
        block_gain += run.gain[t];
        total_sum += x;
        total_sq += x * x;
        run.total_gain += run.gain[t];
    }
    run.block_pnl.push_back(block_gain);
    run.identity_value =
        0.5 * lambda * (total_sum * total_sum - total_sq);
    return run;
}

} // namespace trendlab
