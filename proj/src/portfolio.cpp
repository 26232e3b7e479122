#include "trendlab/portfolio.hpp"

#include <cmath>
#include <stdexcept>

#include "trendlab/analysis.hpp"
#include "trendlab/filters.hpp"

namespace trendlab {

void FeeSchedule::validate() const {
    auto in_range = [](double r) { return r >= 0.0 && r < 1.0; };
    if (!in_range(transaction_cost_rate) || !in_range(management_fee) ||
        !in_range(incentive_fee))
        throw std::invalid_argument("FeeSchedule: rates must lie in [0,1)");
    if (ticks_per_year == 0)
        throw std::invalid_argument("FeeSchedule: ticks_per_year must be > 0");
}

std::vector<double> apply_fees(std::span<const double> gross,
                               const FeeSchedule& fees) {
    fees.validate();
    if (!fees.risk_free_series.empty() &&
        fees.risk_free_series.size() != gross.size())
        throw std::invalid_argument(
            "apply_fees: risk-free series length mismatch");

    const double drag =
        (fees.transaction_cost_rate + fees.management_fee) / fees.ticks_per_year;
    const double flat_rf = fees.risk_free_rate / fees.ticks_per_year;

    std::vector<double> net(gross.size());
    double cum = 0.0;     // cumulative pre-incentive performance
    double hwm = 0.0;     // crystallized high-water mark
    double accrued = 0.0; // incentive accrued since last crystallization
    for (std::size_t t = 0; t < gross.size(); ++t) {
        const double rf =
            fees.risk_free_series.empty() ? flat_rf : fees.risk_free_series[t];
        const double flow = gross[t] - drag + rf;
        cum += flow;
        const double target = fees.incentive_fee * std::max(cum - hwm, 0.0);
        net[t] = flow - (target - accrued); // accrual step, reversible
        accrued = target;
        if ((t + 1) % fees.ticks_per_year == 0) {
            // year end: lock in what has been accrued and reset the baseline
            hwm = std::max(hwm, cum);
            accrued = 0.0;
        }
    }
    return net;
}

void PortfolioConfig::validate(std::size_t n_assets) const {
    trend.validate();
    auto check = [n_assets](const std::vector<double>& w, const char* what) {
        if (w.empty()) return;
        if (w.size() != n_assets)
            throw std::invalid_argument(std::string("PortfolioConfig: ") + what +
                                        " count does not match asset count");
        double sum = 0.0;
        for (double v : w) {
            if (v < 0.0)
                throw std::invalid_argument(std::string("PortfolioConfig: ") +
                                            what + " must be nonnegative");
            sum += v;
        }
        if (std::fabs(sum - 1.0) > 1e-9)
            throw std::invalid_argument(std::string("PortfolioConfig: ") + what +
                                        " must sum to 1");
    };
    check(weights, "weights");
    check(rp_weights, "rp_weights");
}

namespace {
std::vector<double> resolve(const std::vector<double>& w, std::size_t n) {
    if (!w.empty()) return w;
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
}
} // namespace

std::vector<double> PortfolioConfig::resolved_weights(std::size_t n) const {
    return resolve(weights, n);
}

std::vector<double> PortfolioConfig::resolved_rp_weights(std::size_t n) const {
    return resolve(rp_weights, n);
}

PortfolioLedger run_multi_trend(const AssetPanel& panel,
                                const PortfolioConfig& config) {
    panel.validate();
    if (panel.n_assets() == 0)
        throw std::invalid_argument("run_multi_trend: empty panel");
    config.validate(panel.n_assets());

    const auto w = config.resolved_weights(panel.n_assets());
    const auto rw = config.resolved_rp_weights(panel.n_assets());

    PortfolioLedger led;
    led.per_asset.reserve(panel.n_assets());
    for (std::size_t k = 0; k < panel.n_assets(); ++k)
        led.per_asset.push_back(ema_trend(panel.series(k), config.trend));

    const std::size_t m = led.per_asset.front().gain.size();
    led.ticks = led.per_asset.front().ticks;
    led.gross.assign(m, 0.0);
    led.rp.assign(m, 0.0);
    led.warmup = 0;
    for (std::size_t k = 0; k < panel.n_assets(); ++k) {
        const auto& a = led.per_asset[k];
        for (std::size_t t = 0; t < m; ++t) {
            led.gross[t] += w[k] * a.gain[t];
            led.rp[t] += rw[k] * a.returns[t];
        }
        led.warmup = std::max(led.warmup, a.warmup);
    }

    const FilterSpec f = FilterSpec::from_tau(config.trend.tau);
    led.rp_indicator = ema(led.rp, f.alpha);
    const double st = std::sqrt(config.trend.tau);
    for (auto& v : led.rp_indicator) v *= st;
    return led;
}

std::vector<double> run_risk_parity(const AssetPanel& panel,
                                    const PortfolioConfig& config) {
    return run_multi_trend(panel, config).rp;
}

BoundReport convexity_bound_check(const PortfolioLedger& ledger,
                                  const PortfolioConfig& config) {
    if (config.trend.shape.kind != PositionShape::Kind::linear)
        throw std::invalid_argument(
            "convexity_bound_check: bound is derived for the linear shape");
    const std::size_t n_assets = ledger.per_asset.size();
    if (n_assets == 0)
        throw std::invalid_argument("convexity_bound_check: empty ledger");
    const auto w = config.resolved_weights(n_assets);

    const FilterSpec f = FilterSpec::from_tau(config.trend.tau);
    const double a2 = f.alpha * f.alpha;
    const double ups =
        upsilon(config.trend.tau, config.trend.lambda * config.trend.capital);
    const std::size_t m = ledger.gross.size();

    // per-asset exact parabolas Upsilon*(T_k^2 - L_tau'[R_k^2]) and their
    // weighted combination vs the same parabola evaluated on the combined
    // indicator; the gap is a weighted Jensen variance, nonnegative pointwise
    std::vector<double> lhs(m, 0.0);
    std::vector<double> mix_ind(m, 0.0);
    std::vector<double> mix_r2(m, 0.0);
    for (std::size_t k = 0; k < n_assets; ++k) {
        const auto& a = ledger.per_asset[k];
        std::vector<double> r2(m);
        for (std::size_t t = 0; t < m; ++t)
            r2[t] = a.returns[t] * a.returns[t];
        const std::vector<double> lr2 = ema(r2, a2);
        for (std::size_t t = 0; t < m; ++t) {
            lhs[t] += w[k] * ups * (a.indicator[t] * a.indicator[t] - lr2[t]);
            mix_ind[t] += w[k] * a.indicator[t];
            mix_r2[t] += w[k] * lr2[t];
        }
    }

    BoundReport rep;
    for (std::size_t t = ledger.warmup; t < m; ++t) {
        const double rhs = ups * (mix_ind[t] * mix_ind[t] - mix_r2[t]);
        const double gap = lhs[t] - rhs;
        ++rep.checked;
        if (rep.checked == 1 || gap < rep.min_gap) rep.min_gap = gap;
        rep.max_abs_gap = std::max(rep.max_abs_gap, std::fabs(gap));
        if (gap < -rep.tolerance) ++rep.violations;
    }
    return rep;
}

double vol_match(std::span<const double> candidate,
                 std::span<const double> reference) {
    const double vc = variance(candidate);
    if (vc <= 0.0)
        throw std::invalid_argument("vol_match: zero-variance candidate");
    return std::sqrt(variance(reference) / vc);
}

double sharpe_ratio(std::span<const double> returns,
                    std::size_t ticks_per_year) {
    const double sd = std::sqrt(variance(returns));
    if (sd == 0.0)
        throw std::invalid_argument("sharpe_ratio: zero-variance returns");
    return mean(returns) / sd * std::sqrt(static_cast<double>(ticks_per_year));
}

TauScanResult tau_scan(const AssetPanel& panel,
                       std::span<const double> reference_returns,
                       std::span<const double> taus,
                       const PortfolioConfig& base, const FeeSchedule& fees) {
    if (taus.empty())
        throw std::invalid_argument("tau_scan: empty tau grid");
    if (panel.n_ticks() < 2)
        throw std::invalid_argument("tau_scan: panel too short");
    const std::size_t m = panel.n_ticks() - 1; // change-series length
    if (reference_returns.size() != m)
        throw std::invalid_argument(
            "tau_scan: reference must align with the panel's change series");

    TauScanResult result;
    for (double tau : taus) {
        PortfolioConfig cfg = base;
        cfg.trend.tau = tau;
        PortfolioLedger led = run_multi_trend(panel, cfg);
        const std::vector<double> net = apply_fees(led.gross, fees);

        const std::size_t start = led.warmup;
        if (m - start < 2 * fees.ticks_per_year)
            throw std::invalid_argument(
                "tau_scan: overlap shorter than two years after warm-up");
        std::span<const double> net_w(net.data() + start, m - start);
        std::span<const double> ref_w(reference_returns.data() + start,
                                      m - start);
        std::span<const double> gross_w(led.gross.data() + start, m - start);

        TauScanPoint p;
        p.tau = tau;
        p.correlation = pearson(net_w, ref_w);
        p.matched_lambda = vol_match(net_w, ref_w);
        p.sharpe_gross = sharpe_ratio(gross_w, fees.ticks_per_year);
        p.sharpe_net = sharpe_ratio(net_w, fees.ticks_per_year);
        result.points.push_back(p);
        if (p.correlation >
            result.points[result.best_index].correlation)
            result.best_index = result.points.size() - 1;
    }
    return result;
}

} // namespace trendlab
