#include "trendlab/filters.hpp"

#include <cmath>
#include <stdexcept>

namespace trendlab {

FilterSpec FilterSpec::from_tau(double tau) {
    if (!(tau > 1.0))
        throw std::invalid_argument("FilterSpec: tau must be > 1");
    FilterSpec f;
    f.tau = tau;
    f.alpha = 1.0 - 2.0 / (tau + 1.0);
    f.tau_prime = tau / 2.0 + 1.0 / (2.0 * tau);
    return f;
}

FilterSpec FilterSpec::from_alpha(double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("FilterSpec: alpha must be in (0,1)");
    return from_tau(2.0 / (1.0 - alpha) - 1.0);
}

std::vector<double> ema(std::span<const double> x, double alpha) {
    if (!(alpha >= 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("ema: alpha must be in [0,1)");
    std::vector<double> y(x.size());
    const double w = 1.0 - alpha;
    double acc = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        acc = alpha * acc + w * x[t];
        y[t] = acc;
    }
    return y;
}

std::vector<double> ema_raw(std::span<const double> x, double alpha) {
    if (!(alpha >= 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("ema_raw: alpha must be in [0,1)");
    std::vector<double> y(x.size());
    double acc = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        acc = alpha * acc + x[t];
        y[t] = acc;
    }
    return y;
}

std::size_t warmup_length(double tau, double multiple) {
    if (!(tau >= 0.0) || !(multiple >= 0.0))
        throw std::invalid_argument("warmup_length: negative argument");
    return static_cast<std::size_t>(std::ceil(multiple * tau));
}

std::vector<double> filter_identity_residual(std::span<const double> x,
                                             double tau) {
    const FilterSpec f = FilterSpec::from_tau(tau);
    const double a = f.alpha;
    const double a2 = a * a;

    std::vector<double> lx = ema(x, a); // L_tau[x]
    std::vector<double> res(x.size());

    // cross term x_t * L_tau[x]_{t-1} with zero pre-history, and x^2, both
    // averaged on the companion timescale (decay a^2)
    const double w2 = 1.0 - a2;
    double cross_acc = 0.0, sq_acc = 0.0;
    const double c = 1.0 - 1.0 / tau;
    for (std::size_t t = 0; t < x.size(); ++t) {
        const double lag = t == 0 ? 0.0 : lx[t - 1];
        cross_acc = a2 * cross_acc + w2 * (x[t] * lag);
        sq_acc = a2 * sq_acc + w2 * (x[t] * x[t]);
        res[t] = c * cross_acc - (lx[t] * lx[t] - sq_acc / tau);
    }
    return res;
}

std::size_t VolEstimatorSpec::warmup() const {
    return warmup_length(tau_sigma, warmup_multiple);
}

void VolEstimatorSpec::validate() const {
    if (!(tau_sigma >= 1.0))
        throw std::invalid_argument("VolEstimatorSpec: tau_sigma must be >= 1");
    if (!(gamma > 0.0))
        throw std::invalid_argument("VolEstimatorSpec: gamma must be > 0");
    if (!(floor_scale > 0.0))
        throw std::invalid_argument("VolEstimatorSpec: floor_scale must be > 0");
}

std::vector<double> realized_vol(std::span<const double> d,
                                 const VolEstimatorSpec& spec) {
    spec.validate();
    const double a = spec.alpha();
    const double w = 1.0 - a;
    std::vector<double> sigma(d.size());
    double acc = 0.0;
    double abs_sum = 0.0;
    for (std::size_t t = 0; t < d.size(); ++t) {
        acc = a * acc + w * d[t] * d[t];
        abs_sum += std::fabs(d[t]);
        double floor = spec.floor_scale * abs_sum / static_cast<double>(t + 1);
        if (!(floor > 0.0)) floor = 1e-12; // all-zero prefix fallback
        sigma[t] = std::max(spec.gamma * std::sqrt(acc), floor);
    }
    return sigma;
}

std::vector<double> risk_normalize(std::span<const double> d,
                                   const VolEstimatorSpec& spec) {
    std::vector<double> sigma = realized_vol(d, spec);
    std::vector<double> r(d.size());
    if (!d.empty()) r[0] = 0.0;
    for (std::size_t t = 1; t < d.size(); ++t) r[t] = d[t] / sigma[t - 1];
    return r;
}

} // namespace trendlab
