#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace trendlab {

// Timescale conventions for the exponential moving average
//   L_tau[x]_t = alpha * L_tau[x]_{t-1} + (1 - alpha) * x_t,   y_{-1} = 0,
// with decay alpha = 1 - 2/(tau + 1). tau_prime is the timescale whose decay
// is alpha^2; algebraically tau_prime = tau/2 + 1/(2*tau), and it is the
// natural horizon for aggregating the strategy's P&L.
struct FilterSpec {
    double tau = 0.0;
    double alpha = 0.0;
    double tau_prime = 0.0;

    static FilterSpec from_tau(double tau);     // requires tau > 1
    static FilterSpec from_alpha(double alpha); // requires 0 < alpha < 1
};

// EMA with zero initialization.
std::vector<double> ema(std::span<const double> x, double alpha);

// Unnormalized geometric sum sum_i alpha^i x_{t-i} == ema / (1 - alpha).
std::vector<double> ema_raw(std::span<const double> x, double alpha);

// Leading stretch discarded by statistics so the zero-initialized filters can
// forget their start. Convention: ceil(multiple * tau) samples.
std::size_t warmup_length(double tau, double multiple = 3.0);

// Pointwise residual of the lagged-product identity
//   (1 - 1/tau) * L_tau'[ x_t * L_tau[x]_{t-1} ]
//     - ( L_tau[x]_t^2 - (1/tau) * L_tau'[x^2]_t )
// which vanishes exactly for zero-initialized filters, at every t including
// the first sample. The returned series is the left side minus the right.
std::vector<double> filter_identity_residual(std::span<const double> x,
                                             double tau);

// Volatility estimator sigma_t = gamma * sqrt(EMA[d^2]_t). The EMA here puts
// weight 1/tau_sigma on the newest squared change; with gamma = 1.05 this
// makes normalized Gaussian returns carry unit variance to within a percent
// (the 1/E[1/sigma^2] bias of the reciprocal is what gamma compensates).
struct VolEstimatorSpec {
    double tau_sigma = 10.0;
    double gamma = 1.05;
    double warmup_multiple = 3.0;
    double floor_scale = 1e-8; // floor = floor_scale * running mean |d|

    double alpha() const { return 1.0 - 1.0 / tau_sigma; }
    std::size_t warmup() const;
    void validate() const; // tau_sigma >= 1, gamma > 0
};

// sigma_t for a series of price changes d, floored away from zero so flat
// stretches cannot produce infinite normalized returns.
std::vector<double> realized_vol(std::span<const double> d,
                                 const VolEstimatorSpec& spec = {});

// R_t = d_t / sigma_{t-1}; R_0 = 0 (no prior estimate exists, and the warm-up
// mask excludes it anyway).
std::vector<double> risk_normalize(std::span<const double> d,
                                   const VolEstimatorSpec& spec = {});

} // namespace trendlab
