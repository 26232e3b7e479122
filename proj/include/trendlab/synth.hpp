#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "trendlab/timeseries.hpp"

namespace trendlab {

// Autocovariance of the price-change process D_t. Three shapes:
//   iid:       C(0) = sigma2, C(u>0) = 0
//   exp_decay: C(0) = sigma2, C(u>=1) = amplitude * exp(-(u-1)/decay_scale)
//   ar1:       C(u) = sigma2 * q^u (returns themselves AR(1) with parameter q)
// Positive amplitude gives a trending walk, negative a mean-reverting one.
struct CorrelationKernel {
    enum class Kind { iid, exp_decay, ar1 };

    Kind kind = Kind::iid;
    double sigma2 = 1.0;      // C(0)
    double amplitude = 0.0;   // exp_decay: C(1)
    double decay_scale = 1.0; // exp_decay: lag constant ell
    double q = 0.0;           // ar1 parameter

    static CorrelationKernel iid_kernel(double sigma2 = 1.0);
    static CorrelationKernel exponential(double sigma2, double amplitude,
                                         double decay_scale);
    static CorrelationKernel ar1(double sigma2, double q);

    double autocov(std::int64_t lag) const;
    // throws std::invalid_argument when the requested autocovariance is not
    // positive semidefinite (eg |amplitude| too large for the decay scale)
    void validate() const;
};

// The exp_decay and ar1 kernels are realized exactly by an ARMA(1,1) change
// process x_t = q x_{t-1} + e_t + theta e_{t-1}; these are its parameters.
// theta = 0 degenerates to pure AR(1), theta = -q to white noise.
struct ArmaCoeffs {
    double q = 0.0;
    double theta = 0.0;
    double innovation_var = 1.0;
};

ArmaCoeffs arma_coefficients(const CorrelationKernel& kernel);

// Price path S_0..S_{n-1} with S_0 = s0 and stationary increments drawn from
// the kernel (the ARMA recursion is started from its stationary law, so there
// is no synthesis burn-in). Deterministic in (seed, stream).
TimeSeries generate_walk(const CorrelationKernel& kernel, std::size_t n,
                         std::uint64_t seed, std::uint64_t stream = 0,
                         double s0 = 0.0);

// Realized variance per unit time at aggregation scale tau,
//   sigma^2(tau) = E[(S_{t+tau} - S_t)^2] / tau,
// the "signature" of the walk: flat for iid increments, rising when trending.
struct SignatureCurve {
    std::vector<double> taus;
    std::vector<double> variance;  // sigma^2(tau)
    std::vector<double> stderrs;   // empirical only; empty for analytic curves
};

// Exact finite-sum curve sigma^2(tau) = C(0) + (2/tau) sum_{u<tau} (tau-u)C(u).
SignatureCurve signature_analytic(const CorrelationKernel& kernel, int tau_max);

// Overlapping-window estimate from a price path, with batch-means standard
// errors (batches of batch_multiple * tau windows) so the heavy overlap does
// not understate the uncertainty.
SignatureCurve signature_empirical(const TimeSeries& prices, int tau_max,
                                   int batch_multiple = 10);

} // namespace trendlab
