#include "trendlab/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "trendlab/rng.hpp"

namespace trendlab {

CorrelationKernel CorrelationKernel::iid_kernel(double sigma2) {
    CorrelationKernel k;
    k.kind = Kind::iid;
    k.sigma2 = sigma2;
    k.validate();
    return k;
}

CorrelationKernel CorrelationKernel::exponential(double sigma2,
                                                 double amplitude,
                                                 double decay_scale) {
    CorrelationKernel k;
    k.kind = Kind::exp_decay;
    k.sigma2 = sigma2;
    k.amplitude = amplitude;
    k.decay_scale = decay_scale;
    k.validate();
    return k;
}

CorrelationKernel CorrelationKernel::ar1(double sigma2, double q) {
    CorrelationKernel k;
    k.kind = Kind::ar1;
    k.sigma2 = sigma2;
    k.q = q;
    k.validate();
    return k;
}

double CorrelationKernel::autocov(std::int64_t lag) const {
    if (lag < 0) lag = -lag;
    switch (kind) {
    case Kind::iid:
        return lag == 0 ? sigma2 : 0.0;
    case Kind::exp_decay:
        return lag == 0 ? sigma2
                        : amplitude * std::exp(-(static_cast<double>(lag) - 1.0) /
                                               decay_scale);
    case Kind::ar1:
        return sigma2 * std::pow(q, static_cast<double>(lag));
    }
    throw std::logic_error("CorrelationKernel: bad kind");
}

void CorrelationKernel::validate() const {
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("CorrelationKernel: sigma2 must be > 0");
    switch (kind) {
    case Kind::iid:
        return;
    case Kind::ar1:
        if (!(std::fabs(q) < 1.0))
            throw std::invalid_argument("CorrelationKernel: |q| must be < 1");
        return;
    case Kind::exp_decay: {
        if (!(decay_scale > 0.0))
            throw std::invalid_argument(
                "CorrelationKernel: decay_scale must be > 0");
        const double qd = std::exp(-1.0 / decay_scale);
        const double rho1 = amplitude / sigma2;
        // spectral-density positivity window for a one-sided geometric
        // autocovariance; outside it no stationary process has this kernel
        if (rho1 > (1.0 + qd) / 2.0 || rho1 < -(1.0 - qd) / 2.0)
            throw std::invalid_argument(
                "CorrelationKernel: amplitude outside the representable band "
                "for this decay scale");
        return;
    }
    }
    throw std::logic_error("CorrelationKernel: bad kind");
}

ArmaCoeffs arma_coefficients(const CorrelationKernel& kernel) {
    kernel.validate();
    ArmaCoeffs c;
    switch (kernel.kind) {
    case CorrelationKernel::Kind::iid:
        c.q = 0.0;
        c.theta = 0.0;
        c.innovation_var = kernel.sigma2;
        return c;
    case CorrelationKernel::Kind::ar1:
        c.q = kernel.q;
        c.theta = 0.0;
        c.innovation_var = kernel.sigma2 * (1.0 - kernel.q * kernel.q);
        return c;
    case CorrelationKernel::Kind::exp_decay: {
        const double q = std::exp(-1.0 / kernel.decay_scale);
        const double rho1 = kernel.amplitude / kernel.sigma2;
        c.q = q;
        // match lag-1 autocorrelation: the MA part solves
        //   (q - rho1) theta^2 + (1 + q^2 - 2 rho1 q) theta + (q - rho1) = 0
        // whose roots multiply to 1; take the invertible one (|theta| <= 1)
        const double a = q - rho1;
        const double b = 1.0 + q * q - 2.0 * rho1 * q;
        if (std::fabs(a) < 1e-14) {
            c.theta = 0.0; // kernel is exactly AR(1)
        } else {
            const double disc = b * b - 4.0 * a * a;
            if (disc < 0.0)
                throw std::invalid_argument(
                    "arma_coefficients: kernel not representable");
            const double root = (-b + std::sqrt(disc)) / (2.0 * a);
            c.theta = std::fabs(root) <= 1.0 ? root : 1.0 / root;
        }
        c.innovation_var = kernel.sigma2 * (1.0 - q * q) /
                           (1.0 + c.theta * c.theta + 2.0 * q * c.theta);
        return c;
    }
    }
    throw std::logic_error("arma_coefficients: bad kind");
}

TimeSeries generate_walk(const CorrelationKernel& kernel, std::size_t n,
                         std::uint64_t seed, std::uint64_t stream, double s0) {
    if (n < 2)
        throw std::invalid_argument("generate_walk: need n >= 2");
    const ArmaCoeffs c = arma_coefficients(kernel);
    const double se = std::sqrt(c.innovation_var);

    GaussRng rng(seed, stream);

    // start the recursion in its stationary law: x_{-1} carries unit loading
    // on e_{-1} plus an independent remainder of variance gamma0 - ve
    double e_prev = se * rng.gauss();
    const double extra = kernel.sigma2 - c.innovation_var;
    double x_prev = e_prev + std::sqrt(std::max(extra, 0.0)) * rng.gauss();

    TimeSeries s;
    s.ticks.resize(n);
    s.values.resize(n);
    s.ticks[0] = 0;
    s.values[0] = s0;
    double level = s0;
    for (std::size_t t = 1; t < n; ++t) {
        const double e = se * rng.gauss();
        const double x = c.q * x_prev + e + c.theta * e_prev;
        e_prev = e;
        x_prev = x;
        level += x;
        s.ticks[t] = static_cast<std::int64_t>(t);
        s.values[t] = level;
    }
    return s;
}

SignatureCurve signature_analytic(const CorrelationKernel& kernel,
                                  int tau_max) {
    if (tau_max < 1)
        throw std::invalid_argument("signature_analytic: tau_max must be >= 1");
    kernel.validate();
    SignatureCurve curve;
    for (int tau = 1; tau <= tau_max; ++tau) {
        double acc = kernel.autocov(0);
        for (int u = 1; u < tau; ++u)
            acc += 2.0 * (tau - u) * kernel.autocov(u) / tau;
        curve.taus.push_back(tau);
        curve.variance.push_back(acc);
    }
    return curve;
}

SignatureCurve signature_empirical(const TimeSeries& prices, int tau_max,
                                   int batch_multiple) {
    if (tau_max < 1)
        throw std::invalid_argument("signature_empirical: tau_max must be >= 1");
    if (batch_multiple < 1)
        throw std::invalid_argument(
            "signature_empirical: batch_multiple must be >= 1");
    const auto& s = prices.values;
    SignatureCurve curve;
    for (int tau = 1; tau <= tau_max; ++tau) {
        if (s.size() < static_cast<std::size_t>(tau) + 1)
            throw std::invalid_argument("signature_empirical: path too short");
        const std::size_t n_win = s.size() - tau;
        const std::size_t batch = static_cast<std::size_t>(batch_multiple) * tau;
        const std::size_t n_batches = n_win / batch;
        if (n_batches < 2)
            throw std::invalid_argument(
                "signature_empirical: path too short for batch-means errors");
        // overlapping squared moves, grouped into disjoint batches of starts
        double total = 0.0, total_sq = 0.0;
        for (std::size_t b = 0; b < n_batches; ++b) {
            double acc = 0.0;
            for (std::size_t t = b * batch; t < (b + 1) * batch; ++t) {
                const double m = s[t + tau] - s[t];
                acc += m * m / tau;
            }
            const double bm = acc / batch;
            total += bm;
            total_sq += bm * bm;
        }
        const double mean = total / n_batches;
        const double var_bm =
            (total_sq - n_batches * mean * mean) / (n_batches - 1.0);
        curve.taus.push_back(tau);
        curve.variance.push_back(mean);
        curve.stderrs.push_back(std::sqrt(std::max(var_bm, 0.0) / n_batches));
    }
    return curve;
}

} // namespace trendlab
