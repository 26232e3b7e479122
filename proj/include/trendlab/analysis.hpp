#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace trendlab {

// Equal-population conditional-expectation curve of y given x.
struct BinnedCurve {
    std::vector<double> centers;  // mean of x inside the bin
    std::vector<double> means;    // mean of y
    std::vector<double> stderrs;  // sd(y)/sqrt(count)
    std::vector<double> target;   // per-bin mean of the reference profile (optional)
    std::vector<std::size_t> counts;
    std::size_t dropped_bins = 0; // bins below the minimum population
    std::size_t n_used = 0;       // samples entering the curve
};

struct BinOptions {
    std::size_t n_bins = 20;
    std::size_t start = 0;     // first index considered (warm-up cut)
    std::size_t stride = 1;    // subsample to decorrelate overlapping statistics
    std::size_t min_count = 20;
    // optional pointwise profile phi; target[b] = mean of phi(x_i) in bin b
    std::function<double(double)> reference;
};

BinnedCurve bin_conditional(std::span<const double> x,
                            std::span<const double> y,
                            const BinOptions& opts = {});

// Least-squares fits. Quadratic: y = a x^2 + b x + c. V-shape: y = a(|x| - kink),
// fitted as a linear model in |x| with kink = -intercept/slope and its standard
// error from the delta method.
struct FitResult {
    std::string model; // "quadratic" | "vshape"
    double a = 0, b = 0, c = 0;
    double se_a = 0, se_b = 0, se_c = 0;
    double kink = 0, se_kink = 0; // vshape only
    double r2 = 0;
    std::size_t n = 0;
};

FitResult fit_quadratic(std::span<const double> x, std::span<const double> y);
FitResult fit_quadratic(const BinnedCurve& curve); // WLS with weights 1/stderr^2
FitResult fit_vshape(std::span<const double> x, std::span<const double> y);
FitResult fit_vshape(const BinnedCurve& curve);

// Bias-corrected sample skewness g1 * sqrt(n(n-1))/(n-2).
double skewness(std::span<const double> x);

double mean(std::span<const double> x);
double variance(std::span<const double> x); // unbiased
double pearson(std::span<const double> a, std::span<const double> b);

// y[t] = sum of x[t-window+1 .. t]; entries before window-1 hold partial sums.
std::vector<double> rolling_sum(std::span<const double> x, std::size_t window);

double norm_pdf(double x);
double norm_cdf(double x);
double chi2_1_cdf(double z); // erf(sqrt(z/2))

// Regularized incomplete beta I_x(a,b) (continued-fraction evaluation).
double incomplete_beta_reg(double a, double b, double x);

// Exact loss frequency of a tau-tick toy-trend block on iid Gaussian returns:
// P(block P&L < 0) = I_{1/tau}(1/2, (tau-1)/2). Approaches P(chi2_1 < 1)
// = 0.6827 as tau grows.
double toy_block_loss_probability(double tau);

// One-sample Kolmogorov-Smirnov test against a continuous CDF.
double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf);
double ks_pvalue(double d, std::size_t n); // asymptotic, Stephens-corrected

// Distribution check of block-reset toy-trend P&L: transforms each block to
// z = 2 G / (lambda tau) + 1 and compares with chi-squared(1).
struct Chi2Report {
    std::size_t n_blocks = 0;
    double ks_stat = 0;
    double ks_pvalue = 0;
    double mean_z = 0;
    double loss_frequency = 0;          // P(G < 0) observed
    double chi2_loss_frequency = 0;     // P(chi2_1 < 1) = 0.6827
    double exact_loss_frequency = 0;    // finite-tau value I_{1/tau}(1/2,(tau-1)/2)
};

Chi2Report chi2_check(std::span<const double> block_pnl, double tau,
                      double lambda);

} // namespace trendlab
