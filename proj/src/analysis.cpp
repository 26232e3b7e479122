#include "trendlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace trendlab {

double mean(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("mean: empty input");
    return std::accumulate(x.begin(), x.end(), 0.0) / x.size();
}

double variance(std::span<const double> x) {
    if (x.size() < 2) throw std::invalid_argument("variance: need >= 2 samples");
    const double m = mean(x);
    double acc = 0.0;
    for (double v : x) acc += (v - m) * (v - m);
    return acc / (x.size() - 1.0);
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("pearson: need two equal series, length >= 2");
    const double ma = mean(a), mb = mean(b);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa == 0.0 || sbb == 0.0)
        throw std::invalid_argument("pearson: zero-variance input");
    return sab / std::sqrt(saa * sbb);
}

double skewness(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 3) throw std::invalid_argument("skewness: need >= 3 samples");
    const double m = mean(x);
    double m2 = 0.0, m3 = 0.0;
    for (double v : x) {
        const double d = v - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    if (m2 <= 0.0) throw std::invalid_argument("skewness: zero variance");
    const double g1 = m3 / std::pow(m2, 1.5);
    return g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0);
}

std::vector<double> rolling_sum(std::span<const double> x, std::size_t window) {
    if (window == 0) throw std::invalid_argument("rolling_sum: window must be >= 1");
    std::vector<double> y(x.size());
    double acc = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        acc += x[t];
        if (t >= window) acc -= x[t - window];
        y[t] = acc;
    }
    return y;
}

BinnedCurve bin_conditional(std::span<const double> x,
                            std::span<const double> y,
                            const BinOptions& opts) {
    if (x.size() != y.size())
        throw std::invalid_argument("bin_conditional: length mismatch");
    if (opts.n_bins < 1 || opts.stride < 1)
        throw std::invalid_argument("bin_conditional: bad bin/stride options");

    std::vector<std::size_t> idx;
    for (std::size_t i = opts.start; i < x.size(); i += opts.stride)
        idx.push_back(i);
    if (idx.size() < opts.n_bins)
        throw std::invalid_argument("bin_conditional: too few samples for bins");
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

    BinnedCurve curve;
    curve.n_used = idx.size();
    const std::size_t base = idx.size() / opts.n_bins;
    const std::size_t rem = idx.size() % opts.n_bins;
    std::size_t pos = 0;
    for (std::size_t b = 0; b < opts.n_bins; ++b) {
        const std::size_t cnt = base + (b < rem ? 1 : 0);
        if (cnt < opts.min_count) {
            ++curve.dropped_bins;
            pos += cnt;
            continue;
        }
        double sx = 0.0, sy = 0.0, st = 0.0;
        for (std::size_t j = pos; j < pos + cnt; ++j) {
            sx += x[idx[j]];
            sy += y[idx[j]];
            if (opts.reference) st += opts.reference(x[idx[j]]);
        }
        const double my = sy / cnt;
        double ss = 0.0;
        for (std::size_t j = pos; j < pos + cnt; ++j) {
            const double d = y[idx[j]] - my;
            ss += d * d;
        }
        curve.centers.push_back(sx / cnt);
        curve.means.push_back(my);
        curve.stderrs.push_back(std::sqrt(ss / (cnt - 1.0) / cnt));
        curve.counts.push_back(cnt);
        if (opts.reference) curve.target.push_back(st / cnt);
        pos += cnt;
    }
    return curve;
}

namespace {

// 3x3 symmetric solve + inverse for the quadratic normal equations
struct Mat3 {
    double m[3][3];
};

bool invert3(const Mat3& a, Mat3& inv) {
    const auto& m = a.m;
    const double c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    const double c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
    const double c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
    const double det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
    if (det == 0.0 || !std::isfinite(det)) return false;
    const double d = 1.0 / det;
    inv.m[0][0] = c00 * d;
    inv.m[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * d;
    inv.m[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * d;
    inv.m[1][0] = c01 * d;
    inv.m[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * d;
    inv.m[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * d;
    inv.m[2][0] = c02 * d;
    inv.m[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * d;
    inv.m[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * d;
    return true;
}

// Weighted quadratic y = a x^2 + b x + c. When scale_cov is true the
// covariance is scaled by the residual variance (weights of unknown scale,
// raw data); when false the weights are taken as true inverse variances
// (binned curves with measured stderrs).
FitResult quad_fit_core(std::span<const double> x, std::span<const double> y,
                        std::span<const double> w, bool scale_cov) {
    const std::size_t n = x.size();
    if (n < 3) throw std::invalid_argument("fit_quadratic: need >= 3 points");
    double s[5] = {0, 0, 0, 0, 0};
    double t2 = 0, t1 = 0, t0 = 0, sw = 0, swy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        const double xi = x[i];
        const double x2 = xi * xi;
        s[0] += wi;
        s[1] += wi * xi;
        s[2] += wi * x2;
        s[3] += wi * x2 * xi;
        s[4] += wi * x2 * x2;
        t2 += wi * x2 * y[i];
        t1 += wi * xi * y[i];
        t0 += wi * y[i];
        sw += wi;
        swy += wi * y[i];
    }
    Mat3 m{{{s[4], s[3], s[2]}, {s[3], s[2], s[1]}, {s[2], s[1], s[0]}}};
    Mat3 inv;
    if (!invert3(m, inv))
        throw std::invalid_argument("fit_quadratic: degenerate design matrix");
    const double v[3] = {t2, t1, t0};
    double beta[3];
    for (int i = 0; i < 3; ++i)
        beta[i] = inv.m[i][0] * v[0] + inv.m[i][1] * v[1] + inv.m[i][2] * v[2];

    const double ybar = swy / sw;
    double ssr = 0.0, sst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        const double fit = beta[0] * x[i] * x[i] + beta[1] * x[i] + beta[2];
        ssr += wi * (y[i] - fit) * (y[i] - fit);
        sst += wi * (y[i] - ybar) * (y[i] - ybar);
    }
    double cov_scale = 1.0;
    if (scale_cov) cov_scale = n > 3 ? ssr / (n - 3.0) : 0.0;

    FitResult fr;
    fr.model = "quadratic";
    fr.a = beta[0];
    fr.b = beta[1];
    fr.c = beta[2];
    fr.se_a = std::sqrt(std::max(inv.m[0][0] * cov_scale, 0.0));
    fr.se_b = std::sqrt(std::max(inv.m[1][1] * cov_scale, 0.0));
    fr.se_c = std::sqrt(std::max(inv.m[2][2] * cov_scale, 0.0));
    fr.r2 = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
    fr.n = n;
    return fr;
}

// Linear model y = slope * |x| + intercept, reported as y = a (|x| - kink).
FitResult vshape_core(std::span<const double> x, std::span<const double> y,
                      std::span<const double> w, bool scale_cov) {
    const std::size_t n = x.size();
    if (n < 3) throw std::invalid_argument("fit_vshape: need >= 3 points");
    double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        const double u = std::fabs(x[i]);
        s0 += wi;
        s1 += wi * u;
        s2 += wi * u * u;
        t0 += wi * y[i];
        t1 += wi * u * y[i];
    }
    const double det = s2 * s0 - s1 * s1;
    if (det == 0.0 || !std::isfinite(det))
        throw std::invalid_argument("fit_vshape: degenerate input");
    const double slope = (s0 * t1 - s1 * t0) / det;
    const double intercept = (s2 * t0 - s1 * t1) / det;

    double ssr = 0.0, sst = 0.0;
    const double ybar = t0 / s0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        const double fit = slope * std::fabs(x[i]) + intercept;
        ssr += wi * (y[i] - fit) * (y[i] - fit);
        sst += wi * (y[i] - ybar) * (y[i] - ybar);
    }
    double cov_scale = 1.0;
    if (scale_cov) cov_scale = n > 2 ? ssr / (n - 2.0) : 0.0;
    // inverse of the 2x2 normal matrix, ordered (slope, intercept)
    const double var_slope = s0 / det * cov_scale;
    const double var_int = s2 / det * cov_scale;
    const double cov_si = -s1 / det * cov_scale;

    FitResult fr;
    fr.model = "vshape";
    fr.a = slope;
    fr.b = intercept;
    fr.se_a = std::sqrt(std::max(var_slope, 0.0));
    fr.se_b = std::sqrt(std::max(var_int, 0.0));
    if (slope == 0.0)
        throw std::invalid_argument("fit_vshape: zero slope, kink undefined");
    fr.kink = -intercept / slope;
    // delta method for kink = -b/a
    const double va = var_slope, vb = var_int;
    fr.se_kink = std::sqrt(std::max(
                     (vb + fr.kink * fr.kink * va + 2.0 * fr.kink * cov_si),
                     0.0)) /
                 std::fabs(slope);
    fr.r2 = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
    fr.n = n;
    return fr;
}

std::vector<double> bin_weights(const BinnedCurve& curve) {
    std::vector<double> w(curve.stderrs.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double se = curve.stderrs[i];
        w[i] = 1.0 / std::max(se * se, 1e-300);
    }
    return w;
}

} // namespace

FitResult fit_quadratic(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("fit_quadratic: length mismatch");
    return quad_fit_core(x, y, {}, true);
}

FitResult fit_quadratic(const BinnedCurve& curve) {
    const auto w = bin_weights(curve);
    return quad_fit_core(curve.centers, curve.means, w, false);
}

FitResult fit_vshape(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("fit_vshape: length mismatch");
    return vshape_core(x, y, {}, true);
}

FitResult fit_vshape(const BinnedCurve& curve) {
    const auto w = bin_weights(curve);
    return vshape_core(curve.centers, curve.means, w, false);
}

double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double chi2_1_cdf(double z) {
    if (z <= 0.0) return 0.0;
    return std::erf(std::sqrt(z / 2.0));
}

namespace {

double betacf(double a, double b, double x) {
    constexpr int maxit = 300;
    constexpr double eps = 3e-14, fpmin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= maxit; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

} // namespace

double incomplete_beta_reg(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("incomplete_beta_reg: a,b must be > 0");
    if (x < 0.0 || x > 1.0)
        throw std::invalid_argument("incomplete_beta_reg: x outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) -
                               std::lgamma(b) + a * std::log(x) +
                               b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double toy_block_loss_probability(double tau) {
    if (!(tau > 1.0))
        throw std::invalid_argument(
            "toy_block_loss_probability: tau must be > 1");
    // the block P&L is negative exactly when (sum R)^2 < sum R^2, and on the
    // Gaussian sphere the squared-projection fraction is Beta(1/2,(tau-1)/2)
    return incomplete_beta_reg(0.5, (tau - 1.0) / 2.0, 1.0 / tau);
}

double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf) {
    if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, f - i / n);
        d = std::max(d, (i + 1) / n - f);
    }
    return d;
}

double ks_pvalue(double d, std::size_t n) {
    if (n == 0) throw std::invalid_argument("ks_pvalue: empty sample");
    const double rn = std::sqrt(static_cast<double>(n));
    const double lam = (rn + 0.12 + 0.11 / rn) * d;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * std::exp(-2.0 * k * k * lam * lam);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-16) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

Chi2Report chi2_check(std::span<const double> block_pnl, double tau,
                      double lambda) {
    if (block_pnl.size() < 1000)
        throw std::invalid_argument(
            "chi2_check: need at least 1000 blocks for a distribution test");
    if (!(tau > 1.0) || lambda == 0.0)
        throw std::invalid_argument("chi2_check: bad tau/lambda");

    Chi2Report rep;
    rep.n_blocks = block_pnl.size();
    std::vector<double> z(block_pnl.size());
    double zsum = 0.0;
    std::size_t losses = 0;
    for (std::size_t i = 0; i < block_pnl.size(); ++i) {
        z[i] = 2.0 * block_pnl[i] / (lambda * tau) + 1.0;
        zsum += z[i];
        if (block_pnl[i] < 0.0) ++losses;
    }
    rep.mean_z = zsum / z.size();
    rep.loss_frequency = static_cast<double>(losses) / z.size();
    rep.chi2_loss_frequency = chi2_1_cdf(1.0);
    rep.exact_loss_frequency = toy_block_loss_probability(tau);
    rep.ks_stat = ks_statistic(std::move(z), chi2_1_cdf);
    rep.ks_pvalue = trendlab::ks_pvalue(rep.ks_stat, rep.n_blocks);
    return rep;
}

} // namespace trendlab
