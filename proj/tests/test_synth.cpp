#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "trendlab/analysis.hpp"
#include "trendlab/synth.hpp"
#include "trendlab/timeseries.hpp"

using namespace trendlab;

namespace {

// sample autocovariance at a lag, for cross-checking the kernel algebra
double sample_autocov(const std::vector<double>& x, std::size_t lag) {
    const double m = mean(x);
    double acc = 0.0;
    for (std::size_t t = lag; t < x.size(); ++t)
        acc += (x[t] - m) * (x[t - lag] - m);
    return acc / (x.size() - lag);
}

} // namespace

TEST_CASE("kernel autocovariances") {
    const auto iid = CorrelationKernel::iid_kernel(2.0);
    CHECK(iid.autocov(0) == 2.0);
    CHECK(iid.autocov(3) == 0.0);

    const auto ar = CorrelationKernel::ar1(1.0, 0.3);
    CHECK(ar.autocov(0) == doctest::Approx(1.0));
    CHECK(ar.autocov(1) == doctest::Approx(0.3));
    CHECK(ar.autocov(2) == doctest::Approx(0.09));
    CHECK(ar.autocov(-2) == doctest::Approx(0.09)); // symmetric

    const auto ex = CorrelationKernel::exponential(1.0, 0.1, 5.0);
    CHECK(ex.autocov(0) == doctest::Approx(1.0));
    CHECK(ex.autocov(1) == doctest::Approx(0.1));
    CHECK(ex.autocov(2) == doctest::Approx(0.1 * std::exp(-1.0 / 5.0)));
}

TEST_CASE("kernel validation rejects non-representable shapes") {
    CHECK_THROWS_AS(CorrelationKernel::iid_kernel(0.0), std::invalid_argument);
    CHECK_THROWS_AS(CorrelationKernel::ar1(1.0, 1.0), std::invalid_argument);
    // positive side: rho1 <= (1+q)/2 with q = exp(-1/ell)
    CHECK_THROWS_AS(CorrelationKernel::exponential(1.0, 0.99, 5.0),
                    std::invalid_argument);
    // negative side: rho1 >= -(1-q)/2; for ell=10, the band floor is ~-0.0476
    CHECK_THROWS_AS(CorrelationKernel::exponential(1.0, -0.06, 10.0),
                    std::invalid_argument);
    CHECK_NOTHROW(CorrelationKernel::exponential(1.0, -0.02, 10.0));
}

TEST_CASE("arma coefficients reproduce the requested kernel exactly") {
    // frozen cross-implementation anchors for the two benchmark kernels
    const auto trend = arma_coefficients(
        CorrelationKernel::exponential(1.0, 0.1, 5.0));
    CHECK(trend.q == doctest::Approx(0.818730753077982).epsilon(1e-12));
    CHECK(trend.theta == doctest::Approx(-0.734279251103740).epsilon(1e-12));
    CHECK(trend.innovation_var ==
          doctest::Approx(0.978824816304716).epsilon(1e-12));

    const auto mrev = arma_coefficients(
        CorrelationKernel::exponential(1.0, -0.02, 10.0));
    CHECK(mrev.q == doctest::Approx(0.904837418035960).epsilon(1e-12));
    CHECK(mrev.theta == doctest::Approx(-0.927445089923755).epsilon(1e-12));
    CHECK(mrev.innovation_var ==
          doctest::Approx(0.997188327464207).epsilon(1e-12));

    // implied low-lag autocovariances must match the kernel algebraically:
    // gamma0 = ve (1 + th^2 + 2 q th)/(1-q^2), gamma1 = ve (1+q th)(q+th)/(1-q^2)
    for (const auto& [k, c] :
         {std::pair{CorrelationKernel::exponential(1.0, 0.1, 5.0), trend},
          std::pair{CorrelationKernel::exponential(1.0, -0.02, 10.0), mrev}}) {
        const double den = 1.0 - c.q * c.q;
        const double g0 = c.innovation_var *
                          (1.0 + c.theta * c.theta + 2.0 * c.q * c.theta) / den;
        const double g1 = c.innovation_var * (1.0 + c.q * c.theta) *
                          (c.q + c.theta) / den;
        CHECK(g0 == doctest::Approx(k.autocov(0)).epsilon(1e-12));
        CHECK(g1 == doctest::Approx(k.autocov(1)).epsilon(1e-12));
    }

    // degenerate shapes: amplitude 0 is white noise, rho1 = q is pure AR(1)
    const auto white = arma_coefficients(
        CorrelationKernel::exponential(1.0, 0.0, 5.0));
    CHECK(white.theta == doctest::Approx(-white.q).epsilon(1e-12));
    const double q5 = std::exp(-1.0 / 5.0);
    const auto pure = arma_coefficients(
        CorrelationKernel::exponential(1.0, q5, 5.0));
    CHECK(pure.theta == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("generated walks are deterministic and start at s0") {
    const auto k = CorrelationKernel::exponential(1.0, 0.1, 5.0);
    const auto a = generate_walk(k, 1000, 5, 0, 100.0);
    const auto b = generate_walk(k, 1000, 5, 0, 100.0);
    const auto c = generate_walk(k, 1000, 6, 0, 100.0);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
    CHECK(a.values[0] == 100.0);
    CHECK(a.ticks[0] == 0);
    CHECK(a.size() == 1000);
}

TEST_CASE("walk increments match the kernel covariances") {
    const std::size_t n = 400000;
    for (const auto& k :
         {CorrelationKernel::iid_kernel(1.0),
          CorrelationKernel::ar1(1.0, 0.25),
          CorrelationKernel::exponential(1.0, 0.1, 5.0),
          CorrelationKernel::exponential(1.0, -0.02, 10.0)}) {
        const TimeSeries d = diff(generate_walk(k, n + 1, 99));
        for (std::size_t lag = 0; lag <= 3; ++lag) {
            // crude 4-sigma band for the autocovariance estimator
            const double se = 2.5 / std::sqrt(static_cast<double>(n));
            CHECK(std::fabs(sample_autocov(d.values, lag) - k.autocov(lag)) <
                  4.0 * se);
        }
    }
}

TEST_CASE("analytic signature hand value and limits") {
    const auto ar = CorrelationKernel::ar1(1.0, 0.3);
    const auto sig = signature_analytic(ar, 3);
    CHECK(sig.taus.size() == 3);
    CHECK(sig.variance[0] == doctest::Approx(1.0));
    // sigma^2(3) = 1 + (2/3)(2*0.3 + 1*0.09) = 1.46
    CHECK(sig.variance[2] == doctest::Approx(1.46).epsilon(1e-12));

    // iid kernels have a flat signature
    const auto flat = signature_analytic(CorrelationKernel::iid_kernel(2.0), 20);
    for (double v : flat.variance) CHECK(v == doctest::Approx(2.0));

    // single-sign kernels give monotone signatures
    const auto up =
        signature_analytic(CorrelationKernel::exponential(1.0, 0.1, 5.0), 50);
    const auto dn =
        signature_analytic(CorrelationKernel::exponential(1.0, -0.02, 10.0), 50);
    for (std::size_t i = 1; i < up.variance.size(); ++i) {
        CHECK(up.variance[i] >= up.variance[i - 1] - 1e-12);
        CHECK(dn.variance[i] <= dn.variance[i - 1] + 1e-12);
    }
}

TEST_CASE("empirical signature agrees with the analytic curve") {
    const auto k = CorrelationKernel::exponential(1.0, 0.1, 5.0);
    const auto walk = generate_walk(k, 200000, 31);
    const auto emp = signature_empirical(walk, 20);
    const auto ana = signature_analytic(k, 20);
    for (std::size_t i = 0; i < emp.taus.size(); ++i) {
        CHECK(emp.stderrs[i] > 0.0);
        const double dev =
            std::fabs(emp.variance[i] - ana.variance[i]) / emp.stderrs[i];
        CHECK(dev < 4.0);
    }
}

TEST_CASE("signature rejects impossible requests") {
    const auto k = CorrelationKernel::iid_kernel(1.0);
    const auto w = generate_walk(k, 100, 1);
    CHECK_THROWS_AS(signature_empirical(w, 99), std::invalid_argument);
    CHECK_THROWS_AS(signature_analytic(k, 0), std::invalid_argument);
    CHECK_THROWS_AS(generate_walk(k, 1, 1), std::invalid_argument);
}
