#include "trendlab/options.hpp"

#include <cmath>
#include <stdexcept>

#include "trendlab/analysis.hpp"

namespace trendlab {

void StrangleBook::validate() const {
    const std::size_t n = strikes.size();
    if (n == 0) throw std::invalid_argument("StrangleBook: empty book");
    if (is_call.size() != n || weights.size() != n ||
        (!premiums.empty() && premiums.size() != n))
        throw std::invalid_argument("StrangleBook: ragged fields");
    if (!(maturity > 0.0))
        throw std::invalid_argument("StrangleBook: maturity must be > 0");
    for (std::size_t i = 1; i < n; ++i)
        if (strikes[i] < strikes[i - 1])
            throw std::invalid_argument("StrangleBook: strikes must be sorted");
    for (std::size_t i = 0; i < n; ++i) {
        if (weights[i] < 0.0)
            throw std::invalid_argument("StrangleBook: negative weight");
        if (is_call[i] && strikes[i] < s0)
            throw std::invalid_argument("StrangleBook: call strike below anchor");
        if (!is_call[i] && strikes[i] > s0)
            throw std::invalid_argument("StrangleBook: put strike above anchor");
        if (!premiums.empty()) {
            const double intrinsic = is_call[i] ? std::max(s0 - strikes[i], 0.0)
                                                : std::max(strikes[i] - s0, 0.0);
            if (premiums[i] < intrinsic - 1e-12)
                throw std::invalid_argument(
                    "StrangleBook: premium below intrinsic value");
        }
    }
}

StrangleBook uniform_book(double s0, double dk, double range_fraction,
                          double maturity) {
    if (!(dk > 0.0) || !(range_fraction > 0.0))
        throw std::invalid_argument("uniform_book: dk and range must be > 0");
    const auto m = static_cast<std::int64_t>(
        std::floor(range_fraction * std::fabs(s0) / dk + 1e-9));
    if (m < 1)
        throw std::invalid_argument("uniform_book: range shorter than one step");

    StrangleBook book;
    book.s0 = s0;
    book.maturity = maturity;
    // puts from the lowest strike up to the anchor, calls from the anchor up;
    // the two at-the-money legs carry half weight (trapezoid strike integral)
    for (std::int64_t i = -m; i <= 0; ++i) {
        book.strikes.push_back(s0 + static_cast<double>(i) * dk);
        book.is_call.push_back(0);
        book.weights.push_back(i == 0 ? dk / 2.0 : dk);
    }
    for (std::int64_t i = 0; i <= m; ++i) {
        book.strikes.push_back(s0 + static_cast<double>(i) * dk);
        book.is_call.push_back(1);
        book.weights.push_back(i == 0 ? dk / 2.0 : dk);
    }
    book.validate();
    return book;
}

double gaussian_call_price(double s0, double strike, double vol,
                           double maturity) {
    if (vol < 0.0 || !(maturity > 0.0))
        throw std::invalid_argument("gaussian_call_price: bad vol/maturity");
    const double s = vol * std::sqrt(maturity);
    if (s == 0.0) return std::max(s0 - strike, 0.0);
    const double d = (s0 - strike) / s;
    return (s0 - strike) * norm_cdf(d) + s * norm_pdf(d);
}

double gaussian_put_price(double s0, double strike, double vol,
                          double maturity) {
    // zero-rate additive parity: C - P = s0 - K
    return gaussian_call_price(s0, strike, vol, maturity) - (s0 - strike);
}

void price_book(StrangleBook& book, double vol) {
    book.premiums.resize(book.strikes.size());
    for (std::size_t i = 0; i < book.strikes.size(); ++i)
        book.premiums[i] =
            book.is_call[i]
                ? gaussian_call_price(book.s0, book.strikes[i], vol, book.maturity)
                : gaussian_put_price(book.s0, book.strikes[i], vol, book.maturity);
    book.validate();
}

double straddle_pnl(double s0, double sT, double call_premium,
                    double put_premium) {
    if (call_premium < 0.0 || put_premium < 0.0)
        throw std::invalid_argument("straddle_pnl: negative premium");
    return std::fabs(sT - s0) - (call_premium + put_premium);
}

double strangle_payoff(const StrangleBook& book, double sT) {
    book.validate();
    double acc = 0.0;
    for (std::size_t i = 0; i < book.strikes.size(); ++i) {
        const double leg = book.is_call[i] ? sT - book.strikes[i]
                                           : book.strikes[i] - sT;
        if (leg > 0.0) acc += book.weights[i] * leg;
    }
    return acc;
}

double quadratic_payoff(double s0, double sT) {
    return 0.5 * (sT - s0) * (sT - s0);
}

EffectiveImpliedVol effective_implied_vol(const StrangleBook& book) {
    book.validate();
    if (book.premiums.empty())
        throw std::invalid_argument("effective_implied_vol: unpriced book");
    double total = 0.0;
    for (std::size_t i = 0; i < book.premiums.size(); ++i)
        total += book.weights[i] * book.premiums[i];
    if (total < 0.0)
        throw std::invalid_argument("effective_implied_vol: negative premium");
    EffectiveImpliedVol out;
    out.total_premium = total;
    out.sigma_bar = std::sqrt(2.0 * total / book.maturity);
    return out;
}

std::vector<double> delta_hedge_pnl(const TimeSeries& path, double s0,
                                    std::size_t rebalance_every) {
    path.validate();
    if (path.size() < 2)
        throw std::invalid_argument("delta_hedge_pnl: need >= 2 prices");
    if (rebalance_every == 0)
        throw std::invalid_argument("delta_hedge_pnl: rebalance_every >= 1");
    const auto& s = path.values;
    std::vector<double> gains(s.size() - 1);
    double held = -(s[0] - s0);
    for (std::size_t t = 1; t < s.size(); ++t) {
        gains[t - 1] = held * (s[t] - s[t - 1]);
        if (t % rebalance_every == 0) held = -(s[t] - s0);
    }
    return gains;
}

VarianceSwapReport variance_swap_pnl(const TimeSeries& path,
                                     const StrangleBook& book,
                                     std::size_t rebalance_every) {
    path.validate();
    book.validate();
    if (rebalance_every == 0)
        throw std::invalid_argument("variance_swap_pnl: rebalance_every >= 1");
    const auto T = static_cast<std::size_t>(book.maturity);
    if (static_cast<double>(T) != book.maturity)
        throw std::invalid_argument(
            "variance_swap_pnl: maturity must be a whole number of ticks");
    if (path.size() < T + 1)
        throw std::invalid_argument("variance_swap_pnl: path shorter than maturity");
    if (std::fabs(path.values[0] - book.s0) > 1e-9)
        throw std::invalid_argument(
            "variance_swap_pnl: path must start at the book anchor");

    const auto& s = path.values;
    const EffectiveImpliedVol iv = effective_implied_vol(book);

    VarianceSwapReport rep;
    rep.sigma_bar = iv.sigma_bar;
    rep.premium = iv.total_premium;
    rep.continuum_payoff = quadratic_payoff(book.s0, s[T]);
    rep.discrete_payoff = strangle_payoff(book, s[T]);
    rep.payoff_error = std::fabs(rep.discrete_payoff - rep.continuum_payoff);

    // hedge and realized variance share one rebalancing grid over [0, T]
    double hedge = 0.0, rv = 0.0;
    for (std::size_t a = 0; a < T; a += rebalance_every) {
        const std::size_t b = std::min(a + rebalance_every, T);
        const double move = s[b] - s[a];
        hedge += -(s[a] - book.s0) * move;
        rv += move * move;
    }
    rep.hedge_pnl = hedge;
    rep.realized_variance = rv;
    rep.lhs = rep.continuum_payoff - rep.premium + rep.hedge_pnl;
    rep.rhs = 0.5 * rv - rep.premium;
    rep.residual = rep.lhs - rep.rhs;
    return rep;
}

} // namespace trendlab
