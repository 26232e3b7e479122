#pragma once

#include <cstddef>
#include <vector>

#include "trendlab/timeseries.hpp"

namespace trendlab {

// Static book of strangles on a uniform strike grid centered at s0: puts at
// and below the anchor, calls at and above. Weights are strike notionals; on
// the uniform grid interior strikes carry dK and the two at-the-money entries
// carry dK/2 each (trapezoid weighting of the strike integral, which is what
// makes the discrete payoff quadratic to leading order).
struct StrangleBook {
    double s0 = 0.0;
    double maturity = 0.0; // T in ticks
    std::vector<double> strikes;
    std::vector<char> is_call;  // 1 call, 0 put
    std::vector<double> weights;
    std::vector<double> premiums;

    std::size_t size() const { return strikes.size(); }
    void validate() const;
};

StrangleBook uniform_book(double s0, double dk, double range_fraction,
                          double maturity);

// Additive-Gaussian option prices: undiscounted expected payoff under
// S_T ~ Normal(s0, vol^2 * T), zero rates. In this model a symmetric book is
// exactly delta neutral at inception.
double gaussian_call_price(double s0, double strike, double vol, double maturity);
double gaussian_put_price(double s0, double strike, double vol, double maturity);
void price_book(StrangleBook& book, double vol);

double straddle_pnl(double s0, double sT, double call_premium,
                    double put_premium); // |sT - s0| - (C + P)

// Discrete payoff sum of the book at expiry, and its continuum limit.
double strangle_payoff(const StrangleBook& book, double sT);
double quadratic_payoff(double s0, double sT); // 0.5 * (sT - s0)^2

// The single vol equating the book's total premium to (T/2) sigma_bar^2.
struct EffectiveImpliedVol {
    double sigma_bar = 0.0;
    double total_premium = 0.0;
};
EffectiveImpliedVol effective_implied_vol(const StrangleBook& book);

// Re-centering hedge: short (S_a - S_0) of the underlying over each interval,
// where a is the last rebalance tick. Per-tick gains; at tick frequency the
// cumulative P&L equals 0.5*sum D^2 - 0.5*(S_T - S_0)^2 exactly.
std::vector<double> delta_hedge_pnl(const TimeSeries& path, double s0,
                                    std::size_t rebalance_every = 1);

// Model-free variance-swap decomposition over the book's maturity:
//   [quadratic payoff - premium] + hedge P&L == 0.5 * RV_n - premium
// where RV_n is the realized variance built from n-tick moves at hedging
// period n. lhs/rhs/residual report that identity; payoff_error is the
// discrete book's distance from the quadratic payoff at S_T.
struct VarianceSwapReport {
    double sigma_bar = 0.0;
    double premium = 0.0;           // (T/2) * sigma_bar^2 == total premium
    double continuum_payoff = 0.0;  // 0.5 * (S_T - S_0)^2
    double discrete_payoff = 0.0;   // book payoff at S_T
    double payoff_error = 0.0;
    double hedge_pnl = 0.0;
    double realized_variance = 0.0; // sum of squared n-tick moves
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
};

VarianceSwapReport variance_swap_pnl(const TimeSeries& path,
                                     const StrangleBook& book,
                                     std::size_t rebalance_every = 1);

} // namespace trendlab
