#pragma once

#include <vector>

#include "capdist/channel_model.hpp"

namespace capdist::analytic {

/// Closed-form optimum for a multiplicative channel: capacity in nats per
/// channel use and P(x != 0) at the optimum.
struct ClosedForm {
    double capacity = 0.0;
    double p_star = 0.0;
    /// Budget above which the estimation constraint is slack.
    double threshold = 0.0;
    /// Block channel only: the all-zero letter is never used at any budget.
    bool case1 = false;
};

/// y = s x over binary alphabets, P(s=1) = r, Hamming distortion. Any r in [0,1].
ChannelModel scalar_multiplicative_model(double r);

/// y = x xor s over binary alphabets, P(s=1) = r, Hamming distortion.
ChannelModel additive_mod2_model(double r);

/// K uses of the scalar multiplicative channel sharing one state, as a
/// single super-symbol channel with 2^K letters.
ChannelModel block_multiplicative_model(double r, unsigned block_length);

/// Requires r in (0, 1/2] and D >= 0.
ClosedForm scalar_cd_closed_form(double r, double distortion);

/// -log(1-r)/r: slope of C(D) as D -> 0 for the scalar channel.
double scalar_small_d_slope(double r);

/// 2^K > 1 + (1-r)^(-1/r).
bool case1_predicate(double r, unsigned block_length);

/// Per-use capacity of the block channel; requires r in (0, 1/2], K >= 1, D >= 0.
ClosedForm block_cd_closed_form(double r, unsigned block_length, double distortion);

/// Optimal super-symbol input law: 1-p* on the all-zero block, p*/(2^K-1) on each other block.
std::vector<double> block_optimizer(unsigned block_length, double p_star);

/// Train-then-transmit rate r log(2^(K-1)) / K in nats per channel use.
double training_rate(double r, unsigned block_length);

}  // namespace capdist::analytic
