#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "capdist/info.hpp"

namespace capdist::ba {

/// Weighted sum of mutual informations sum_k w_k I(X; Y_k) for channels that
/// share one input alphabet. A single channel with weight 1 is the ordinary
/// capacity objective; several channels arise in compound max-min problems.
class MixtureObjective {
public:
    explicit MixtureObjective(ChannelMatrix channel);
    MixtureObjective(std::vector<ChannelMatrix> channels, std::vector<double> weights);

    std::size_t inputs() const noexcept { return inputs_; }
    std::span<const ChannelMatrix> channels() const noexcept { return channels_; }
    std::span<const double> weights() const noexcept { return weights_; }

    /// scores[x] = sum_k w_k D(W_k(.|x) || q_k), q_k the output law under px.
    void divergence_scores(std::span<const double> px, std::span<double> scores) const;

    double value(std::span<const double> px) const;

    /// Objective restricted to a subset of input letters.
    MixtureObjective restrict_inputs(std::span<const std::size_t> letters) const;

private:
    std::size_t inputs_ = 0;
    std::vector<ChannelMatrix> channels_;
    std::vector<double> weights_;
};

struct Options {
    /// Stop when the dual bound max_x[score - tilt] minus the objective drops below this.
    double gap_tolerance = 1e-10;
    int max_iterations = 10000;
};

struct Result {
    std::vector<double> px;
    double objective = 0.0;    // value - sum_x px(x) tilt(x)
    double upper_bound = 0.0;  // dual bound on the optimum of the tilted objective
    int iterations = 0;
    bool converged = false;
};

/// One multiplicative update p'(x) ∝ p(x) exp(score(x) - tilt(x)).
std::vector<double> step(const MixtureObjective& objective, std::span<const double> px,
                         std::span<const double> tilt);

/// Maximizes value(p) - <p, tilt> over the simplex from a strictly positive start.
/// The tilted objective is non-decreasing along the iterates (asserted in debug builds).
Result maximize(const MixtureObjective& objective, std::span<const double> tilt,
                std::vector<double> start, const Options& options = {});

}  // namespace capdist::ba
