#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "capdist/info.hpp"

namespace capdist {

/// Raw, unvalidated channel description as read from a file or built by hand.
/// transition is indexed [x][s][y]; distortion is indexed [s][s_hat].
struct ChannelSpec {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::size_t states = 0;
    std::vector<std::vector<std::vector<double>>> transition;
    std::vector<double> state_prior;
    std::vector<std::vector<double>> distortion;
};

/// Probability rows must sum to one within this before they are renormalized.
inline constexpr double kProbabilityTolerance = 1e-9;

/// Finite-alphabet state-dependent memoryless channel: P(y|x,s), P(s), d(s,s_hat).
///
/// Instances are immutable once built and always satisfy the probability and
/// distortion invariants; the only ways to obtain one are validate_channel()
/// and the builders in this library, which go through the same checks.
class ChannelModel {
public:
    std::size_t input_size() const noexcept { return inputs_; }
    std::size_t output_size() const noexcept { return outputs_; }
    std::size_t state_size() const noexcept { return states_; }

    double transition(std::size_t x, std::size_t s, std::size_t y) const {
        return transition_[(x * states_ + s) * outputs_ + y];
    }
    std::span<const double> transition_row(std::size_t x, std::size_t s) const {
        return {transition_.data() + (x * states_ + s) * outputs_, outputs_};
    }
    std::span<const double> state_prior() const noexcept { return prior_; }
    double distortion(std::size_t s, std::size_t s_hat) const { return distortion_[s * states_ + s_hat]; }
    double max_distortion() const noexcept;

    /// P(y|x) with the state marginalized out.
    const ChannelMatrix& channel_matrix() const noexcept { return marginal_; }

    /// Same transition and distortion, different state prior (validated).
    ChannelModel with_prior(std::span<const double> prior) const;

    /// Flat tensors in the internal layout; checked exactly like validate_channel.
    static ChannelModel from_flat(std::size_t inputs, std::size_t outputs, std::size_t states,
                                  std::vector<double> transition, std::vector<double> prior,
                                  std::vector<double> distortion);

private:
    ChannelModel() = default;
    void rebuild_marginal();

    std::size_t inputs_ = 0;
    std::size_t outputs_ = 0;
    std::size_t states_ = 0;
    std::vector<double> transition_;  // [(x*S + s)*Y + y]
    std::vector<double> prior_;
    std::vector<double> distortion_;  // [s*S + s_hat]
    ChannelMatrix marginal_;
};

/// Checks dimensions, probability rows and distortion entries. Rows within
/// kProbabilityTolerance of summing to one are renormalized; anything else is
/// rejected with DimensionMismatch, NotAProbability or NegativeDistortion.
ChannelModel validate_channel(const ChannelSpec& spec);

class InputDistribution {
public:
    /// Validates (non-negative, sums to one within kProbabilityTolerance) and renormalizes.
    explicit InputDistribution(std::vector<double> probs);

    static InputDistribution uniform(std::size_t n);
    static InputDistribution point_mass(std::size_t n, std::size_t x);

    std::span<const double> probs() const noexcept { return probs_; }
    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t x) const { return probs_[x]; }

    friend bool operator==(const InputDistribution&, const InputDistribution&) = default;

private:
    std::vector<double> probs_;
};

/// Optimal one-shot state estimator h0*(x,y) and the per-letter estimation cost d*(x).
struct EstimatorPolicy {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::vector<std::size_t> table;  // [x*Y + y] -> s_hat
    std::vector<char> reachable;     // P(y|x) > 0
    std::vector<double> cost_vector; // d*(x)

    std::size_t estimate(std::size_t x, std::size_t y) const { return table[x * outputs + y]; }
    bool is_reachable(std::size_t x, std::size_t y) const { return reachable[x * outputs + y] != 0; }
};

/// P(y|x) for a single input letter.
std::vector<double> output_marginal(const ChannelModel& model, std::size_t x);

/// P(y) under an input distribution.
std::vector<double> output_marginal(const ChannelModel& model, const InputDistribution& px);

/// P(s|x,y). Throws ZeroProbabilityConditioning when P(y|x) = 0.
std::vector<double> state_posterior(const ChannelModel& model, std::size_t x, std::size_t y);

/// Bayes estimator under the model's distortion. Ties go to the smallest state
/// index; unreachable (x,y) pairs map to state 0 and do not contribute to d*(x).
EstimatorPolicy optimal_estimator(const ChannelModel& model);

double mutual_information(const ChannelModel& model, const InputDistribution& px);

/// E d*(X) = sum_x P(x) d*(x).
double average_cost(const InputDistribution& px, const EstimatorPolicy& policy);
double average_cost(std::span<const double> px, std::span<const double> cost);

inline constexpr std::size_t kDefaultSuperSymbolCap = std::size_t{1} << 20;

/// Treats K consecutive uses sharing one state as a single letter:
/// P(y_1..y_K | x_1..x_K, s) = prod_k P(y_k|x_k,s). The first use is the most
/// significant digit of the super-symbol index. Rates computed on the result
/// are per block and must be divided by K for per-use units.
ChannelModel block_to_super_symbol(const ChannelModel& base, unsigned block_length,
                                   std::size_t cap = kDefaultSuperSymbolCap);

}  // namespace capdist
