#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "capdist/channel_model.hpp"

namespace capdist {

/// Monte Carlo check of the single-letter quantities. The receiver is handed
/// the true input letter (the decoding step is assumed to have succeeded) and
/// estimates the state with the optimal one-shot estimator.
struct SimulationReport {
    std::uint64_t samples = 0;
    double empirical_distortion = 0.0;  // mean d(s_i, s_hat_i)
    double distortion_variance = 0.0;   // sample variance of d(s_i, s_hat_i)
    double analytic_distortion = 0.0;   // E d*(X)
    double empirical_mi = 0.0;          // plug-in I(X;Y) from (x,y) counts, nats
    std::uint64_t seed = 0;

    /// sqrt(variance / samples).
    double standard_error() const;

    friend bool operator==(const SimulationReport&, const SimulationReport&) = default;
};

/// Samples are generated in fixed blocks of kSimulationBlock draws; block b
/// uses three independent streams (input, state, output) whose seeds are
/// derived from (seed, b, stream) with SplitMix64. Results therefore do not
/// depend on how many worker threads share the blocks.
inline constexpr std::uint64_t kSimulationBlock = 1 << 16;

SimulationReport simulate(const ChannelModel& model, const InputDistribution& px, std::uint64_t samples,
                          std::uint64_t seed, unsigned workers = 1);

/// Per-letter posterior provider, P(s|x,y) as a vector over states.
using PosteriorFn = std::function<std::vector<double>(const ChannelModel&, std::size_t x, std::size_t y)>;

struct FactorizationReport {
    int trials = 0;
    double max_deviation = 0.0;
    bool passed = false;
};

inline constexpr double kFactorizationTolerance = 1e-10;

/// Samples blocks (x^n, s^n, y^n), computes the block posterior P(s^n | x^n, y^n)
/// by enumerating every state sequence, and compares it entrywise with the
/// product of per-letter posteriors from `posterior` (state_posterior when
/// empty). Requires block_length in [1, 4] and |S| <= 3.
FactorizationReport check_factorization(const ChannelModel& model, const InputDistribution& px,
                                        unsigned block_length, int trials, std::uint64_t seed,
                                        const PosteriorFn& posterior = {});

}  // namespace capdist
