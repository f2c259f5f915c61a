#include "capdist/blahut_arimoto.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace capdist::ba {

namespace {

// Keeps every letter reachable by later multiplicative updates.
constexpr double kProbabilityFloor = 1e-250;
constexpr double kMaxStretch = 1024.0;

double tilted_objective(std::span<const double> px, std::span<const double> scores,
                        std::span<const double> tilt) {
    double j = 0.0;
    for (std::size_t x = 0; x < px.size(); ++x)
        if (px[x] > 0.0) j += px[x] * (scores[x] - tilt[x]);
    return j;
}

// Mirror-ascent step p'(x) ~ p(x) exp(t (score(x) - tilt(x))); t = 1 is the plain BA update.
std::vector<double> update(std::span<const double> px, std::span<const double> scores,
                           std::span<const double> tilt, double t = 1.0) {
    const std::size_t n = px.size();
    std::vector<double> logw(n, -std::numeric_limits<double>::infinity());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < n; ++x) {
        if (px[x] <= 0.0) continue;
        logw[x] = std::log(px[x]) + t * (scores[x] - tilt[x]);
        top = std::max(top, logw[x]);
    }
    std::vector<double> next(n, 0.0);
    double sum = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
        if (px[x] <= 0.0) continue;
        next[x] = std::exp(logw[x] - top);
        sum += next[x];
    }
    for (double& v : next) v /= sum;
    return next;
}

void floor_probabilities(std::vector<double>& px) {
    for (double& v : px) v = std::max(v, kProbabilityFloor);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

MixtureObjective::MixtureObjective(ChannelMatrix channel)
    : MixtureObjective(std::vector<ChannelMatrix>{std::move(channel)}, {1.0}) {}

MixtureObjective::MixtureObjective(std::vector<ChannelMatrix> channels, std::vector<double> weights)
    : channels_(std::move(channels)), weights_(std::move(weights)) {
    if (channels_.empty() || channels_.size() != weights_.size())
        throw std::invalid_argument("MixtureObjective: need one weight per channel");
    inputs_ = channels_.front().inputs();
    for (const auto& c : channels_)
        if (c.inputs() != inputs_) throw std::invalid_argument("MixtureObjective: input alphabets differ");
}

void MixtureObjective::divergence_scores(std::span<const double> px, std::span<double> scores) const {
    std::fill(scores.begin(), scores.end(), 0.0);
    for (std::size_t k = 0; k < channels_.size(); ++k) {
        if (weights_[k] == 0.0) continue;
        const auto q = output_distribution(channels_[k], px);
        for (std::size_t x = 0; x < inputs_; ++x) scores[x] += weights_[k] * kl_divergence(channels_[k].row(x), q);
    }
}

double MixtureObjective::value(std::span<const double> px) const {
    double v = 0.0;
    for (std::size_t k = 0; k < channels_.size(); ++k)
        if (weights_[k] != 0.0) v += weights_[k] * mutual_information(channels_[k], px);
    return v;
}

MixtureObjective MixtureObjective::restrict_inputs(std::span<const std::size_t> letters) const {
    std::vector<ChannelMatrix> sub;
    sub.reserve(channels_.size());
    for (const auto& c : channels_) sub.push_back(c.restrict_rows(letters));
    return MixtureObjective(std::move(sub), weights_);
}

std::vector<double> step(const MixtureObjective& objective, std::span<const double> px,
                         std::span<const double> tilt) {
    std::vector<double> scores(objective.inputs());
    objective.divergence_scores(px, scores);
    return update(px, scores, tilt);
}

Result maximize(const MixtureObjective& objective, std::span<const double> tilt, std::vector<double> start,
                const Options& options) {
    const std::size_t n = objective.inputs();
    if (start.size() != n || tilt.size() != n) throw std::invalid_argument("maximize: size mismatch");

    Result result;
    result.px = std::move(start);
    std::vector<double> scores(n);
    double stretch = 1.0;
#ifndef NDEBUG
    double previous = -std::numeric_limits<double>::infinity();
#endif
    for (;;) {
        objective.divergence_scores(result.px, scores);
        result.objective = tilted_objective(result.px, scores, tilt);
        double bound = -std::numeric_limits<double>::infinity();
        for (std::size_t x = 0; x < n; ++x) bound = std::max(bound, scores[x] - tilt[x]);
        result.upper_bound = bound;
#ifndef NDEBUG
        assert(result.objective >= previous - 1e-12 * (1.0 + std::abs(previous)));
        previous = result.objective;
#endif
        if (bound - result.objective <= options.gap_tolerance) {
            result.converged = true;
            break;
        }
        if (result.iterations >= options.max_iterations) break;

        // The plain step never decreases the objective; a longer step is kept only if it beats it.
        auto next = update(result.px, scores, tilt);
        auto longer = update(result.px, scores, tilt, 2.0 * stretch);
        floor_probabilities(next);
        floor_probabilities(longer);
        if (objective.value(longer) - dot(longer, tilt) >= objective.value(next) - dot(next, tilt)) {
            next = std::move(longer);
            stretch = std::min(2.0 * stretch, kMaxStretch);
        } else {
            stretch = 1.0;
        }
        result.px = std::move(next);
        ++result.iterations;
    }
    return result;
}

}  // namespace capdist::ba
