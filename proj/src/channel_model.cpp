#include "capdist/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "capdist/errors.hpp"

namespace capdist {

namespace {

// Largest transition tensor block_to_super_symbol will materialize.
constexpr std::size_t kMaxTensorEntries = std::size_t{1} << 27;

// Checks one probability row in place and renormalizes it.
void check_probability_row(std::span<double> row, const std::string& where) {
    double sum = 0.0;
    for (double v : row) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0 + kProbabilityTolerance) {
            std::ostringstream msg;
            msg << where << ": entry " << v << " is not a probability";
            throw NotAProbability(msg.str());
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) >= kProbabilityTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << where << ": entries sum to " << sum << ", expected 1";
        throw NotAProbability(msg.str());
    }
    for (double& v : row) v = std::min(v / sum, 1.0);
}

std::string row_name(std::size_t x, std::size_t s) {
    return "transition[x=" + std::to_string(x) + "][s=" + std::to_string(s) + "]";
}

}  // namespace

double ChannelModel::max_distortion() const noexcept {
    return distortion_.empty() ? 0.0 : *std::max_element(distortion_.begin(), distortion_.end());
}

void ChannelModel::rebuild_marginal() {
    std::vector<double> m(inputs_ * outputs_, 0.0);
    for (std::size_t x = 0; x < inputs_; ++x)
        for (std::size_t s = 0; s < states_; ++s) {
            const double ps = prior_[s];
            if (ps == 0.0) continue;
            auto row = transition_row(x, s);
            for (std::size_t y = 0; y < outputs_; ++y) m[x * outputs_ + y] += ps * row[y];
        }
    marginal_ = ChannelMatrix(inputs_, outputs_, std::move(m));
}

ChannelModel ChannelModel::from_flat(std::size_t inputs, std::size_t outputs, std::size_t states,
                                     std::vector<double> transition, std::vector<double> prior,
                                     std::vector<double> distortion) {
    if (inputs == 0 || outputs == 0 || states == 0)
        throw DimensionMismatch("alphabet sizes must be at least 1");
    if (transition.size() != inputs * states * outputs)
        throw DimensionMismatch("transition: expected " + std::to_string(inputs * states * outputs) +
                                " entries, got " + std::to_string(transition.size()));
    if (prior.size() != states)
        throw DimensionMismatch("state_prior: expected " + std::to_string(states) + " entries, got " +
                                std::to_string(prior.size()));
    if (distortion.size() != states * states)
        throw DimensionMismatch("distortion: expected " + std::to_string(states) + "x" +
                                std::to_string(states) + " entries");

    ChannelModel m;
    m.inputs_ = inputs;
    m.outputs_ = outputs;
    m.states_ = states;
    m.transition_ = std::move(transition);
    m.prior_ = std::move(prior);
    m.distortion_ = std::move(distortion);

    for (std::size_t x = 0; x < inputs; ++x)
        for (std::size_t s = 0; s < states; ++s)
            check_probability_row({m.transition_.data() + (x * states + s) * outputs, outputs},
                                  row_name(x, s));
    check_probability_row(m.prior_, "state_prior");

    for (std::size_t i = 0; i < m.distortion_.size(); ++i) {
        const double d = m.distortion_[i];
        if (!std::isfinite(d) || d < 0.0) {
            std::ostringstream msg;
            msg << "distortion[" << i / states << "][" << i % states << "] = " << d
                << " must be finite and non-negative";
            throw NegativeDistortion(msg.str());
        }
    }
    m.rebuild_marginal();
    return m;
}

ChannelModel ChannelModel::with_prior(std::span<const double> prior) const {
    return from_flat(inputs_, outputs_, states_, transition_, {prior.begin(), prior.end()}, distortion_);
}

ChannelModel validate_channel(const ChannelSpec& spec) {
    const std::size_t X = spec.inputs, Y = spec.outputs, S = spec.states;
    if (X == 0 || Y == 0 || S == 0) throw DimensionMismatch("sizes: every alphabet needs at least one letter");
    if (spec.transition.size() != X)
        throw DimensionMismatch("transition: expected " + std::to_string(X) + " input blocks, got " +
                                std::to_string(spec.transition.size()));
    std::vector<double> flat;
    flat.reserve(X * S * Y);
    for (std::size_t x = 0; x < X; ++x) {
        if (spec.transition[x].size() != S)
            throw DimensionMismatch("transition[x=" + std::to_string(x) + "]: expected " + std::to_string(S) +
                                    " state rows");
        for (std::size_t s = 0; s < S; ++s) {
            const auto& row = spec.transition[x][s];
            if (row.size() != Y)
                throw DimensionMismatch(row_name(x, s) + ": expected " + std::to_string(Y) + " outputs, got " +
                                        std::to_string(row.size()));
            flat.insert(flat.end(), row.begin(), row.end());
        }
    }
    if (spec.distortion.size() != S)
        throw DimensionMismatch("distortion: expected " + std::to_string(S) + " rows");
    std::vector<double> dist;
    dist.reserve(S * S);
    for (std::size_t s = 0; s < S; ++s) {
        if (spec.distortion[s].size() != S)
            throw DimensionMismatch("distortion[" + std::to_string(s) + "]: expected " + std::to_string(S) +
                                    " columns");
        dist.insert(dist.end(), spec.distortion[s].begin(), spec.distortion[s].end());
    }
    return ChannelModel::from_flat(X, Y, S, std::move(flat), spec.state_prior, std::move(dist));
}

InputDistribution::InputDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw DimensionMismatch("input distribution is empty");
    check_probability_row(probs_, "input distribution");
}

InputDistribution InputDistribution::uniform(std::size_t n) {
    return InputDistribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

InputDistribution InputDistribution::point_mass(std::size_t n, std::size_t x) {
    std::vector<double> p(n, 0.0);
    p.at(x) = 1.0;
    return InputDistribution(std::move(p));
}

std::vector<double> output_marginal(const ChannelModel& model, std::size_t x) {
    auto row = model.channel_matrix().row(x);
    return {row.begin(), row.end()};
}

std::vector<double> output_marginal(const ChannelModel& model, const InputDistribution& px) {
    if (px.size() != model.input_size()) throw DimensionMismatch("input distribution size does not match |X|");
    return output_distribution(model.channel_matrix(), px.probs());
}

std::vector<double> state_posterior(const ChannelModel& model, std::size_t x, std::size_t y) {
    const std::size_t S = model.state_size();
    std::vector<double> post(S);
    double norm = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
        post[s] = model.transition(x, s, y) * model.state_prior()[s];
        norm += post[s];
    }
    if (norm <= 0.0)
        throw ZeroProbabilityConditioning("P(y=" + std::to_string(y) + "|x=" + std::to_string(x) + ") is zero");
    for (double& v : post) v /= norm;
    return post;
}

EstimatorPolicy optimal_estimator(const ChannelModel& model) {
    const std::size_t X = model.input_size(), Y = model.output_size(), S = model.state_size();
    EstimatorPolicy policy;
    policy.inputs = X;
    policy.outputs = Y;
    policy.table.assign(X * Y, 0);
    policy.reachable.assign(X * Y, 0);
    policy.cost_vector.assign(X, 0.0);

    std::vector<double> joint(S);
    for (std::size_t x = 0; x < X; ++x) {
        double cost = 0.0;
        for (std::size_t y = 0; y < Y; ++y) {
            // Unnormalized posterior P(s, y | x); the normalizer is P(y|x).
            double py = 0.0;
            for (std::size_t s = 0; s < S; ++s) {
                joint[s] = model.transition(x, s, y) * model.state_prior()[s];
                py += joint[s];
            }
            if (py <= 0.0) continue;
            policy.reachable[x * Y + y] = 1;

            std::size_t best = 0;
            double best_risk = 0.0;
            for (std::size_t s_hat = 0; s_hat < S; ++s_hat) {
                double risk = 0.0;
                for (std::size_t s = 0; s < S; ++s) risk += joint[s] * model.distortion(s, s_hat);
                if (s_hat == 0 || risk < best_risk) {
                    best = s_hat;
                    best_risk = risk;
                }
            }
            policy.table[x * Y + y] = best;
            cost += best_risk;
        }
        policy.cost_vector[x] = std::clamp(cost, 0.0, model.max_distortion());
    }
    return policy;
}

double mutual_information(const ChannelModel& model, const InputDistribution& px) {
    if (px.size() != model.input_size()) throw DimensionMismatch("input distribution size does not match |X|");
    return mutual_information(model.channel_matrix(), px.probs());
}

double average_cost(std::span<const double> px, std::span<const double> cost) {
    if (px.size() != cost.size()) throw DimensionMismatch("cost vector size does not match input distribution");
    double c = 0.0;
    for (std::size_t x = 0; x < px.size(); ++x) c += px[x] * cost[x];
    return c;
}

double average_cost(const InputDistribution& px, const EstimatorPolicy& policy) {
    return average_cost(px.probs(), policy.cost_vector);
}

ChannelModel block_to_super_symbol(const ChannelModel& base, unsigned block_length, std::size_t cap) {
    if (block_length == 0) throw InvalidArgument("block length must be at least 1");
    const std::size_t X = base.input_size(), Y = base.output_size(), S = base.state_size();

    auto checked_pow = [&](std::size_t b, const char* what) {
        std::size_t v = 1;
        for (unsigned k = 0; k < block_length; ++k) {
            if (v > cap / b)
                throw AlphabetOverflow(std::string(what) + " alphabet size " + std::to_string(b) + "^" +
                                       std::to_string(block_length) + " exceeds cap " + std::to_string(cap));
            v *= b;
        }
        return v;
    };
    const std::size_t SX = checked_pow(X, "input");
    const std::size_t SY = checked_pow(Y, "output");
    if (SX * SY > kMaxTensorEntries / S)
        throw AlphabetOverflow("super-symbol transition tensor would need " + std::to_string(SX * SY * S) +
                               " entries");

    std::vector<double> flat(SX * S * SY);
    std::vector<std::size_t> xd(block_length), yd(block_length);
    for (std::size_t xi = 0; xi < SX; ++xi) {
        for (std::size_t r = xi, k = block_length; k-- > 0; r /= X) xd[k] = r % X;
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t yi = 0; yi < SY; ++yi) {
                for (std::size_t r = yi, k = block_length; k-- > 0; r /= Y) yd[k] = r % Y;
                double p = 1.0;
                for (unsigned k = 0; k < block_length && p != 0.0; ++k) p *= base.transition(xd[k], s, yd[k]);
                flat[(xi * S + s) * SY + yi] = p;
            }
    }
    std::vector<double> dist(S * S);
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t t = 0; t < S; ++t) dist[s * S + t] = base.distortion(s, t);
    auto prior = base.state_prior();
    return ChannelModel::from_flat(SX, SY, S, std::move(flat), {prior.begin(), prior.end()}, std::move(dist));
}

}  // namespace capdist
