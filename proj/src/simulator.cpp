#include "capdist/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "capdist/errors.hpp"

namespace capdist {

namespace {

enum Stream : std::uint64_t { kInputStream = 1, kStateStream = 2, kOutputStream = 3 };

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t block, std::uint64_t stream) {
    return splitmix64(splitmix64(splitmix64(seed) ^ block) ^ stream);
}

double uniform01(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

// Inverse-CDF sampler over a fixed probability vector.
class Categorical {
public:
    explicit Categorical(std::span<const double> p) : cdf_(p.size()) {
        double acc = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) cdf_[i] = acc += p[i];
        last_nonzero_ = 0;
        for (std::size_t i = 0; i < p.size(); ++i)
            if (p[i] > 0.0) last_nonzero_ = i;
    }
    std::size_t draw(std::mt19937_64& gen) const {
        const double u = uniform01(gen) * cdf_.back();
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return std::min(static_cast<std::size_t>(it - cdf_.begin()), last_nonzero_);
    }

private:
    std::vector<double> cdf_;
    std::size_t last_nonzero_ = 0;
};

struct BlockStats {
    std::vector<std::uint64_t> counts;  // [x*Y + y]
    double sum = 0.0;
    double sum_sq = 0.0;
};

}  // namespace

double SimulationReport::standard_error() const {
    return samples == 0 ? 0.0 : std::sqrt(distortion_variance / static_cast<double>(samples));
}

SimulationReport simulate(const ChannelModel& model, const InputDistribution& px, std::uint64_t samples,
                          std::uint64_t seed, unsigned workers) {
    if (samples == 0) throw InvalidArgument("sample count must be at least 1");
    if (px.size() != model.input_size()) throw DimensionMismatch("input distribution size does not match |X|");
    const std::size_t X = model.input_size(), Y = model.output_size(), S = model.state_size();
    const auto policy = optimal_estimator(model);

    const Categorical input_law(px.probs());
    const Categorical state_law(model.state_prior());
    std::vector<Categorical> output_law;
    output_law.reserve(X * S);
    for (std::size_t x = 0; x < X; ++x)
        for (std::size_t s = 0; s < S; ++s) output_law.emplace_back(model.transition_row(x, s));

    const std::uint64_t blocks = (samples + kSimulationBlock - 1) / kSimulationBlock;
    std::vector<BlockStats> stats(blocks);

    auto run_block = [&](std::uint64_t b) {
        std::mt19937_64 gx(derive_seed(seed, b, kInputStream));
        std::mt19937_64 gs(derive_seed(seed, b, kStateStream));
        std::mt19937_64 gy(derive_seed(seed, b, kOutputStream));
        BlockStats& st = stats[b];
        st.counts.assign(X * Y, 0);
        const std::uint64_t begin = b * kSimulationBlock;
        const std::uint64_t end = std::min(samples, begin + kSimulationBlock);
        for (std::uint64_t i = begin; i < end; ++i) {
            const std::size_t x = input_law.draw(gx);
            const std::size_t s = state_law.draw(gs);
            const std::size_t y = output_law[x * S + s].draw(gy);
            const double d = model.distortion(s, policy.estimate(x, y));
            st.sum += d;
            st.sum_sq += d * d;
            ++st.counts[x * Y + y];
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(blocks)));
    if (threads == 1) {
        for (std::uint64_t b = 0; b < blocks; ++b) run_block(b);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (std::uint64_t b = t; b < blocks; b += threads) run_block(b);
            });
    }

    // Reduce in block order so the floating-point sums do not depend on scheduling.
    std::vector<std::uint64_t> counts(X * Y, 0);
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& st : stats) {
        sum += st.sum;
        sum_sq += st.sum_sq;
        for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += st.counts[i];
    }

    SimulationReport report;
    report.samples = samples;
    report.seed = seed;
    const double n = static_cast<double>(samples);
    report.empirical_distortion = sum / n;
    report.distortion_variance =
        samples > 1 ? std::max(0.0, (sum_sq - n * report.empirical_distortion * report.empirical_distortion) / (n - 1.0))
                    : 0.0;
    report.analytic_distortion = average_cost(px, policy);

    std::vector<double> cx(X, 0.0), cy(Y, 0.0);
    for (std::size_t x = 0; x < X; ++x)
        for (std::size_t y = 0; y < Y; ++y) {
            cx[x] += static_cast<double>(counts[x * Y + y]);
            cy[y] += static_cast<double>(counts[x * Y + y]);
        }
    double mi = 0.0;
    for (std::size_t x = 0; x < X; ++x)
        for (std::size_t y = 0; y < Y; ++y) {
            const double c = static_cast<double>(counts[x * Y + y]);
            if (c > 0.0) mi += c / n * std::log(c * n / (cx[x] * cy[y]));
        }
    report.empirical_mi = std::max(mi, 0.0);
    return report;
}

FactorizationReport check_factorization(const ChannelModel& model, const InputDistribution& px,
                                        unsigned block_length, int trials, std::uint64_t seed,
                                        const PosteriorFn& posterior) {
    if (block_length < 1 || block_length > 4) throw InvalidArgument("block length must lie in [1, 4]");
    const std::size_t S = model.state_size();
    if (S > 3) throw AlphabetTooLarge("factorization check enumerates S^n and needs |S| <= 3");
    if (px.size() != model.input_size()) throw DimensionMismatch("input distribution size does not match |X|");
    const PosteriorFn letter_posterior = posterior ? posterior : PosteriorFn(state_posterior);

    const Categorical input_law(px.probs());
    const Categorical state_law(model.state_prior());
    std::mt19937_64 gen(splitmix64(seed));

    std::size_t sequences = 1;
    for (unsigned i = 0; i < block_length; ++i) sequences *= S;

    FactorizationReport report;
    std::vector<std::size_t> xs(block_length), ys(block_length), digits(block_length);
    std::vector<std::vector<double>> letter(block_length);
    std::vector<double> joint(sequences);
    for (int t = 0; t < trials; ++t) {
        for (unsigned i = 0; i < block_length; ++i) {
            xs[i] = input_law.draw(gen);
            const std::size_t s = state_law.draw(gen);
            ys[i] = Categorical(model.transition_row(xs[i], s)).draw(gen);
            letter[i] = letter_posterior(model, xs[i], ys[i]);
        }
        double total = 0.0;
        for (std::size_t k = 0; k < sequences; ++k) {
            for (std::size_t r = k, i = block_length; i-- > 0; r /= S) digits[i] = r % S;
            double p = 1.0;
            for (unsigned i = 0; i < block_length; ++i)
                p *= model.transition(xs[i], digits[i], ys[i]) * model.state_prior()[digits[i]];
            joint[k] = p;
            total += p;
        }
        for (std::size_t k = 0; k < sequences; ++k) {
            for (std::size_t r = k, i = block_length; i-- > 0; r /= S) digits[i] = r % S;
            double product = 1.0;
            for (unsigned i = 0; i < block_length; ++i) product *= letter[i][digits[i]];
            report.max_deviation = std::max(report.max_deviation, std::abs(joint[k] / total - product));
        }
        ++report.trials;
    }
    report.passed = report.max_deviation <= kFactorizationTolerance;
    return report;
}

}  // namespace capdist
