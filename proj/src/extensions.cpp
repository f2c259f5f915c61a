#include "capdist/extensions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "capdist/errors.hpp"

namespace capdist {

namespace {

constexpr double kZeroCost = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative width, in log D, at which the golden-section search stops.
constexpr double kGoldenTolerance = 1e-5;
constexpr int kSafetyGridPoints = 100;
// With d_min = 0 the ratio is searched from this fraction of d_max upward.
constexpr double kSmallestBudgetFraction = 1e-5;

std::optional<std::string> infinite_condition(const ChannelModel& model, const std::vector<std::size_t>& zeros) {
    if (zeros.size() >= 2) return "multiple zero-cost letters";
    if (zeros.size() == 1) {
        const auto& w = model.channel_matrix();
        for (std::size_t x = 0; x < model.input_size(); ++x)
            if (std::isinf(kl_divergence(w.row(x), w.row(zeros.front()))))
                return "P(y|x=" + std::to_string(x) + ") is not absolutely continuous w.r.t. the zero-cost letter";
    }
    return std::nullopt;
}

}  // namespace

bool CpudResult::infinite() const { return std::isinf(value); }

std::vector<std::size_t> zero_cost_letters(const ChannelModel& model) {
    const auto policy = optimal_estimator(model);
    std::vector<std::size_t> zeros;
    for (std::size_t x = 0; x < policy.cost_vector.size(); ++x)
        if (policy.cost_vector[x] <= kZeroCost) zeros.push_back(x);
    return zeros;
}

CpudResult cpud_ratio_formula(const ChannelModel& model) {
    const auto policy = optimal_estimator(model);
    const auto zeros = zero_cost_letters(model);
    CpudResult out;
    out.method = CpudMethod::RatioFormula;
    if (zeros.empty())
        throw NoZeroCostLetter("no input letter has zero estimation cost; use the sup-definition search instead");
    if (zeros.size() >= 2) {
        out.value = kInf;
        out.infinite_reason = "multiple zero-cost letters";
        return out;
    }

    const std::size_t x0 = zeros.front();
    const auto& w = model.channel_matrix();
    out.value = 0.0;
    for (std::size_t x = 0; x < model.input_size(); ++x) {
        if (x == x0) continue;
        const double kl = kl_divergence(w.row(x), w.row(x0));
        const double ratio = std::isinf(kl) ? kInf : kl / policy.cost_vector[x];
        if (!out.witness_letter || ratio > out.value) {
            out.value = ratio;
            out.witness_letter = x;
        }
        if (std::isinf(ratio)) {
            out.infinite_reason =
                "P(y|x=" + std::to_string(x) + ") is not absolutely continuous w.r.t. the zero-cost letter";
            break;
        }
    }
    return out;
}

CpudResult cpud_sup_definition(const ChannelModel& model, const SolverOptions& options) {
    CpudResult out;
    out.method = CpudMethod::SupDefinition;
    const auto zeros = zero_cost_letters(model);
    if (auto why = infinite_condition(model, zeros)) {
        out.value = kInf;
        out.infinite_reason = *why;
        return out;
    }

    const auto range = feasible_range(model, options);
    if (range.unconstrained_capacity <= 0.0) {
        out.value = 0.0;
        return out;
    }

    const double hi = range.d_max;
    const double lo = range.d_min > 0.0 ? range.d_min : hi * kSmallestBudgetFraction;

    double best = -1.0;
    auto consider = [&](double d) {
        auto point = capacity_distortion_point(model, d, options);
        const double ratio = point.capacity / d;
        if (ratio > best) {
            best = ratio;
            out.witness_budget = d;
            out.witness_distribution = point.optimizer;
        }
        return ratio;
    };

    if (hi <= lo * (1.0 + 1e-12)) {
        consider(lo);
        out.value = best;
        return out;
    }

    // Golden-section search for the maximum of C(D)/D over u = log D.
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::log(lo), b = std::log(hi);
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = consider(std::exp(c)), fd = consider(std::exp(d));
    while (b - a > kGoldenTolerance) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = consider(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = consider(std::exp(d));
        }
    }
    consider(std::exp(a));
    consider(std::exp(b));

    const double la = std::log(lo), lb = std::log(hi);
    for (int i = 0; i < kSafetyGridPoints; ++i)
        consider(std::exp(la + (lb - la) * static_cast<double>(i) / (kSafetyGridPoints - 1)));

    out.value = best;
    return out;
}

CompoundFamily::CompoundFamily(const ChannelModel& base, std::vector<std::vector<double>> priors) {
    if (priors.empty()) throw InvalidArgument("compound family needs at least one state prior");
    members_.reserve(priors.size());
    for (std::size_t t = 0; t < priors.size(); ++t) {
        try {
            members_.push_back(base.with_prior(priors[t]));
        } catch (const Error& e) {
            throw NotAProbability("compound prior " + std::to_string(t) + ": " + e.what());
        }
    }
}

namespace {

struct WeightedSolve {
    std::vector<double> px;
    std::vector<double> informations;  // I_theta(px)
    double upper = 0.0;                // sum_theta w_theta I_theta at the weighted optimum
    double lower = 0.0;                // min_theta I_theta
};

std::size_t argmin(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

// Max-min over a simplex grid, for |X| <= 3.
std::pair<double, std::vector<double>> grid_max_min(const std::vector<ChannelMatrix>& channels,
                                                    const CostConstraintSet& constraints) {
    const std::size_t n = channels.front().inputs();
    const long steps = n == 3 ? 100 : 10000;
    const double scale = static_cast<double>(steps);
    double best = -1.0;
    std::vector<double> best_p, p(n);
    auto consider = [&] {
        for (const auto& c : constraints)
            if (average_cost(p, c.cost) > c.budget + 1e-12) return;
        double v = kInf;
        for (const auto& ch : channels) v = std::min(v, mutual_information(ch, p));
        if (v > best) {
            best = v;
            best_p = p;
        }
    };
    if (n == 1) {
        p[0] = 1.0;
        consider();
    } else if (n == 2) {
        for (long i = 0; i <= steps; ++i) {
            p[1] = static_cast<double>(i) / scale;
            p[0] = 1.0 - p[1];
            consider();
        }
    } else {
        for (long i = 0; i <= steps; ++i)
            for (long j = 0; i + j <= steps; ++j) {
                p[0] = static_cast<double>(i) / scale;
                p[1] = static_cast<double>(j) / scale;
                p[2] = static_cast<double>(steps - i - j) / scale;
                consider();
            }
    }
    return {best, best_p};
}

}  // namespace

CompoundResult compound_cd(const CompoundFamily& family, double distortion, const SolverOptions& options) {
    if (!std::isfinite(distortion)) throw InvalidArgument("distortion budget must be finite");
    const std::size_t members = family.size();
    std::vector<ChannelMatrix> channels;
    CostConstraintSet constraints;
    double required = 0.0;
    for (std::size_t t = 0; t < members; ++t) {
        const auto& model = family.member(t);
        auto policy = optimal_estimator(model);
        required = std::max(required, *std::min_element(policy.cost_vector.begin(), policy.cost_vector.end()));
        channels.push_back(model.channel_matrix());
        constraints.push_back({std::move(policy.cost_vector), distortion});
    }
    if (distortion < required - options.face_tolerance) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "budget " << distortion << " is below max_theta min_x d*_theta(x) = " << required;
        throw InfeasibleDistortion(msg.str(), required);
    }

    CompoundResult out;
    if (members == 1) {
        auto sol = detail::solve_single(ba::MixtureObjective(channels.front()), constraints.front().cost,
                                        distortion, options);
        out.value = std::max(sol.value, 0.0);
        out.upper_bound = out.value;
        out.optimizer = InputDistribution(std::move(sol.px));
        out.convergence_warning = std::move(sol.warning);
        return out;
    }

    auto solve_weighted = [&](const std::vector<double>& weights) {
        WeightedSolve ws;
        detail::ConstrainedSolution sol;
        try {
            sol = detail::solve_multi(ba::MixtureObjective(channels, weights), constraints, options);
        } catch (const InfeasibleConstraints& e) {
            throw InfeasibleDistortion(std::string("no input law meets the budget for every prior: ") + e.what(),
                                       required);
        }
        if (sol.warning) out.convergence_warning = sol.warning;
        ws.px = std::move(sol.px);
        for (const auto& ch : channels) ws.informations.push_back(mutual_information(ch, ws.px));
        for (std::size_t t = 0; t < members; ++t) ws.upper += weights[t] * ws.informations[t];
        ws.lower = *std::min_element(ws.informations.begin(), ws.informations.end());
        return ws;
    };

    // Minimize the convex upper bound G(w) = max_p sum_theta w_theta I_theta(p)
    // over the weight simplex by exponentiated gradient with step adaptation.
    // Its gradient is (I_theta(p_w)); every p_w is feasible, so min_theta
    // I_theta(p_w) is a lower bound on the max-min value.
    std::vector<double> w(members, 1.0 / static_cast<double>(members));
    auto current = solve_weighted(w);
    double best_upper = current.upper, best_lower = current.lower;
    std::vector<double> best_px = current.px;
    double eta = 10.0;
    int it = 0;
    for (; it < 200 && best_upper - best_lower > 1e-10 && eta > 1e-10; ++it) {
        const double floor = *std::min_element(current.informations.begin(), current.informations.end());
        std::vector<double> trial(members);
        double sum = 0.0;
        for (std::size_t t = 0; t < members; ++t) {
            trial[t] = std::max(w[t] * std::exp(-eta * (current.informations[t] - floor)), 1e-300);
            sum += trial[t];
        }
        for (double& v : trial) v /= sum;
        auto next = solve_weighted(trial);
        if (next.lower > best_lower) {
            best_lower = next.lower;
            best_px = next.px;
        }
        best_upper = std::min(best_upper, next.upper);
        if (next.upper < current.upper) {
            w = std::move(trial);
            current = std::move(next);
            eta *= 2.0;
        } else {
            eta *= 0.25;
        }
    }
    out.outer_iterations = it;

    if (best_upper - best_lower > kCompoundGapTolerance) {
        if (channels.front().inputs() > 3) {
            std::ostringstream msg;
            msg << "max-min duality gap " << (best_upper - best_lower) << " exceeds " << kCompoundGapTolerance;
            throw NotCertified(msg.str());
        }
        auto [grid_value, grid_px] = grid_max_min(channels, constraints);
        if (grid_value > best_lower) {
            best_lower = grid_value;
            best_px = std::move(grid_px);
        }
        out.certificate = Certificate::GridSearch;
    }

    std::vector<double> informations;
    for (const auto& ch : channels) informations.push_back(mutual_information(ch, best_px));
    out.value = std::max(*std::min_element(informations.begin(), informations.end()), 0.0);
    out.worst_theta = argmin(informations);
    // Both bounds come from finite-tolerance solves and can cross by ~1e-9.
    out.upper_bound = std::max(best_upper, out.value);
    out.optimizer = InputDistribution(std::move(best_px));
    return out;
}

}  // namespace capdist
