#include "capdist/cd_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "capdist/errors.hpp"
#include "capdist/lp.hpp"

namespace capdist {

namespace {
constexpr double kConcavityTolerance = 1e-7;
}  // namespace

namespace detail {

namespace {

std::vector<double> uniform_start(std::size_t n) { return std::vector<double>(n, 1.0 / static_cast<double>(n)); }

class Runner {
public:
    Runner(const ba::MixtureObjective& objective, const SolverOptions& options)
        : objective_(objective), options_{options.gap_tolerance, options.max_inner_iterations} {}

    std::vector<double> run(std::span<const double> tilt) {
        auto r = ba::maximize(objective_, tilt, uniform_start(objective_.inputs()), options_);
        if (!r.converged) {
            std::ostringstream msg;
            msg << "Blahut-Arimoto stopped at the iteration cap with dual gap " << (r.upper_bound - r.objective);
            warning = msg.str();
        }
        return std::move(r.px);
    }

    std::vector<double> run_scaled(double lambda, std::span<const double> cost) {
        std::vector<double> tilt(cost.size());
        for (std::size_t x = 0; x < cost.size(); ++x) tilt[x] = lambda * cost[x];
        return run(tilt);
    }

    std::optional<std::string> warning;

private:
    const ba::MixtureObjective& objective_;
    ba::Options options_;
};

// Unconstrained maximizer supported on the least-cost letters.
std::vector<double> solve_face(const ba::MixtureObjective& objective, std::span<const double> cost,
                               const SolverOptions& options, Runner& runner) {
    const double cmin = *std::min_element(cost.begin(), cost.end());
    std::vector<std::size_t> face;
    for (std::size_t x = 0; x < cost.size(); ++x)
        if (cost[x] <= cmin + options.face_tolerance) face.push_back(x);

    std::vector<double> px(cost.size(), 0.0);
    if (face.size() == 1) {
        px[face.front()] = 1.0;
        return px;
    }
    const auto sub = objective.restrict_inputs(face);
    auto r = ba::maximize(sub, std::vector<double>(face.size(), 0.0), uniform_start(face.size()),
                          {options.gap_tolerance, options.max_inner_iterations});
    if (!r.converged) runner.warning = "Blahut-Arimoto on the min-cost face stopped at the iteration cap";
    for (std::size_t i = 0; i < face.size(); ++i) px[face[i]] = r.px[i];
    return px;
}

std::vector<double> mix(std::span<const double> a, std::span<const double> b, double weight_b) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = (1.0 - weight_b) * a[i] + weight_b * b[i];
    return out;
}

void check_cost_size(const ba::MixtureObjective& objective, std::span<const double> cost) {
    if (cost.size() != objective.inputs()) throw DimensionMismatch("cost vector size does not match |X|");
    for (double c : cost)
        if (!std::isfinite(c)) throw InvalidArgument("cost vector entries must be finite");
}

struct Bracket {
    double lo = 0.0, hi = 0.0;
    std::vector<double> p_lo, p_hi;
    bool exhausted = false;
};

// Cost tolerance for the bisection. When the letter costs span less than one
// unit, an absolute tolerance would leave the input law loose by
// tolerance / spread, so it is scaled down with the spread.
double bisection_tolerance(std::span<const double> cost, const SolverOptions& options) {
    const auto [lo, hi] = std::minmax_element(cost.begin(), cost.end());
    return options.cost_tolerance * std::min(1.0, *hi - *lo);
}

// Bisection on a single multiplier, holding everything else fixed. `solve`
// maps a multiplier to the Blahut-Arimoto fixed point and `cost_of` reads
// the constrained cost of a distribution. Ends with p_hi feasible.
template <class Solve, class CostOf>
Bracket bisect_multiplier(double start, double budget, double tolerance, const SolverOptions& options,
                          Solve&& solve, CostOf&& cost_of, std::vector<double> p_at_zero,
                          std::optional<std::string>& warning) {
    Bracket b;
    b.lo = 0.0;
    b.p_lo = std::move(p_at_zero);
    b.hi = std::max(start, 1.0);
    for (;;) {
        auto p = solve(b.hi);
        if (cost_of(p) <= budget) {
            b.p_hi = std::move(p);
            break;
        }
        b.lo = b.hi;
        b.p_lo = std::move(p);
        if (b.hi >= options.lambda_cap) {
            b.exhausted = true;
            return b;
        }
        b.hi = std::min(2.0 * b.hi, options.lambda_cap);
    }

    int it = 0;
    for (; it < options.max_bisection_iterations; ++it) {
        if (cost_of(b.p_hi) >= budget - tolerance) break;
        if (b.hi - b.lo <= 1e-15 * b.hi) break;
        const double mid = 0.5 * (b.lo + b.hi);
        auto p = solve(mid);
        if (cost_of(p) <= budget) {
            b.hi = mid;
            b.p_hi = std::move(p);
        } else {
            b.lo = mid;
            b.p_lo = std::move(p);
        }
    }
    if (it == options.max_bisection_iterations) warning = "multiplier bisection stopped at the iteration cap";
    return b;
}

// Convex combination of an infeasible and a feasible point that meets the
// budget exactly.
std::vector<double> land_on_budget(const Bracket& b, double budget, std::span<const double> cost) {
    const double c_hi = average_cost(b.p_hi, cost);
    const double c_lo = average_cost(b.p_lo, cost);
    if (c_hi >= budget || c_lo <= c_hi) return b.p_hi;
    const double weight_hi = (c_lo - budget) / (c_lo - c_hi);
    return mix(b.p_lo, b.p_hi, std::clamp(weight_hi, 0.0, 1.0));
}

}  // namespace

ConstrainedSolution solve_single(const ba::MixtureObjective& objective, std::span<const double> cost,
                                 double budget, const SolverOptions& options) {
    check_cost_size(objective, cost);
    if (!std::isfinite(budget)) throw InvalidArgument("budget must be finite");
    const double cmin = *std::min_element(cost.begin(), cost.end());
    if (budget < cmin - options.face_tolerance) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "budget " << budget << " is below the least achievable cost d_min=" << cmin;
        throw InfeasibleDistortion(msg.str(), cmin);
    }

    Runner runner(objective, options);
    ConstrainedSolution out;
    auto p0 = runner.run(std::vector<double>(cost.size(), 0.0));
    if (average_cost(p0, cost) <= budget) {
        out.px = std::move(p0);
        out.value = objective.value(out.px);
        out.multipliers = {0.0};
        out.warning = runner.warning;
        return out;
    }
    out.active = true;
    if (budget <= cmin + options.face_tolerance) {
        out.px = solve_face(objective, cost, options, runner);
        out.value = objective.value(out.px);
        out.multipliers = {std::numeric_limits<double>::quiet_NaN()};
        out.warning = runner.warning;
        return out;
    }

    auto b = bisect_multiplier(
        1.0, budget, bisection_tolerance(cost, options), options, [&](double lambda) { return runner.run_scaled(lambda, cost); },
        [&](std::span<const double> p) { return average_cost(p, cost); }, std::move(p0), runner.warning);
    if (b.exhausted) b.p_hi = solve_face(objective, cost, options, runner);

    out.px = land_on_budget(b, budget, cost);
    out.value = objective.value(out.px);
    out.multipliers = {b.hi};
    out.warning = runner.warning;
    return out;
}

ConstrainedSolution solve_multi(const ba::MixtureObjective& objective, const CostConstraintSet& constraints,
                                const SolverOptions& options) {
    if (constraints.empty()) throw InvalidArgument("constraint set is empty");
    for (const auto& c : constraints) {
        check_cost_size(objective, c.cost);
        if (!std::isfinite(c.budget)) throw InvalidArgument("budgets must be finite");
    }
    if (constraints.size() == 1) {
        try {
            return solve_single(objective, constraints.front().cost, constraints.front().budget, options);
        } catch (const InfeasibleDistortion& e) {
            throw InfeasibleConstraints(e.what());
        }
    }

    std::vector<std::vector<double>> costs;
    std::vector<double> budgets;
    for (const auto& c : constraints) {
        costs.push_back(c.cost);
        budgets.push_back(c.budget);
    }
    const auto interior = lp::most_slack_distribution(costs, budgets);
    if (!interior) throw InfeasibleConstraints("no input distribution satisfies every cost budget");

    const std::size_t m = constraints.size(), n = objective.inputs();
    Runner runner(objective, options);
    std::vector<double> lambda(m, 0.0);
    auto solve_at = [&](const std::vector<double>& lam) {
        std::vector<double> tilt(n, 0.0);
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t x = 0; x < n; ++x) tilt[x] += lam[j] * costs[j][x];
        return runner.run(tilt);
    };
    auto satisfied = [&](std::span<const double> p, double slack) {
        for (std::size_t j = 0; j < m; ++j)
            if (average_cost(p, costs[j]) > budgets[j] + slack) return false;
        return true;
    };

    ConstrainedSolution out;
    auto p = solve_at(lambda);
    if (satisfied(p, 0.0)) {
        out.px = std::move(p);
        out.value = objective.value(out.px);
        out.multipliers = lambda;
        out.warning = runner.warning;
        return out;
    }
    out.active = true;

    // Coordinate-wise multiplier adjustment: each pass re-fits one multiplier
    // by bisection with the others frozen, until complementary slackness holds.
    bool settled = false;
    for (int sweep = 0; sweep < options.max_sweeps && !settled; ++sweep) {
        for (std::size_t j = 0; j < m; ++j) {
            auto lam = lambda;
            lam[j] = 0.0;
            auto p_zero = solve_at(lam);
            if (average_cost(p_zero, costs[j]) <= budgets[j]) {
                lambda = lam;
                p = std::move(p_zero);
                continue;
            }
            auto b = bisect_multiplier(
                lambda[j], budgets[j], bisection_tolerance(costs[j], options), options,
                [&](double v) {
                    auto l = lambda;
                    l[j] = v;
                    return solve_at(l);
                },
                [&](std::span<const double> q) { return average_cost(q, costs[j]); }, std::move(p_zero),
                runner.warning);
            lambda[j] = b.hi;
            p = b.exhausted ? b.p_lo : land_on_budget(b, budgets[j], costs[j]);
        }
        settled = satisfied(p, options.cost_tolerance);
        for (std::size_t j = 0; j < m && settled; ++j)
            if (lambda[j] > 0.0 && average_cost(p, costs[j]) < budgets[j] - 100.0 * options.cost_tolerance)
                settled = false;
    }
    if (!settled) runner.warning = "multiplier sweeps stopped before complementary slackness held";

    // Pull the point toward the most slack feasible distribution until every
    // budget is met.
    double theta = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double violation = average_cost(p, costs[j]) - budgets[j];
        if (violation <= 0.0) continue;
        const double slack = budgets[j] - average_cost(*interior, costs[j]);
        theta = std::max(theta, slack + violation > 0.0 ? violation / (violation + slack) : 1.0);
    }
    if (theta > 0.0) p = mix(p, *interior, std::min(theta, 1.0));

    out.px = std::move(p);
    out.value = objective.value(out.px);
    out.multipliers = lambda;
    out.warning = runner.warning;
    return out;
}

}  // namespace detail

namespace {

CDPoint to_point(double budget, detail::ConstrainedSolution sol) {
    CDPoint point;
    point.distortion_budget = budget;
    point.capacity = std::max(sol.value, 0.0);
    point.optimizer = InputDistribution(std::move(sol.px));
    point.constraint_active = sol.active;
    point.multiplier = sol.multipliers.empty() ? 0.0 : sol.multipliers.front();
    point.convergence_warning = std::move(sol.warning);
    return point;
}

}  // namespace

FeasibleRange feasible_range(const ChannelModel& model, const SolverOptions& options) {
    const auto policy = optimal_estimator(model);
    const ba::MixtureObjective objective(model.channel_matrix());
    const std::size_t n = model.input_size();
    auto r = ba::maximize(objective, std::vector<double>(n, 0.0), std::vector<double>(n, 1.0 / static_cast<double>(n)),
                          {options.gap_tolerance, options.max_inner_iterations});
    FeasibleRange range;
    range.d_min = *std::min_element(policy.cost_vector.begin(), policy.cost_vector.end());
    range.d_max = std::max(average_cost(r.px, policy.cost_vector), range.d_min);
    range.unconstrained_capacity = objective.value(r.px);
    return range;
}

InputDistribution lagrangian_ba_step(const ChannelModel& model, const InputDistribution& px, double lambda,
                                     std::span<const double> cost) {
    if (px.size() != model.input_size() || cost.size() != model.input_size())
        throw DimensionMismatch("lagrangian_ba_step: sizes do not match |X|");
    if (!(lambda >= 0.0)) throw InvalidArgument("multiplier must be non-negative");
    std::vector<double> tilt(cost.size());
    for (std::size_t x = 0; x < cost.size(); ++x) tilt[x] = lambda * cost[x];
    return InputDistribution(ba::step(ba::MixtureObjective(model.channel_matrix()), px.probs(), tilt));
}

CDPoint capacity_distortion_point(const ChannelModel& model, double distortion, const SolverOptions& options) {
    const auto policy = optimal_estimator(model);
    const ba::MixtureObjective objective(model.channel_matrix());
    return to_point(distortion, detail::solve_single(objective, policy.cost_vector, distortion, options));
}

CDCurve cd_curve(const ChannelModel& model, std::span<const double> grid, const SolverOptions& options) {
    std::vector<double> budgets(grid.begin(), grid.end());
    std::sort(budgets.begin(), budgets.end());
    const auto range = feasible_range(model, options);

    CDCurve curve;
    curve.d_min = range.d_min;
    curve.d_max = range.d_max;
    curve.points.reserve(budgets.size());
    for (double d : budgets) curve.points.push_back(capacity_distortion_point(model, d, options));

    const auto& pts = curve.points;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].capacity < pts[i - 1].capacity - kConcavityTolerance) {
            std::ostringstream msg;
            msg.precision(12);
            msg << "C(D) decreased from " << pts[i - 1].capacity << " at D=" << pts[i - 1].distortion_budget
                << " to " << pts[i].capacity << " at D=" << pts[i].distortion_budget;
            throw SolverNonmonotone(msg.str());
        }
    }
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        const double d0 = pts[i - 1].distortion_budget, d1 = pts[i].distortion_budget,
                     d2 = pts[i + 1].distortion_budget;
        if (!(d0 < d1 && d1 < d2)) continue;
        const double chord =
            pts[i - 1].capacity + (pts[i + 1].capacity - pts[i - 1].capacity) * (d1 - d0) / (d2 - d0);
        if (pts[i].capacity < chord - kConcavityTolerance) {
            std::ostringstream msg;
            msg.precision(12);
            msg << "C(D) is not concave at D=" << d1 << " (value " << pts[i].capacity << ", chord " << chord << ")";
            throw SolverNonmonotone(msg.str());
        }
    }
    return curve;
}

std::vector<double> default_grid(const ChannelModel& model, std::size_t count, const SolverOptions& options) {
    if (count == 0) throw InvalidArgument("grid needs at least one point");
    const auto range = feasible_range(model, options);
    if (count == 1) return {range.d_max};
    const auto policy = optimal_estimator(model);
    double hi = *std::max_element(policy.cost_vector.begin(), policy.cost_vector.end());
    if (hi - range.d_min < 1e-12) hi = range.d_min + 1.0;
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i)
        grid[i] = range.d_min + (hi - range.d_min) * static_cast<double>(i) / static_cast<double>(count - 1);
    return grid;
}

CDCurve cd_curve(const ChannelModel& model, std::size_t count, const SolverOptions& options) {
    const auto grid = default_grid(model, count, options);
    return cd_curve(model, grid, options);
}

CDPoint multi_constraint_point(const ChannelModel& model, const CostConstraintSet& constraints,
                               const SolverOptions& options) {
    if (constraints.empty()) throw InvalidArgument("constraint set is empty");
    const ba::MixtureObjective objective(model.channel_matrix());
    return to_point(constraints.front().budget, detail::solve_multi(objective, constraints, options));
}

double grid_search_capacity(const ChannelModel& model, double distortion, std::optional<double> step) {
    const std::size_t n = model.input_size();
    if (n > 3) throw AlphabetTooLarge("grid search supports at most 3 input letters, model has " + std::to_string(n));
    const auto policy = optimal_estimator(model);
    const auto& cost = policy.cost_vector;
    const double cmin = *std::min_element(cost.begin(), cost.end());
    if (distortion < cmin - 1e-12) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "budget " << distortion << " is below the least achievable cost d_min=" << cmin;
        throw InfeasibleDistortion(msg.str(), cmin);
    }

    const double h = step.value_or(n == 3 ? 1e-2 : 1e-4);
    if (!(h > 0.0 && h <= 1.0)) throw InvalidArgument("grid step must lie in (0, 1]");
    const long steps = std::max(1L, std::lround(1.0 / h));
    const auto& channel = model.channel_matrix();

    double best = 0.0;
    std::vector<double> p(n);
    auto consider = [&] {
        if (average_cost(p, cost) <= distortion + 1e-12) best = std::max(best, mutual_information(channel, p));
    };
    const double scale = static_cast<double>(steps);
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
    return best;
}

}  // namespace capdist
