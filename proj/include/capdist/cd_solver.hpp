#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "capdist/blahut_arimoto.hpp"
#include "capdist/channel_model.hpp"

namespace capdist {

struct SolverOptions {
    /// Inner Blahut-Arimoto stopping rule (dual gap, nats) and iteration cap.
    double gap_tolerance = 1e-10;
    int max_inner_iterations = 10000;
    /// Outer multiplier bisection: stop at |E c(X) - budget| <= cost_tolerance.
    double cost_tolerance = 1e-8;
    int max_bisection_iterations = 200;
    /// Largest Lagrange multiplier tried before falling back to the min-cost face.
    double lambda_cap = 1e6;
    /// Letters within this of the least cost form the min-cost face.
    double face_tolerance = 1e-12;
    /// Coordinate sweeps for several simultaneous constraints.
    int max_sweeps = 100;
};

/// One point of the capacity-distortion function.
struct CDPoint {
    double distortion_budget = 0.0;
    double capacity = 0.0;  // nats per channel use
    InputDistribution optimizer = InputDistribution::uniform(1);
    bool constraint_active = false;
    /// Lagrange multiplier at the optimum (0 when inactive). Slope of C(D) there.
    double multiplier = 0.0;
    /// Set when an iteration cap was hit; the value is then not certified.
    std::optional<std::string> convergence_warning;
};

struct CDCurve {
    std::vector<CDPoint> points;  // increasing distortion_budget
    double d_min = 0.0;
    double d_max = 0.0;
};

struct CostConstraint {
    std::vector<double> cost;  // per input letter
    double budget = 0.0;
};

/// Constraints intersected with one another (at least one entry).
using CostConstraintSet = std::vector<CostConstraint>;

struct FeasibleRange {
    double d_min = 0.0;  // least estimation cost over letters
    double d_max = 0.0;  // cost of the unconstrained capacity achiever
    double unconstrained_capacity = 0.0;
};

FeasibleRange feasible_range(const ChannelModel& model, const SolverOptions& options = {});

/// Single tilted Blahut-Arimoto update p'(x) ∝ p(x) exp(D(P_{y|x} || P_y) - lambda c(x)).
InputDistribution lagrangian_ba_step(const ChannelModel& model, const InputDistribution& px, double lambda,
                                     std::span<const double> cost);

/// C(D) = max I(X;Y) subject to E d*(X) <= D. Throws InfeasibleDistortion
/// when D is below the least per-letter estimation cost.
CDPoint capacity_distortion_point(const ChannelModel& model, double distortion,
                                  const SolverOptions& options = {});

/// Solves every budget in the grid (sorted ascending) and checks that the
/// result is nondecreasing and concave; throws SolverNonmonotone otherwise.
CDCurve cd_curve(const ChannelModel& model, std::span<const double> grid, const SolverOptions& options = {});

/// Evenly spaced budgets: {d_max} for count 1, otherwise count points from
/// d_min to the largest per-letter cost (d_min + 1 when every letter costs the same).
std::vector<double> default_grid(const ChannelModel& model, std::size_t count, const SolverOptions& options = {});

CDCurve cd_curve(const ChannelModel& model, std::size_t count, const SolverOptions& options = {});

/// max I(X;Y) over the intersection of {E c_j(X) <= B_j}. Throws
/// InfeasibleConstraints when no input distribution meets every budget.
CDPoint multi_constraint_point(const ChannelModel& model, const CostConstraintSet& constraints,
                               const SolverOptions& options = {});

/// Exhaustive search over the input simplex at a fixed step, for |X| <= 3.
/// Default step is 1e-4 for binary inputs and 1e-2 for ternary inputs.
double grid_search_capacity(const ChannelModel& model, double distortion, std::optional<double> step = {});

/// Lower-level entry points shared with the compound solver.
namespace detail {

struct ConstrainedSolution {
    std::vector<double> px;
    double value = 0.0;
    bool active = false;
    std::vector<double> multipliers;
    std::optional<std::string> warning;
};

/// max objective(p) s.t. <p, cost> <= budget.
ConstrainedSolution solve_single(const ba::MixtureObjective& objective, std::span<const double> cost,
                                 double budget, const SolverOptions& options);

/// max objective(p) s.t. <p, c_j> <= B_j for all j.
ConstrainedSolution solve_multi(const ba::MixtureObjective& objective, const CostConstraintSet& constraints,
                                const SolverOptions& options);

}  // namespace detail

}  // namespace capdist
