#pragma once

#include <optional>
#include <vector>

namespace capdist::lp {

/// Dense two-phase simplex (Bland's rule) for tiny problems:
///   maximize objective . x  subject to  rows x = rhs,  x >= 0.
/// Returns nullopt when the constraints admit no solution. The caller must
/// ensure the problem is bounded.
std::optional<std::vector<double>> maximize(const std::vector<double>& objective,
                                            const std::vector<std::vector<double>>& rows,
                                            const std::vector<double>& rhs);

/// A point of the probability simplex with sum_x costs[j][x] p(x) <= budgets[j]
/// for every j, chosen to maximize the smallest slack (capped at 1). nullopt
/// when no such distribution exists.
std::optional<std::vector<double>> most_slack_distribution(const std::vector<std::vector<double>>& costs,
                                                           const std::vector<double>& budgets);

}  // namespace capdist::lp
