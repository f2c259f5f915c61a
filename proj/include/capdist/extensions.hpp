#pragma once

#include <optional>
#include <string>
#include <vector>

#include "capdist/cd_solver.hpp"
#include "capdist/channel_model.hpp"

namespace capdist {

// ---------------------------------------------------------------------------
// Capacity per unit distortion
// ---------------------------------------------------------------------------

enum class CpudMethod { RatioFormula, SupDefinition };

struct CpudResult {
    double value = 0.0;  // nats per unit distortion, may be +infinity
    CpudMethod method = CpudMethod::RatioFormula;
    /// Ratio formula: the maximizing letter. Unset for infinite values caused
    /// by several zero-cost letters.
    std::optional<std::size_t> witness_letter;
    /// Sup definition: the input law of the best sampled C(D)/D.
    std::optional<InputDistribution> witness_distribution;
    /// Budget at which the sup-definition search found its best ratio.
    std::optional<double> witness_budget;
    /// Why the value is infinite, empty otherwise.
    std::string infinite_reason;

    bool infinite() const;
};

/// Letters with d*(x) within 1e-12 of zero.
std::vector<std::size_t> zero_cost_letters(const ChannelModel& model);

/// With a unique zero-cost letter x0: max over x != x0 of D(P_{y|x} || P_{y|x0}) / d*(x).
/// Infinite with two or more zero-cost letters; NoZeroCostLetter with none.
CpudResult cpud_ratio_formula(const ChannelModel& model);

/// sup over budgets of C(D)/D, found by golden-section search in log D plus a
/// 100-point safety grid.
CpudResult cpud_sup_definition(const ChannelModel& model, const SolverOptions& options = {});

// ---------------------------------------------------------------------------
// Compound channel
// ---------------------------------------------------------------------------

/// Shared transition tensor and distortion, several candidate state priors.
class CompoundFamily {
public:
    CompoundFamily(const ChannelModel& base, std::vector<std::vector<double>> priors);

    std::size_t size() const noexcept { return members_.size(); }
    const ChannelModel& member(std::size_t theta) const { return members_.at(theta); }

private:
    std::vector<ChannelModel> members_;
};

enum class Certificate { DualityGap, GridSearch };

struct CompoundResult {
    double value = 0.0;  // max over P_x of min over theta of I_theta(X;Y), nats
    InputDistribution optimizer = InputDistribution::uniform(1);
    std::size_t worst_theta = 0;
    double upper_bound = 0.0;
    Certificate certificate = Certificate::DualityGap;
    int outer_iterations = 0;
    std::optional<std::string> convergence_warning;
};

inline constexpr double kCompoundGapTolerance = 1e-4;

/// Max-min mutual information subject to E d*_theta(X) <= D for every theta.
CompoundResult compound_cd(const CompoundFamily& family, double distortion, const SolverOptions& options = {});

}  // namespace capdist
