#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <fairdyn/popmodel.hpp>

namespace fairdyn {

// MinMax is a baseline policy over a single shared threshold; the other four
// couple the two thresholds through a constraint.
enum class FairnessCriterion { Simple, EqOpt, StatPar, EqLos, MinMax };

const char* to_string(FairnessCriterion c);
FairnessCriterion criterion_from_string(const std::string& name);

struct DecisionPair {
    double theta_a = 0.0;
    double theta_b = 0.0;
    FairnessCriterion criterion = FairnessCriterion::Simple;
    // Absolute constraint gap at the pair (equal-threshold gap, rate gap, or
    // loss gap depending on the criterion; 0 for the baseline).
    double residual = 0.0;
};

struct EqLosResult {
    DecisionPair pair;
    double target_loss = 0.0;
    std::vector<DecisionPair> alternates;
};

// Piecewise-constant optimal-decision map for all-uniform scenarios: pair m is
// optimal exactly for weight ratios alpha_a/alpha_b strictly between
// thresholds[m-1] and thresholds[m].
struct UniformDecisionTable {
    std::vector<DecisionPair> pairs;
    std::vector<double> thresholds;
    // Named constants from the closed-form derivation, kept as metadata.
    std::vector<std::pair<std::string, double>> constants;
};

// theta_a matching theta_b on the constraint curve. Simple: identity. EqOpt:
// equal false positive rate. StatPar: equal acceptance rate (bisection on the
// mixture survival function). The inverse map is the same call with the group
// roles exchanged.
double constraint_map(FairnessCriterion c, const GroupSpec& ga,
                      const GroupSpec& gb, double theta_b);

// Absolute constraint gap of a candidate pair under the given criterion.
double constraint_residual(FairnessCriterion c, const GroupSpec& ga,
                           const GroupSpec& gb, double theta_a, double theta_b);

// Precomputed scan state for solving the weighted one-shot problem many times
// on a fixed (criterion, scenario). Safe for concurrent solve() calls.
class OneShotCache {
  public:
    OneShotCache(FairnessCriterion c, GroupSpec ga, GroupSpec gb);

    DecisionPair solve(double alpha_a, double alpha_b) const;

    FairnessCriterion criterion() const { return crit_; }
    bool swapped() const { return swapped_; }
    // Search box in the orientation actually scanned (internal labels).
    double box_lo() const { return box_lo_; }
    double box_hi() const { return box_hi_; }

  private:
    FairnessCriterion crit_;
    GroupSpec ga_;
    GroupSpec gb_;
    bool swapped_ = false;
    double box_lo_ = 0.0;
    double box_hi_ = 0.0;
    std::vector<double> grid_;
    std::vector<double> phi_;
    std::vector<double> loss_a_;
    std::vector<double> loss_b_;
};

// Minimize alpha_a*L_a + alpha_b*L_b subject to the fairness constraint.
// Simple/EqOpt/StatPar run a dense scan plus golden-section refinement over
// the one-dimensional constraint curve; EqLos delegates to eqlos_solution.
DecisionPair one_shot(FairnessCriterion c, const GroupSpec& ga,
                      const GroupSpec& gb, double alpha_a, double alpha_b);

// Equal-loss solution: both groups at loss max(min L_a, min L_b), independent
// of the weights. The group with the larger minimum sits at its minimizer; the
// other group has up to two matching thresholds (all listed in alternates, the
// primary pair takes the one toward the fixed group's minimizer).
EqLosResult eqlos_solution(const GroupSpec& ga, const GroupSpec& gb);

// Single shared threshold minimizing max(L_a, L_b).
DecisionPair minmax_solution(const GroupSpec& ga, const GroupSpec& gb);

// Signed first-order residual of the weighted objective along the constraint
// curve, evaluated at (theta_a, theta_b) with weight ratio alpha_a/alpha_b.
// Positive means the objective increases in theta_b. Only the interior density
// regimes have a formula; anything else raises RegimeError.
double stationarity_residual(FairnessCriterion c, const GroupSpec& ga,
                             const GroupSpec& gb, double theta_a,
                             double theta_b, double ratio);

// Closed-form decision table for scenarios where all four subgroup
// distributions are uniform (piecewise-linear losses: every optimum sits on a
// kink, so finitely many pairs cover all weight ratios).
UniformDecisionTable uniform_decision_table(FairnessCriterion c,
                                            const GroupSpec& ga,
                                            const GroupSpec& gb);

// Index of the table cell containing the given weight ratio; a ratio exactly
// on a threshold resolves to the higher cell.
std::size_t cell_for_ratio(const UniformDecisionTable& table, double ratio);

}  // namespace fairdyn
