#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <fairdyn/dynamics.hpp>
#include <fairdyn/fairsolve.hpp>
#include <fairdyn/popmodel.hpp>

namespace fairdyn {

// Early-stop rule: both thresholds and both (relative) population counts must
// move less than eps for `window` consecutive recorded steps. The count part
// goes beyond threshold stability on purpose: threshold sequences settle long
// before populations do, and downstream limit checks need the populations.
struct ConvergenceSpec {
    double eps = 1e-8;
    int window = 10;
};

enum class StopReason { Converged, HorizonExhausted, Extinction };

struct TrajectoryStep {
    long t = 0;  // 1-based decision epoch
    double theta_a = 0.0;
    double theta_b = 0.0;
    double loss_a = 0.0;
    double loss_b = 0.0;
    double step_total_loss = 0.0;
    double n_a = 0.0;
    double n_b = 0.0;
    double alpha_a = 0.0;
    double running_avg_total_loss = 0.0;
};

struct Trajectory {
    FairnessCriterion criterion = FairnessCriterion::Simple;
    std::vector<TrajectoryStep> steps;
    StopReason stop = StopReason::HorizonExhausted;
};

// Mean step loss over the last 20% of recorded steps (at least one).
double tail_average(const Trajectory& traj);

// Greedy sequential run: each epoch re-solves the weighted one-shot problem at
// the current group proportions, records the epoch, then advances the
// population model. Solver and model failures carry the failing epoch index.
Trajectory simulate(const GroupSpec& ga, const GroupSpec& gb,
                    FairnessCriterion criterion, const DynamicsModel& model,
                    const PopulationState& init, long horizon_T,
                    const ConvergenceSpec& conv = {});

// Same loop with a fixed decision pair instead of per-epoch solves.
Trajectory simulate_constant(const GroupSpec& ga, const GroupSpec& gb,
                             const DecisionPair& pair,
                             const DynamicsModel& model,
                             const PopulationState& init, long horizon_T,
                             const ConvergenceSpec& conv = {});

struct VisitedDecisions {
    // Decision pairs in visit order with the epoch of first selection.
    std::vector<std::pair<DecisionPair, long>> visited;
    DecisionPair converged_pair;
};

// Closed-form walk of the table cells under the population drift, for
// all-uniform scenarios with additive-arrival dynamics. Requires starting
// counts in the arrival ratio, n_a/n_b = beta_a/beta_b.
VisitedDecisions visited_decisions(const UniformDecisionTable& table,
                                   const GroupSpec& ga, const GroupSpec& gb,
                                   const DynamicsModel& model,
                                   const PopulationState& init);

struct MonotonicityReport {
    int case_id = 0;  // 1: a starts lossier, 2: b does, 3: equal losses
    bool ok = true;
    long violation_step = -1;
    std::string detail;
};

// Verifies the predicted monotone course of a greedy trajectory: direction of
// both threshold sequences, monotone proportion ratio, and a persistent loss
// ordering, all classified from the first epoch's loss comparison.
MonotonicityReport check_monotone_course(const Trajectory& traj);

struct SweepCell {
    double beta_a = 0.0;
    double beta_b = 0.0;
    double final_alpha_a = 0.5;
    double final_theta_a = 0.0;
    double final_theta_b = 0.0;
    double final_loss_a = 0.0;
    double final_loss_b = 0.0;
    bool converged = false;
    std::string error;  // empty on success
};

struct SweepResult {
    std::vector<SweepCell> cells;
};

// One simulation per arrival-rate pair, each started from counts equal to the
// arrival rates. Cells run independently (jobs > 1 spreads them over
// threads); per-cell failures are recorded and the sweep continues.
SweepResult sweep_final_proportion(
    const GroupSpec& ga, const GroupSpec& gb, FairnessCriterion criterion,
    const DynamicsModel& model_template,
    const std::vector<std::pair<double, double>>& beta_grid, long horizon_T,
    const ConvergenceSpec& conv = {}, int jobs = 1);

struct TradeoffRow {
    FairnessCriterion criterion = FairnessCriterion::Simple;
    double avg_total_loss = 0.0;
    double final_alpha_a = 0.5;
};

// Long-run average loss and final proportion for the single-threshold greedy
// baseline, the equal-loss policy, and the minmax baseline on one scenario.
std::vector<TradeoffRow> tradeoff_curve(const GroupSpec& ga,
                                        const GroupSpec& gb,
                                        const DynamicsModel& model,
                                        long horizon_T,
                                        const ConvergenceSpec& conv = {});

struct ConstantPairWitness {
    double theta = 0.0;       // shared constant threshold
    double constant_avg = 0.0;
    double greedy_avg = 0.0;
};

// Searches a grid of constant equal-threshold decisions for one whose long-run
// average loss beats the greedy single-threshold sequence on this scenario.
std::optional<ConstantPairWitness> find_better_constant_pair(
    const GroupSpec& ga, const GroupSpec& gb, const DynamicsModel& model,
    long horizon_T, int grid_points = 41, const ConvergenceSpec& conv = {});

}  // namespace fairdyn
