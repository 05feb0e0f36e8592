#pragma once

#include <cstdint>
#include <vector>

#include <fairdyn/dynamics.hpp>
#include <fairdyn/fairsolve.hpp>
#include <fairdyn/horizon.hpp>
#include <fairdyn/popmodel.hpp>

namespace fairdyn {

// Labeled scores drawn from one group. `features` and `labels` run in
// parallel; labels are 0 or 1. The support fences bound every feature and
// give the threshold search a candidate below and above all of them.
struct GroupSample {
    std::vector<double> features;
    std::vector<int> labels;
    double support_lo = 0.0;
    double support_hi = 0.0;

    std::size_t size() const { return features.size(); }
    bool empty() const { return features.empty(); }
};

struct SampleSet {
    GroupSample a;
    GroupSample b;
    std::uint64_t seed = 0;
};

// Draws round(N_k) labeled scores per group: each individual gets label 1
// with that group's label-1 mass and a feature pulled through the matching
// subgroup quantile. Group a is filled before group b from one generator
// seeded with `seed`, so equal seeds reproduce the set exactly. A group
// whose rounded count is zero comes back empty.
SampleSet draw_samples(const GroupSpec& ga, const GroupSpec& gb,
                       const PopulationState& state, std::uint64_t seed);

// Plug-in estimates at threshold `theta` (accept when feature >= theta).
// Loss is the misclassified fraction; the rate helpers condition on the
// relevant label and return 0 when that label is absent.
double empirical_loss(const GroupSample& g, double theta);
double empirical_false_positive_rate(const GroupSample& g, double theta);
double empirical_acceptance_rate(const GroupSample& g, double theta);

// Sample-only analogue of the population one-shot problem. Candidate
// thresholds per group are the midpoints between consecutive distinct
// features plus the support fences; group weights come from the sample
// counts. The fairness constraint is enforced at the smallest residual the
// candidates can reach, ties going to the smaller residual magnitude and
// then the smaller theta_b. Supports the four constrained criteria; throws
// EmptyGroupError when either group has no samples.
DecisionPair empirical_one_shot(FairnessCriterion criterion,
                                const SampleSet& samples);

// Paired replay of one arrival-coupled scenario: `bayes` picks decisions
// from the population model, `learned` re-estimates them each round from
// fresh samples of the current (rounded) populations. Both runs start at
// N = beta and advance on the population losses of whatever pair they
// chose, so the runs differ only through decision quality. The learned run
// stops with an extinction marker once a rounded group count hits zero.
struct QualityExperiment {
    Trajectory bayes;
    Trajectory learned;
};

QualityExperiment quality_experiment(const GroupSpec& ga, const GroupSpec& gb,
                                     FairnessCriterion criterion,
                                     const DynamicsModel& model,
                                     long horizon_T, std::uint64_t seed);

}  // namespace fairdyn
