#pragma once

#include <fairdyn/dist.hpp>

#include <array>
#include <optional>

namespace fairdyn {

// One demographic group: label prior (g0, g1) and per-label feature
// distributions. Supports must interleave: lo(f0) < lo(f1) < hi(f0) < hi(f1),
// so the overlap [lo(f1), hi(f0)] is where classification is ambiguous.
struct GroupSpec {
    double g0, g1;
    SubgroupDistribution f0, f1;

    GroupSpec(double g0_, double g1_, SubgroupDistribution f0_,
              SubgroupDistribution f1_);

    double overlap_lo() const { return f1.support_lo(); }
    double overlap_hi() const { return f0.support_hi(); }
    double support_lo() const { return f0.support_lo(); }
    double support_hi() const { return f1.support_hi(); }
};

// Population sizes at one time step. Subgroup counts are carried only by the
// dynamics kind that evolves labels separately; when present they must sum to
// the group totals.
struct PopulationState {
    double n_a = 0.0, n_b = 0.0;
    // n_a0, n_a1, n_b0, n_b1
    std::optional<std::array<double, 4>> subgroups;

    PopulationState() = default;
    PopulationState(double na, double nb);
    PopulationState(double na, double nb, const std::array<double, 4>& sub);

    double total() const { return n_a + n_b; }
    // Share of group a; 0.5 when the population is empty.
    double proportion_a() const;
};

// Expected 0-1 loss of the threshold rule 1{x >= theta} on one group:
// g1 * P(X1 < theta) + g0 * P(X0 >= theta).
double expected_loss(const GroupSpec& g, double theta);

// alpha_a * L_a(theta_a) + alpha_b * L_b(theta_b); weights must be a
// probability pair.
double total_loss(const GroupSpec& ga, const GroupSpec& gb, double alpha_a,
                  double alpha_b, double theta_a, double theta_b);

// P(X >= theta) under the group's feature mixture.
double acceptance_rate(const GroupSpec& g, double theta);

// P(X0 >= theta): mass of label-0 members above the threshold.
double false_positive_rate(const GroupSpec& g, double theta);

// Loss felt by one label subgroup: label 1 loses below theta, label 0 above.
double subgroup_loss(const GroupSpec& g, int label, double theta);

enum class MinimizerBranch { LowerEnd, Interior, UpperEnd };

struct Minimizer {
    double delta = 0.0;
    MinimizerBranch branch = MinimizerBranch::Interior;
};

// Argmin of expected_loss over the overlap. The derivative inside the overlap
// is g1*f1 - g0*f0; a nonnegative value at the left end pins the minimum
// there, a nonpositive value at the right end pins it there, otherwise the
// sign change is bracketed by bisection (1e-10 in theta). Flat-density
// scenarios (uniforms) always take an endpoint branch.
Minimizer unconstrained_minimizer(const GroupSpec& g);

} // namespace fairdyn
