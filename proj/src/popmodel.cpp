#include <fairdyn/popmodel.hpp>

#include <cmath>
#include <string>
#include <utility>

namespace fairdyn {

GroupSpec::GroupSpec(double g0_, double g1_, SubgroupDistribution f0_,
                     SubgroupDistribution f1_)
    : g0(g0_), g1(g1_), f0(std::move(f0_)), f1(std::move(f1_)) {
    if (!(g0 >= 0.0 && g1 >= 0.0)) {
        throw StructureError("label shares must be nonnegative");
    }
    if (std::abs(g0 + g1 - 1.0) > 1e-12) {
        throw StructureError("label shares must sum to 1, got " +
                             std::to_string(g0 + g1));
    }
    if (!(f0.support_lo() < f1.support_lo() && f1.support_lo() < f0.support_hi() &&
          f0.support_hi() < f1.support_hi())) {
        throw StructureError(
            "group supports must interleave: lo(f0) < lo(f1) < hi(f0) < hi(f1)");
    }
}

PopulationState::PopulationState(double na, double nb) : n_a(na), n_b(nb) {
    if (!(n_a >= 0.0 && n_b >= 0.0)) {
        throw StructureError("population counts must be nonnegative");
    }
}

PopulationState::PopulationState(double na, double nb,
                                 const std::array<double, 4>& sub)
    : PopulationState(na, nb) {
    for (double v : sub) {
        if (!(v >= 0.0)) throw StructureError("subgroup counts must be nonnegative");
    }
    const double tol_a = 1e-9 * std::max(1.0, n_a);
    const double tol_b = 1e-9 * std::max(1.0, n_b);
    if (std::abs(sub[0] + sub[1] - n_a) > tol_a ||
        std::abs(sub[2] + sub[3] - n_b) > tol_b) {
        throw StructureError("subgroup counts must sum to the group totals");
    }
    subgroups = sub;
}

double PopulationState::proportion_a() const {
    const double t = total();
    return t > 0.0 ? n_a / t : 0.5;
}

double expected_loss(const GroupSpec& g, double theta) {
    return g.g1 * g.f1.cdf(theta) + g.g0 * (1.0 - g.f0.cdf(theta));
}

double total_loss(const GroupSpec& ga, const GroupSpec& gb, double alpha_a,
                  double alpha_b, double theta_a, double theta_b) {
    if (!(alpha_a >= 0.0 && alpha_b >= 0.0) ||
        std::abs(alpha_a + alpha_b - 1.0) > 1e-9) {
        throw DomainError("group weights must be a probability pair, got " +
                          std::to_string(alpha_a) + " + " + std::to_string(alpha_b));
    }
    return alpha_a * expected_loss(ga, theta_a) + alpha_b * expected_loss(gb, theta_b);
}

double acceptance_rate(const GroupSpec& g, double theta) {
    return g.g0 * (1.0 - g.f0.cdf(theta)) + g.g1 * (1.0 - g.f1.cdf(theta));
}

double false_positive_rate(const GroupSpec& g, double theta) {
    return 1.0 - g.f0.cdf(theta);
}

double subgroup_loss(const GroupSpec& g, int label, double theta) {
    if (label == 0) return 1.0 - g.f0.cdf(theta);
    if (label == 1) return g.f1.cdf(theta);
    throw DomainError("label must be 0 or 1, got " + std::to_string(label));
}

Minimizer unconstrained_minimizer(const GroupSpec& g) {
    const double lo = g.overlap_lo();
    const double hi = g.overlap_hi();
    const auto slope = [&](double x) {
        return g.g1 * g.f1.pdf(x) - g.g0 * g.f0.pdf(x);
    };
    if (slope(lo) >= 0.0) return {lo, MinimizerBranch::LowerEnd};
    if (slope(hi) <= 0.0) return {hi, MinimizerBranch::UpperEnd};
    // slope(lo) < 0 < slope(hi): bracketed interior root.
    double a = lo, b = hi;
    while (b - a > 1e-10) {
        const double mid = 0.5 * (a + b);
        (slope(mid) < 0.0 ? a : b) = mid;
    }
    return {0.5 * (a + b), MinimizerBranch::Interior};
}

} // namespace fairdyn
