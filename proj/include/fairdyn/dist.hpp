#pragma once

#include <fairdyn/errors.hpp>

namespace fairdyn {

enum class DistKind { Uniform, TruncatedNormal };

// Feature distribution of one subgroup, always with a bounded support.
// The truncated normal renormalizes a N(mu, sigma^2) density to the mass
// its support carries, so pdf integrates to one over [lo, hi].
class SubgroupDistribution {
public:
    static SubgroupDistribution uniform(double lo, double hi);
    static SubgroupDistribution truncated_normal(double mu, double sigma,
                                                 double lo, double hi);

    double pdf(double x) const;
    // Exactly 0 at or below lo, exactly 1 at or above hi.
    double cdf(double x) const;
    // Inverse cdf by bisection; p must lie in [0, 1].
    double quantile(double p) const;

    double support_lo() const { return lo_; }
    double support_hi() const { return hi_; }
    DistKind kind() const { return kind_; }
    double mu() const { return mu_; }
    double sigma() const { return sigma_; }

private:
    SubgroupDistribution() = default;

    DistKind kind_ = DistKind::Uniform;
    double lo_ = 0.0, hi_ = 1.0;
    double mu_ = 0.0, sigma_ = 1.0;
    // Cached for the truncated normal: standard-normal cdf at the support ends
    // and the support mass between them.
    double phi_lo_ = 0.0, mass_ = 1.0;
};

struct AssumptionReport {
    bool holds = false;          // f1 strictly increasing and f0 strictly decreasing on the overlap
    bool f1_increasing = false;
    bool f0_decreasing = false;
    double overlap_lo = 0.0, overlap_hi = 0.0;
};

// Checks the regularity condition used by the interior-solution theory:
// on the overlap [lo(f1), hi(f0)] the label-1 density must strictly rise
// and the label-0 density strictly fall. Sampled on a 1000-point grid.
// Requires lo(f0) < lo(f1) < hi(f0) < hi(f1).
AssumptionReport check_assumption1(const SubgroupDistribution& f0,
                                   const SubgroupDistribution& f1);

} // namespace fairdyn
