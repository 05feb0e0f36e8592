// The two bundled scenarios, rebuilt from scratch for tests.
#pragma once

#include <fairdyn/popmodel.hpp>

namespace scenarios {

using fairdyn::GroupSpec;
using fairdyn::SubgroupDistribution;

// Piecewise-flat pair: group a favors label 0 (g0 = 0.8), group b label 1.
inline GroupSpec uniform_a() {
    return GroupSpec(0.8, 0.2, SubgroupDistribution::uniform(-5.0, 20.0),
                     SubgroupDistribution::uniform(10.0, 35.0));
}
inline GroupSpec uniform_b() {
    return GroupSpec(0.2, 0.8, SubgroupDistribution::uniform(3.0, 25.0),
                     SubgroupDistribution::uniform(17.0, 45.0));
}

// Bell-shaped pair with means outside the overlaps.
inline GroupSpec truncnormal_a() {
    return GroupSpec(0.4, 0.6,
                     SubgroupDistribution::truncated_normal(4.0, 5.0, -8.0, 19.0),
                     SubgroupDistribution::truncated_normal(20.0, 6.0, 5.0, 35.0));
}
inline GroupSpec truncnormal_b() {
    return GroupSpec(0.6, 0.4,
                     SubgroupDistribution::truncated_normal(8.0, 3.0, -6.0, 25.0),
                     SubgroupDistribution::truncated_normal(27.0, 6.0, 9.0, 43.0));
}

} // namespace scenarios
