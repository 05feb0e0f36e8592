#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fairdyn/fairsolve.hpp>

#include <cmath>
#include <random>

#include "scenarios.hpp"

using namespace fairdyn;

namespace {

GroupSpec tn_symmetric_a() {
    return GroupSpec(0.5, 0.5,
                     SubgroupDistribution::truncated_normal(-5.0, 3.0, -10.0, 4.0),
                     SubgroupDistribution::truncated_normal(5.0, 3.0, -4.0, 10.0));
}

// Full-support dense scan of the weighted objective along the constraint
// curve, independent of the solver's box logic.
double oracle_best(FairnessCriterion c, const GroupSpec& ga, const GroupSpec& gb,
                   double alpha_a, double alpha_b, int n) {
    const double lo = std::min(ga.support_lo(), gb.support_lo());
    const double hi = std::max(ga.support_hi(), gb.support_hi());
    double best = 1e300;
    for (int i = 0; i <= n; ++i) {
        const double tb = lo + (hi - lo) * i / n;
        const double ta = constraint_map(c, ga, gb, tb);
        best = std::min(best, alpha_a * expected_loss(ga, ta) +
                                  alpha_b * expected_loss(gb, tb));
    }
    return best;
}

constexpr FairnessCriterion kMapCriteria[] = {
    FairnessCriterion::Simple, FairnessCriterion::EqOpt,
    FairnessCriterion::StatPar};

}  // namespace

TEST_CASE("constraint map closed forms") {
    auto a = scenarios::uniform_a();
    auto b = scenarios::uniform_b();
    CHECK(constraint_map(FairnessCriterion::Simple, a, b, 17.0) == 17.0);
    CHECK(constraint_map(FairnessCriterion::EqOpt, a, b, 17.0) ==
          doctest::Approx(120.0 / 11.0).epsilon(1e-12));
    CHECK(constraint_map(FairnessCriterion::StatPar, a, b, 17.0) ==
          doctest::Approx(-45.0 / 44.0).epsilon(1e-9));
    CHECK_THROWS_AS(constraint_map(FairnessCriterion::EqLos, a, b, 17.0),
                    DomainError);
}

TEST_CASE("constraint map is strictly increasing and invertible") {
    auto a = scenarios::truncnormal_a();
    auto b = scenarios::truncnormal_b();
    for (auto c : {FairnessCriterion::EqOpt, FairnessCriterion::StatPar}) {
        double prev = -1e300;
        for (int i = 0; i <= 100; ++i) {
            const double tb = 9.5 + (24.5 - 9.5) * i / 100.0;
            const double ta = constraint_map(c, a, b, tb);
            CHECK(ta > prev);
            prev = ta;
            // Round trip through the role-swapped map.
            CHECK(std::abs(constraint_map(c, b, a, ta) - tb) <= 1e-7);
        }
    }
}

TEST_CASE("weighted solve picks the tabulated uniform pairs") {
    auto a = scenarios::uniform_a();
    auto b = scenarios::uniform_b();
    auto check_pair = [&](FairnessCriterion c, double alpha_a, double ta,
                          double tb) {
        auto p = one_shot(c, a, b, alpha_a, 1.0 - alpha_a);
        CHECK(p.theta_a == doctest::Approx(ta).epsilon(1e-6));
        CHECK(p.theta_b == doctest::Approx(tb).epsilon(1e-6));
        CHECK(p.residual <= 1e-8);
    };
    check_pair(FairnessCriterion::Simple, 0.3, 17.0, 17.0);
    check_pair(FairnessCriterion::Simple, 0.7, 20.0, 20.0);
    check_pair(FairnessCriterion::EqOpt, 0.7, 20.0, 25.0);
    check_pair(FairnessCriterion::EqOpt, 0.3, 120.0 / 11.0, 17.0);
    check_pair(FairnessCriterion::StatPar, 0.3, -45.0 / 44.0, 17.0);
    check_pair(FairnessCriterion::StatPar, 0.7, 20.0, 40.8);
    CHECK_THROWS_AS(one_shot(FairnessCriterion::Simple, a, b, 0.6, 0.6),
                    DomainError);
    CHECK_THROWS_AS(one_shot(FairnessCriterion::MinMax, a, b, 0.5, 0.5),
                    DomainError);
}

TEST_CASE("identical groups solve to the shared minimizer") {
    auto u = scenarios::uniform_a();
    auto s = tn_symmetric_a();
    for (auto c : kMapCriteria) {
        auto pu = one_shot(c, u, u, 0.37, 0.63);
        CHECK(std::abs(pu.theta_a - 20.0) <= 1e-6);
        CHECK(std::abs(pu.theta_b - 20.0) <= 1e-6);
        auto ps = one_shot(c, s, s, 0.5, 0.5);
        CHECK(std::abs(ps.theta_a - 0.0) <= 1e-6);
        CHECK(std::abs(ps.theta_b - 0.0) <= 1e-6);
    }
}

TEST_CASE("solver output stays inside the search box") {
    auto a = scenarios::uniform_a();
    auto b = scenarios::uniform_b();
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> logr(std::log(0.05), std::log(20.0));
    for (auto c : kMapCriteria) {
        const double da = unconstrained_minimizer(a).delta;
        const double db = unconstrained_minimizer(b).delta;
        const double a_lo = constraint_map(c, a, b, db);
        const double b_hi = constraint_map(c, b, a, da);
        OneShotCache cache(c, a, b);
        CHECK_FALSE(cache.swapped());
        for (int i = 0; i < 100; ++i) {
            const double r = std::exp(logr(rng));
            auto p = cache.solve(r / (1.0 + r), 1.0 / (1.0 + r));
            CHECK(p.theta_a >= a_lo - 1e-6);
            CHECK(p.theta_a <= da + 1e-6);
            CHECK(p.theta_b >= db - 1e-6);
            CHECK(p.theta_b <= b_hi + 1e-6);
        }
    }
}

TEST_CASE("solver matches a dense full-support oracle") {
    auto ua = scenarios::uniform_a();
    auto ub = scenarios::uniform_b();
    auto ta = scenarios::truncnormal_a();
    auto tb = scenarios::truncnormal_b();
    for (auto c : kMapCriteria) {
        for (double alpha : {0.25, 0.5, 0.8}) {
            auto pu = one_shot(c, ua, ub, alpha, 1.0 - alpha);
            const double vu = alpha * expected_loss(ua, pu.theta_a) +
                              (1.0 - alpha) * expected_loss(ub, pu.theta_b);
            CHECK(vu <= oracle_best(c, ua, ub, alpha, 1.0 - alpha, 20000) + 1e-6);
            auto pt = one_shot(c, ta, tb, alpha, 1.0 - alpha);
            const double vt = alpha * expected_loss(ta, pt.theta_a) +
                              (1.0 - alpha) * expected_loss(tb, pt.theta_b);
            CHECK(vt <= oracle_best(c, ta, tb, alpha, 1.0 - alpha, 20000) + 1e-6);
        }
    }
}

TEST_CASE("bell-shaped scenario needs the swapped orientation") {
    auto a = scenarios::truncnormal_a();
    auto b = scenarios::truncnormal_b();
    for (auto c : kMapCriteria) {
        OneShotCache cache(c, a, b);
        CHECK(cache.swapped());
        auto p = cache.solve(0.5, 0.5);
        CHECK(p.residual <= 1e-8);
        // Swapping the argument order must mirror the solution exactly.
        auto q = one_shot(c, b, a, 0.5, 0.5);
        CHECK(q.theta_a == doctest::Approx(p.theta_b).epsilon(1e-9));
        CHECK(q.theta_b == doctest::Approx(p.theta_a).epsilon(1e-9));
    }
}

TEST_CASE("losses are monotone along the constraint curve") {
    auto a = scenarios::uniform_a();
    auto b = scenarios::uniform_b();
    for (auto c : kMapCriteria) {
        const double db = unconstrained_minimizer(b).delta;
        const double b_hi =
            constraint_map(c, b, a, unconstrained_minimizer(a).delta);
        double prev_la = 1e300, prev_lb = -1e300;
        for (int i = 0; i <= 200; ++i) {
            const double tb = db + (b_hi - db) * i / 200.0;
            const double la = expected_loss(a, constraint_map(c, a, b, tb));
            const double lb = expected_loss(b, tb);
            CHECK(la <= prev_la + 1e-12);
            CHECK(lb >= prev_lb - 1e-12);
            prev_la = la;
            prev_lb = lb;
        }
    }
}

TEST_CASE("equal loss solution on flat densities") {
    auto a = scenarios::uniform_a();
    auto b = scenarios::uniform_b();
    auto r = eqlos_solution(a, b);
    CHECK(r.target_loss == doctest::Approx(0.08).epsilon(1e-12));
    CHECK(r.pair.theta_a == doctest::Approx(20.0).epsilon(1e-9));
    CHECK(r.pair.theta_b == doctest::Approx(521.2 / 30.0).epsilon(1e-9));
    CHECK(r.pair.residual <= 1e-8);
    REQUIRE(r.alternates.size() == 2);
    CHECK(r.alternates[0].theta_b == doctest::Approx(16.2).epsilon(1e-9));
    CHECK(r.alternates[1].theta_b == doctest::Approx(521.2 / 30.0).epsilon(1e-9));
    for (const auto& alt : r.alternates) {
        CHECK(expected_loss(b, alt.theta_b) ==
              doctest::Approx(r.target_loss).epsilon(1e-9));
    }
}

TEST_CASE("equal loss solution on bell-shaped densities") {
    auto a = scenarios::truncnormal_a();
    auto b = scenarios::truncnormal_b();
    auto r = eqlos_solution(a, b);
    CHECK(r.target_loss == doctest::Approx(0.06880642910665).epsilon(1e-9));
    // Group a has the larger minimum and sits at it; group b matches on the
    // branch facing group a's minimizer (the lower root here).
    CHECK(r.pair.theta_a == doctest::Approx(10.84680989774).epsilon(1e-6));
    CHECK(r.pair.theta_b == doctest::Approx(11.64688938560).epsilon(1e-6));
    REQUIRE(r.alternates.size() == 2);
    CHECK(r.alternates[1].theta_b == doctest::Approx(21.33326345738).epsilon(1e-6));
    CHECK(r.pair.residual <= 1e-8);

    // Role swap keeps the target and mirrors the thresholds.
    auto s = eqlos_solution(b, a);
    CHECK(s.target_loss == doctest::Approx(r.target_loss).epsilon(1e-12));
    CHECK(s.pair.theta_b == doctest::Approx(r.pair.theta_a).epsilon(1e-9));
    CHECK(s.pair.theta_a == doctest::Approx(r.pair.theta_b).epsilon(1e-9));
}

TEST_CASE("equal loss ignores the weights") {
    auto a = scenarios::uniform_a();
    auto b = scenarios::uniform_b();
    auto p = one_shot(FairnessCriterion::EqLos, a, b, 0.2, 0.8);
    auto q = one_shot(FairnessCriterion::EqLos, a, b, 0.9, 0.1);
    CHECK(p.theta_a == q.theta_a);
    CHECK(p.theta_b == q.theta_b);
}

TEST_CASE("equal loss with identical groups degenerates to the minimizer") {
    auto s = tn_symmetric_a();
    auto r = eqlos_solution(s, s);
    CHECK(std::abs(r.pair.theta_a - 0.0) <= 1e-6);
    CHECK(std::abs(r.pair.theta_b - 0.0) <= 1e-6);
    CHECK(r.alternates.size() == 1);
}

TEST_CASE("minmax baseline") {
    auto a = scenarios::uniform_a();
    auto b = scenarios::uniform_b();
    auto p = minmax_solution(a, b);
    CHECK(p.theta_a == p.theta_b);
    // Exact crossing of the two piecewise-linear losses.
    CHECK(p.theta_a == doctest::Approx(12604.0 / 669.6).epsilon(1e-6));
    CHECK(std::abs(expected_loss(a, p.theta_a) - expected_loss(b, p.theta_a)) <=
          1e-6);

    auto t = minmax_solution(scenarios::truncnormal_a(),
                             scenarios::truncnormal_b());
    const double vt = std::max(expected_loss(scenarios::truncnormal_a(), t.theta_a),
                               expected_loss(scenarios::truncnormal_b(), t.theta_a));
    double oracle = 1e300;
    for (int i = 0; i <= 200000; ++i) {
        const double x = -8.0 + (43.0 + 8.0) * i / 200000.0;
        oracle = std::min(oracle,
                          std::max(expected_loss(scenarios::truncnormal_a(), x),
                                   expected_loss(scenarios::truncnormal_b(), x)));
    }
    CHECK(vt <= oracle + 1e-9);

    auto same = minmax_solution(a, a);
    CHECK(same.theta_a == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("minmax with one dominating loss curve") {
    // Group a's loss is at least group b's everywhere, so the baseline just
    // minimizes the dominating curve.
    GroupSpec a(0.5, 0.5, SubgroupDistribution::uniform(0.0, 10.0),
                SubgroupDistribution::uniform(4.0, 12.0));
    GroupSpec b(0.5, 0.5, SubgroupDistribution::uniform(-40.0, 11.0),
                SubgroupDistribution::uniform(3.0, 50.0));
    for (int i = 0; i <= 500; ++i) {
        const double x = -40.0 + 90.0 * i / 500.0;
        CHECK(expected_loss(b, x) <= expected_loss(a, x) + 1e-12);
    }
    auto p = minmax_solution(a, b);
    CHECK(p.theta_a == doctest::Approx(unconstrained_minimizer(a).delta)
                           .epsilon(1e-6));
}

TEST_CASE("first order residual vanishes at interior optima") {
    auto s = tn_symmetric_a();
    for (auto c : kMapCriteria) {
        CHECK(std::abs(stationarity_residual(c, s, s, 0.0, 0.0, 1.0)) <= 1e-9);
    }

    auto a = scenarios::truncnormal_a();
    auto b = scenarios::truncnormal_b();
    for (auto c : kMapCriteria) {
        auto p = one_shot(c, a, b, 0.5, 0.5);
        const double res =
            stationarity_residual(c, a, b, p.theta_a, p.theta_b, 1.0);
        CHECK(std::abs(res) <= 1e-6);
        // Moving along the constraint changes the sign with the derivative.
        const double up = stationarity_residual(
            c, a, b, constraint_map(c, a, b, p.theta_b + 0.1), p.theta_b + 0.1,
            1.0);
        const double dn = stationarity_residual(
            c, a, b, constraint_map(c, a, b, p.theta_b - 0.1), p.theta_b - 0.1,
            1.0);
        CHECK(up > 0.0);
        CHECK(dn < 0.0);
    }
}

TEST_CASE("first order residual rejects non-interior regimes") {
    auto a = scenarios::truncnormal_a();
    auto b = scenarios::truncnormal_b();
    // theta_a above group a's overlap has no enumerated condition.
    CHECK_THROWS_AS(
        stationarity_residual(FairnessCriterion::EqOpt, a, b, 25.0, 20.0, 1.0),
        RegimeError);
    // theta_b outside group b's open overlap.
    CHECK_THROWS_AS(
        stationarity_residual(FairnessCriterion::StatPar, a, b, 12.0, 30.0, 1.0),
        RegimeError);
    // Equal-threshold residual needs equal thresholds, off any kink.
    CHECK_THROWS_AS(
        stationarity_residual(FairnessCriterion::Simple, a, b, 12.0, 13.0, 1.0),
        RegimeError);
    auto ua = scenarios::uniform_a();
    auto ub = scenarios::uniform_b();
    CHECK_THROWS_AS(
        stationarity_residual(FairnessCriterion::Simple, ua, ub, 20.0, 20.0, 1.0),
        RegimeError);
    CHECK_THROWS_AS(
        stationarity_residual(FairnessCriterion::EqOpt, a, b, 12.0, 13.0, 0.0),
        DomainError);
    CHECK_THROWS_AS(
        stationarity_residual(FairnessCriterion::EqLos, a, b, 12.0, 13.0, 1.0),
        DomainError);
}

TEST_CASE("uniform decision tables reproduce the closed forms") {
    auto a = scenarios::uniform_a();
    auto b = scenarios::uniform_b();

    auto simple = uniform_decision_table(FairnessCriterion::Simple, a, b);
    REQUIRE(simple.pairs.size() == 2);
    CHECK(simple.pairs[0].theta_a == doctest::Approx(17.0).epsilon(1e-9));
    CHECK(simple.pairs[0].theta_b == doctest::Approx(17.0).epsilon(1e-9));
    CHECK(simple.pairs[1].theta_a == doctest::Approx(20.0).epsilon(1e-9));
    REQUIRE(simple.thresholds.size() == 1);
    CHECK(simple.thresholds[0] ==
          doctest::Approx(0.8116883116883117).epsilon(1e-9));
    REQUIRE(simple.constants.size() == 1);
    CHECK(simple.constants[0].first == "C");
    CHECK(simple.constants[0].second == simple.thresholds[0]);

    auto eqopt = uniform_decision_table(FairnessCriterion::EqOpt, a, b);
    REQUIRE(eqopt.pairs.size() == 2);
    CHECK(eqopt.pairs[0].theta_a == doctest::Approx(120.0 / 11.0).epsilon(1e-9));
    CHECK(eqopt.pairs[0].theta_b == doctest::Approx(17.0).epsilon(1e-9));
    CHECK(eqopt.pairs[1].theta_a == doctest::Approx(20.0).epsilon(1e-9));
    CHECK(eqopt.pairs[1].theta_b == doctest::Approx(25.0).epsilon(1e-9));
    REQUIRE(eqopt.thresholds.size() == 1);
    CHECK(eqopt.thresholds[0] == doctest::Approx(5.0 / 7.0).epsilon(1e-9));
    CHECK(eqopt.constants[0].first == "A");

    auto sp = uniform_decision_table(FairnessCriterion::StatPar, a, b);
    REQUIRE(sp.pairs.size() == 4);
    CHECK(sp.pairs[0].theta_a == doctest::Approx(-45.0 / 44.0).epsilon(1e-9));
    CHECK(sp.pairs[0].theta_b == doctest::Approx(17.0).epsilon(1e-9));
    CHECK(sp.pairs[1].theta_a == doctest::Approx(8.392857142857142).epsilon(1e-9));
    CHECK(sp.pairs[1].theta_b == doctest::Approx(25.0).epsilon(1e-9));
    CHECK(sp.pairs[2].theta_a == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(sp.pairs[2].theta_b == doctest::Approx(26.8).epsilon(1e-9));
    CHECK(sp.pairs[3].theta_a == doctest::Approx(20.0).epsilon(1e-9));
    CHECK(sp.pairs[3].theta_b == doctest::Approx(40.8).epsilon(1e-9));
    REQUIRE(sp.thresholds.size() == 3);
    CHECK(sp.thresholds[0] == doctest::Approx(15.0 / 29.0).epsilon(1e-9));
    CHECK(sp.thresholds[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sp.thresholds[2] == doctest::Approx(5.0 / 3.0).epsilon(1e-9));
    REQUIRE(sp.constants.size() == 2);
    CHECK(sp.constants[0].first == "A");
    CHECK(sp.constants[1].first == "B");
    for (const auto& p : sp.pairs) CHECK(p.residual <= 1e-8);
}

TEST_CASE("swapped labels flip the table to reciprocal ratios") {
    auto a = scenarios::uniform_a();
    auto b = scenarios::uniform_b();
    auto sp = uniform_decision_table(FairnessCriterion::StatPar, b, a);
    REQUIRE(sp.pairs.size() == 4);
    CHECK(sp.pairs[0].theta_a == doctest::Approx(40.8).epsilon(1e-9));
    CHECK(sp.pairs[0].theta_b == doctest::Approx(20.0).epsilon(1e-9));
    CHECK(sp.pairs[3].theta_a == doctest::Approx(17.0).epsilon(1e-9));
    CHECK(sp.pairs[3].theta_b == doctest::Approx(-45.0 / 44.0).epsilon(1e-9));
    REQUIRE(sp.thresholds.size() == 3);
    CHECK(sp.thresholds[0] == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(sp.thresholds[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sp.thresholds[2] == doctest::Approx(29.0 / 15.0).epsilon(1e-9));
}

TEST_CASE("cell lookup resolves threshold ties upward") {
    auto sp = uniform_decision_table(FairnessCriterion::StatPar,
                                     scenarios::uniform_a(),
                                     scenarios::uniform_b());
    CHECK(cell_for_ratio(sp, 0.3) == 0);
    CHECK(cell_for_ratio(sp, sp.thresholds[0]) == 1);
    CHECK(cell_for_ratio(sp, 1.0) == 2);
    CHECK(cell_for_ratio(sp, 1.2) == 2);
    CHECK(cell_for_ratio(sp, 100.0) == 3);
    CHECK_THROWS_AS(cell_for_ratio(sp, 0.0), DomainError);
    CHECK_THROWS_AS(cell_for_ratio(UniformDecisionTable{}, 1.0), StructureError);
}

TEST_CASE("table agrees with the scanning solver at random ratios") {
    auto a = scenarios::uniform_a();
    auto b = scenarios::uniform_b();
    std::mt19937_64 rng(7151);
    std::uniform_real_distribution<double> logr(std::log(0.05), std::log(20.0));
    for (auto c : kMapCriteria) {
        auto table = uniform_decision_table(c, a, b);
        OneShotCache cache(c, a, b);
        int tested = 0;
        for (int i = 0; i < 260 && tested < 200; ++i) {
            const double r = std::exp(logr(rng));
            bool near_cut = false;
            for (double t : table.thresholds)
                near_cut = near_cut || std::abs(r - t) < 1e-6;
            if (near_cut) continue;  // flat tie, pair not unique
            ++tested;
            const auto& want = table.pairs[cell_for_ratio(table, r)];
            auto got = cache.solve(r / (1.0 + r), 1.0 / (1.0 + r));
            CHECK(got.theta_a == doctest::Approx(want.theta_a).epsilon(1e-6));
            CHECK(got.theta_b == doctest::Approx(want.theta_b).epsilon(1e-6));
        }
        CHECK(tested == 200);
    }
}

TEST_CASE("table rejects unsupported scenarios") {
    auto a = scenarios::uniform_a();
    CHECK_THROWS_AS(uniform_decision_table(FairnessCriterion::Simple, a,
                                           scenarios::truncnormal_b()),
                    StructureError);
    // Equal subgroup density constants make the overlap loss flat.
    GroupSpec flat(0.5, 0.5, SubgroupDistribution::uniform(0.0, 10.0),
                   SubgroupDistribution::uniform(5.0, 15.0));
    CHECK_THROWS_AS(uniform_decision_table(FairnessCriterion::Simple, a, flat),
                    CaseError);
    CHECK_THROWS_AS(uniform_decision_table(FairnessCriterion::EqLos, a, a),
                    DomainError);
}

TEST_CASE("criterion names round trip") {
    for (auto c : {FairnessCriterion::Simple, FairnessCriterion::EqOpt,
                   FairnessCriterion::StatPar, FairnessCriterion::EqLos,
                   FairnessCriterion::MinMax}) {
        CHECK(criterion_from_string(to_string(c)) == c);
    }
    CHECK_THROWS_AS(criterion_from_string("nope"), DomainError);
}
