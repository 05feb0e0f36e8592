#include <fairdyn/empirics.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <fairdyn/errors.hpp>

namespace fairdyn {

namespace {

void check_sample(const GroupSample& g, const char* name) {
    if (g.features.size() != g.labels.size())
        throw StructureError(std::string("group ") + name +
                             ": features and labels must run in parallel");
    for (int l : g.labels)
        if (l != 0 && l != 1)
            throw DomainError(std::string("group ") + name +
                              ": sample labels must be 0 or 1");
}

void fill_group(GroupSample& out, const GroupSpec& g, double n,
                std::mt19937_64& rng) {
    out.support_lo = g.support_lo();
    out.support_hi = g.support_hi();
    const long long count = std::llround(std::max(0.0, n));
    if (count <= 0) return;
    out.features.reserve(static_cast<std::size_t>(count));
    out.labels.reserve(static_cast<std::size_t>(count));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (long long i = 0; i < count; ++i) {
        const int label = unif(rng) < g.g1 ? 1 : 0;
        const double u = unif(rng);
        out.features.push_back((label ? g.f1 : g.f0).quantile(u));
        out.labels.push_back(label);
    }
}

// Candidate thresholds (midpoints between consecutive distinct features plus
// the support fences) with the empirical curves evaluated at each one. Rates
// are exact count ratios over a shared denominator, so equal counts compare
// equal and the fpr/acc columns are genuinely nonincreasing step values.
struct GroupTable {
    std::vector<double> cand;
    std::vector<double> loss;
    std::vector<double> fpr;
    std::vector<double> acc;
};

GroupTable build_table(const GroupSample& g) {
    const std::size_t n = g.size();
    std::vector<std::pair<double, int>> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = {g.features[i], g.labels[i]};
    std::sort(pts.begin(), pts.end());

    GroupTable t;
    t.cand.push_back(g.support_lo);
    for (std::size_t i = 1; i < n; ++i)
        if (pts[i].first > pts[i - 1].first)
            t.cand.push_back(0.5 * (pts[i - 1].first + pts[i].first));
    t.cand.push_back(g.support_hi);
    std::sort(t.cand.begin(), t.cand.end());
    t.cand.erase(std::unique(t.cand.begin(), t.cand.end()), t.cand.end());

    std::size_t n1 = 0;
    for (const auto& p : pts) n1 += static_cast<std::size_t>(p.second);
    const std::size_t n0 = n - n1;

    t.loss.reserve(t.cand.size());
    t.fpr.reserve(t.cand.size());
    t.acc.reserve(t.cand.size());
    std::size_t below = 0, below1 = 0;
    for (double c : t.cand) {
        while (below < n && pts[below].first < c) {
            below1 += static_cast<std::size_t>(pts[below].second);
            ++below;
        }
        const std::size_t fn = below1;
        const std::size_t fp = n0 - (below - below1);
        t.loss.push_back(static_cast<double>(fn + fp) / static_cast<double>(n));
        t.fpr.push_back(n0 ? static_cast<double>(fp) / static_cast<double>(n0)
                           : 0.0);
        t.acc.push_back(static_cast<double>(n - below) /
                        static_cast<double>(n));
    }
    return t;
}

// Lexicographic winner: weighted loss, then constraint gap, then smaller
// theta_b, then smaller theta_a.
struct Pick {
    bool has = false;
    double obj = 0.0, gap = 0.0, ta = 0.0, tb = 0.0;

    void consider(double obj_, double gap_, double ta_, double tb_) {
        if (has) {
            if (obj_ > obj) return;
            if (obj_ == obj) {
                if (gap_ > gap) return;
                if (gap_ == gap) {
                    if (tb_ > tb) return;
                    if (tb_ == tb && ta_ >= ta) return;
                }
            }
        }
        has = true;
        obj = obj_;
        gap = gap_;
        ta = ta_;
        tb = tb_;
    }
};

// Maximal runs of equal rate value down the candidate list (values strictly
// decreasing run to run); each run carries its cheapest candidate, ties going
// to the smaller threshold.
struct RateRuns {
    std::vector<double> value;
    std::vector<std::size_t> best;
};

RateRuns collapse_runs(const GroupTable& t, const std::vector<double>& rate) {
    RateRuns r;
    for (std::size_t i = 0; i < rate.size(); ++i) {
        if (r.value.empty() || rate[i] != r.value.back()) {
            r.value.push_back(rate[i]);
            r.best.push_back(i);
        } else if (t.loss[i] < t.loss[r.best.back()]) {
            r.best.back() = i;
        }
    }
    return r;
}

// Runs whose value sits closest to target: the tight bracket, both sides kept
// when they are equidistant.
int bracket_runs(const RateRuns& r, double target, std::size_t out[2]) {
    const auto first_le =
        std::partition_point(r.value.begin(), r.value.end(),
                             [&](double v) { return v > target; });
    std::size_t pool[2];
    int m = 0;
    if (first_le != r.value.end())
        pool[m++] = static_cast<std::size_t>(first_le - r.value.begin());
    if (first_le != r.value.begin())
        pool[m++] = static_cast<std::size_t>(first_le - r.value.begin()) - 1;
    if (m == 2) {
        const double d0 = std::fabs(r.value[pool[0]] - target);
        const double d1 = std::fabs(r.value[pool[1]] - target);
        if (d0 < d1) {
            m = 1;
        } else if (d1 < d0) {
            pool[0] = pool[1];
            m = 1;
        }
    }
    out[0] = pool[0];
    if (m == 2) out[1] = pool[1];
    return m;
}

DecisionPair solve_matched(FairnessCriterion c, const GroupTable& A,
                           const GroupTable& B, double wa, double wb) {
    Pick best;
    if (c == FairnessCriterion::Simple) {
        for (std::size_t j = 0; j < B.cand.size(); ++j) {
            const double tb = B.cand[j];
            const auto it =
                std::lower_bound(A.cand.begin(), A.cand.end(), tb);
            std::size_t pool[2];
            int m = 0;
            if (it != A.cand.end())
                pool[m++] = static_cast<std::size_t>(it - A.cand.begin());
            if (it != A.cand.begin())
                pool[m++] = static_cast<std::size_t>(it - A.cand.begin()) - 1;
            if (m == 2) {
                const double d0 = std::fabs(A.cand[pool[0]] - tb);
                const double d1 = std::fabs(A.cand[pool[1]] - tb);
                if (d0 < d1) {
                    m = 1;
                } else if (d1 < d0) {
                    pool[0] = pool[1];
                    m = 1;
                }
            }
            for (int k = 0; k < m; ++k) {
                const std::size_t i = pool[k];
                best.consider(wa * A.loss[i] + wb * B.loss[j],
                              std::fabs(A.cand[i] - tb), A.cand[i], tb);
            }
        }
    } else {
        const auto& rate_a = c == FairnessCriterion::EqOpt ? A.fpr : A.acc;
        const auto& rate_b = c == FairnessCriterion::EqOpt ? B.fpr : B.acc;
        const RateRuns runs = collapse_runs(A, rate_a);
        for (std::size_t j = 0; j < B.cand.size(); ++j) {
            const double target = rate_b[j];
            std::size_t rs[2];
            const int m = bracket_runs(runs, target, rs);
            for (int k = 0; k < m; ++k) {
                const std::size_t i = runs.best[rs[k]];
                best.consider(wa * A.loss[i] + wb * B.loss[j],
                              std::fabs(runs.value[rs[k]] - target), A.cand[i],
                              B.cand[j]);
            }
        }
    }
    return {best.ta, best.tb, c, best.gap};
}

std::size_t argmin_loss(const GroupTable& t) {
    std::size_t idx = 0;
    for (std::size_t i = 1; i < t.loss.size(); ++i)
        if (t.loss[i] < t.loss[idx]) idx = i;
    return idx;
}

DecisionPair solve_eqlos(const GroupTable& A, const GroupTable& B) {
    const std::size_t ia = argmin_loss(A);
    const std::size_t ib = argmin_loss(B);
    const bool a_fixed = A.loss[ia] >= B.loss[ib];
    const GroupTable& F = a_fixed ? A : B;
    const GroupTable& M = a_fixed ? B : A;
    const std::size_t idx_f = a_fixed ? ia : ib;
    const std::size_t idx_m = a_fixed ? ib : ia;
    const double target = F.loss[idx_f];

    // The moving group chases the shared loss level on the side toward the
    // fixed group's minimizer, matching the primary-root rule of the
    // population solver; the other crossing is just as feasible but lands on
    // the far branch.
    std::size_t pick = idx_m;
    double best_gap = std::numeric_limits<double>::infinity();
    if (F.cand[idx_f] >= M.cand[idx_m]) {
        for (std::size_t i = idx_m; i < M.cand.size(); ++i) {
            const double gap = std::fabs(M.loss[i] - target);
            if (gap < best_gap) {
                best_gap = gap;
                pick = i;
            }
        }
    } else {
        for (std::size_t i = idx_m + 1; i-- > 0;) {
            const double gap = std::fabs(M.loss[i] - target);
            if (gap < best_gap) {
                best_gap = gap;
                pick = i;
            }
        }
    }

    const double ta = a_fixed ? F.cand[idx_f] : M.cand[pick];
    const double tb = a_fixed ? M.cand[pick] : F.cand[idx_f];
    const double la = a_fixed ? F.loss[idx_f] : M.loss[pick];
    const double lb = a_fixed ? M.loss[pick] : F.loss[idx_f];
    return {ta, tb, FairnessCriterion::EqLos, std::fabs(la - lb)};
}

}  // namespace

SampleSet draw_samples(const GroupSpec& ga, const GroupSpec& gb,
                       const PopulationState& state, std::uint64_t seed) {
    if (!(state.n_a >= 0.0) || !(state.n_b >= 0.0))
        throw DomainError("sample draws need nonnegative group counts");
    SampleSet out;
    out.seed = seed;
    std::mt19937_64 rng(seed);
    fill_group(out.a, ga, state.n_a, rng);
    fill_group(out.b, gb, state.n_b, rng);
    return out;
}

double empirical_loss(const GroupSample& g, double theta) {
    check_sample(g, "sample");
    if (g.empty())
        throw EmptyGroupError("empirical loss needs at least one sample");
    std::size_t miss = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const bool accepted = g.features[i] >= theta;
        if (accepted != (g.labels[i] == 1)) ++miss;
    }
    return static_cast<double>(miss) / static_cast<double>(g.size());
}

double empirical_false_positive_rate(const GroupSample& g, double theta) {
    check_sample(g, "sample");
    std::size_t n0 = 0, fp = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.labels[i] == 0) {
            ++n0;
            if (g.features[i] >= theta) ++fp;
        }
    }
    return n0 ? static_cast<double>(fp) / static_cast<double>(n0) : 0.0;
}

double empirical_acceptance_rate(const GroupSample& g, double theta) {
    check_sample(g, "sample");
    if (g.empty()) return 0.0;
    std::size_t acc = 0;
    for (double x : g.features)
        if (x >= theta) ++acc;
    return static_cast<double>(acc) / static_cast<double>(g.size());
}

DecisionPair empirical_one_shot(FairnessCriterion criterion,
                                const SampleSet& samples) {
    check_sample(samples.a, "a");
    check_sample(samples.b, "b");
    if (samples.a.empty())
        throw EmptyGroupError("group a has no samples");
    if (samples.b.empty())
        throw EmptyGroupError("group b has no samples");
    if (criterion == FairnessCriterion::MinMax)
        throw DomainError(
            "learned decisions cover the constrained criteria only");

    const GroupTable A = build_table(samples.a);
    const GroupTable B = build_table(samples.b);
    if (criterion == FairnessCriterion::EqLos) return solve_eqlos(A, B);
    const double wa = static_cast<double>(samples.a.size()) /
                      static_cast<double>(samples.a.size() + samples.b.size());
    return solve_matched(criterion, A, B, wa, 1.0 - wa);
}

QualityExperiment quality_experiment(const GroupSpec& ga, const GroupSpec& gb,
                                     FairnessCriterion criterion,
                                     const DynamicsModel& model,
                                     long horizon_T, std::uint64_t seed) {
    validate(model);
    if (model.kind != DynamicsKind::ArrivalCoupled)
        throw ModelError(
            std::string("quality experiments run on arrival_coupled "
                        "dynamics, got ") +
            to_string(model.kind));
    if (horizon_T < 0)
        throw DomainError("horizon must be nonnegative, got " +
                          std::to_string(horizon_T));
    if (criterion == FairnessCriterion::MinMax)
        throw DomainError(
            "learned decisions cover the constrained criteria only");

    std::optional<OneShotCache> cache;
    std::optional<DecisionPair> fixed;
    if (criterion == FairnessCriterion::EqLos)
        fixed = eqlos_solution(ga, gb).pair;
    else
        cache.emplace(criterion, ga, gb);

    const PopulationState init(model.beta_a, model.beta_b);

    const auto record = [&](Trajectory& tr, const PopulationState& st,
                            const DecisionPair& p, double& cum) {
        TrajectoryStep s;
        s.t = static_cast<long>(tr.steps.size()) + 1;
        s.theta_a = p.theta_a;
        s.theta_b = p.theta_b;
        s.loss_a = expected_loss(ga, p.theta_a);
        s.loss_b = expected_loss(gb, p.theta_b);
        s.n_a = st.n_a;
        s.n_b = st.n_b;
        s.alpha_a = st.proportion_a();
        s.step_total_loss =
            s.alpha_a * s.loss_a + (1.0 - s.alpha_a) * s.loss_b;
        cum += s.step_total_loss;
        s.running_avg_total_loss = cum / static_cast<double>(s.t);
        tr.steps.push_back(s);
    };

    QualityExperiment out;
    out.bayes.criterion = criterion;
    out.bayes.stop = StopReason::HorizonExhausted;
    out.learned.criterion = criterion;
    out.learned.stop = StopReason::HorizonExhausted;

    {
        PopulationState st = init;
        double cum = 0.0;
        for (long t = 1; t <= horizon_T + 1; ++t) {
            const DecisionPair p =
                fixed ? *fixed
                      : cache->solve(st.proportion_a(),
                                     1.0 - st.proportion_a());
            record(out.bayes, st, p, cum);
            if (t <= horizon_T) st = step(model, st, p, ga, gb, nullptr);
        }
    }
    {
        PopulationState st = init;
        double cum = 0.0;
        std::mt19937_64 master(seed);
        for (long t = 1; t <= horizon_T + 1; ++t) {
            if (std::llround(st.n_a) <= 0 || std::llround(st.n_b) <= 0) {
                out.learned.stop = StopReason::Extinction;
                break;
            }
            const std::uint64_t round_seed = master();
            const SampleSet samples = draw_samples(ga, gb, st, round_seed);
            const DecisionPair p = empirical_one_shot(criterion, samples);
            record(out.learned, st, p, cum);
            if (t <= horizon_T) st = step(model, st, p, ga, gb, nullptr);
        }
    }
    return out;
}

}  // namespace fairdyn
