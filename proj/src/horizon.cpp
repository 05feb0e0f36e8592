#include <fairdyn/horizon.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <thread>

#include <fairdyn/errors.hpp>

namespace fairdyn {

namespace {

template <class Fn>
auto with_epoch(long t, Fn&& fn) -> decltype(fn()) {
    auto tag = [t](const char* msg) {
        return "epoch " + std::to_string(t) + ": " + msg;
    };
    try {
        return fn();
    } catch (const DomainError& e) {
        throw DomainError(tag(e.what()));
    } catch (const RangeError& e) {
        throw RangeError(tag(e.what()));
    } catch (const CaseError& e) {
        throw CaseError(tag(e.what()));
    } catch (const RegimeError& e) {
        throw RegimeError(tag(e.what()));
    } catch (const ModelError& e) {
        throw ModelError(tag(e.what()));
    } catch (const StructureError& e) {
        throw StructureError(tag(e.what()));
    } catch (const DivergenceError& e) {
        throw DivergenceError(tag(e.what()));
    } catch (const EmptyGroupError& e) {
        throw EmptyGroupError(tag(e.what()));
    }
}

template <class Solve>
Trajectory run_loop(const GroupSpec& ga, const GroupSpec& gb,
                    FairnessCriterion criterion, const DynamicsModel& model,
                    PopulationState state, long horizon_T,
                    const ConvergenceSpec& conv, Solve&& solve_at) {
    if (horizon_T < 1) throw DomainError("horizon must be at least 1");
    if (conv.window < 1) throw DomainError("convergence window must be positive");
    if (!(conv.eps > 0.0)) throw DomainError("convergence eps must be positive");
    validate(model);

    std::mt19937_64 rng(model.rng_seed);
    std::mt19937_64* rng_ptr =
        model.kind == DynamicsKind::RandomArrival ? &rng : nullptr;

    Trajectory traj;
    traj.criterion = criterion;
    traj.steps.reserve(static_cast<std::size_t>(std::min<long>(horizon_T, 65536)));

    double loss_sum = 0.0;
    int streak = 0;
    for (long t = 1; t <= horizon_T; ++t) {
        if (t > 1 && !(state.n_a + state.n_b > 0.0)) {
            traj.stop = StopReason::Extinction;
            return traj;
        }
        const double alpha_a = state.proportion_a();
        const DecisionPair pair = with_epoch(t, [&] { return solve_at(alpha_a); });

        TrajectoryStep s;
        s.t = t;
        s.theta_a = pair.theta_a;
        s.theta_b = pair.theta_b;
        s.loss_a = expected_loss(ga, pair.theta_a);
        s.loss_b = expected_loss(gb, pair.theta_b);
        s.step_total_loss = alpha_a * s.loss_a + (1.0 - alpha_a) * s.loss_b;
        s.n_a = state.n_a;
        s.n_b = state.n_b;
        s.alpha_a = alpha_a;
        loss_sum += s.step_total_loss;
        s.running_avg_total_loss = loss_sum / static_cast<double>(t);

        if (!traj.steps.empty()) {
            const TrajectoryStep& p = traj.steps.back();
            const bool stable =
                std::abs(s.theta_a - p.theta_a) < conv.eps &&
                std::abs(s.theta_b - p.theta_b) < conv.eps &&
                std::abs(s.n_a - p.n_a) < conv.eps * std::max(1.0, std::abs(s.n_a)) &&
                std::abs(s.n_b - p.n_b) < conv.eps * std::max(1.0, std::abs(s.n_b));
            streak = stable ? streak + 1 : 0;
        }
        traj.steps.push_back(s);
        if (streak >= conv.window) {
            traj.stop = StopReason::Converged;
            return traj;
        }
        state = with_epoch(t, [&] { return step(model, state, pair, ga, gb, rng_ptr); });
    }
    traj.stop = StopReason::HorizonExhausted;
    return traj;
}

Trajectory simulate_cached(const GroupSpec& ga, const GroupSpec& gb,
                           const OneShotCache& cache, const DynamicsModel& model,
                           const PopulationState& init, long horizon_T,
                           const ConvergenceSpec& conv) {
    return run_loop(ga, gb, cache.criterion(), model, init, horizon_T, conv,
                    [&](double alpha_a) { return cache.solve(alpha_a, 1.0 - alpha_a); });
}

}  // namespace

double tail_average(const Trajectory& traj) {
    if (traj.steps.empty()) throw DomainError("trajectory holds no steps");
    const std::size_t n = traj.steps.size();
    const std::size_t count = std::max<std::size_t>(1, n / 5);
    double sum = 0.0;
    for (std::size_t i = n - count; i < n; ++i) sum += traj.steps[i].step_total_loss;
    return sum / static_cast<double>(count);
}

Trajectory simulate(const GroupSpec& ga, const GroupSpec& gb,
                    FairnessCriterion criterion, const DynamicsModel& model,
                    const PopulationState& init, long horizon_T,
                    const ConvergenceSpec& conv) {
    switch (criterion) {
        case FairnessCriterion::EqLos:
            return simulate_constant(ga, gb, eqlos_solution(ga, gb).pair, model,
                                     init, horizon_T, conv);
        case FairnessCriterion::MinMax:
            return simulate_constant(ga, gb, minmax_solution(ga, gb), model, init,
                                     horizon_T, conv);
        default: {
            OneShotCache cache(criterion, ga, gb);
            return simulate_cached(ga, gb, cache, model, init, horizon_T, conv);
        }
    }
}

Trajectory simulate_constant(const GroupSpec& ga, const GroupSpec& gb,
                             const DecisionPair& pair, const DynamicsModel& model,
                             const PopulationState& init, long horizon_T,
                             const ConvergenceSpec& conv) {
    return run_loop(ga, gb, pair.criterion, model, init, horizon_T, conv,
                    [&](double) { return pair; });
}

VisitedDecisions visited_decisions(const UniformDecisionTable& table,
                                   const GroupSpec& ga, const GroupSpec& gb,
                                   const DynamicsModel& model,
                                   const PopulationState& init) {
    if (table.pairs.empty() || table.thresholds.size() + 1 != table.pairs.size())
        throw StructureError("decision table must hold k thresholds and k+1 pairs");
    validate(model);
    if (model.kind != DynamicsKind::Accuracy)
        throw ModelError("visited-decision analysis requires additive-arrival dynamics");
    if (!(model.beta_a > 0.0) || !(model.beta_b > 0.0))
        throw DomainError("visited-decision analysis requires positive arrival rates");
    if (!(init.n_a > 0.0) || !(init.n_b > 0.0))
        throw DomainError("visited-decision analysis requires positive initial counts");
    const double cross = std::abs(init.n_a * model.beta_b - init.n_b * model.beta_a);
    if (cross > 1e-9 * std::max({1.0, init.n_a * model.beta_b, init.n_b * model.beta_a}))
        throw DomainError("initial count ratio must equal the arrival-rate ratio");

    const RetentionFn& nu = model.retention;
    auto drift = [&](std::size_t k) {
        const DecisionPair& p = table.pairs[k];
        const double shed_a = 1.0 - nu(expected_loss(ga, p.theta_a));
        const double shed_b = 1.0 - nu(expected_loss(gb, p.theta_b));
        if (!(shed_a > 0.0))
            throw DivergenceError("group a retains all mass; drift ratio diverges");
        return (model.beta_a * shed_b) / (model.beta_b * shed_a);
    };

    const double inf = std::numeric_limits<double>::infinity();
    std::size_t k = cell_for_ratio(table, init.n_a / init.n_b);
    std::vector<std::size_t> order{k};
    for (std::size_t moves = 0;; ++moves) {
        if (moves >= table.pairs.size())
            throw StructureError("cell walk revisited a decision");
        const double rho = drift(k);
        const double hi = k + 1 < table.pairs.size() ? table.thresholds[k] : inf;
        const double lo = k > 0 ? table.thresholds[k - 1] : 0.0;
        if (rho >= hi)
            ++k;
        else if (rho < lo)
            --k;
        else
            break;
        order.push_back(k);
    }

    std::vector<long> first(order.size(), 0);
    first[0] = 1;
    if (order.size() > 1) {
        const int dir = order[1] > order[0] ? 1 : -1;
        double na = init.n_a;
        double nb = init.n_b;
        std::size_t pos = 0;
        long t = 1;
        while (pos + 1 < order.size()) {
            if (t >= 1000000)
                throw StructureError("population walk failed to reach the final cell");
            const DecisionPair& p = table.pairs[order[pos]];
            na = na * nu(expected_loss(ga, p.theta_a)) + model.beta_a;
            nb = nb * nu(expected_loss(gb, p.theta_b)) + model.beta_b;
            ++t;
            const std::size_t cell = cell_for_ratio(table, na / nb);
            while (pos + 1 < order.size() &&
                   (dir > 0 ? cell >= order[pos + 1] : cell <= order[pos + 1])) {
                ++pos;
                first[pos] = t;
            }
        }
    }

    VisitedDecisions out;
    out.visited.reserve(order.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        out.visited.emplace_back(table.pairs[order[i]], first[i]);
    out.converged_pair = table.pairs[order.back()];
    return out;
}

MonotonicityReport check_monotone_course(const Trajectory& traj) {
    MonotonicityReport rep;
    if (traj.steps.empty()) {
        rep.detail = "trajectory holds no steps";
        return rep;
    }
    const double tol = 1e-9;
    const TrajectoryStep& s1 = traj.steps.front();
    if (s1.loss_a > s1.loss_b + tol)
        rep.case_id = 1;
    else if (s1.loss_b > s1.loss_a + tol)
        rep.case_id = 2;
    else
        rep.case_id = 3;

    auto ratio = [](const TrajectoryStep& s) {
        const double alpha_b = 1.0 - s.alpha_a;
        return alpha_b > 0.0 ? s.alpha_a / alpha_b
                             : std::numeric_limits<double>::infinity();
    };
    auto fail = [&](long t, const char* what) {
        rep.ok = false;
        rep.violation_step = t;
        rep.detail = what;
    };

    for (std::size_t i = 1; i < traj.steps.size() && rep.ok; ++i) {
        const TrajectoryStep& prev = traj.steps[i - 1];
        const TrajectoryStep& cur = traj.steps[i];
        const double rprev = ratio(prev);
        const double rcur = ratio(cur);
        const double rtol = tol * std::max(1.0, std::abs(rprev));
        switch (rep.case_id) {
            case 1:
                if (cur.theta_a > prev.theta_a + tol)
                    fail(cur.t, "theta_a increased");
                else if (cur.theta_b > prev.theta_b + tol)
                    fail(cur.t, "theta_b increased");
                else if (rcur > rprev + rtol)
                    fail(cur.t, "proportion ratio increased");
                else if (cur.loss_a < cur.loss_b - tol)
                    fail(cur.t, "loss ordering flipped");
                break;
            case 2:
                if (cur.theta_a < prev.theta_a - tol)
                    fail(cur.t, "theta_a decreased");
                else if (cur.theta_b < prev.theta_b - tol)
                    fail(cur.t, "theta_b decreased");
                else if (rcur < rprev - rtol)
                    fail(cur.t, "proportion ratio decreased");
                else if (cur.loss_b < cur.loss_a - tol)
                    fail(cur.t, "loss ordering flipped");
                break;
            default:
                if (std::abs(cur.theta_a - prev.theta_a) > tol)
                    fail(cur.t, "theta_a moved");
                else if (std::abs(cur.theta_b - prev.theta_b) > tol)
                    fail(cur.t, "theta_b moved");
                else if (std::abs(rcur - rprev) > rtol)
                    fail(cur.t, "proportion ratio moved");
                else if (std::abs(cur.loss_a - cur.loss_b) > tol)
                    fail(cur.t, "losses split");
                break;
        }
    }
    return rep;
}

SweepResult sweep_final_proportion(
    const GroupSpec& ga, const GroupSpec& gb, FairnessCriterion criterion,
    const DynamicsModel& model_template,
    const std::vector<std::pair<double, double>>& beta_grid, long horizon_T,
    const ConvergenceSpec& conv, int jobs) {
    if (beta_grid.empty()) throw DomainError("arrival grid is empty");
    if (jobs < 1) jobs = 1;

    // The one-shot context depends only on the scenario, not on arrival
    // rates, so a single instance serves every cell (solve is const).
    std::optional<OneShotCache> cache;
    std::optional<DecisionPair> fixed;
    switch (criterion) {
        case FairnessCriterion::EqLos:
            fixed = eqlos_solution(ga, gb).pair;
            break;
        case FairnessCriterion::MinMax:
            fixed = minmax_solution(ga, gb);
            break;
        default:
            cache.emplace(criterion, ga, gb);
            break;
    }

    SweepResult out;
    out.cells.resize(beta_grid.size());
    auto run_cell = [&](std::size_t i) {
        SweepCell& cell = out.cells[i];
        cell.beta_a = beta_grid[i].first;
        cell.beta_b = beta_grid[i].second;
        try {
            DynamicsModel model = model_template;
            model.beta_a = cell.beta_a;
            model.beta_b = cell.beta_b;
            const PopulationState init{cell.beta_a, cell.beta_b};
            const Trajectory traj =
                fixed ? simulate_constant(ga, gb, *fixed, model, init, horizon_T, conv)
                      : simulate_cached(ga, gb, *cache, model, init, horizon_T, conv);
            const TrajectoryStep& last = traj.steps.back();
            cell.final_alpha_a = last.alpha_a;
            cell.final_theta_a = last.theta_a;
            cell.final_theta_b = last.theta_b;
            cell.final_loss_a = last.loss_a;
            cell.final_loss_b = last.loss_b;
            cell.converged = traj.stop == StopReason::Converged;
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    };

    if (jobs == 1 || beta_grid.size() < 2) {
        for (std::size_t i = 0; i < beta_grid.size(); ++i) run_cell(i);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= out.cells.size()) return;
                run_cell(i);
            }
        };
        const std::size_t nthreads =
            std::min<std::size_t>(static_cast<std::size_t>(jobs), beta_grid.size());
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }
    return out;
}

std::vector<TradeoffRow> tradeoff_curve(const GroupSpec& ga, const GroupSpec& gb,
                                        const DynamicsModel& model,
                                        long horizon_T,
                                        const ConvergenceSpec& conv) {
    const FairnessCriterion order[] = {FairnessCriterion::Simple,
                                       FairnessCriterion::EqLos,
                                       FairnessCriterion::MinMax};
    const PopulationState init{model.beta_a, model.beta_b};
    std::vector<TradeoffRow> rows;
    rows.reserve(3);
    for (FairnessCriterion crit : order) {
        const Trajectory traj = simulate(ga, gb, crit, model, init, horizon_T, conv);
        rows.push_back({crit, tail_average(traj), traj.steps.back().alpha_a});
    }
    return rows;
}

std::optional<ConstantPairWitness> find_better_constant_pair(
    const GroupSpec& ga, const GroupSpec& gb, const DynamicsModel& model,
    long horizon_T, int grid_points, const ConvergenceSpec& conv) {
    if (grid_points < 2) throw DomainError("constant-pair grid needs two points");
    const PopulationState init{model.beta_a, model.beta_b};
    const double greedy_avg = tail_average(
        simulate(ga, gb, FairnessCriterion::Simple, model, init, horizon_T, conv));

    const double lo = std::min(ga.support_lo(), gb.support_lo());
    const double hi = std::max(ga.support_hi(), gb.support_hi());
    double best_theta = lo;
    double best_avg = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_points; ++i) {
        const double c = lo + (hi - lo) * i / (grid_points - 1);
        const DecisionPair pair{c, c, FairnessCriterion::Simple, 0.0};
        const Trajectory traj =
            simulate_constant(ga, gb, pair, model, init, horizon_T, conv);
        const double avg = tail_average(traj);
        if (avg < best_avg) {
            best_avg = avg;
            best_theta = c;
        }
    }
    if (best_avg < greedy_avg - 1e-9)
        return ConstantPairWitness{best_theta, best_avg, greedy_avg};
    return std::nullopt;
}

}  // namespace fairdyn
