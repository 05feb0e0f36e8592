#include <fairdyn/fairsolve.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include <fairdyn/errors.hpp>

namespace fairdyn {

namespace {

constexpr double kGolden = 0.6180339887498949;

double scale_of(double a, double b) {
    return std::max({1.0, std::abs(a), std::abs(b)});
}

// Acceptance rate is continuous and strictly decreasing from 1 to 0 over the
// support union, so plain bisection inverts it.
double inverse_acceptance(const GroupSpec& g, double target) {
    if (!(target >= -1e-9 && target <= 1.0 + 1e-9))
        throw RangeError("acceptance target outside [0, 1]");
    double lo = g.support_lo(), hi = g.support_hi();
    // Run to machine resolution: downstream minimizers sit in very flat
    // basins, so any slack here shows up magnified in their output.
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (acceptance_rate(g, mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

void check_weights(double alpha_a, double alpha_b) {
    if (!(alpha_a >= 0.0) || !(alpha_b >= 0.0) ||
        std::abs(alpha_a + alpha_b - 1.0) > 1e-9)
        throw DomainError("weights must be nonnegative and sum to 1");
}

// Golden-section minimization; returns the best evaluated (x, f). Ties move
// the upper end so flat stretches resolve toward smaller x.
template <class F>
std::pair<double, double> golden_min(F&& f, double lo, double hi) {
    double x1 = hi - kGolden * (hi - lo);
    double x2 = lo + kGolden * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < 90 && hi - lo > 1e-12 * scale_of(lo, hi); ++i) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kGolden * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kGolden * (hi - lo);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

bool is_map_criterion(FairnessCriterion c) {
    return c == FairnessCriterion::Simple || c == FairnessCriterion::EqOpt ||
           c == FairnessCriterion::StatPar;
}

}  // namespace

const char* to_string(FairnessCriterion c) {
    switch (c) {
        case FairnessCriterion::Simple: return "simple";
        case FairnessCriterion::EqOpt: return "eqopt";
        case FairnessCriterion::StatPar: return "statpar";
        case FairnessCriterion::EqLos: return "eqlos";
        case FairnessCriterion::MinMax: return "minmax";
    }
    throw DomainError("unknown criterion");
}

FairnessCriterion criterion_from_string(const std::string& name) {
    if (name == "simple") return FairnessCriterion::Simple;
    if (name == "eqopt") return FairnessCriterion::EqOpt;
    if (name == "statpar") return FairnessCriterion::StatPar;
    if (name == "eqlos") return FairnessCriterion::EqLos;
    if (name == "minmax") return FairnessCriterion::MinMax;
    throw DomainError("unknown criterion name: " + name);
}

double constraint_map(FairnessCriterion c, const GroupSpec& ga,
                      const GroupSpec& gb, double theta_b) {
    if (!std::isfinite(theta_b)) throw DomainError("threshold must be finite");
    switch (c) {
        case FairnessCriterion::Simple:
            return theta_b;
        case FairnessCriterion::EqOpt: {
            const double p = gb.f0.cdf(theta_b);
            return ga.f0.quantile(std::clamp(p, 0.0, 1.0));
        }
        case FairnessCriterion::StatPar:
            return inverse_acceptance(ga, acceptance_rate(gb, theta_b));
        default:
            throw DomainError(
                "constraint map exists only for simple, eqopt and statpar");
    }
}

double constraint_residual(FairnessCriterion c, const GroupSpec& ga,
                           const GroupSpec& gb, double theta_a,
                           double theta_b) {
    switch (c) {
        case FairnessCriterion::Simple:
            return std::abs(theta_a - theta_b);
        case FairnessCriterion::EqOpt:
            return std::abs(false_positive_rate(ga, theta_a) -
                            false_positive_rate(gb, theta_b));
        case FairnessCriterion::StatPar:
            return std::abs(acceptance_rate(ga, theta_a) -
                            acceptance_rate(gb, theta_b));
        case FairnessCriterion::EqLos:
            return std::abs(expected_loss(ga, theta_a) -
                            expected_loss(gb, theta_b));
        case FairnessCriterion::MinMax:
            return 0.0;
    }
    throw DomainError("unknown criterion");
}

OneShotCache::OneShotCache(FairnessCriterion c, GroupSpec ga, GroupSpec gb)
    : crit_(c), ga_(std::move(ga)), gb_(std::move(gb)) {
    if (!is_map_criterion(crit_))
        throw DomainError("scan cache requires a constraint-map criterion");
    const double da = unconstrained_minimizer(ga_).delta;
    const double db = unconstrained_minimizer(gb_).delta;
    const double phi_db = constraint_map(crit_, ga_, gb_, db);
    // The search box assumes the a-side minimizer sits above the image of the
    // b-side one; when it does not, scan with the labels exchanged.
    swapped_ = phi_db > da + 1e-12 * scale_of(phi_db, da);
    const GroupSpec& wa = swapped_ ? gb_ : ga_;
    const GroupSpec& wb = swapped_ ? ga_ : gb_;
    const double dwa = swapped_ ? db : da;
    const double dwb = swapped_ ? da : db;
    double lo = dwb;
    double hi = constraint_map(crit_, wb, wa, dwa);
    if (!(lo <= hi)) {
        lo = wb.support_lo();
        hi = wb.support_hi();
    }
    box_lo_ = lo;
    box_hi_ = hi;
    const int n = 2000;
    grid_.resize(n + 1);
    phi_.resize(n + 1);
    loss_a_.resize(n + 1);
    loss_b_.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double t = lo + (hi - lo) * i / n;
        grid_[i] = t;
        phi_[i] = constraint_map(crit_, wa, wb, t);
        loss_a_[i] = expected_loss(wa, phi_[i]);
        loss_b_[i] = expected_loss(wb, t);
    }
}

DecisionPair OneShotCache::solve(double alpha_a, double alpha_b) const {
    check_weights(alpha_a, alpha_b);
    const double wa_weight = swapped_ ? alpha_b : alpha_a;
    const double wb_weight = swapped_ ? alpha_a : alpha_b;
    std::size_t best = 0;
    double best_v = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        const double v = wa_weight * loss_a_[i] + wb_weight * loss_b_[i];
        if (v < best_v) {
            best_v = v;
            best = i;
        }
    }
    const GroupSpec& wa = swapped_ ? gb_ : ga_;
    const GroupSpec& wb = swapped_ ? ga_ : gb_;
    double tb = grid_[best];
    double ta = phi_[best];
    if (grid_.front() < grid_.back()) {
        const auto objective = [&](double t) {
            return wa_weight * expected_loss(wa, constraint_map(crit_, wa, wb, t)) +
                   wb_weight * expected_loss(wb, t);
        };
        const double lo = grid_[best > 0 ? best - 1 : 0];
        const double hi = grid_[std::min(best + 1, grid_.size() - 1)];
        const auto [xr, vr] = golden_min(objective, lo, hi);
        double cur_v = best_v;
        if (vr < best_v) {
            tb = xr;
            cur_v = vr;
        }
        // Section search localizes a smooth minimum no better than the
        // comparison noise floor sqrt(eps/curvature), so the output wobbles
        // by ~1e-7 between nearby weight ratios. One symmetric three-point
        // fit recenters a smooth basin to ~1e-10; the value margin below is
        // far under any kink's one-sided slope, so piecewise-linear minima
        // reject the fitted vertex and keep the exact corner.
        const double h = 2.5e-5 * scale_of(grid_.front(), grid_.back());
        if (tb - h > grid_.front() && tb + h < grid_.back()) {
            const double fl = objective(tb - h);
            const double fc = objective(tb);
            const double fr = objective(tb + h);
            const double den = fl - 2.0 * fc + fr;
            if (den > 0.0) {
                const double v = tb + 0.5 * h * (fl - fr) / den;
                if (v > tb - h && v < tb + h &&
                    objective(v) <= cur_v + 1e-13 * scale_of(cur_v, 0.0)) {
                    tb = v;
                }
            }
        }
        ta = constraint_map(crit_, wa, wb, tb);
    }
    const double out_a = swapped_ ? tb : ta;
    const double out_b = swapped_ ? ta : tb;
    return {out_a, out_b, crit_,
            constraint_residual(crit_, ga_, gb_, out_a, out_b)};
}

DecisionPair one_shot(FairnessCriterion c, const GroupSpec& ga,
                      const GroupSpec& gb, double alpha_a, double alpha_b) {
    check_weights(alpha_a, alpha_b);
    if (c == FairnessCriterion::EqLos) return eqlos_solution(ga, gb).pair;
    if (c == FairnessCriterion::MinMax)
        throw DomainError(
            "the minmax baseline has no constraint; use minmax_solution");
    return OneShotCache(c, ga, gb).solve(alpha_a, alpha_b);
}

namespace {

// Root of expected_loss(g, x) == target on one monotone branch around the
// minimizer (decreasing to the left of it, increasing to the right).
double branch_root(const GroupSpec& g, double delta, double target, bool left) {
    double lo = left ? g.support_lo() : delta;
    double hi = left ? delta : g.support_hi();
    for (int i = 0; i < 200 && hi - lo > 1e-14 * scale_of(lo, hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        const bool above = expected_loss(g, mid) > target;
        if (left)
            (above ? lo : hi) = mid;
        else
            (above ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

EqLosResult eqlos_solution(const GroupSpec& ga, const GroupSpec& gb) {
    const double da = unconstrained_minimizer(ga).delta;
    const double db = unconstrained_minimizer(gb).delta;
    const double la = expected_loss(ga, da);
    const double lb = expected_loss(gb, db);
    const bool a_fixed = la >= lb;
    const GroupSpec& mov = a_fixed ? gb : ga;
    const double d_fixed = a_fixed ? da : db;
    const double d_mov = a_fixed ? db : da;
    const double target = std::max(la, lb);

    std::vector<double> roots;
    if (target <= expected_loss(mov, d_mov) + 1e-13 * std::max(1.0, target)) {
        // Equal minima: the matching threshold is the minimizer itself, and
        // bisecting for it would only chase rounding noise in the flat basin.
        roots.push_back(d_mov);
    } else {
        if (mov.g0 + 1e-12 >= target)
            roots.push_back(branch_root(mov, d_mov, target, true));
        if (mov.g1 + 1e-12 >= target)
            roots.push_back(branch_root(mov, d_mov, target, false));
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [&](double x, double y) {
                                return std::abs(x - y) <= 1e-9 * scale_of(x, y);
                            }),
                roots.end());

    // The primary pair puts the moving group on the side facing the fixed
    // group's minimizer.
    double primary = roots.front();
    if (d_fixed >= d_mov) primary = roots.back();

    const auto make_pair = [&](double root) {
        const double ta = a_fixed ? d_fixed : root;
        const double tb = a_fixed ? root : d_fixed;
        return DecisionPair{ta, tb, FairnessCriterion::EqLos,
                            constraint_residual(FairnessCriterion::EqLos, ga,
                                                gb, ta, tb)};
    };
    EqLosResult out;
    out.pair = make_pair(primary);
    out.target_loss = target;
    for (double r : roots) out.alternates.push_back(make_pair(r));
    return out;
}

DecisionPair minmax_solution(const GroupSpec& ga, const GroupSpec& gb) {
    const double lo = std::min(ga.support_lo(), gb.support_lo());
    const double hi = std::max(ga.support_hi(), gb.support_hi());
    const auto objective = [&](double t) {
        return std::max(expected_loss(ga, t), expected_loss(gb, t));
    };
    const int n = 4000;
    std::size_t best = 0;
    double best_v = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
        const double v = objective(lo + (hi - lo) * i / n);
        if (v < best_v) {
            best_v = v;
            best = static_cast<std::size_t>(i);
        }
    }
    double theta = lo + (hi - lo) * static_cast<double>(best) / n;
    const double blo = lo + (hi - lo) * (best > 0 ? best - 1.0 : 0.0) / n;
    const double bhi = lo + (hi - lo) * std::min<double>(best + 1.0, n) / n;
    const auto [xr, vr] = golden_min(objective, blo, bhi);
    if (vr < best_v) theta = xr;
    return {theta, theta, FairnessCriterion::MinMax, 0.0};
}

double stationarity_residual(FairnessCriterion c, const GroupSpec& ga,
                             const GroupSpec& gb, double theta_a,
                             double theta_b, double ratio) {
    if (!(ratio > 0.0) || !std::isfinite(ratio))
        throw DomainError("weight ratio must be positive and finite");
    const double tol = 1e-9 * scale_of(theta_a, theta_b);
    const auto strictly_inside = [&](double x, double lo, double hi) {
        return x > lo + tol && x < hi - tol;
    };

    if (c == FairnessCriterion::Simple) {
        if (std::abs(theta_a - theta_b) > tol)
            throw RegimeError("equal-threshold residual needs theta_a == theta_b");
        const double t = theta_b;
        const double corners[] = {ga.f0.support_lo(), ga.f0.support_hi(),
                                  ga.f1.support_lo(), ga.f1.support_hi(),
                                  gb.f0.support_lo(), gb.f0.support_hi(),
                                  gb.f1.support_lo(), gb.f1.support_hi()};
        for (double kink : corners)
            if (std::abs(t - kink) <= tol)
                throw RegimeError("threshold sits on a density kink");
        return ratio * (ga.g1 * ga.f1.pdf(t) - ga.g0 * ga.f0.pdf(t)) +
               (gb.g1 * gb.f1.pdf(t) - gb.g0 * gb.f0.pdf(t));
    }

    if (c != FairnessCriterion::EqOpt && c != FairnessCriterion::StatPar)
        throw DomainError("no first-order condition for this criterion");

    if (!strictly_inside(theta_b, gb.overlap_lo(), gb.overlap_hi()))
        throw RegimeError("theta_b outside the open overlap of group b");
    const double fb0 = gb.f0.pdf(theta_b);
    const double fb1 = gb.f1.pdf(theta_b);

    if (c == FairnessCriterion::EqOpt) {
        if (strictly_inside(theta_a, ga.support_lo(), ga.overlap_lo())) {
            return fb1 / fb0 - gb.g0 / gb.g1 - ratio * ga.g0 / gb.g1;
        }
        if (strictly_inside(theta_a, ga.overlap_lo(), ga.overlap_hi())) {
            const double fa0 = ga.f0.pdf(theta_a);
            const double fa1 = ga.f1.pdf(theta_a);
            return fb1 / fb0 - gb.g0 / gb.g1 - ratio * ga.g0 / gb.g1 +
                   ratio * ga.g1 * fa1 / (gb.g1 * fa0);
        }
        throw RegimeError("theta_a outside the enumerated density regimes");
    }

    // StatPar: three regimes by which mixture components are active at theta_a.
    if (strictly_inside(theta_a, ga.support_lo(), ga.overlap_lo())) {
        return (1.0 - ratio) * fb1 / fb0 - (1.0 + ratio) * gb.g0 / gb.g1;
    }
    if (strictly_inside(theta_a, ga.overlap_lo(), ga.overlap_hi())) {
        const double ra =
            ga.g1 * ga.f1.pdf(theta_a) / (ga.g0 * ga.f0.pdf(theta_a));
        const double rb = gb.g1 * fb1 / (gb.g0 * fb0);
        return (rb - 1.0) * (ra + 1.0) + ratio * (rb + 1.0) * (ra - 1.0);
    }
    if (strictly_inside(theta_a, ga.overlap_hi(), ga.support_hi())) {
        const double rb = gb.g1 * fb1 / (gb.g0 * fb0);
        return (1.0 + ratio) * rb - (1.0 - ratio);
    }
    throw RegimeError("theta_a outside the enumerated density regimes");
}

namespace {

struct CandidateLine {
    double theta_b = 0.0;  // working-orientation threshold for group b
    double theta_a = 0.0;
    double slope = 0.0;      // L_a at the matched theta_a
    double intercept = 0.0;  // L_b at theta_b
};

}  // namespace

UniformDecisionTable uniform_decision_table(FairnessCriterion c,
                                            const GroupSpec& ga,
                                            const GroupSpec& gb) {
    if (!is_map_criterion(c))
        throw DomainError("decision table requires a constraint-map criterion");
    for (const GroupSpec* g : {&ga, &gb}) {
        if (g->f0.kind() != DistKind::Uniform || g->f1.kind() != DistKind::Uniform)
            throw StructureError("decision table requires uniform densities");
        // A flat loss over the overlap has no strict density ordering, so the
        // optimum is an interval and no finite table represents it.
        const double d1 = g->g1 / (g->f1.support_hi() - g->f1.support_lo());
        const double d0 = g->g0 / (g->f0.support_hi() - g->f0.support_lo());
        if (std::abs(d1 - d0) <= 1e-12)
            throw CaseError("overlap loss slope vanishes; optimum not unique");
    }

    const double da = unconstrained_minimizer(ga).delta;
    const double db = unconstrained_minimizer(gb).delta;
    const bool swapped =
        constraint_map(c, ga, gb, db) > da + 1e-12 * scale_of(da, db);
    const GroupSpec& wa = swapped ? gb : ga;
    const GroupSpec& wb = swapped ? ga : gb;
    const double dwa = swapped ? db : da;
    const double dwb = swapped ? da : db;

    double lo = dwb;
    double hi = constraint_map(c, wb, wa, dwa);
    if (!(lo <= hi)) {
        lo = wb.support_lo();
        hi = wb.support_hi();
    }
    const double span = scale_of(lo, hi);

    // Every fixed-ratio objective is piecewise linear in theta_b with kinks
    // where either loss curve crosses a support corner, so those kinks plus
    // the box ends are the only possible optima.
    std::vector<double> cands = {lo, hi};
    for (double corner : {wb.f0.support_lo(), wb.f0.support_hi(),
                          wb.f1.support_lo(), wb.f1.support_hi()}) {
        if (corner > lo && corner < hi) cands.push_back(corner);
    }
    for (double corner : {wa.f0.support_lo(), wa.f0.support_hi(),
                          wa.f1.support_lo(), wa.f1.support_hi()}) {
        const double pre = constraint_map(c, wb, wa, corner);
        if (pre > lo && pre < hi) cands.push_back(pre);
    }
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end(),
                            [&](double x, double y) {
                                return std::abs(x - y) <= 1e-9 * span;
                            }),
                cands.end());

    std::vector<CandidateLine> lines;
    for (double t : cands) {
        CandidateLine l;
        l.theta_b = t;
        l.theta_a = constraint_map(c, wa, wb, t);
        l.slope = expected_loss(wa, l.theta_a);
        l.intercept = expected_loss(wb, t);
        lines.push_back(l);
    }
    // Largest slope first: the cheaper group-b loss wins as the ratio falls
    // to 0, so that end of the envelope comes first.
    std::stable_sort(lines.begin(), lines.end(),
                     [](const CandidateLine& x, const CandidateLine& y) {
                         if (x.slope != y.slope) return x.slope > y.slope;
                         return x.intercept < y.intercept;
                     });

    // Lower envelope of value lines ratio -> slope*ratio + intercept.
    std::vector<CandidateLine> env;
    std::vector<double> starts;  // ratio where env[i] takes over
    for (const CandidateLine& l : lines) {
        double start = 0.0;
        bool dominated = false;
        while (!env.empty()) {
            const CandidateLine& top = env.back();
            if (std::abs(l.slope - top.slope) <= 1e-15) {
                // Parallel: only the lower intercept can ever win.
                if (l.intercept >= top.intercept) {
                    dominated = true;
                    break;
                }
                env.pop_back();
                starts.pop_back();
                continue;
            }
            start = (l.intercept - top.intercept) / (top.slope - l.slope);
            if (start <= starts.back()) {
                env.pop_back();
                starts.pop_back();
                continue;
            }
            break;
        }
        if (dominated) continue;
        env.push_back(l);
        starts.push_back(env.size() == 1 ? 0.0 : start);
    }
    // Drop cells that only apply at nonpositive ratios.
    while (env.size() > 1 && starts[1] <= 0.0) {
        env.erase(env.begin());
        starts.erase(starts.begin());
        starts.front() = 0.0;
    }

    UniformDecisionTable table;
    for (std::size_t i = 0; i < env.size(); ++i) {
        double ta = env[i].theta_a, tb = env[i].theta_b;
        if (swapped) std::swap(ta, tb);
        table.pairs.push_back(
            {ta, tb, c, constraint_residual(c, ga, gb, ta, tb)});
        if (i > 0) table.thresholds.push_back(starts[i]);
    }
    if (swapped) {
        // The envelope was built for the reciprocal ratio; flip it back.
        std::reverse(table.pairs.begin(), table.pairs.end());
        std::reverse(table.thresholds.begin(), table.thresholds.end());
        for (double& r : table.thresholds) r = 1.0 / r;
    }

    if (!table.thresholds.empty()) {
        switch (c) {
            case FairnessCriterion::Simple:
                table.constants.emplace_back("C", table.thresholds.front());
                break;
            case FairnessCriterion::EqOpt:
                table.constants.emplace_back("A", table.thresholds.front());
                break;
            default:
                table.constants.emplace_back("A", table.thresholds.front());
                if (table.thresholds.size() > 1)
                    table.constants.emplace_back("B", table.thresholds.back());
                break;
        }
    }
    return table;
}

std::size_t cell_for_ratio(const UniformDecisionTable& table, double ratio) {
    if (!(ratio > 0.0) || !std::isfinite(ratio))
        throw DomainError("weight ratio must be positive and finite");
    if (table.pairs.empty()) throw StructureError("empty decision table");
    // Small guard so a ratio sitting on a threshold up to numerical noise
    // still resolves upward.
    const double key = ratio + 1e-9 * std::max(1.0, std::abs(ratio));
    const auto it = std::upper_bound(table.thresholds.begin(),
                                     table.thresholds.end(), key);
    return static_cast<std::size_t>(it - table.thresholds.begin());
}

}  // namespace fairdyn
