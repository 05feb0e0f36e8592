#include <fairdyn/runner.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <thread>

#include <fairdyn/config.hpp>
#include <fairdyn/csvio.hpp>
#include <fairdyn/empirics.hpp>
#include <fairdyn/errors.hpp>

namespace fairdyn {

namespace {

namespace fs = std::filesystem;

const char* stop_name(StopReason r) {
    switch (r) {
        case StopReason::Converged: return "converged";
        case StopReason::HorizonExhausted: return "horizon_exhausted";
        case StopReason::Extinction: return "extinction";
    }
    return "unknown";
}

std::string pair_text(const DecisionPair& pair) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "(%g,%g)", pair.theta_a, pair.theta_b);
    return buf;
}

// Relative output names land under opt.out_dir; absolute ones are kept.
std::string resolve_out(const RunOptions& opt, const std::string& name) {
    const fs::path p(name);
    if (opt.out_dir.empty() || p.is_absolute()) return name;
    return (fs::path(opt.out_dir) / p).string();
}

void ensure_parent(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    if (parent.empty()) return;
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) {
        throw IoError("cannot create directory '" + parent.string() +
                      "': " + ec.message());
    }
}

int effective_jobs(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void run_simulate(const ScenarioConfig& cfg, const RunOptions& opt,
                  std::ostream& out) {
    const Trajectory traj =
        simulate(cfg.group_a, cfg.group_b, cfg.criterion, cfg.model, cfg.init,
                 cfg.horizon_T, cfg.conv);
    const std::string path = resolve_out(opt, cfg.out);
    ensure_parent(path);
    emit_trajectory(traj, path);
    out << "simulate " << to_string(cfg.criterion)
        << ": steps=" << traj.steps.size() << " stop=" << stop_name(traj.stop);
    if (!traj.steps.empty()) {
        const TrajectoryStep& last = traj.steps.back();
        out << " final_alpha_a=" << format_value(last.alpha_a)
            << " avg_total_loss=" << format_value(last.running_avg_total_loss);
    }
    out << " -> " << path << "\n";
}

void run_sweep(const ScenarioConfig& cfg, const RunOptions& opt,
               std::ostream& out) {
    const SweepResult result = sweep_final_proportion(
        cfg.group_a, cfg.group_b, cfg.criterion, cfg.model, cfg.sweep.cells(),
        cfg.horizon_T, cfg.conv, effective_jobs(opt.jobs));
    const std::string path = resolve_out(opt, cfg.out);
    ensure_parent(path);
    emit_sweep(result, path);
    std::size_t converged = 0, failed = 0;
    for (const SweepCell& c : result.cells) {
        converged += c.converged ? 1 : 0;
        failed += c.error.empty() ? 0 : 1;
    }
    out << "sweep " << to_string(cfg.criterion)
        << ": cells=" << result.cells.size() << " converged=" << converged
        << " errors=" << failed << " -> " << path << "\n";
}

void run_visited(const ScenarioConfig& cfg, std::ostream& out) {
    const UniformDecisionTable table =
        uniform_decision_table(cfg.criterion, cfg.group_a, cfg.group_b);
    const VisitedDecisions visited =
        visited_decisions(table, cfg.group_a, cfg.group_b, cfg.model, cfg.init);
    out << "visited " << to_string(cfg.criterion) << ":";
    for (const auto& [pair, epoch] : visited.visited) {
        out << " " << pair_text(pair);
    }
    out << " converged=" << pair_text(visited.converged_pair) << "\n";
}

void run_tradeoff(const ScenarioConfig& cfg, const RunOptions& opt,
                  std::ostream& out) {
    const std::vector<TradeoffRow> rows = tradeoff_curve(
        cfg.group_a, cfg.group_b, cfg.model, cfg.horizon_T, cfg.conv);
    const std::string path = resolve_out(opt, cfg.out);
    ensure_parent(path);
    emit_tradeoff(rows, path);
    out << "tradeoff:";
    for (const TradeoffRow& r : rows) {
        out << " " << to_string(r.criterion)
            << " avg_total_loss=" << format_value(r.avg_total_loss)
            << " final_alpha_a=" << format_value(r.final_alpha_a) << ";";
    }
    out << " -> " << path << "\n";
}

void run_quality(const ScenarioConfig& cfg, const RunOptions& opt,
                 std::ostream& out) {
    const QualityExperiment q =
        quality_experiment(cfg.group_a, cfg.group_b, cfg.criterion, cfg.model,
                           cfg.horizon_T, cfg.quality_seed);
    const std::string bayes_path = resolve_out(opt, cfg.out);
    const std::string learned_path = resolve_out(opt, cfg.out_learned);
    ensure_parent(bayes_path);
    ensure_parent(learned_path);
    emit_trajectory(q.bayes, bayes_path);
    emit_trajectory(q.learned, learned_path);
    out << "quality " << to_string(cfg.criterion)
        << ": steps=" << q.bayes.steps.size() << "/" << q.learned.steps.size()
        << " stop=" << stop_name(q.bayes.stop) << "/"
        << stop_name(q.learned.stop);
    if (!q.bayes.steps.empty() && !q.learned.steps.empty()) {
        out << " final_alpha_a=" << format_value(q.bayes.steps.back().alpha_a)
            << "/" << format_value(q.learned.steps.back().alpha_a);
    }
    out << " -> " << bayes_path << ", " << learned_path << "\n";
}

void run_oneshot(const ScenarioConfig& cfg, double ratio, std::ostream& out) {
    const double alpha_a = ratio / (1.0 + ratio);
    const double alpha_b = 1.0 - alpha_a;
    const DecisionPair pair =
        cfg.criterion == FairnessCriterion::MinMax
            ? minmax_solution(cfg.group_a, cfg.group_b)
            : one_shot(cfg.criterion, cfg.group_a, cfg.group_b, alpha_a,
                       alpha_b);
    out << decision_pair_json(pair, cfg.group_a, cfg.group_b) << "\n";
}

bool merge_ratio(const ScenarioConfig& cfg, const RunOptions& opt,
                 std::ostream& err, double& ratio) {
    if (opt.ratio) {
        ratio = *opt.ratio;
    } else if (cfg.oneshot_ratio) {
        ratio = *cfg.oneshot_ratio;
    } else {
        err << "error: experiment.ratio: required for oneshot runs\n";
        return false;
    }
    if (!(ratio > 0.0) || !std::isfinite(ratio)) {
        err << "error: experiment.ratio: must be a positive weight ratio\n";
        return false;
    }
    return true;
}

}  // namespace

int run(const std::string& config_path, const RunOptions& opt,
        std::ostream& out, std::ostream& err) {
    std::optional<ScenarioConfig> cfg;
    try {
        cfg.emplace(load_config(config_path));
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    if (opt.seed) {
        cfg->model.rng_seed = *opt.seed;
        cfg->quality_seed = *opt.seed;
    }
    double ratio = 0.0;
    if (cfg->experiment == ExperimentType::Oneshot &&
        !merge_ratio(*cfg, opt, err, ratio)) {
        return 1;
    }
    try {
        switch (cfg->experiment) {
            case ExperimentType::Simulate: run_simulate(*cfg, opt, out); break;
            case ExperimentType::Sweep: run_sweep(*cfg, opt, out); break;
            case ExperimentType::Visited: run_visited(*cfg, out); break;
            case ExperimentType::Tradeoff: run_tradeoff(*cfg, opt, out); break;
            case ExperimentType::Quality: run_quality(*cfg, opt, out); break;
            case ExperimentType::Oneshot: run_oneshot(*cfg, ratio, out); break;
        }
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

int validate_config(const std::string& config_path, std::ostream& out,
                    std::ostream& err) {
    try {
        const ScenarioConfig cfg = load_config(config_path);
        out << "ok: " << config_path << " (" << to_string(cfg.experiment)
            << ")\n";
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int oneshot(const std::string& config_path, double ratio, std::ostream& out,
            std::ostream& err) {
    std::optional<ScenarioConfig> cfg;
    try {
        cfg.emplace(load_config(config_path));
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    if (!cfg->has_criterion) {
        err << "error: criterion: this config names no criterion\n";
        return 1;
    }
    if (!(ratio > 0.0) || !std::isfinite(ratio)) {
        err << "error: --ratio must be a positive weight ratio\n";
        return 1;
    }
    try {
        run_oneshot(*cfg, ratio, out);
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace fairdyn
