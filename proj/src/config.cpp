#include <fairdyn/config.hpp>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fairdyn/errors.hpp>

namespace fairdyn {

const char* to_string(ExperimentType t) {
    switch (t) {
        case ExperimentType::Simulate: return "simulate";
        case ExperimentType::Sweep: return "sweep";
        case ExperimentType::Visited: return "visited";
        case ExperimentType::Oneshot: return "oneshot";
        case ExperimentType::Tradeoff: return "tradeoff";
        case ExperimentType::Quality: return "quality";
    }
    throw DomainError("unknown experiment type");
}

ExperimentType experiment_type_from_string(const std::string& name) {
    if (name == "simulate") return ExperimentType::Simulate;
    if (name == "sweep") return ExperimentType::Sweep;
    if (name == "visited") return ExperimentType::Visited;
    if (name == "oneshot") return ExperimentType::Oneshot;
    if (name == "tradeoff") return ExperimentType::Tradeoff;
    if (name == "quality") return ExperimentType::Quality;
    throw DomainError("unknown experiment type: " + name);
}

std::vector<std::pair<double, double>> SweepGrid::cells() const {
    const auto axis = [](double lo, double hi, int steps) {
        std::vector<double> v;
        v.reserve(static_cast<std::size_t>(steps));
        for (int i = 0; i < steps; ++i) {
            v.push_back(steps == 1 ? lo
                                   : lo + (hi - lo) * i / (steps - 1));
        }
        return v;
    };
    std::vector<std::pair<double, double>> out;
    for (double a : axis(beta_a_min, beta_a_max, beta_a_steps)) {
        for (double b : axis(beta_b_min, beta_b_max, beta_b_steps)) {
            out.emplace_back(a, b);
        }
    }
    return out;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t lo = 0, hi = s.size();
    while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
    while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
    return s.substr(lo, hi - lo);
}

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
              c == '.')) {
            return false;
        }
    }
    return true;
}

// Flat view of the file: full dotted path -> raw value text. Every read
// marks its key; finish() turns anything left over into an unknown-key
// rejection, so typos never pass silently.
class RawConfig {
public:
    explicit RawConfig(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') {
                    throw ConfigError("line " + std::to_string(lineno) +
                                      ": unterminated section header '" + line +
                                      "'");
                }
                section = trim(line.substr(1, line.size() - 2));
                if (!valid_name(section)) {
                    throw ConfigError("line " + std::to_string(lineno) +
                                      ": malformed section header '" + line +
                                      "'");
                }
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("line " + std::to_string(lineno) +
                                  ": expected 'key = value' or '[section]', "
                                  "got '" +
                                  line + "'");
            }
            const std::string key = trim(line.substr(0, eq));
            if (!valid_name(key) || key.find('.') != std::string::npos) {
                throw ConfigError("line " + std::to_string(lineno) +
                                  ": malformed key '" + key + "'");
            }
            const std::string path = section.empty() ? key : section + "." + key;
            if (!values_.emplace(path, trim(line.substr(eq + 1))).second) {
                throw ConfigError(path + ": duplicate key");
            }
        }
    }

    bool has(const std::string& path) const { return values_.count(path) != 0; }

    std::optional<std::string> get(const std::string& path) {
        const auto it = values_.find(path);
        if (it == values_.end()) return std::nullopt;
        used_.insert(path);
        return it->second;
    }

    std::string require(const std::string& path) {
        auto v = get(path);
        if (!v) throw ConfigError(path + ": required key is missing");
        return *v;
    }

    double require_num(const std::string& path) { return to_num(path, require(path)); }

    double num_or(const std::string& path, double dflt) {
        auto v = get(path);
        return v ? to_num(path, *v) : dflt;
    }

    long require_int(const std::string& path) { return to_int(path, require(path)); }

    long int_or(const std::string& path, long dflt) {
        auto v = get(path);
        return v ? to_int(path, *v) : dflt;
    }

    std::uint64_t u64_or(const std::string& path, std::uint64_t dflt) {
        auto v = get(path);
        if (!v) return dflt;
        const char* s = v->c_str();
        char* end = nullptr;
        errno = 0;
        const unsigned long long parsed = std::strtoull(s, &end, 10);
        if (end == s || *end != '\0' || errno == ERANGE || v->front() == '-') {
            throw ConfigError(path + ": not an unsigned integer: '" + *v + "'");
        }
        return parsed;
    }

    bool bool_or(const std::string& path, bool dflt) {
        auto v = get(path);
        if (!v) return dflt;
        if (*v == "true") return true;
        if (*v == "false") return false;
        throw ConfigError(path + ": expected true or false, got '" + *v + "'");
    }

    void forbid(const std::string& path, const std::string& reason) {
        if (has(path)) throw ConfigError(path + ": " + reason);
    }

    void forbid_section(const std::string& section, const std::string& reason) {
        const std::string prefix = section + ".";
        for (const auto& [path, value] : values_) {
            if (path.compare(0, prefix.size(), prefix) == 0) {
                throw ConfigError(section + ": " + reason);
            }
        }
    }

    void finish() const {
        for (const auto& [path, value] : values_) {
            if (!used_.count(path)) throw ConfigError(path + ": unknown key");
        }
    }

private:
    double to_num(const std::string& path, const std::string& raw) const {
        const char* s = raw.c_str();
        char* end = nullptr;
        const double v = std::strtod(s, &end);
        if (end == s || *end != '\0' || !std::isfinite(v)) {
            throw ConfigError(path + ": not a number: '" + raw + "'");
        }
        return v;
    }

    long to_int(const std::string& path, const std::string& raw) const {
        const char* s = raw.c_str();
        char* end = nullptr;
        errno = 0;
        const long v = std::strtol(s, &end, 10);
        if (end == s || *end != '\0' || errno == ERANGE) {
            throw ConfigError(path + ": not an integer: '" + raw + "'");
        }
        return v;
    }

    std::map<std::string, std::string> values_;
    std::set<std::string> used_;
};

SubgroupDistribution build_dist(RawConfig& raw, const std::string& path) {
    const std::string kind = raw.require(path + ".kind");
    try {
        if (kind == "uniform") {
            const double lo = raw.require_num(path + ".lo");
            const double hi = raw.require_num(path + ".hi");
            return SubgroupDistribution::uniform(lo, hi);
        }
        if (kind == "truncnormal") {
            const double mu = raw.require_num(path + ".mu");
            const double sigma = raw.require_num(path + ".sigma");
            const double lo = raw.require_num(path + ".lo");
            const double hi = raw.require_num(path + ".hi");
            return SubgroupDistribution::truncated_normal(mu, sigma, lo, hi);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    throw ConfigError(path + ".kind: unknown distribution kind '" + kind +
                      "' (uniform, truncnormal)");
}

GroupSpec build_group(RawConfig& raw, const std::string& path) {
    const double g0 = raw.require_num(path + ".g0");
    const double g1 = raw.require_num(path + ".g1");
    SubgroupDistribution f0 = build_dist(raw, path + ".f0");
    SubgroupDistribution f1 = build_dist(raw, path + ".f1");
    try {
        return GroupSpec(g0, g1, std::move(f0), std::move(f1));
    } catch (const Error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::vector<std::pair<double, double>> parse_knots(const std::string& path,
                                                   const std::string& raw) {
    std::vector<std::pair<double, double>> knots;
    std::istringstream in(raw);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw ConfigError(path + ": expected loss:retention pairs, got '" +
                              item + "'");
        }
        const auto field = [&](const std::string& part) {
            const std::string t = trim(part);
            const char* s = t.c_str();
            char* end = nullptr;
            const double v = std::strtod(s, &end);
            if (end == s || *end != '\0' || !std::isfinite(v)) {
                throw ConfigError(path + ": not a number: '" + t + "'");
            }
            return v;
        };
        knots.emplace_back(field(item.substr(0, colon)),
                           field(item.substr(colon + 1)));
    }
    return knots;
}

DynamicsModel build_dynamics(RawConfig& raw, ExperimentType type) {
    DynamicsModel model;
    const std::string kind_name = raw.require("dynamics.kind");
    try {
        model.kind = dynamics_kind_from_string(kind_name);
    } catch (const Error& e) {
        throw ConfigError(std::string("dynamics.kind: ") + e.what());
    }
    if (type == ExperimentType::Quality &&
        model.kind != DynamicsKind::ArrivalCoupled) {
        throw ConfigError(
            "dynamics.kind: quality experiments need arrival_coupled dynamics, "
            "got '" +
            kind_name + "'");
    }
    if (type == ExperimentType::Visited && model.kind != DynamicsKind::Accuracy) {
        throw ConfigError(
            "dynamics.kind: visited walks need accuracy dynamics, got '" +
            kind_name + "'");
    }

    const std::string retention = raw.require("dynamics.retention");
    if (retention == "one_minus_x") {
        model.retention = RetentionFn::one_minus_x();
    } else if (retention == "one_minus_x_squared") {
        model.retention = RetentionFn::one_minus_x_squared();
    } else if (retention == "table") {
        const std::string knots = raw.require("dynamics.knots");
        try {
            model.retention = RetentionFn::table(parse_knots("dynamics.knots", knots));
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(std::string("dynamics.knots: ") + e.what());
        }
    } else {
        throw ConfigError("dynamics.retention: unknown retention '" + retention +
                          "' (one_minus_x, one_minus_x_squared, table)");
    }
    if (retention != "table") {
        raw.forbid("dynamics.knots", "retention presets take no knot table");
    }

    if (model.kind == DynamicsKind::RandomArrival) {
        raw.forbid("dynamics.beta_a",
                   "random arrivals draw from arrival_mean_a/arrival_mean_b");
        raw.forbid("dynamics.beta_b",
                   "random arrivals draw from arrival_mean_a/arrival_mean_b");
        model.arrival_mean_a = raw.require_num("dynamics.arrival_mean_a");
        model.arrival_mean_b = raw.require_num("dynamics.arrival_mean_b");
        model.rng_seed = raw.u64_or("dynamics.seed", 0);
    } else {
        raw.forbid("dynamics.arrival_mean_a",
                   "only random_arrival dynamics draw arrivals");
        raw.forbid("dynamics.arrival_mean_b",
                   "only random_arrival dynamics draw arrivals");
        raw.forbid("dynamics.seed", "only random_arrival dynamics use a seed");
        model.beta_a = raw.require_num("dynamics.beta_a");
        model.beta_b = raw.require_num("dynamics.beta_b");
    }
    try {
        validate(model);
    } catch (const Error& e) {
        throw ConfigError(std::string("dynamics: ") + e.what());
    }
    return model;
}

PopulationState build_init(RawConfig& raw, const DynamicsModel& model) {
    const bool near_empty = raw.bool_or("init.near_empty", false);
    const bool subgroup = model.kind == DynamicsKind::Subgroup;
    if (near_empty) {
        if (subgroup) {
            throw ConfigError(
                "init.near_empty: subgroup dynamics need per-subgroup counts");
        }
        for (const char* key : {"init.n_a", "init.n_b", "init.n_a0", "init.n_a1",
                                "init.n_b0", "init.n_b1"}) {
            raw.forbid(key, "near_empty starts from zero counts; remove this key");
        }
        return PopulationState();
    }
    try {
        if (subgroup) {
            raw.forbid("init.n_a", "subgroup dynamics take per-subgroup counts only");
            raw.forbid("init.n_b", "subgroup dynamics take per-subgroup counts only");
            const double a0 = raw.require_num("init.n_a0");
            const double a1 = raw.require_num("init.n_a1");
            const double b0 = raw.require_num("init.n_b0");
            const double b1 = raw.require_num("init.n_b1");
            return PopulationState(a0 + a1, b0 + b1, {a0, a1, b0, b1});
        }
        for (const char* key : {"init.n_a0", "init.n_a1", "init.n_b0", "init.n_b1"}) {
            raw.forbid(key, "only subgroup dynamics track per-subgroup counts");
        }
        return PopulationState(raw.require_num("init.n_a"),
                               raw.require_num("init.n_b"));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("init: ") + e.what());
    }
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
    RawConfig raw(text);

    const std::string type_name = raw.require("experiment.type");
    ExperimentType type;
    try {
        type = experiment_type_from_string(type_name);
    } catch (const Error& e) {
        throw ConfigError(std::string("experiment.type: ") + e.what());
    }

    ScenarioConfig cfg(build_group(raw, "group_a"), build_group(raw, "group_b"));
    cfg.experiment = type;

    if (type == ExperimentType::Tradeoff) {
        raw.forbid("criterion",
                   "tradeoff runs compare the simple, eqlos, and minmax "
                   "baselines; remove this key");
    } else {
        const std::string name = raw.require("criterion");
        try {
            cfg.criterion = criterion_from_string(name);
        } catch (const Error& e) {
            throw ConfigError(std::string("criterion: ") + e.what());
        }
        cfg.has_criterion = true;
        if (type == ExperimentType::Visited &&
            (cfg.criterion == FairnessCriterion::EqLos ||
             cfg.criterion == FairnessCriterion::MinMax)) {
            throw ConfigError(
                "criterion: visited walks need a mapped criterion (simple, "
                "eqopt, statpar)");
        }
        if (type == ExperimentType::Quality &&
            cfg.criterion == FairnessCriterion::MinMax) {
            throw ConfigError(
                "criterion: quality experiments cover the constrained criteria "
                "only");
        }
    }

    if (type == ExperimentType::Oneshot) {
        raw.forbid_section("dynamics", "oneshot solves need no dynamics block");
    } else {
        cfg.model = build_dynamics(raw, type);
    }

    if (type == ExperimentType::Visited) {
        const bool all_uniform =
            cfg.group_a.f0.kind() == DistKind::Uniform &&
            cfg.group_a.f1.kind() == DistKind::Uniform &&
            cfg.group_b.f0.kind() == DistKind::Uniform &&
            cfg.group_b.f1.kind() == DistKind::Uniform;
        if (!all_uniform) {
            throw ConfigError(
                "experiment.type: visited walks need uniform feature "
                "distributions in both groups");
        }
    }

    switch (type) {
        case ExperimentType::Simulate:
        case ExperimentType::Visited:
            cfg.init = build_init(raw, cfg.model);
            break;
        case ExperimentType::Sweep:
            raw.forbid_section("init", "sweep cells start at their arrival counts");
            break;
        case ExperimentType::Tradeoff:
        case ExperimentType::Quality:
            raw.forbid_section("init",
                               "these runs start at the arrival counts");
            break;
        case ExperimentType::Oneshot:
            raw.forbid_section("init", "oneshot solves need no init block");
            break;
    }
    if (type == ExperimentType::Visited) {
        const double cross_a = cfg.init.n_a * cfg.model.beta_b;
        const double cross_b = cfg.init.n_b * cfg.model.beta_a;
        const double scale = std::max({1.0, std::abs(cross_a), std::abs(cross_b)});
        if (std::abs(cross_a - cross_b) > 1e-9 * scale) {
            throw ConfigError(
                "init.n_a: visited walks start at the arrival proportions "
                "(n_a/n_b must equal beta_a/beta_b)");
        }
    }

    if (type == ExperimentType::Visited || type == ExperimentType::Oneshot) {
        const std::string reason =
            type == ExperimentType::Visited
                ? "the closed-form walk runs to its fixed point; remove this block"
                : "oneshot solves need no horizon block";
        raw.forbid_section("horizon", reason);
    } else {
        cfg.horizon_T = raw.require_int("horizon.T");
        const long min_T = type == ExperimentType::Quality ? 0 : 1;
        if (cfg.horizon_T < min_T) {
            throw ConfigError("horizon.T: must be at least " +
                              std::to_string(min_T));
        }
        cfg.conv.eps = raw.num_or("horizon.eps", cfg.conv.eps);
        if (!(cfg.conv.eps > 0.0)) {
            throw ConfigError("horizon.eps: must be positive");
        }
        const long window = raw.int_or("horizon.window", cfg.conv.window);
        if (window < 1) throw ConfigError("horizon.window: must be at least 1");
        cfg.conv.window = static_cast<int>(window);
    }

    if (type == ExperimentType::Sweep) {
        cfg.sweep.beta_a_min = raw.require_num("experiment.beta_a_min");
        cfg.sweep.beta_a_max = raw.require_num("experiment.beta_a_max");
        cfg.sweep.beta_a_steps =
            static_cast<int>(raw.require_int("experiment.beta_a_steps"));
        cfg.sweep.beta_b_min = raw.require_num("experiment.beta_b_min");
        cfg.sweep.beta_b_max = raw.require_num("experiment.beta_b_max");
        cfg.sweep.beta_b_steps =
            static_cast<int>(raw.require_int("experiment.beta_b_steps"));
        const auto check_axis = [](const char* name, double lo, double hi,
                                   int steps) {
            const std::string p = std::string("experiment.") + name;
            if (!(lo > 0.0)) throw ConfigError(p + "_min: must be positive");
            if (hi < lo) {
                throw ConfigError(p + "_max: must be at least " + p + "_min");
            }
            if (steps < 1) throw ConfigError(p + "_steps: must be at least 1");
        };
        check_axis("beta_a", cfg.sweep.beta_a_min, cfg.sweep.beta_a_max,
                   cfg.sweep.beta_a_steps);
        check_axis("beta_b", cfg.sweep.beta_b_min, cfg.sweep.beta_b_max,
                   cfg.sweep.beta_b_steps);
    } else {
        for (const char* key :
             {"experiment.beta_a_min", "experiment.beta_a_max",
              "experiment.beta_a_steps", "experiment.beta_b_min",
              "experiment.beta_b_max", "experiment.beta_b_steps"}) {
            raw.forbid(key, "only sweeps take a beta grid");
        }
    }

    if (type == ExperimentType::Oneshot) {
        if (raw.has("experiment.ratio")) {
            const double ratio = raw.require_num("experiment.ratio");
            if (!(ratio > 0.0)) {
                throw ConfigError(
                    "experiment.ratio: must be a positive weight ratio");
            }
            cfg.oneshot_ratio = ratio;
        }
    } else {
        raw.forbid("experiment.ratio", "only oneshot solves take a weight ratio");
    }

    if (type == ExperimentType::Quality) {
        cfg.quality_seed = raw.u64_or("experiment.seed", 0);
    } else {
        raw.forbid("experiment.seed", "only quality experiments draw samples");
    }

    switch (type) {
        case ExperimentType::Simulate:
            cfg.out = raw.get("experiment.out").value_or("trajectory.csv");
            break;
        case ExperimentType::Sweep:
            cfg.out = raw.get("experiment.out").value_or("sweep.csv");
            break;
        case ExperimentType::Tradeoff:
            cfg.out = raw.get("experiment.out").value_or("tradeoff.csv");
            break;
        case ExperimentType::Quality:
            cfg.out = raw.get("experiment.out").value_or("quality_bayes.csv");
            cfg.out_learned =
                raw.get("experiment.out_learned").value_or("quality_learned.csv");
            break;
        case ExperimentType::Visited:
        case ExperimentType::Oneshot:
            raw.forbid("experiment.out",
                       "this experiment prints to stdout and writes no files");
            break;
    }
    if (type != ExperimentType::Quality) {
        raw.forbid("experiment.out_learned",
                   "only quality experiments write a second trajectory");
    }
    if (!cfg.out.empty() && cfg.out == cfg.out_learned) {
        throw ConfigError(
            "experiment.out_learned: must differ from experiment.out");
    }

    raw.finish();
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("failed reading config file '" + path + "'");
    return parse_config(buf.str());
}

}  // namespace fairdyn
