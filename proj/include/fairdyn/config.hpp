#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <fairdyn/dynamics.hpp>
#include <fairdyn/fairsolve.hpp>
#include <fairdyn/horizon.hpp>
#include <fairdyn/popmodel.hpp>

namespace fairdyn {

enum class ExperimentType { Simulate, Sweep, Visited, Oneshot, Tradeoff, Quality };

const char* to_string(ExperimentType t);
ExperimentType experiment_type_from_string(const std::string& name);

// Rectangular arrival-rate grid for sweeps; cells() lists it with the
// beta_a axis outermost, which is also the row order of the emitted CSV.
struct SweepGrid {
    double beta_a_min = 0.0;
    double beta_a_max = 0.0;
    int beta_a_steps = 0;
    double beta_b_min = 0.0;
    double beta_b_max = 0.0;
    int beta_b_steps = 0;

    std::vector<std::pair<double, double>> cells() const;
};

// A parsed and fully validated scenario: every contained object already
// passed its own construction checks, so downstream code can run it without
// re-validating. Which fields are meaningful depends on `experiment`.
struct ScenarioConfig {
    ScenarioConfig(GroupSpec a, GroupSpec b)
        : group_a(std::move(a)), group_b(std::move(b)) {}

    GroupSpec group_a;
    GroupSpec group_b;
    FairnessCriterion criterion = FairnessCriterion::Simple;
    bool has_criterion = false;  // tradeoff configs name no criterion
    DynamicsModel model;
    PopulationState init;
    long horizon_T = 0;
    ConvergenceSpec conv;
    ExperimentType experiment = ExperimentType::Simulate;
    SweepGrid sweep;
    std::optional<double> oneshot_ratio;
    std::uint64_t quality_seed = 0;
    std::string out;          // primary output path, empty when the type writes none
    std::string out_learned;  // second trajectory of a quality run
};

// Parses the INI-style config text: `[section]` headers, `key = value`
// lines, `#` comments. The whole schema is checked before anything heavy
// runs; violations raise ConfigError with the offending field path in the
// message, unknown keys included.
ScenarioConfig parse_config(const std::string& text);

// Reads the file (IoError when that fails) and parses it.
ScenarioConfig load_config(const std::string& path);

}  // namespace fairdyn
