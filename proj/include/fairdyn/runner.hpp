#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace fairdyn {

struct RunOptions {
    int jobs = 0;                       // <= 0 picks the hardware thread count
    std::string out_dir;                // prefix for relative output paths
    std::optional<std::uint64_t> seed;  // overrides the configured seed
    std::optional<double> ratio;        // overrides experiment.ratio
};

// Loads the config, executes its experiment, writes any output files, and
// prints a one-line summary. Returns 0 on success, 1 when the config is
// rejected (the message names the offending field), 2 on a runtime failure.
int run(const std::string& config_path, const RunOptions& opt,
        std::ostream& out, std::ostream& err);

// Parses and validates only; same 0/1 split as run().
int validate_config(const std::string& config_path, std::ostream& out,
                    std::ostream& err);

// Ignores the configured experiment and solves one weighted problem at the
// given alpha_a/alpha_b ratio, printing the pair as one JSON line.
int oneshot(const std::string& config_path, double ratio, std::ostream& out,
            std::ostream& err);

}  // namespace fairdyn
