#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qmbp/branching_law.hpp"

namespace qmbp {

/// Tolerance overrides; defaults reproduce the documented pipeline behavior.
struct Tolerances {
    double hardy_rel_tol = 1e-10;
    double eigen_rel_tol = 1e-8;
    double ctmc_tol = 1e-13;       ///< Poisson tail tolerance per step
};

/// Parsed run configuration. The law is given either as an explicit rate
/// list or through one of the two-parameter/three-parameter families, which
/// expand to explicit rates before validation.
struct RunConfig {
    std::vector<double> rates;
    std::set<std::string> pipelines;  ///< subset of validate/hardy/bounds/eigen/ctmc
    Tolerances tolerances;
    std::filesystem::path out_dir;
    std::optional<std::string> phi_csv;
    std::optional<std::string> eigenfunction_csv;
    std::optional<std::string> survival_csv;
    std::optional<std::string> generator_dump;
    std::optional<int> phi_samples;   ///< resample the phi curve to this many rows
    std::uint64_t seed = 0;
    int ctmc_cap = 128;               ///< doubled internally for the acceptance run
    int mc_paths = 0;                 ///< 0 disables the Monte Carlo channel

    /// Parse a JSON document; throws Error{config_parse} on malformed input.
    static RunConfig from_json_text(const std::string& text);
};

struct RunReport {
    std::string json;      ///< canonical serialized report (sorted keys)
    bool all_checks_pass = false;
    int checks_run = 0;
};

/// Execute the requested pipelines in dependency order, cross-check the
/// results against each other, write any requested CSV curves into out_dir,
/// and return the serialized report. Reruns with the same config are
/// byte-identical.
RunReport run(const RunConfig& config);

/// Write the report next to the curves as report.json. Returns the path.
std::filesystem::path write_report(const RunReport& report, const std::filesystem::path& out_dir);

}  // namespace qmbp
