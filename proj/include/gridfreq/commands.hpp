#pragma once

#include "gridfreq/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gridfreq {

/// Command-line settings that take precedence over the scenario file.
struct Overrides {
    std::optional<std::filesystem::path> case_path;
    std::optional<std::filesystem::path> out;
    std::optional<double> dt;
    std::optional<double> t_max;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> controller;
    std::optional<double> k;
};

void apply_overrides(Scenario& sc, const Overrides& ov);

/// Concurrency cap from GRIDFREQ_THREADS (hardware concurrency when unset or invalid).
std::size_t runner_threads();

/// Runs scenarios concurrently; results are returned in input order.
std::vector<RunResult> run_all(const std::vector<Scenario>& scenarios, std::size_t threads);

/// Each command returns the process exit code: 0 on success, 1 on any error.
int cmd_simulate(const std::filesystem::path& scenario, const Overrides& ov, bool relative_frequency,
                 std::ostream& out, std::ostream& err);
int cmd_compare(const std::vector<std::filesystem::path>& scenarios, const Overrides& ov, std::ostream& out,
                std::ostream& err);
/// `param` is one of k, k_GB, dt.
int cmd_sweep(const std::filesystem::path& scenario, const std::string& param, const std::vector<double>& values,
              const Overrides& ov, std::ostream& out, std::ostream& err);
int cmd_validate_case(const std::filesystem::path& case_path, std::ostream& out, std::ostream& err);

}  // namespace gridfreq
