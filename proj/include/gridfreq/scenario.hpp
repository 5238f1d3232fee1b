#pragma once

#include "gridfreq/analysis.hpp"
#include "gridfreq/dynamics.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gridfreq {

/// Communication link between two controller nodes, by node id.
struct LinkConfig {
    int a = 0;
    int b = 0;
    double w = 1.0;

    bool operator==(const LinkConfig&) const = default;
};

struct ControllerConfig {
    std::string law = "piac";
    std::optional<double> k;          // law default when absent
    std::vector<double> k_areas;      // piac_multi; falls back to k
    std::optional<int> node;          // agc measured node id
    std::map<int, double> weights;    // gb; empty means uniform
    std::string topology = "ring";    // dai: "ring" or "links"
    double w = 1.0;                   // dai ring weight
    std::vector<LinkConfig> links;    // dai, topology "links"
    double barrier_mu = 1e-3;
};

struct Scenario {
    std::filesystem::path source;     // scenario file, empty for in-memory scenarios
    std::filesystem::path case_path;  // resolved against the scenario directory
    ControllerConfig controller;
    std::vector<Disturbance> disturbances;
    double dt = 1e-3;
    double t_max = 60.0;
    std::size_t stride = 10;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out = "out";
    double settling_threshold = 1e-4;
};

/// Paths inside the document are resolved against `base_dir`.
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

/// Default gain of a law: 10 for the PIAC family, 60 for AGC, GB and DAI.
double default_gain(std::string_view law);
bool is_known_law(std::string_view law);

/// n draws uniform on (0, 1) from a 64-bit Mersenne twister.
std::vector<double> draw_alphas(std::uint64_t seed, std::size_t n);

/// Loads the case and, when a seed is given, redraws every controller alpha
/// in canonical controller order.
Network prepare_network(const Scenario& sc);
ControllerSpec build_spec(const Scenario& sc, const Network& net);

struct RunResult {
    Scenario scenario;
    Network net;
    ControllerSpec spec;
    std::vector<std::size_t> actuated;
    Trajectory traj;
    Metrics metrics;
    std::optional<DescentReport> lyapunov;  // centralized PIAC only
};

RunResult run_scenario(const Scenario& sc);

/// Shortest round-trip decimal, locale independent; "nan", "inf", "-inf" otherwise.
std::string format_number(double v);

void write_trajectory_csv(std::ostream& os, const RunResult& run);
void write_relative_frequency_csv(std::ostream& os, const RunResult& run);
std::string summary_json(const RunResult& run);

}  // namespace gridfreq
