#pragma once

#include "gridfreq/controllers.hpp"
#include "gridfreq/dynamics.hpp"

#include <optional>
#include <span>
#include <vector>

namespace gridfreq {

/// U(phi) = sum over lines B_ij (1 - cos(phi_i - phi_j)).
double potential_U(const Network& net, std::span<const double> phi);
/// Gradient of U with respect to every node angle (the nodal flows).
std::vector<double> potential_gradient(const Network& net, std::span<const double> phi);

/// Equilibrium and weight for the energy function of the centralized PIAC loop.
struct LyapunovConfig {
    AngleVector phi_star;
    double eta_star = 0.0;
    double lambda_star = 0.0;
    double k = 0.0;
    double alpha = 0.0;
    std::vector<CostModel> costs;
};

/// Lower bound 1/(k * min D_i) over the controller nodes.
double lyapunov_alpha_bound(const Network& net, double k);

/// Config around the equilibrium for `injections`; alpha defaults to twice the bound.
LyapunovConfig make_lyapunov_config(const Network& net, const ControllerSpec& spec, std::span<const double> injections,
                                    std::optional<double> alpha = std::nullopt);

struct LyapunovValue {
    double v = 0.0;
    double v1 = 0.0;
    double v2 = 0.0;
    double v3 = 0.0;
};

/// V = V1 + alpha V2 + V3 at the given angles (any reference), machine frequencies, eta and lambda.
LyapunovValue lyapunov_V(const Network& net, const LyapunovConfig& cfg, std::span<const double> theta,
                         std::span<const double> omega, double eta, double lambda);
LyapunovValue lyapunov_V(const Network& net, const LyapunovConfig& cfg, const Sample& sample);

struct DescentReport {
    double max_increase_rate = 0.0;  // max over sample pairs of max(0, dV/dt)
    double descending_fraction = 1.0;
    std::size_t violations = 0;       // pairs with dV/dt above tolerance
    double tolerance = 0.0;
    double alpha_bound = 0.0;
    bool alpha_ok = true;
    std::vector<double> values;  // V at every sample
};

/// Differences V along the trajectory; tolerance 1e-6 + 10 dt unless given.
DescentReport check_lyapunov_descent(const Network& net, const LyapunovConfig& cfg, const Trajectory& traj,
                                     std::optional<double> tolerance = std::nullopt);

struct MetricsOptions {
    double settling_threshold = 1e-4;
};

struct Metrics {
    double nadir_hz = 0.0;
    double max_overshoot_us = 0.0;
    std::optional<double> settling_time;
    double marginal_spread = 0.0;         // NaN when the law does not dispatch
    std::vector<double> export_deviation; // per area; NaN when unsettled
    double final_u_s = 0.0;
    double final_p_s = 0.0;
    double final_max_abs_omega = 0.0;
};

/// Nadir is taken over machine frequencies; settling uses every machine and
/// frequency-dependent node.
Metrics compute_metrics(const Trajectory& traj, const Network& net, const MetricsOptions& opts = {});

}  // namespace gridfreq
