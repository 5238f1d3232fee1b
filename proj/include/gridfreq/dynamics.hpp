#pragma once

#include "gridfreq/controllers.hpp"
#include "gridfreq/powerflow.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gridfreq {

/// Step change of the injection at one node (node id, p.u.), applied at the
/// first step boundary with t >= time.
struct Disturbance {
    double time = 0.0;
    int node = 0;
    double delta = 0.0;

    bool operator==(const Disturbance&) const = default;
};

/// Full closed-loop state. Passive-node frequencies are not defined and kept at 0.
struct SimState {
    AngleVector theta;
    std::vector<double> omega;
    std::vector<double> injections;
    ControllerState ctrl;
    double t = 0.0;
    long step = 0;
};

enum class Integrator { Euler, Rk4 };

struct SimOptions {
    double dt = 1e-3;
    double t_max = 60.0;
    std::size_t stride = 10;
    Integrator integrator = Integrator::Euler;
    NewtonOptions newton;
};

struct Sample {
    double t = 0.0;
    AngleVector theta;
    std::vector<double> omega;
    std::vector<double> u;
    double u_s = 0.0;
    double p_s = 0.0;
    double price = 0.0;
    std::vector<double> eta;
    std::vector<double> lambda;
    std::vector<double> marginal_costs;  // per V_K
    std::vector<double> exports;         // per area; empty without a partition
};

struct Trajectory {
    double dt = 0.0;
    std::size_t stride = 1;
    std::string law;
    std::vector<Sample> samples;
    /// u_s and P_s at every integration step, for the aggregate frequency trace.
    std::vector<double> step_u_s;
    std::vector<double> step_p_s;
    /// Positions in V_K that share a price (empty for the decentralized law).
    std::vector<std::vector<std::size_t>> price_groups;
    std::vector<double> export_nominal;
};

struct Derivatives {
    std::vector<double> theta_dot;  // machines and frequency-dependent nodes
    std::vector<double> omega_dot;  // machines
};

/// Swing-equation right-hand side at `state` with inputs `u` (per node).
Derivatives derivatives(const Network& net, const SimState& state, std::span<const double> u);

/// State at an equilibrium with the given injections.
SimState initial_state(const Network& net, const Controller& ctrl, const Equilibrium& eq,
                       std::span<const double> injections);

/// Solves the passive angles, recomputes the controller outputs and the
/// frequencies of the frequency-dependent nodes from the differential states.
void complete_algebraic(SimState& state, const Network& net, const Controller& ctrl, const NewtonOptions& opts = {});

/// Advances the closed loop by one step of size dt. Throws AlgebraicDivergence
/// when the passive-node solve fails.
SimState step(const SimState& state, const Network& net, const Controller& ctrl, double dt,
              Integrator integrator = Integrator::Euler, const NewtonOptions& opts = {});

/// Runs a scenario from the pre-disturbance equilibrium of `net`.
Trajectory simulate(const Network& net, const ControllerSpec& spec, std::span<const Disturbance> disturbances,
                    const SimOptions& opts = {});
Trajectory simulate(const Network& net, const Controller& ctrl, std::span<const Disturbance> disturbances,
                    const SimOptions& opts = {});

/// phi_i = theta_i - theta_ref.
AngleVector to_phi_coordinates(const Network& net, std::span<const double> theta);

/// Aggregate frequency omega_s at each recorded sample.
std::vector<double> abstract_frequency_samples(const Network& net, const Trajectory& traj);

}  // namespace gridfreq
