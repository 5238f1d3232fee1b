#pragma once

#include "gridfreq/controller_spec.hpp"
#include "gridfreq/powerflow.hpp"

#include <span>
#include <vector>

namespace gridfreq {

/// Closed-loop equilibrium: all frequencies zero, inputs economically dispatched.
struct Equilibrium {
    AngleVector theta;           // canonical order, reference angle 0
    std::vector<double> u;       // per node
    double u_s = 0.0;
    std::vector<double> eta;     // integral states of the law (empty when it has none)
    std::vector<double> lambda;  // prices of the law (empty when it has none)
    double residual = 0.0;       // |sum P_i + sum u_i|
    bool secure = true;
};

/// Equilibrium of the closed loop for the given injections (defaults to the
/// case injections). Propagates dispatch and power-flow errors.
Equilibrium find_equilibrium(const Network& net, const ControllerSpec& spec, std::span<const double> injections,
                             const NewtonOptions& opts = {});
Equilibrium find_equilibrium(const Network& net, const ControllerSpec& spec, const NewtonOptions& opts = {});

/// Angles of the economically dispatched operating point: the imbalance
/// sum P_i is cleared over V_K and the power flow is solved from a flat start.
AngleVector operating_point(const Network& net, std::span<const CostModel> costs, std::span<const double> injections,
                            const NewtonOptions& opts = {});

}  // namespace gridfreq
