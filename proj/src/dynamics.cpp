#include "gridfreq/dynamics.hpp"

#include "gridfreq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gridfreq {

namespace {

std::vector<std::size_t> passive_nodes(const Network& net) {
    std::vector<std::size_t> out(net.passive_count());
    std::iota(out.begin(), out.end(), net.active_count());
    return out;
}

/// Differential states packed as [theta of V_M u V_F, omega of V_M, controller variables].
std::vector<double> pack(const Network& net, const Controller& ctrl, const SimState& s) {
    std::vector<double> y;
    y.reserve(net.active_count() + net.machine_count() + ctrl.dynamic_size(s.ctrl));
    y.insert(y.end(), s.theta.begin(), s.theta.begin() + static_cast<std::ptrdiff_t>(net.active_count()));
    y.insert(y.end(), s.omega.begin(), s.omega.begin() + static_cast<std::ptrdiff_t>(net.machine_count()));
    const auto x = ctrl.dynamic(s.ctrl);
    y.insert(y.end(), x.begin(), x.end());
    return y;
}

void unpack(const Network& net, const Controller& ctrl, std::span<const double> y, SimState& s) {
    const std::size_t a = net.active_count();
    const std::size_t m = net.machine_count();
    std::copy_n(y.begin(), a, s.theta.begin());
    std::copy_n(y.begin() + static_cast<std::ptrdiff_t>(a), m, s.omega.begin());
    auto x = ctrl.dynamic(s.ctrl);
    std::copy_n(y.begin() + static_cast<std::ptrdiff_t>(a + m), x.size(), x.begin());
}

/// Time derivative of the packed state; `s` must be algebraically complete.
std::vector<double> rhs(const Network& net, const Controller& ctrl, const SimState& s) {
    const std::size_t a = net.active_count();
    const std::size_t m = net.machine_count();
    const auto flows = nodal_flows(net, s.theta);
    std::vector<double> dy(a + m + ctrl.dynamic_size(s.ctrl), 0.0);
    for (std::size_t i = 0; i < a; ++i) dy[i] = s.omega[i];
    for (std::size_t i = 0; i < m; ++i) {
        const Node& n = net.node(i);
        dy[a + i] = (s.injections[i] - n.droop * s.omega[i] - flows[i] + s.ctrl.u[i]) / n.inertia;
    }
    const Measurements meas{s.theta, s.omega, flows};
    ctrl.rates(s.ctrl, meas, std::span<double>(dy).subspan(a + m));
    return dy;
}

template <typename Fn>
auto with_time(double t, Fn&& fn) {
    try {
        return fn();
    } catch (const AlgebraicDivergence&) {
        throw;
    } catch (const Infeasible& e) {
        throw Infeasible("at t=" + std::to_string(t) + " s: " + e.what());
    } catch (const DomainError& e) {
        throw DomainError("at t=" + std::to_string(t) + " s: " + e.what());
    } catch (const NonConvergence& e) {
        throw NonConvergence("at t=" + std::to_string(t) + " s: " + e.what());
    }
}

}  // namespace

Derivatives derivatives(const Network& net, const SimState& state, std::span<const double> u) {
    const auto flows = nodal_flows(net, state.theta);
    Derivatives d;
    d.theta_dot.resize(net.active_count());
    d.omega_dot.resize(net.machine_count());
    for (std::size_t i = 0; i < net.active_count(); ++i) {
        const Node& n = net.node(i);
        if (net.is_machine(i)) {
            d.theta_dot[i] = state.omega[i];
            d.omega_dot[i] = (state.injections[i] - n.droop * state.omega[i] - flows[i] + u[i]) / n.inertia;
        } else {
            d.theta_dot[i] = (state.injections[i] - flows[i] + u[i]) / n.droop;
        }
    }
    return d;
}

void complete_algebraic(SimState& state, const Network& net, const Controller& ctrl, const NewtonOptions& opts) {
    if (net.passive_count() > 0) {
        const auto unknown = passive_nodes(net);
        try {
            state.theta = solve_algebraic(net, state.injections, std::move(state.theta), unknown, opts).theta;
        } catch (const NonConvergence& e) {
            throw AlgebraicDivergence(state.t, e.what());
        } catch (const SingularJacobian& e) {
            throw AlgebraicDivergence(state.t, e.what());
        }
    }
    ctrl.update_outputs(state.ctrl, state.omega);
    const auto flows = nodal_flows(net, state.theta);
    for (std::size_t i = net.machine_count(); i < net.active_count(); ++i) {
        state.omega[i] = (state.injections[i] - flows[i] + state.ctrl.u[i]) / net.node(i).droop;
    }
}

SimState initial_state(const Network& net, const Controller& ctrl, const Equilibrium& eq,
                       std::span<const double> injections) {
    if (injections.size() != net.size()) throw ValidationError("injection vector has wrong size");
    SimState s;
    s.theta = eq.theta;
    s.omega.assign(net.size(), 0.0);
    s.injections.assign(injections.begin(), injections.end());
    s.ctrl = ctrl.initial_state(eq);
    complete_algebraic(s, net, ctrl);
    return s;
}

SimState step(const SimState& state, const Network& net, const Controller& ctrl, double dt, Integrator integrator,
              const NewtonOptions& opts) {
    if (!(dt > 0.0)) throw ValidationError("time step must be positive");
    SimState next = state;
    next.step = state.step + 1;
    next.t = static_cast<double>(next.step) * dt;
    const auto y0 = pack(net, ctrl, state);
    std::vector<double> y(y0.size());

    if (integrator == Integrator::Euler) {
        const auto k1 = rhs(net, ctrl, state);
        for (std::size_t j = 0; j < y.size(); ++j) y[j] = y0[j] + dt * k1[j];
    } else {
        SimState stage = state;
        auto eval_at = [&](const std::vector<double>& k, double h, double t) {
            for (std::size_t j = 0; j < y.size(); ++j) y[j] = y0[j] + h * k[j];
            stage.t = t;
            unpack(net, ctrl, y, stage);
            complete_algebraic(stage, net, ctrl, opts);
            return rhs(net, ctrl, stage);
        };
        const auto k1 = rhs(net, ctrl, state);
        const auto k2 = eval_at(k1, dt / 2.0, state.t + dt / 2.0);
        const auto k3 = eval_at(k2, dt / 2.0, state.t + dt / 2.0);
        const auto k4 = eval_at(k3, dt, next.t);
        for (std::size_t j = 0; j < y.size(); ++j) y[j] = y0[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    unpack(net, ctrl, y, next);
    complete_algebraic(next, net, ctrl, opts);
    return next;
}

Trajectory simulate(const Network& net, const ControllerSpec& spec, std::span<const Disturbance> disturbances,
                    const SimOptions& opts) {
    const Controller ctrl(net, spec);
    return simulate(net, ctrl, disturbances, opts);
}

Trajectory simulate(const Network& net, const Controller& ctrl, std::span<const Disturbance> disturbances,
                    const SimOptions& opts) {
    if (!(opts.dt > 0.0) || !std::isfinite(opts.dt)) throw ValidationError("dt must be positive");
    if (!(opts.t_max >= 0.0) || !std::isfinite(opts.t_max)) throw ValidationError("t_max must be nonnegative");
    if (opts.stride == 0) throw ValidationError("sample stride must be positive");

    struct Pending {
        double time;
        std::size_t node;
        double delta;
    };
    std::vector<Pending> pending;
    for (const Disturbance& d : disturbances) {
        if (!(d.time >= 0.0) || !std::isfinite(d.time)) throw ValidationError("disturbance time must be nonnegative");
        if (!std::isfinite(d.delta)) throw ValidationError("disturbance size must be finite");
        pending.push_back({d.time, net.index_of(d.node), d.delta});
    }
    std::stable_sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) { return a.time < b.time; });

    const auto p0 = net.injections();
    const Equilibrium eq = find_equilibrium(net, ctrl.spec(), p0, opts.newton);
    SimState state = initial_state(net, ctrl, eq, p0);

    std::size_t next_disturbance = 0;
    auto apply_due = [&](SimState& s) {
        bool changed = false;
        while (next_disturbance < pending.size() && pending[next_disturbance].time <= s.t + 1e-9 * opts.dt) {
            s.injections[pending[next_disturbance].node] += pending[next_disturbance].delta;
            ++next_disturbance;
            changed = true;
        }
        if (changed) complete_algebraic(s, net, ctrl, opts.newton);
    };

    Trajectory traj;
    traj.dt = opts.dt;
    traj.stride = opts.stride;
    traj.law = ctrl.name();
    traj.price_groups = std::holds_alternative<PiacDecentralized>(ctrl.spec().law)
                            ? std::vector<std::vector<std::size_t>>{}
                            : ctrl.price_groups();
    const AreaPartition* part = nullptr;
    if (const auto* multi = std::get_if<PiacMulti>(&ctrl.spec().law)) {
        part = &multi->partition;
    } else if (net.partition()) {
        part = &*net.partition();
    }
    if (part) {
        for (const Area& a : part->areas()) traj.export_nominal.push_back(a.export_nominal);
    }

    const auto steps = static_cast<long>(std::floor(opts.t_max / opts.dt + 1e-9));
    traj.step_u_s.reserve(static_cast<std::size_t>(steps) + 1);
    traj.step_p_s.reserve(static_cast<std::size_t>(steps) + 1);
    traj.samples.reserve(static_cast<std::size_t>(steps) / opts.stride + 1);

    auto record = [&](const SimState& s) {
        const double p_s = std::accumulate(s.injections.begin(), s.injections.end(), 0.0);
        traj.step_u_s.push_back(s.ctrl.u_s);
        traj.step_p_s.push_back(p_s);
        if (s.step % static_cast<long>(opts.stride) != 0) return;
        Sample smp;
        smp.t = s.t;
        smp.theta = s.theta;
        smp.omega = s.omega;
        smp.u = s.ctrl.u;
        smp.u_s = s.ctrl.u_s;
        smp.p_s = p_s;
        smp.price = ctrl.price(s.ctrl);
        smp.eta = s.ctrl.eta;
        smp.lambda = s.ctrl.lambda;
        smp.marginal_costs = ctrl.marginal_costs(s.ctrl);
        if (part) smp.exports = area_exports(net, *part, s.theta);
        traj.samples.push_back(std::move(smp));
    };

    with_time(0.0, [&] {
        apply_due(state);
        return 0;
    });
    record(state);
    for (long k = 0; k < steps; ++k) {
        const double t_next = static_cast<double>(k + 1) * opts.dt;
        with_time(t_next, [&] {
            state = step(state, net, ctrl, opts.dt, opts.integrator, opts.newton);
            apply_due(state);
            return 0;
        });
        record(state);
    }
    return traj;
}

AngleVector to_phi_coordinates(const Network& net, std::span<const double> theta) {
    if (theta.size() != net.size()) throw ValidationError("angle vector has wrong size");
    const double ref = theta[net.reference()];
    AngleVector phi(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) phi[i] = theta[i] - ref;
    return phi;
}

std::vector<double> abstract_frequency_samples(const Network& net, const Trajectory& traj) {
    const auto trace = abstract_frequency_trace(net, traj.step_p_s, traj.step_u_s, traj.dt);
    std::vector<double> out;
    out.reserve(traj.samples.size());
    for (std::size_t s = 0; s < traj.samples.size(); ++s) out.push_back(trace.at(s * traj.stride));
    return out;
}

}  // namespace gridfreq
