#include "gridfreq/analysis.hpp"

#include "gridfreq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gridfreq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double max_abs_active_omega(const Network& net, const std::vector<double>& omega) {
    double m = 0.0;
    for (std::size_t i = 0; i < net.active_count(); ++i) m = std::max(m, std::abs(omega[i]));
    return m;
}

}  // namespace

double potential_U(const Network& net, std::span<const double> phi) {
    if (phi.size() != net.size()) throw ValidationError("angle vector has wrong size");
    double u = 0.0;
    for (std::size_t l = 0; l < net.lines().size(); ++l) {
        u += net.lines()[l].susceptance * (1.0 - std::cos(phi[net.line_from(l)] - phi[net.line_to(l)]));
    }
    return u;
}

std::vector<double> potential_gradient(const Network& net, std::span<const double> phi) { return nodal_flows(net, phi); }

double lyapunov_alpha_bound(const Network& net, double k) {
    if (!(k > 0.0)) throw ValidationError("gain k must be positive");
    if (net.controller_nodes().empty()) throw ValidationError("energy function needs at least one controller node");
    double d_min = std::numeric_limits<double>::infinity();
    for (std::size_t i : net.controller_nodes()) d_min = std::min(d_min, net.node(i).droop);
    return 1.0 / (k * d_min);
}

LyapunovConfig make_lyapunov_config(const Network& net, const ControllerSpec& spec, std::span<const double> injections,
                                    std::optional<double> alpha) {
    const auto* law = std::get_if<PiacSingle>(&spec.law);
    if (!law) throw ValidationError("the energy function is defined for the centralized PIAC law");
    const Equilibrium eq = find_equilibrium(net, spec, injections);
    LyapunovConfig cfg;
    cfg.phi_star = to_phi_coordinates(net, eq.theta);
    cfg.eta_star = eq.eta.at(0);
    cfg.lambda_star = eq.lambda.at(0);
    cfg.k = law->k;
    cfg.alpha = alpha.value_or(2.0 * lyapunov_alpha_bound(net, law->k));
    cfg.costs = spec.costs;
    return cfg;
}

LyapunovValue lyapunov_V(const Network& net, const LyapunovConfig& cfg, std::span<const double> theta,
                         std::span<const double> omega, double eta, double lambda) {
    const auto phi = to_phi_coordinates(net, theta);
    const auto grad = potential_gradient(net, cfg.phi_star);
    LyapunovValue v;
    v.v1 = potential_U(net, phi) - potential_U(net, cfg.phi_star);
    for (std::size_t i = 0; i < net.size(); ++i) v.v1 -= grad[i] * (phi[i] - cfg.phi_star[i]);
    double momentum = 0.0;
    for (std::size_t i = 0; i < net.machine_count(); ++i) {
        const double m = net.node(i).inertia;
        v.v1 += 0.5 * m * omega[i] * omega[i];
        momentum += m * omega[i];
    }
    const double du = aggregate_response(cfg.costs, lambda) - aggregate_response(cfg.costs, cfg.lambda_star);
    v.v2 = 0.5 * du * du;
    const double z = momentum + eta - cfg.eta_star;
    v.v3 = 0.5 * cfg.k * cfg.k * z * z;
    v.v = v.v1 + cfg.alpha * v.v2 + v.v3;
    return v;
}

LyapunovValue lyapunov_V(const Network& net, const LyapunovConfig& cfg, const Sample& sample) {
    if (sample.eta.size() != 1 || sample.lambda.size() != 1) {
        throw ValidationError("sample does not come from the centralized PIAC law");
    }
    return lyapunov_V(net, cfg, sample.theta, sample.omega, sample.eta[0], sample.lambda[0]);
}

DescentReport check_lyapunov_descent(const Network& net, const LyapunovConfig& cfg, const Trajectory& traj,
                                     std::optional<double> tolerance) {
    DescentReport rep;
    rep.tolerance = tolerance.value_or(1e-6 + 10.0 * traj.dt);
    rep.alpha_bound = lyapunov_alpha_bound(net, cfg.k);
    rep.alpha_ok = cfg.alpha > rep.alpha_bound;
    rep.values.reserve(traj.samples.size());
    for (const Sample& s : traj.samples) rep.values.push_back(lyapunov_V(net, cfg, s).v);

    std::size_t descending = 0;
    const std::size_t pairs = rep.values.empty() ? 0 : rep.values.size() - 1;
    for (std::size_t j = 0; j < pairs; ++j) {
        const double rate = (rep.values[j + 1] - rep.values[j]) / (traj.samples[j + 1].t - traj.samples[j].t);
        if (rate <= 0.0) ++descending;
        rep.max_increase_rate = std::max(rep.max_increase_rate, rate);
        if (rate > rep.tolerance) ++rep.violations;
    }
    rep.descending_fraction = pairs == 0 ? 1.0 : static_cast<double>(descending) / static_cast<double>(pairs);
    return rep;
}

Metrics compute_metrics(const Trajectory& traj, const Network& net, const MetricsOptions& opts) {
    if (traj.samples.empty()) throw ValidationError("trajectory has no samples");
    Metrics m;
    const double f0 = net.base_hz();
    const std::size_t nadir_nodes = net.machine_count() > 0 ? net.machine_count() : net.active_count();

    double w_min = 0.0;
    for (const Sample& s : traj.samples) {
        for (std::size_t i = 0; i < nadir_nodes; ++i) w_min = std::min(w_min, s.omega[i]);
    }
    m.nadir_hz = f0 + w_min * f0;

    const Sample& last = traj.samples.back();
    m.final_u_s = last.u_s;
    m.final_p_s = last.p_s;
    m.final_max_abs_omega = max_abs_active_omega(net, last.omega);
    for (const Sample& s : traj.samples) {
        m.max_overshoot_us = std::max(m.max_overshoot_us, std::abs(s.u_s) - std::abs(last.u_s));
    }

    std::optional<std::size_t> last_unsettled;
    for (std::size_t j = traj.samples.size(); j-- > 0;) {
        if (max_abs_active_omega(net, traj.samples[j].omega) >= opts.settling_threshold) {
            last_unsettled = j;
            break;
        }
    }
    std::optional<std::size_t> settled_from;
    if (!last_unsettled) {
        settled_from = 0;
    } else if (*last_unsettled + 1 < traj.samples.size()) {
        settled_from = *last_unsettled + 1;
    }
    if (settled_from) m.settling_time = traj.samples[*settled_from].t;

    if (traj.price_groups.empty()) {
        m.marginal_spread = kNaN;
    } else {
        for (const Sample& s : traj.samples) {
            for (const auto& group : traj.price_groups) {
                if (group.empty()) continue;
                double lo = std::numeric_limits<double>::infinity();
                double hi = -lo;
                for (std::size_t c : group) {
                    lo = std::min(lo, s.marginal_costs[c]);
                    hi = std::max(hi, s.marginal_costs[c]);
                }
                m.marginal_spread = std::max(m.marginal_spread, hi - lo);
            }
        }
    }

    const std::size_t areas = traj.export_nominal.size();
    m.export_deviation.assign(areas, kNaN);
    if (settled_from) {
        for (std::size_t r = 0; r < areas; ++r) {
            double dev = 0.0;
            for (std::size_t j = *settled_from; j < traj.samples.size(); ++j) {
                dev = std::max(dev, std::abs(traj.samples[j].exports[r] - traj.export_nominal[r]));
            }
            m.export_deviation[r] = dev;
        }
    }
    return m;
}

}  // namespace gridfreq
