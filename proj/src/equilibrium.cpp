#include "gridfreq/equilibrium.hpp"

#include "gridfreq/errors.hpp"

#include <cmath>
#include <numeric>

namespace gridfreq {

namespace {

std::vector<std::size_t> non_reference(const Network& net) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < net.size(); ++i) {
        if (i != net.reference()) out.push_back(i);
    }
    return out;
}

double total(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

/// Clears `amount` over the controllers at positions `group` of V_K and writes
/// their inputs into the per-node vector u. Returns the price.
double dispatch_into(const Network& net, std::span<const CostModel> costs, std::span<const std::size_t> group,
                     double amount, std::vector<double>& u) {
    std::vector<CostModel> sub;
    sub.reserve(group.size());
    for (std::size_t c : group) sub.push_back(costs[c]);
    const DispatchResult res = clear(sub, amount);
    for (std::size_t g = 0; g < group.size(); ++g) u[net.controller_nodes()[group[g]]] = res.u[g];
    return res.lambda;
}

std::vector<std::size_t> all_positions(const Network& net) {
    std::vector<std::size_t> pos(net.controller_nodes().size());
    std::iota(pos.begin(), pos.end(), std::size_t{0});
    return pos;
}

double central_dispatch(const Network& net, std::span<const CostModel> costs, double amount, std::vector<double>& u) {
    if (net.controller_nodes().empty()) {
        if (amount != 0.0) throw Infeasible("no controller node can absorb the power imbalance");
        return 0.0;
    }
    const auto pos = all_positions(net);
    return dispatch_into(net, costs, pos, amount, u);
}

void solve_angles(const Network& net, std::span<const double> injections, Equilibrium& eq, const NewtonOptions& opts) {
    std::vector<double> p(net.size());
    for (std::size_t i = 0; i < net.size(); ++i) p[i] = injections[i] + eq.u[i];
    eq.residual = std::abs(total(p));
    const auto unknown = non_reference(net);
    if (unknown.empty()) {
        eq.theta.assign(net.size(), 0.0);
    } else {
        eq.theta = solve_algebraic(net, p, AngleVector(net.size(), 0.0), unknown, opts).theta;
    }
}

}  // namespace

AngleVector operating_point(const Network& net, std::span<const CostModel> costs, std::span<const double> injections,
                            const NewtonOptions& opts) {
    Equilibrium eq;
    eq.u.assign(net.size(), 0.0);
    central_dispatch(net, costs, -total(injections), eq.u);
    solve_angles(net, injections, eq, opts);
    return eq.theta;
}

Equilibrium find_equilibrium(const Network& net, const ControllerSpec& spec, std::span<const double> injections,
                             const NewtonOptions& opts) {
    validate(net, spec);
    if (injections.size() != net.size()) throw ValidationError("injection vector has wrong size");

    Equilibrium eq;
    eq.u.assign(net.size(), 0.0);
    const double p_s = total(injections);

    if (const auto* law = std::get_if<PiacSingle>(&spec.law)) {
        eq.lambda = {central_dispatch(net, spec.costs, -p_s, eq.u)};
        eq.eta = {p_s / law->k};
    } else if (const auto* law = std::get_if<PiacMulti>(&spec.law)) {
        const AreaPartition& part = law->partition;
        double export_sum = 0.0;
        for (const Area& a : part.areas()) export_sum += a.export_nominal;
        if (std::abs(export_sum) > 1e-9) {
            throw Infeasible("nominal area exports sum to " + std::to_string(export_sum) + ", not zero");
        }
        std::vector<std::size_t> position(net.size(), 0);
        for (std::size_t c = 0; c < net.controller_nodes().size(); ++c) position[net.controller_nodes()[c]] = c;
        for (std::size_t r = 0; r < part.size(); ++r) {
            double p_area = 0.0;
            std::vector<std::size_t> group;
            for (std::size_t i : part.members(r)) {
                p_area += injections[i];
                if (net.node(i).has_controller()) group.push_back(position[i]);
            }
            const double u_r = part.area(r).export_nominal - p_area;
            try {
                eq.lambda.push_back(dispatch_into(net, spec.costs, group, u_r, eq.u));
            } catch (const Infeasible& e) {
                throw Infeasible("area " + part.area(r).name + ": " + e.what());
            }
            eq.eta.push_back(-u_r / law->k[r]);
        }
    } else if (const auto* law = std::get_if<PiacDecentralized>(&spec.law)) {
        const AngleVector ref =
            law->reference.empty() ? operating_point(net, spec.costs, injections, opts) : law->reference;
        const auto flows = nodal_flows(net, ref);
        for (std::size_t i = net.active_count(); i < net.size(); ++i) {
            if (std::abs(injections[i] - flows[i]) > 1e-8) {
                throw Infeasible("reference angles do not balance passive node " + std::to_string(net.node(i).id));
            }
        }
        for (std::size_t i = 0; i < net.active_count(); ++i) {
            eq.u[i] = flows[i] - injections[i];
            eq.eta.push_back(-eq.u[i] / law->k[i]);
        }
        eq.u_s = total(eq.u);
        eq.theta.assign(ref.begin(), ref.end());
        const double shift = eq.theta[net.reference()];
        for (double& a : eq.theta) a -= shift;
        std::vector<double> p(net.size());
        for (std::size_t i = 0; i < net.size(); ++i) p[i] = injections[i] + eq.u[i];
        eq.residual = std::abs(total(p));
        eq.secure = security_check(net, eq.theta).secure;
        return eq;
    } else if (std::holds_alternative<Dai>(spec.law)) {
        const double lam = central_dispatch(net, spec.costs, -p_s, eq.u);
        eq.lambda.assign(net.controller_nodes().size(), lam);
    } else {
        eq.lambda = {central_dispatch(net, spec.costs, -p_s, eq.u)};
    }

    eq.u_s = total(eq.u);
    solve_angles(net, injections, eq, opts);
    eq.secure = security_check(net, eq.theta).secure;
    return eq;
}

Equilibrium find_equilibrium(const Network& net, const ControllerSpec& spec, const NewtonOptions& opts) {
    const auto p = net.injections();
    return find_equilibrium(net, spec, p, opts);
}

}  // namespace gridfreq
