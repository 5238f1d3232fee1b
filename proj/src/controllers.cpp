#include "gridfreq/controllers.hpp"

#include "gridfreq/errors.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace gridfreq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double machine_momentum(const Network& net, std::span<const double> omega, std::span<const std::size_t> nodes) {
    double s = 0.0;
    for (std::size_t i : nodes) {
        if (net.is_machine(i)) s += net.node(i).inertia * omega[i];
    }
    return s;
}

double total_momentum(const Network& net, std::span<const double> omega) {
    double s = 0.0;
    for (std::size_t i = 0; i < net.machine_count(); ++i) s += net.node(i).inertia * omega[i];
    return s;
}

template <typename Law>
void require_law(const Controller& c) {
    if (!std::holds_alternative<Law>(c.spec().law)) {
        throw ValidationError("controller runs law '" + c.name() + "', not the requested one");
    }
}

}  // namespace

Controller::Controller(const Network& net, ControllerSpec spec) : net_(net), spec_(std::move(spec)) {
    validate(net_, spec_);
    actuated_ = actuated_nodes(net_, spec_.law);
    const std::size_t m = net_.controller_nodes().size();

    if (auto* law = std::get_if<PiacDecentralized>(&spec_.law)) {
        if (law->reference.empty()) {
            const auto p = net_.injections();
            law->reference = operating_point(net_, spec_.costs, p);
        }
        reference_flows_ = nodal_flows(net_, law->reference);
    } else if (const auto* multi = std::get_if<PiacMulti>(&spec_.law)) {
        const AreaPartition& part = multi->partition;
        std::vector<std::size_t> position(net_.size(), 0);
        for (std::size_t c = 0; c < m; ++c) position[net_.controller_nodes()[c]] = c;
        for (std::size_t r = 0; r < part.size(); ++r) {
            std::vector<std::size_t> group;
            for (std::size_t i : part.members(r)) {
                if (net_.node(i).has_controller()) group.push_back(position[i]);
            }
            groups_.push_back(std::move(group));
            boundaries_.push_back(boundary_lines(net_, part, r));
        }
    } else {
        std::vector<std::size_t> all(m);
        std::iota(all.begin(), all.end(), std::size_t{0});
        groups_.push_back(std::move(all));
    }
    for (const auto& group : groups_) {
        std::vector<CostModel> costs;
        for (std::size_t c : group) costs.push_back(spec_.costs[c]);
        group_costs_.push_back(std::move(costs));
    }
}

ControllerState Controller::initial_state() const {
    ControllerState s;
    std::visit(
        [&](const auto& law) {
            using L = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<L, PiacSingle>) {
                s.eta.assign(1, 0.0);
                s.lambda.assign(1, 0.0);
            } else if constexpr (std::is_same_v<L, PiacMulti>) {
                s.eta.assign(law.k.size(), 0.0);
                s.lambda.assign(law.k.size(), 0.0);
            } else if constexpr (std::is_same_v<L, PiacDecentralized>) {
                s.eta.assign(law.k.size(), 0.0);
            } else if constexpr (std::is_same_v<L, Dai>) {
                s.lambda.assign(law.k.size(), 0.0);
            } else {
                s.lambda.assign(1, 0.0);
            }
        },
        spec_.law);
    s.u.assign(net_.size(), 0.0);
    const std::vector<double> zero(net_.size(), 0.0);
    update_outputs(s, zero);
    return s;
}

ControllerState Controller::initial_state(const Equilibrium& eq) const {
    ControllerState s = initial_state();
    if (eq.eta.size() != s.eta.size() || eq.lambda.size() != s.lambda.size()) {
        throw ValidationError("equilibrium does not match the controller law");
    }
    s.eta = eq.eta;
    s.lambda = eq.lambda;
    const std::vector<double> zero(net_.size(), 0.0);
    update_outputs(s, zero);
    return s;
}

std::size_t Controller::dynamic_size(const ControllerState& s) const { return dynamic(s).size(); }

std::span<double> Controller::dynamic(ControllerState& s) const {
    const bool piac = std::holds_alternative<PiacSingle>(spec_.law) || std::holds_alternative<PiacMulti>(spec_.law) ||
                      std::holds_alternative<PiacDecentralized>(spec_.law);
    return piac ? std::span<double>(s.eta) : std::span<double>(s.lambda);
}

std::span<const double> Controller::dynamic(const ControllerState& s) const {
    return dynamic(const_cast<ControllerState&>(s));
}

void Controller::rates(const ControllerState& s, const Measurements& m, std::span<double> out) const {
    const std::size_t active = net_.active_count();
    if (std::holds_alternative<PiacSingle>(spec_.law)) {
        double sum = 0.0;
        for (std::size_t i = 0; i < active; ++i) sum += net_.node(i).droop * m.omega[i];
        out[0] = sum;
    } else if (const auto* law = std::get_if<PiacMulti>(&spec_.law)) {
        for (std::size_t r = 0; r < law->partition.size(); ++r) {
            double sum = -law->partition.area(r).export_nominal;
            for (std::size_t i : law->partition.members(r)) {
                if (!net_.is_passive(i)) sum += net_.node(i).droop * m.omega[i];
            }
            for (const BoundaryLine& b : boundaries_[r]) sum += b.sign * line_flow(net_, m.theta, b.line);
            out[r] = sum;
        }
    } else if (std::holds_alternative<PiacDecentralized>(spec_.law)) {
        for (std::size_t i = 0; i < active; ++i) {
            out[i] = net_.node(i).droop * m.omega[i] + m.flows[i] - reference_flows_[i];
        }
    } else if (const auto* law = std::get_if<Agc>(&spec_.law)) {
        out[0] = -law->k * m.omega[law->node];
    } else if (const auto* law = std::get_if<GatherBroadcast>(&spec_.law)) {
        double sum = 0.0;
        for (std::size_t i = 0; i < active; ++i) sum += law->weights[i] * m.omega[i];
        out[0] = -law->k * sum;
    } else if (const auto* law = std::get_if<Dai>(&spec_.law)) {
        const auto& nodes = net_.controller_nodes();
        for (std::size_t c = 0; c < nodes.size(); ++c) out[c] = -m.omega[nodes[c]];
        for (const CommLink& l : law->links) {
            const double d = l.weight * (s.lambda[l.b] - s.lambda[l.a]);
            out[l.a] += d;
            out[l.b] -= d;
        }
        for (std::size_t c = 0; c < nodes.size(); ++c) out[c] *= law->k[c];
    }
}

std::vector<double> Controller::rates(const ControllerState& s, const Measurements& m) const {
    std::vector<double> out(dynamic_size(s), 0.0);
    rates(s, m, out);
    return out;
}

void Controller::integrate(ControllerState& s, std::span<const double> rate, double h) const {
    auto x = dynamic(s);
    for (std::size_t j = 0; j < x.size(); ++j) x[j] += h * rate[j];
}

void Controller::update_outputs(ControllerState& s, std::span<const double> omega) const {
    const auto& nodes = net_.controller_nodes();
    auto write_group = [&](std::size_t g, const DispatchResult& res) {
        for (std::size_t j = 0; j < groups_[g].size(); ++j) s.u[nodes[groups_[g][j]]] = res.u[j];
    };

    if (const auto* law = std::get_if<PiacSingle>(&spec_.law)) {
        s.u_s = -law->k * (s.eta[0] + total_momentum(net_, omega));
        const DispatchResult res = clear(group_costs_[0], s.u_s);
        s.lambda[0] = res.lambda;
        write_group(0, res);
    } else if (const auto* law = std::get_if<PiacMulti>(&spec_.law)) {
        s.u_s = 0.0;
        for (std::size_t r = 0; r < law->partition.size(); ++r) {
            const double u_r =
                -law->k[r] * (s.eta[r] + machine_momentum(net_, omega, law->partition.members(r)));
            try {
                const DispatchResult res = clear(group_costs_[r], u_r);
                s.lambda[r] = res.lambda;
                write_group(r, res);
            } catch (const Infeasible& e) {
                throw Infeasible("area " + law->partition.area(r).name + ": " + e.what());
            }
            s.u_s += u_r;
        }
    } else if (const auto* law = std::get_if<PiacDecentralized>(&spec_.law)) {
        s.u_s = 0.0;
        for (std::size_t i = 0; i < net_.active_count(); ++i) {
            const double mw = net_.is_machine(i) ? net_.node(i).inertia * omega[i] : 0.0;
            s.u[i] = -law->k[i] * (mw + s.eta[i]);
            s.u_s += s.u[i];
        }
    } else {
        const bool per_node = std::holds_alternative<Dai>(spec_.law);
        s.u_s = 0.0;
        for (std::size_t c = 0; c < nodes.size(); ++c) {
            const double lam = per_node ? s.lambda[c] : s.lambda[0];
            s.u[nodes[c]] = spec_.costs[c].inverse_marginal(lam);
            s.u_s += s.u[nodes[c]];
        }
    }
}

ControllerState Controller::step(const ControllerState& s, const Measurements& start,
                                 std::span<const double> omega_next, double dt) const {
    ControllerState next = s;
    const auto r = rates(s, start);
    integrate(next, r, dt);
    update_outputs(next, omega_next);
    return next;
}

std::vector<double> Controller::marginal_costs(const ControllerState& s) const {
    const auto& nodes = net_.controller_nodes();
    std::vector<double> mc(nodes.size());
    for (std::size_t c = 0; c < nodes.size(); ++c) {
        const double u = s.u[nodes[c]];
        mc[c] = spec_.costs[c].in_domain(u) ? spec_.costs[c].marginal(u) : kNaN;
    }
    return mc;
}

double Controller::price(const ControllerState& s) const {
    if (s.lambda.empty()) return kNaN;
    return std::accumulate(s.lambda.begin(), s.lambda.end(), 0.0) / static_cast<double>(s.lambda.size());
}

ControllerState piac_single_step(const Controller& c, const ControllerState& s, const Measurements& start,
                                 std::span<const double> omega_next, double dt) {
    require_law<PiacSingle>(c);
    return c.step(s, start, omega_next, dt);
}

ControllerState piac_multi_step(const Controller& c, const ControllerState& s, const Measurements& start,
                                std::span<const double> omega_next, double dt) {
    require_law<PiacMulti>(c);
    return c.step(s, start, omega_next, dt);
}

ControllerState piac_decentralized_step(const Controller& c, const ControllerState& s, const Measurements& start,
                                        std::span<const double> omega_next, double dt) {
    require_law<PiacDecentralized>(c);
    return c.step(s, start, omega_next, dt);
}

ControllerState agc_step(const Controller& c, const ControllerState& s, const Measurements& start, double dt) {
    require_law<Agc>(c);
    return c.step(s, start, start.omega, dt);
}

ControllerState gb_step(const Controller& c, const ControllerState& s, const Measurements& start, double dt) {
    require_law<GatherBroadcast>(c);
    return c.step(s, start, start.omega, dt);
}

ControllerState dai_step(const Controller& c, const ControllerState& s, const Measurements& start, double dt) {
    require_law<Dai>(c);
    return c.step(s, start, start.omega, dt);
}

std::vector<double> area_exports(const Network& net, const AreaPartition& part, std::span<const double> theta) {
    std::vector<double> out(part.size(), 0.0);
    for (std::size_t l = 0; l < net.lines().size(); ++l) {
        const std::size_t ra = part.area_of(net.line_from(l));
        const std::size_t rb = part.area_of(net.line_to(l));
        if (ra == rb) continue;
        const double f = line_flow(net, theta, l);
        out[ra] += f;
        out[rb] -= f;
    }
    return out;
}

std::vector<double> abstract_frequency_trace(const Network& net, std::span<const double> p_s,
                                             std::span<const double> u_s, double dt, double omega0) {
    if (p_s.size() != u_s.size()) throw ValidationError("P_s and u_s traces differ in length");
    const Aggregates agg = aggregate_constants(net);
    std::vector<double> w(p_s.size());
    if (w.empty()) return w;
    if (agg.inertia == 0.0) {
        for (std::size_t k = 0; k < w.size(); ++k) w[k] = (p_s[k] + u_s[k]) / agg.droop;
        return w;
    }
    w[0] = omega0;
    for (std::size_t k = 0; k + 1 < w.size(); ++k) {
        w[k + 1] = w[k] + dt * (p_s[k] - agg.droop * w[k] + u_s[k]) / agg.inertia;
    }
    return w;
}

}  // namespace gridfreq
