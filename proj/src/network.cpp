#include "gridfreq/network.hpp"

#include "gridfreq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

namespace gridfreq {

namespace {

int kind_rank(NodeKind k) {
    switch (k) {
        case NodeKind::Machine: return 0;
        case NodeKind::FreqDependent: return 1;
        case NodeKind::Passive: return 2;
    }
    return 3;
}

[[noreturn]] void invalid(const std::string& msg) { throw ValidationError(msg); }

std::string node_label(const Node& n) { return "node " + std::to_string(n.id); }

}  // namespace

std::string to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::Machine: return "machine";
        case NodeKind::FreqDependent: return "freq";
        case NodeKind::Passive: return "passive";
    }
    return "unknown";
}

Network::Network(std::vector<Node> nodes, std::vector<Line> lines, double base_mva, double base_hz,
                 std::optional<std::vector<Area>> areas)
    : nodes_(std::move(nodes)), lines_(std::move(lines)), base_mva_(base_mva), base_hz_(base_hz) {
    if (nodes_.empty()) invalid("network has no nodes");
    if (!(base_mva_ > 0.0) || !std::isfinite(base_mva_)) invalid("base_mva must be positive");
    if (!(base_hz_ > 0.0) || !std::isfinite(base_hz_)) invalid("base_hz must be positive");

    std::stable_sort(nodes_.begin(), nodes_.end(), [](const Node& a, const Node& b) {
        const int ra = kind_rank(a.kind);
        const int rb = kind_rank(b.kind);
        return ra != rb ? ra < rb : a.id < b.id;
    });

    id_index_.reserve(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        if (n.kind == NodeKind::Machine) ++n_machine_;
        if (n.kind == NodeKind::FreqDependent) ++n_freq_;
        if (n.has_controller()) controllers_.push_back(i);
        id_index_.emplace_back(n.id, i);
    }
    std::sort(id_index_.begin(), id_index_.end());
    for (std::size_t i = 1; i < id_index_.size(); ++i) {
        if (id_index_[i].first == id_index_[i - 1].first) {
            invalid("duplicate node id " + std::to_string(id_index_[i].first));
        }
    }

    validate_nodes();
    build_lines();
    check_connected();

    if (areas) partition_ = AreaPartition(*this, std::move(*areas));
}

void Network::validate_nodes() const {
    double droop_sum = 0.0;
    for (const Node& n : nodes_) {
        const auto finite = std::isfinite(n.inertia) && std::isfinite(n.droop) &&
                            std::isfinite(n.injection) && std::isfinite(n.voltage);
        if (!finite) invalid(node_label(n) + " has a non-finite parameter");
        if (!(n.voltage > 0.0)) invalid(node_label(n) + " must have positive voltage");
        switch (n.kind) {
            case NodeKind::Machine:
                if (!(n.inertia > 0.0)) invalid("Machine " + node_label(n) + " must have positive inertia");
                if (!(n.droop > 0.0)) invalid("Machine " + node_label(n) + " must have positive droop");
                break;
            case NodeKind::FreqDependent:
                if (n.inertia != 0.0) invalid("FreqDependent " + node_label(n) + " has nonzero inertia");
                if (!(n.droop > 0.0)) invalid("FreqDependent " + node_label(n) + " must have positive droop");
                break;
            case NodeKind::Passive:
                if (n.droop != 0.0) invalid("Passive node has nonzero droop (" + node_label(n) + ")");
                if (n.inertia != 0.0) invalid("Passive node has nonzero inertia (" + node_label(n) + ")");
                if (n.has_controller()) invalid("Passive node cannot host a controller (" + node_label(n) + ")");
                break;
        }
        if (n.controller) {
            const ControllerParams& c = *n.controller;
            if (!(c.alpha > 0.0) || !std::isfinite(c.alpha)) {
                invalid(node_label(n) + " controller alpha must be positive");
            }
            if (std::isnan(c.u_lo) || std::isnan(c.u_hi) || !(c.u_lo <= 0.0) || !(c.u_hi >= 0.0)) {
                invalid(node_label(n) + " controller bounds must satisfy u_lo <= 0 <= u_hi");
            }
        }
        droop_sum += n.droop;
    }
    if (!(droop_sum > 0.0)) invalid("total droop of machine and frequency-dependent nodes must be positive");
}

void Network::build_lines() {
    adjacency_.assign(nodes_.size(), {});
    ends_.reserve(lines_.size());
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::size_t l = 0; l < lines_.size(); ++l) {
        const Line& ln = lines_[l];
        const auto a = find(ln.from);
        const auto b = find(ln.to);
        const std::string label = "line (" + std::to_string(ln.from) + "," + std::to_string(ln.to) + ")";
        if (!a || !b) invalid(label + " references an unknown node");
        if (*a == *b) invalid(label + " is a self-loop");
        if (!(ln.susceptance > 0.0) || !std::isfinite(ln.susceptance)) {
            invalid(label + " must have positive susceptance");
        }
        if (!seen.insert(std::minmax(*a, *b)).second) invalid("duplicate " + label);
        ends_.emplace_back(*a, *b);
        adjacency_[*a].push_back({*b, ln.susceptance, l});
        adjacency_[*b].push_back({*a, ln.susceptance, l});
    }
}

void Network::check_connected() const {
    std::vector<bool> visited(nodes_.size(), false);
    std::vector<std::size_t> stack{0};
    visited[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        for (const Edge& e : adjacency_[i]) {
            if (!visited[e.node]) {
                visited[e.node] = true;
                ++count;
                stack.push_back(e.node);
            }
        }
    }
    if (count != nodes_.size()) invalid("network graph is not connected");
}

std::optional<std::size_t> Network::find(int id) const {
    const auto it = std::lower_bound(id_index_.begin(), id_index_.end(), std::make_pair(id, std::size_t{0}));
    if (it == id_index_.end() || it->first != id) return std::nullopt;
    return it->second;
}

std::size_t Network::index_of(int id) const {
    const auto idx = find(id);
    if (!idx) invalid("unknown node id " + std::to_string(id));
    return *idx;
}

std::vector<double> Network::injections() const {
    std::vector<double> p(nodes_.size());
    std::transform(nodes_.begin(), nodes_.end(), p.begin(), [](const Node& n) { return n.injection; });
    return p;
}

Network Network::with_injections(std::span<const double> p) const {
    if (p.size() != nodes_.size()) invalid("injection vector has wrong size");
    std::vector<Node> nodes = nodes_;
    for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i].injection = p[i];
    std::optional<std::vector<Area>> areas;
    if (partition_) areas = partition_->areas();
    return Network(std::move(nodes), lines_, base_mva_, base_hz_, std::move(areas));
}

Network Network::with_alphas(std::span<const double> alpha) const {
    if (alpha.size() != controllers_.size()) invalid("alpha vector must have one entry per controller");
    std::vector<Node> nodes = nodes_;
    for (std::size_t c = 0; c < controllers_.size(); ++c) nodes[controllers_[c]].controller->alpha = alpha[c];
    std::optional<std::vector<Area>> areas;
    if (partition_) areas = partition_->areas();
    return Network(std::move(nodes), lines_, base_mva_, base_hz_, std::move(areas));
}

Network Network::with_areas(std::optional<std::vector<Area>> areas) const {
    return Network(nodes_, lines_, base_mva_, base_hz_, std::move(areas));
}

bool Network::operator==(const Network& other) const {
    return nodes_ == other.nodes_ && lines_ == other.lines_ && base_mva_ == other.base_mva_ &&
           base_hz_ == other.base_hz_ && partition_ == other.partition_;
}

AreaPartition::AreaPartition(const Network& net, std::vector<Area> areas) : areas_(std::move(areas)) {
    if (areas_.empty()) invalid("area partition must contain at least one area");
    constexpr auto unassigned = static_cast<std::size_t>(-1);
    area_of_.assign(net.size(), unassigned);
    members_.resize(areas_.size());
    for (std::size_t r = 0; r < areas_.size(); ++r) {
        if (!std::isfinite(areas_[r].export_nominal)) invalid("area " + areas_[r].name + " has non-finite export");
        for (int id : areas_[r].node_ids) {
            const auto idx = net.find(id);
            if (!idx) invalid("area " + areas_[r].name + " references unknown node " + std::to_string(id));
            if (area_of_[*idx] != unassigned) {
                invalid("node " + std::to_string(id) + " belongs to more than one area");
            }
            area_of_[*idx] = r;
            members_[r].push_back(*idx);
        }
        std::sort(members_[r].begin(), members_[r].end());
    }
    for (std::size_t i = 0; i < net.size(); ++i) {
        if (area_of_[i] == unassigned) {
            invalid("node " + std::to_string(net.node(i).id) + " is not assigned to any area");
        }
    }
}

const Area& AreaPartition::area(std::size_t r) const {
    if (r >= areas_.size()) invalid("unknown area index " + std::to_string(r));
    return areas_[r];
}

std::span<const std::size_t> AreaPartition::members(std::size_t r) const {
    if (r >= members_.size()) invalid("unknown area index " + std::to_string(r));
    return members_[r];
}

std::vector<BoundaryLine> boundary_lines(const Network& net, const AreaPartition& part, std::size_t area) {
    if (area >= part.size()) invalid("unknown area index " + std::to_string(area));
    std::vector<BoundaryLine> out;
    for (std::size_t l = 0; l < net.lines().size(); ++l) {
        const bool from_in = part.area_of(net.line_from(l)) == area;
        const bool to_in = part.area_of(net.line_to(l)) == area;
        if (from_in != to_in) out.push_back({l, from_in ? 1.0 : -1.0});
    }
    return out;
}

Aggregates aggregate_constants(const Network& net, std::span<const double> injections) {
    Aggregates agg{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < net.size(); ++i) {
        const Node& n = net.node(i);
        if (n.kind == NodeKind::Machine) agg.inertia += n.inertia;
        agg.droop += n.droop;
        agg.injection += injections[i];
    }
    return agg;
}

Aggregates aggregate_constants(const Network& net) {
    const auto p = net.injections();
    return aggregate_constants(net, p);
}

}  // namespace gridfreq
