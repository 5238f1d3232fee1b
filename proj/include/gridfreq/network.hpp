#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gridfreq {

enum class NodeKind { Machine, FreqDependent, Passive };

/// Secondary-control parameters of a node: cost weight and input bounds (p.u.).
struct ControllerParams {
    double alpha = 1.0;
    double u_lo = -std::numeric_limits<double>::infinity();
    double u_hi = std::numeric_limits<double>::infinity();

    bool operator==(const ControllerParams&) const = default;
};

struct Node {
    int id = 0;
    NodeKind kind = NodeKind::Passive;
    double inertia = 0.0;    // M_i, p.u. * s^2
    double droop = 0.0;      // D_i, p.u. power per p.u. frequency
    double injection = 0.0;  // P_i, p.u. on the system base
    double voltage = 1.0;    // V_i, p.u.
    std::optional<ControllerParams> controller;

    [[nodiscard]] bool has_controller() const noexcept { return controller.has_value(); }
    bool operator==(const Node&) const = default;
};

/// Undirected line with effective susceptance B_ij = B^_ij V_i V_j.
struct Line {
    int from = 0;
    int to = 0;
    double susceptance = 0.0;

    bool operator==(const Line&) const = default;
};

/// One neighbour in the adjacency list, by canonical node index.
struct Edge {
    std::size_t node;
    double susceptance;
    std::size_t line;
};

struct Area {
    std::string name;
    std::vector<int> node_ids;
    double export_nominal = 0.0;  // P_ex*, p.u.

    bool operator==(const Area&) const = default;
};

class Network;

/// Disjoint cover of the node set by control areas.
class AreaPartition {
public:
    AreaPartition() = default;
    AreaPartition(const Network& net, std::vector<Area> areas);

    [[nodiscard]] std::size_t size() const noexcept { return areas_.size(); }
    [[nodiscard]] const Area& area(std::size_t r) const;
    [[nodiscard]] const std::vector<Area>& areas() const noexcept { return areas_; }
    /// Canonical node indices of area r, ascending.
    [[nodiscard]] std::span<const std::size_t> members(std::size_t r) const;
    [[nodiscard]] std::size_t area_of(std::size_t node) const { return area_of_.at(node); }

    bool operator==(const AreaPartition&) const = default;

private:
    std::vector<Area> areas_;
    std::vector<std::vector<std::size_t>> members_;
    std::vector<std::size_t> area_of_;
};

/// Immutable power-network graph. Nodes are stored in canonical order:
/// machines, then frequency-dependent nodes, then passive nodes, each
/// ascending by id. Every vector indexed by node uses this order.
class Network {
public:
    Network(std::vector<Node> nodes, std::vector<Line> lines, double base_mva, double base_hz,
            std::optional<std::vector<Area>> areas = std::nullopt);

    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] const std::vector<Node>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const Node& node(std::size_t i) const { return nodes_.at(i); }
    [[nodiscard]] const std::vector<Line>& lines() const noexcept { return lines_; }
    /// Canonical endpoint indices (a, b) of line l; a corresponds to Line::from.
    [[nodiscard]] std::size_t line_from(std::size_t l) const { return ends_.at(l).first; }
    [[nodiscard]] std::size_t line_to(std::size_t l) const { return ends_.at(l).second; }
    [[nodiscard]] std::span<const Edge> neighbors(std::size_t i) const { return adjacency_.at(i); }

    /// Canonical index of node `id`; throws ValidationError when unknown.
    [[nodiscard]] std::size_t index_of(int id) const;
    [[nodiscard]] std::optional<std::size_t> find(int id) const;

    [[nodiscard]] std::size_t machine_count() const noexcept { return n_machine_; }
    [[nodiscard]] std::size_t freq_count() const noexcept { return n_freq_; }
    [[nodiscard]] std::size_t passive_count() const noexcept {
        return nodes_.size() - n_machine_ - n_freq_;
    }
    /// Nodes with a differential angle: machines and frequency-dependent nodes.
    [[nodiscard]] std::size_t active_count() const noexcept { return n_machine_ + n_freq_; }
    [[nodiscard]] bool is_machine(std::size_t i) const noexcept { return i < n_machine_; }
    [[nodiscard]] bool is_passive(std::size_t i) const noexcept { return i >= n_machine_ + n_freq_; }
    /// Angle reference: the first machine (index 0 when any machine exists).
    [[nodiscard]] std::size_t reference() const noexcept { return 0; }

    /// Canonical indices of nodes hosting a secondary controller (V_K).
    [[nodiscard]] const std::vector<std::size_t>& controller_nodes() const noexcept {
        return controllers_;
    }
    [[nodiscard]] std::vector<double> injections() const;

    [[nodiscard]] double base_mva() const noexcept { return base_mva_; }
    [[nodiscard]] double base_hz() const noexcept { return base_hz_; }
    [[nodiscard]] const std::optional<AreaPartition>& partition() const noexcept { return partition_; }

    /// Copy with injections replaced (same graph, same order).
    [[nodiscard]] Network with_injections(std::span<const double> p) const;
    /// Copy with controller cost weights replaced, one per controller node.
    [[nodiscard]] Network with_alphas(std::span<const double> alpha) const;
    /// Copy with a different area partition.
    [[nodiscard]] Network with_areas(std::optional<std::vector<Area>> areas) const;

    bool operator==(const Network& other) const;

private:
    void validate_nodes() const;
    void build_lines();
    void check_connected() const;

    std::vector<Node> nodes_;
    std::vector<Line> lines_;
    std::vector<std::pair<std::size_t, std::size_t>> ends_;
    std::vector<std::vector<Edge>> adjacency_;
    std::vector<std::pair<int, std::size_t>> id_index_;  // sorted by id
    std::vector<std::size_t> controllers_;
    std::size_t n_machine_ = 0;
    std::size_t n_freq_ = 0;
    double base_mva_ = 100.0;
    double base_hz_ = 60.0;
    std::optional<AreaPartition> partition_;
};

/// A boundary line of an area with the sign that makes B sin(theta_from - theta_to)
/// an export from that area.
struct BoundaryLine {
    std::size_t line;
    double sign;
};

std::vector<BoundaryLine> boundary_lines(const Network& net, const AreaPartition& part, std::size_t area);

struct Aggregates {
    double inertia;    // M_s, machines
    double droop;      // D_s, machines and frequency-dependent nodes
    double injection;  // P_s, all nodes
};

Aggregates aggregate_constants(const Network& net);
Aggregates aggregate_constants(const Network& net, std::span<const double> injections);

[[nodiscard]] std::string to_string(NodeKind kind);

}  // namespace gridfreq
