#pragma once

#include "gridfreq/case_io.hpp"
#include "gridfreq/dynamics.hpp"
#include "gridfreq/network.hpp"

#include <string>
#include <vector>

namespace support {

using namespace gridfreq;

inline Node machine(int id, double m, double d, double p, std::optional<double> alpha = std::nullopt) {
    Node n;
    n.id = id;
    n.kind = NodeKind::Machine;
    n.inertia = m;
    n.droop = d;
    n.injection = p;
    if (alpha) n.controller = ControllerParams{*alpha};
    return n;
}

inline Node freq(int id, double d, double p, std::optional<double> alpha = std::nullopt) {
    Node n;
    n.id = id;
    n.kind = NodeKind::FreqDependent;
    n.droop = d;
    n.injection = p;
    if (alpha) n.controller = ControllerParams{*alpha};
    return n;
}

inline Node passive(int id, double p) {
    Node n;
    n.id = id;
    n.kind = NodeKind::Passive;
    n.injection = p;
    return n;
}

/// Machine(M=1, D=1) and FreqDependent(D=1) joined by one line; controllers alpha = 1 and 3.
inline Network two_node(double p1 = 1.0, double p2 = -1.0, double b = 5.0) {
    return Network({machine(1, 1.0, 1.0, p1, 1.0), freq(2, 1.0, p2, 3.0)}, {{1, 2, b}}, 100.0, 60.0);
}

/// Two machines and a frequency-dependent load on a triangle with equal susceptance.
inline Network triangle(double b = 1.0, std::vector<double> p = {0.3, 0.2, -0.5}) {
    return Network({machine(1, 2.0, 1.0, p[0], 1.0), machine(2, 1.5, 1.2, p[1], 0.5), freq(3, 0.8, p[2])},
                   {{1, 2, b}, {2, 3, b}, {1, 3, b}}, 100.0, 60.0);
}

/// Machine - passive - frequency-dependent chain plus a second machine, with a passive hub.
inline Network with_passive() {
    return Network({machine(1, 1.0, 1.0, 0.4, 0.7), machine(2, 2.0, 0.5, 0.1, 0.9), freq(3, 1.0, -0.3),
                    passive(4, -0.2)},
                   {{1, 4, 4.0}, {2, 4, 3.0}, {3, 4, 5.0}, {1, 3, 1.0}}, 100.0, 60.0);
}

/// Two areas of two nodes each joined by one tie line.
inline Network two_area_toy() {
    std::vector<Node> nodes{machine(1, 1.0, 1.0, 0.5, 1.0), freq(2, 1.0, -0.3), machine(3, 1.5, 1.0, 0.2, 0.6),
                            freq(4, 1.0, -0.4)};
    std::vector<Line> lines{{1, 2, 4.0}, {3, 4, 4.0}, {2, 3, 3.0}};
    // Area A exports 0.2 at the balanced point (0.5 - 0.3).
    std::vector<Area> areas{{"A", {1, 2}, 0.2}, {"B", {3, 4}, -0.2}};
    return Network(std::move(nodes), std::move(lines), 100.0, 60.0, std::move(areas));
}

inline Network ieee39() { return load_case(std::string(GRIDFREQ_DATA_DIR) + "/ieee39.json"); }

inline std::vector<Disturbance> ieee39_step(double t = 0.5) {
    return {{t, 4, -0.33}, {t, 12, -0.33}, {t, 20, -0.33}};
}

inline std::string scenario_path(const std::string& name) {
    return std::string(GRIDFREQ_SCENARIO_DIR) + "/" + name;
}

}  // namespace support
