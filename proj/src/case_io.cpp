#include "gridfreq/case_io.hpp"

#include "gridfreq/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

namespace gridfreq {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ParseError(where + ": " + what);
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            fail(where, "unknown field '" + key + "'");
        }
    }
}

const json& require(const json& obj, const std::string& where, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(where, std::string("missing field '") + key + "'");
    return *it;
}

double number(const json& obj, const std::string& where, const char* key) {
    const json& v = require(obj, where, key);
    if (!v.is_number()) fail(where + "." + key, "expected a number");
    return v.get<double>();
}

double bound(const json& obj, const std::string& where, const char* key, double missing) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return missing;
    if (!it->is_number()) fail(where + "." + key, "expected a number or null");
    return it->get<double>();
}

int integer(const json& v, const std::string& where) {
    if (!v.is_number_integer()) fail(where, "expected an integer");
    return v.get<int>();
}

NodeKind parse_kind(const json& v, const std::string& where) {
    if (!v.is_string()) fail(where, "expected a string");
    const auto s = v.get<std::string>();
    if (s == "machine") return NodeKind::Machine;
    if (s == "freq") return NodeKind::FreqDependent;
    if (s == "passive") return NodeKind::Passive;
    fail(where, "unknown node kind '" + s + "'");
}

Node parse_node(const json& j, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
    reject_unknown(j, where, {"id", "kind", "M", "D", "P", "V", "controller"});
    Node n;
    n.id = integer(require(j, where, "id"), where + ".id");
    n.kind = parse_kind(require(j, where, "kind"), where + ".kind");
    n.inertia = number(j, where, "M");
    n.droop = number(j, where, "D");
    n.injection = number(j, where, "P");
    n.voltage = number(j, where, "V");
    const json& c = require(j, where, "controller");
    if (!c.is_null()) {
        const std::string cw = where + ".controller";
        if (!c.is_object()) fail(cw, "expected an object or null");
        reject_unknown(c, cw, {"alpha", "u_lo", "u_hi"});
        n.controller = ControllerParams{number(c, cw, "alpha"), bound(c, cw, "u_lo", -kInf),
                                        bound(c, cw, "u_hi", kInf)};
    }
    return n;
}

Line parse_line(const json& j, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
    reject_unknown(j, where, {"from", "to", "B"});
    return Line{integer(require(j, where, "from"), where + ".from"),
                integer(require(j, where, "to"), where + ".to"), number(j, where, "B")};
}

Area parse_area(const json& j, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
    reject_unknown(j, where, {"name", "nodes", "p_ex_nominal"});
    Area a;
    const json& name = require(j, where, "name");
    if (!name.is_string()) fail(where + ".name", "expected a string");
    a.name = name.get<std::string>();
    const json& ids = require(j, where, "nodes");
    if (!ids.is_array()) fail(where + ".nodes", "expected an array");
    for (std::size_t k = 0; k < ids.size(); ++k) {
        a.node_ids.push_back(integer(ids[k], where + ".nodes[" + std::to_string(k) + "]"));
    }
    a.export_nominal = number(j, where, "p_ex_nominal");
    return a;
}

Network from_json(const json& doc) {
    if (!doc.is_object()) fail("case", "expected a JSON object");
    reject_unknown(doc, "case", {"base_mva", "base_hz", "nodes", "lines", "areas"});
    const double base_mva = number(doc, "case", "base_mva");
    const double base_hz = number(doc, "case", "base_hz");

    const json& jn = require(doc, "case", "nodes");
    if (!jn.is_array()) fail("nodes", "expected an array");
    std::vector<Node> nodes;
    for (std::size_t k = 0; k < jn.size(); ++k) nodes.push_back(parse_node(jn[k], "nodes[" + std::to_string(k) + "]"));

    const json& jl = require(doc, "case", "lines");
    if (!jl.is_array()) fail("lines", "expected an array");
    std::vector<Line> lines;
    for (std::size_t k = 0; k < jl.size(); ++k) lines.push_back(parse_line(jl[k], "lines[" + std::to_string(k) + "]"));

    std::optional<std::vector<Area>> areas;
    if (const auto it = doc.find("areas"); it != doc.end() && !it->is_null()) {
        if (!it->is_array()) fail("areas", "expected an array or null");
        areas.emplace();
        for (std::size_t k = 0; k < it->size(); ++k) {
            areas->push_back(parse_area((*it)[k], "areas[" + std::to_string(k) + "]"));
        }
    }
    return Network(std::move(nodes), std::move(lines), base_mva, base_hz, std::move(areas));
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

json bound_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

Network parse_case(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError("line " + std::to_string(line_of_offset(text, e.byte)) + ": " + e.what());
    }
    return from_json(doc);
}

Network load_case(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open case file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_case(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string serialize_case(const Network& net) {
    json doc;
    doc["base_mva"] = net.base_mva();
    doc["base_hz"] = net.base_hz();
    json nodes = json::array();
    for (const Node& n : net.nodes()) {
        json jn;
        jn["id"] = n.id;
        jn["kind"] = to_string(n.kind);
        jn["M"] = n.inertia;
        jn["D"] = n.droop;
        jn["P"] = n.injection;
        jn["V"] = n.voltage;
        if (n.controller) {
            jn["controller"] = {{"alpha", n.controller->alpha},
                                {"u_lo", bound_json(n.controller->u_lo)},
                                {"u_hi", bound_json(n.controller->u_hi)}};
        } else {
            jn["controller"] = nullptr;
        }
        nodes.push_back(std::move(jn));
    }
    doc["nodes"] = std::move(nodes);
    json lines = json::array();
    for (const Line& l : net.lines()) lines.push_back({{"from", l.from}, {"to", l.to}, {"B", l.susceptance}});
    doc["lines"] = std::move(lines);
    if (const auto& part = net.partition()) {
        json areas = json::array();
        for (const Area& a : part->areas()) {
            areas.push_back({{"name", a.name}, {"nodes", a.node_ids}, {"p_ex_nominal", a.export_nominal}});
        }
        doc["areas"] = std::move(areas);
    } else {
        doc["areas"] = nullptr;
    }
    return doc.dump(1);
}

void save_case(const Network& net, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write case file " + path.string());
    out << serialize_case(net) << '\n';
}

}  // namespace gridfreq
