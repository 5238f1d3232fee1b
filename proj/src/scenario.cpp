#include "gridfreq/scenario.hpp"

#include "gridfreq/case_io.hpp"
#include "gridfreq/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <random>
#include <sstream>

namespace gridfreq {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw ParseError(where + ": " + what); }

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) fail(where, "unknown field '" + key + "'");
    }
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "expected a number");
    return v.get<double>();
}

int integer(const json& v, const std::string& where) {
    if (!v.is_number_integer()) fail(where, "expected an integer");
    return v.get<int>();
}

std::string string(const json& v, const std::string& where) {
    if (!v.is_string()) fail(where, "expected a string");
    return v.get<std::string>();
}

template <typename T, typename Fn>
void optional_field(const json& obj, const char* key, const std::string& where, T& target, Fn convert) {
    const auto it = obj.find(key);
    if (it != obj.end() && !it->is_null()) target = convert(*it, where + "." + key);
}

ControllerConfig parse_controller(const json& j) {
    const std::string where = "controller";
    if (!j.is_object()) fail(where, "expected an object");
    reject_unknown(j, where, {"law", "k", "k_areas", "node", "weights", "topology", "w", "links", "barrier_mu"});
    ControllerConfig c;
    optional_field(j, "law", where, c.law, string);
    if (!is_known_law(c.law)) fail(where + ".law", "unknown law '" + c.law + "'");
    if (const auto it = j.find("k"); it != j.end() && !it->is_null()) c.k = number(*it, where + ".k");
    if (const auto it = j.find("k_areas"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) fail(where + ".k_areas", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            c.k_areas.push_back(number((*it)[i], where + ".k_areas[" + std::to_string(i) + "]"));
        }
    }
    if (const auto it = j.find("node"); it != j.end() && !it->is_null()) c.node = integer(*it, where + ".node");
    if (const auto it = j.find("weights"); it != j.end() && !it->is_null()) {
        if (it->is_string()) {
            if (it->get<std::string>() != "uniform") fail(where + ".weights", "expected \"uniform\" or an object");
        } else if (it->is_object()) {
            for (const auto& [key, val] : it->items()) {
                int id = 0;
                const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), id);
                if (ec != std::errc() || ptr != key.data() + key.size()) {
                    fail(where + ".weights", "key '" + key + "' is not a node id");
                }
                c.weights[id] = number(val, where + ".weights." + key);
            }
        } else {
            fail(where + ".weights", "expected \"uniform\" or an object");
        }
    }
    optional_field(j, "topology", where, c.topology, string);
    if (c.topology != "ring" && c.topology != "links") fail(where + ".topology", "expected \"ring\" or \"links\"");
    optional_field(j, "w", where, c.w, number);
    if (const auto it = j.find("links"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) fail(where + ".links", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string lw = where + ".links[" + std::to_string(i) + "]";
            const json& l = (*it)[i];
            if (!l.is_object()) fail(lw, "expected an object");
            reject_unknown(l, lw, {"a", "b", "w"});
            LinkConfig link;
            if (!l.contains("a") || !l.contains("b")) fail(lw, "missing field 'a' or 'b'");
            link.a = integer(l["a"], lw + ".a");
            link.b = integer(l["b"], lw + ".b");
            optional_field(l, "w", lw, link.w, number);
            c.links.push_back(link);
        }
    }
    optional_field(j, "barrier_mu", where, c.barrier_mu, number);
    return c;
}

Scenario from_json(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) fail("scenario", "expected a JSON object");
    reject_unknown(doc, "scenario",
                   {"case", "controller", "disturbances", "dt", "t_max", "stride", "seed", "out", "metrics"});
    Scenario sc;
    if (!doc.contains("case")) fail("scenario", "missing field 'case'");
    const std::filesystem::path case_path = string(doc["case"], "case");
    sc.case_path = case_path.is_absolute() ? case_path : base_dir / case_path;
    if (!doc.contains("controller")) fail("scenario", "missing field 'controller'");
    sc.controller = parse_controller(doc["controller"]);
    if (const auto it = doc.find("disturbances"); it != doc.end() && !it->is_null()) {
        if (!it->is_array()) fail("disturbances", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string dw = "disturbances[" + std::to_string(i) + "]";
            const json& d = (*it)[i];
            if (!d.is_object()) fail(dw, "expected an object");
            reject_unknown(d, dw, {"t", "node", "dP"});
            if (!d.contains("t") || !d.contains("node") || !d.contains("dP")) fail(dw, "needs fields t, node and dP");
            sc.disturbances.push_back({number(d["t"], dw + ".t"), integer(d["node"], dw + ".node"),
                                       number(d["dP"], dw + ".dP")});
        }
    }
    optional_field(doc, "dt", "scenario", sc.dt, number);
    optional_field(doc, "t_max", "scenario", sc.t_max, number);
    if (const auto it = doc.find("stride"); it != doc.end() && !it->is_null()) {
        const int s = integer(*it, "stride");
        if (s <= 0) fail("stride", "must be positive");
        sc.stride = static_cast<std::size_t>(s);
    }
    if (const auto it = doc.find("seed"); it != doc.end() && !it->is_null()) {
        if (!it->is_number_unsigned()) fail("seed", "expected a nonnegative integer");
        sc.seed = it->get<std::uint64_t>();
    }
    if (const auto it = doc.find("out"); it != doc.end() && !it->is_null()) sc.out = string(*it, "out");
    if (const auto it = doc.find("metrics"); it != doc.end() && !it->is_null()) {
        if (!it->is_object()) fail("metrics", "expected an object");
        reject_unknown(*it, "metrics", {"settling_threshold"});
        optional_field(*it, "settling_threshold", "metrics", sc.settling_threshold, number);
    }
    if (!(sc.dt > 0.0)) fail("dt", "must be positive");
    if (!(sc.t_max >= 0.0)) fail("t_max", "must be nonnegative");
    if (!(sc.settling_threshold > 0.0)) fail("metrics.settling_threshold", "must be positive");
    return sc;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_row(std::ostream& os, const std::vector<double>& row) {
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (j) os << ',';
        os << format_number(row[j]);
    }
    os << '\n';
}

}  // namespace

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario: ") + e.what());
    }
    return from_json(doc, base_dir);
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        Scenario sc = parse_scenario(buf.str(), path.parent_path());
        sc.source = path;
        return sc;
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

bool is_known_law(std::string_view law) {
    return law == "piac" || law == "piac_multi" || law == "piac_decentralized" || law == "agc" || law == "gb" ||
           law == "dai";
}

double default_gain(std::string_view law) {
    if (law == "piac" || law == "piac_multi" || law == "piac_decentralized") return 10.0;
    if (law == "agc" || law == "gb" || law == "dai") return 60.0;
    throw ValidationError("unknown law '" + std::string(law) + "'");
}

std::vector<double> draw_alphas(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 gen(seed);
    std::vector<double> out(n);
    // (x >> 11) + 0.5 over 2^53 is strictly inside (0, 1) and portable across
    // standard libraries, unlike std::uniform_real_distribution.
    for (double& a : out) a = (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
    return out;
}

Network prepare_network(const Scenario& sc) {
    Network net = load_case(sc.case_path);
    if (sc.seed) net = net.with_alphas(draw_alphas(*sc.seed, net.controller_nodes().size()));
    return net;
}

ControllerSpec build_spec(const Scenario& sc, const Network& net) {
    const ControllerConfig& c = sc.controller;
    const double k = c.k.value_or(default_gain(c.law));
    ControllerSpec spec;
    if (c.law == "piac") {
        spec = piac_single(net, k);
    } else if (c.law == "piac_multi") {
        if (!net.partition()) throw ValidationError("law piac_multi needs a case with areas");
        std::vector<double> ks = c.k_areas;
        if (ks.empty()) ks.assign(net.partition()->size(), k);
        spec = piac_multi(net, std::move(ks));
    } else if (c.law == "piac_decentralized") {
        spec = piac_decentralized(net, k);
    } else if (c.law == "agc") {
        spec = agc(net, k, c.node ? net.index_of(*c.node) : 0);
    } else if (c.law == "gb") {
        if (c.weights.empty()) {
            spec = gb_uniform(net, k);
        } else {
            std::vector<double> w(net.size(), 0.0);
            for (const auto& [id, cw] : c.weights) w[net.index_of(id)] = cw;
            spec = gather_broadcast(net, k, std::move(w));
        }
    } else if (c.law == "dai") {
        if (c.topology == "ring") {
            spec = dai_ring(net, k, c.w);
        } else {
            std::vector<std::size_t> position(net.size(), net.size());
            for (std::size_t p = 0; p < net.controller_nodes().size(); ++p) position[net.controller_nodes()[p]] = p;
            std::vector<CommLink> links;
            for (const LinkConfig& l : c.links) {
                const std::size_t a = position[net.index_of(l.a)];
                const std::size_t b = position[net.index_of(l.b)];
                if (a == net.size() || b == net.size()) throw ValidationError("DAI link endpoint is not a controller node");
                links.push_back({a, b, l.w});
            }
            spec = dai(net, std::vector<double>(net.controller_nodes().size(), k), std::move(links));
        }
    } else {
        throw ValidationError("unknown law '" + c.law + "'");
    }
    spec.costs = default_costs(net, c.barrier_mu);
    validate(net, spec);
    return spec;
}

RunResult run_scenario(const Scenario& sc) {
    Network net = prepare_network(sc);
    ControllerSpec spec = build_spec(sc, net);
    const Controller ctrl(net, spec);
    SimOptions opts;
    opts.dt = sc.dt;
    opts.t_max = sc.t_max;
    opts.stride = sc.stride;
    Trajectory traj = simulate(net, ctrl, sc.disturbances, opts);
    Metrics metrics = compute_metrics(traj, net, {sc.settling_threshold});

    std::optional<DescentReport> lyap;
    if (std::holds_alternative<PiacSingle>(ctrl.spec().law)) {
        std::vector<double> p = net.injections();
        for (const Disturbance& d : sc.disturbances) p[net.index_of(d.node)] += d.delta;
        const LyapunovConfig cfg = make_lyapunov_config(net, ctrl.spec(), p);
        lyap = check_lyapunov_descent(net, cfg, traj);
        lyap->values.clear();
    }
    std::vector<std::size_t> actuated = ctrl.actuated();
    return RunResult{sc, std::move(net), ctrl.spec(), std::move(actuated), std::move(traj), std::move(metrics),
                     std::move(lyap)};
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& os, const RunResult& run) {
    const Network& net = run.net;
    const Trajectory& traj = run.traj;
    os << 't';
    for (std::size_t i = 0; i < net.active_count(); ++i) os << ",f_" << net.node(i).id;
    os << ",u_s,lambda";
    for (std::size_t i : run.actuated) os << ",u_" << net.node(i).id;
    for (std::size_t i : net.controller_nodes()) os << ",mc_" << net.node(i).id;
    os << ",omega_s";
    std::vector<std::string> area_names;
    if (const auto* multi = std::get_if<PiacMulti>(&run.spec.law)) {
        for (const Area& a : multi->partition.areas()) area_names.push_back(a.name);
    } else if (net.partition()) {
        for (const Area& a : net.partition()->areas()) area_names.push_back(a.name);
    }
    for (const auto& name : area_names) os << ",pex_" << name;
    os << '\n';

    const auto omega_s = abstract_frequency_samples(net, traj);
    const double f0 = net.base_hz();
    std::vector<double> row;
    for (std::size_t s = 0; s < traj.samples.size(); ++s) {
        const Sample& smp = traj.samples[s];
        row.clear();
        row.push_back(smp.t);
        for (std::size_t i = 0; i < net.active_count(); ++i) row.push_back(smp.omega[i] * f0 + f0);
        row.push_back(smp.u_s);
        row.push_back(smp.price);
        for (std::size_t i : run.actuated) row.push_back(smp.u[i]);
        row.insert(row.end(), smp.marginal_costs.begin(), smp.marginal_costs.end());
        row.push_back(omega_s[s]);
        row.insert(row.end(), smp.exports.begin(), smp.exports.end());
        write_row(os, row);
    }
}

void write_relative_frequency_csv(std::ostream& os, const RunResult& run) {
    const Network& net = run.net;
    os << "t,omega_s";
    for (std::size_t i = 0; i < net.active_count(); ++i) os << ",rel_" << net.node(i).id;
    os << '\n';
    const auto omega_s = abstract_frequency_samples(net, run.traj);
    std::vector<double> row;
    for (std::size_t s = 0; s < run.traj.samples.size(); ++s) {
        const Sample& smp = run.traj.samples[s];
        row.assign({smp.t, omega_s[s]});
        for (std::size_t i = 0; i < net.active_count(); ++i) row.push_back(smp.omega[i] - omega_s[s]);
        write_row(os, row);
    }
}

std::string summary_json(const RunResult& run) {
    const Metrics& m = run.metrics;
    json doc;
    doc["law"] = law_name(run.spec.law);
    doc["case"] = run.scenario.case_path.generic_string();
    doc["dt"] = run.scenario.dt;
    doc["t_max"] = run.scenario.t_max;
    doc["stride"] = run.scenario.stride;
    doc["seed"] = run.scenario.seed ? json(*run.scenario.seed) : json(nullptr);
    doc["samples"] = run.traj.samples.size();

    json metrics;
    metrics["nadir_hz"] = number_or_null(m.nadir_hz);
    metrics["max_overshoot_us"] = number_or_null(m.max_overshoot_us);
    metrics["settling_time"] = m.settling_time ? json(*m.settling_time) : json(nullptr);
    metrics["marginal_spread"] = number_or_null(m.marginal_spread);
    json exports = json::object();
    if (!m.export_deviation.empty()) {
        const AreaPartition* part = nullptr;
        if (const auto* multi = std::get_if<PiacMulti>(&run.spec.law)) part = &multi->partition;
        else if (run.net.partition()) part = &*run.net.partition();
        for (std::size_t r = 0; r < m.export_deviation.size(); ++r) {
            exports[part->area(r).name] = number_or_null(m.export_deviation[r]);
        }
    }
    metrics["export_deviation"] = exports;
    metrics["final_u_s"] = m.final_u_s;
    metrics["final_p_s"] = m.final_p_s;
    metrics["final_max_abs_omega"] = m.final_max_abs_omega;
    metrics["settling_threshold"] = run.scenario.settling_threshold;
    doc["metrics"] = metrics;

    if (run.lyapunov) {
        const DescentReport& r = *run.lyapunov;
        doc["lyapunov"] = {{"violations", r.violations},
                           {"max_increase_rate", r.max_increase_rate},
                           {"descending_fraction", r.descending_fraction},
                           {"tolerance", r.tolerance},
                           {"alpha_bound", r.alpha_bound},
                           {"alpha_ok", r.alpha_ok}};
    } else {
        doc["lyapunov"] = nullptr;
    }
    return doc.dump(2);
}

}  // namespace gridfreq
