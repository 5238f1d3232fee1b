#include "gridfreq/commands.hpp"

#include "gridfreq/case_io.hpp"
#include "gridfreq/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <ostream>
#include <thread>

namespace gridfreq {

namespace fs = std::filesystem;

namespace {

constexpr double kOvershootTolerance = 1e-3;

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << content;
    if (!f) throw Error("failed writing " + path.string());
}

template <typename Writer>
void write_with(const fs::path& path, Writer&& writer) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    writer(f);
    if (!f) throw Error("failed writing " + path.string());
}

std::string settling_text(const Metrics& m) { return m.settling_time ? format_number(*m.settling_time) : "none"; }

struct Row {
    std::string label;
    const RunResult* run;
};

std::string table_header() {
    return "scenario,law,nadir_hz,max_overshoot_us,settling_time,marginal_spread,final_u_s,overshoots";
}

std::string table_row(const Row& r) {
    const Metrics& m = r.run->metrics;
    return r.label + "," + law_name(r.run->spec.law) + "," + format_number(m.nadir_hz) + "," +
           format_number(m.max_overshoot_us) + "," + settling_text(m) + "," + format_number(m.marginal_spread) + "," +
           format_number(m.final_u_s) + "," + (m.max_overshoot_us > kOvershootTolerance ? "yes" : "no");
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

fs::path canonical_or_self(const fs::path& p) {
    std::error_code ec;
    auto c = fs::weakly_canonical(p, ec);
    return ec ? p : c;
}

}  // namespace

void apply_overrides(Scenario& sc, const Overrides& ov) {
    if (ov.case_path) sc.case_path = *ov.case_path;
    if (ov.out) sc.out = *ov.out;
    if (ov.dt) {
        if (!(*ov.dt > 0.0)) throw ValidationError("--dt must be positive");
        sc.dt = *ov.dt;
    }
    if (ov.t_max) {
        if (!(*ov.t_max >= 0.0)) throw ValidationError("--tmax must be nonnegative");
        sc.t_max = *ov.t_max;
    }
    if (ov.seed) sc.seed = *ov.seed;
    if (ov.controller) {
        if (!is_known_law(*ov.controller)) throw ValidationError("unknown controller '" + *ov.controller + "'");
        if (*ov.controller != sc.controller.law) {
            sc.controller.law = *ov.controller;
            sc.controller.k.reset();
            sc.controller.k_areas.clear();
        }
    }
    if (ov.k) {
        sc.controller.k = *ov.k;
        sc.controller.k_areas.clear();
    }
}

std::size_t runner_threads() {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const char* env = std::getenv("GRIDFREQ_THREADS");
    if (!env) return hw;
    const std::string_view s(env);
    std::size_t n = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec != std::errc() || ptr != s.data() + s.size() || n == 0) return hw;
    return n;
}

std::vector<RunResult> run_all(const std::vector<Scenario>& scenarios, std::size_t threads) {
    threads = std::max<std::size_t>(1, threads);
    std::vector<RunResult> results;
    results.reserve(scenarios.size());
    for (std::size_t first = 0; first < scenarios.size(); first += threads) {
        const std::size_t last = std::min(scenarios.size(), first + threads);
        std::vector<std::future<RunResult>> batch;
        for (std::size_t i = first; i < last; ++i) {
            batch.push_back(std::async(std::launch::async, [&sc = scenarios[i]] { return run_scenario(sc); }));
        }
        for (auto& f : batch) results.push_back(f.get());
    }
    return results;
}

int cmd_simulate(const fs::path& scenario, const Overrides& ov, bool relative_frequency, std::ostream& out,
                 std::ostream& err) {
    return guarded(err, [&] {
        Scenario sc = load_scenario(scenario);
        apply_overrides(sc, ov);
        const RunResult run = run_scenario(sc);
        fs::create_directories(sc.out);
        write_with(sc.out / "trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, run); });
        write_file(sc.out / "summary.json", summary_json(run) + "\n");
        if (relative_frequency) {
            write_with(sc.out / "relative_frequency.csv",
                       [&](std::ostream& os) { write_relative_frequency_csv(os, run); });
        }
        const Metrics& m = run.metrics;
        out << "law " << law_name(run.spec.law) << ": nadir " << format_number(m.nadir_hz) << " Hz, overshoot "
            << format_number(m.max_overshoot_us) << " p.u., settling " << settling_text(m) << " s, final u_s "
            << format_number(m.final_u_s) << " p.u.\n";
        if (run.lyapunov) {
            out << "energy descent: " << run.lyapunov->violations << " violations above "
                << format_number(run.lyapunov->tolerance) << " (alpha bound " << format_number(run.lyapunov->alpha_bound)
                << ")\n";
        }
        out << "wrote " << (sc.out / "trajectory.csv").generic_string() << '\n';
        return 0;
    });
}

int cmd_compare(const std::vector<fs::path>& scenarios, const Overrides& ov, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (scenarios.empty()) throw ValidationError("compare needs at least one scenario");
        std::vector<Scenario> list;
        for (const auto& p : scenarios) {
            Scenario sc = load_scenario(p);
            apply_overrides(sc, ov);
            list.push_back(std::move(sc));
        }
        for (std::size_t i = 1; i < list.size(); ++i) {
            if (canonical_or_self(list[i].case_path) != canonical_or_self(list[0].case_path)) {
                throw ValidationError("scenario " + scenarios[i].string() + " uses a different case");
            }
            if (list[i].disturbances != list[0].disturbances) {
                throw ValidationError("scenario " + scenarios[i].string() + " uses different disturbances");
            }
        }
        const auto runs = run_all(list, runner_threads());
        std::string table = table_header() + "\n";
        for (std::size_t i = 0; i < runs.size(); ++i) {
            table += table_row({scenarios[i].stem().string(), &runs[i]}) + "\n";
        }
        out << table;
        if (ov.out) {
            fs::create_directories(*ov.out);
            write_file(*ov.out / "comparison.csv", table);
        }
        return 0;
    });
}

int cmd_sweep(const fs::path& scenario, const std::string& param, const std::vector<double>& values,
              const Overrides& ov, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (param != "k" && param != "k_GB" && param != "dt") {
            throw ValidationError("unknown sweep parameter '" + param + "' (expected k, k_GB or dt)");
        }
        if (values.empty()) throw ValidationError("sweep needs at least one value");
        Scenario base = load_scenario(scenario);
        apply_overrides(base, ov);
        if (param == "k_GB" && base.controller.law != "gb") throw ValidationError("k_GB applies to the gb law only");

        std::vector<Scenario> list;
        for (double v : values) {
            Scenario sc = base;
            if (param == "dt") {
                if (!(v > 0.0)) throw ValidationError("dt values must be positive");
                sc.dt = v;
            } else {
                sc.controller.k = v;
                sc.controller.k_areas.clear();
            }
            list.push_back(std::move(sc));
        }
        const auto runs = run_all(list, runner_threads());

        std::string table = param + ",nadir_hz,max_overshoot_us,settling_time,marginal_spread,final_u_s\n";
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const Metrics& m = runs[i].metrics;
            table += format_number(values[i]) + "," + format_number(m.nadir_hz) + "," +
                     format_number(m.max_overshoot_us) + "," + settling_text(m) + "," +
                     format_number(m.marginal_spread) + "," + format_number(m.final_u_s) + "\n";
        }
        out << table;

        std::vector<std::size_t> order(values.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::string& law = base.controller.law;
        if (param == "dt") {
            double spread = 0.0;
            for (std::size_t i = 1; i < runs.size(); ++i) {
                spread = std::max(spread, std::abs(runs[i].metrics.nadir_hz - runs[0].metrics.nadir_hz));
                spread = std::max(spread,
                                  std::abs(runs[i].metrics.max_overshoot_us - runs[0].metrics.max_overshoot_us));
            }
            out << "trend: metrics agree within 1e-3 across dt: " << (spread <= 1e-3 ? "yes" : "no") << " (max difference "
                << format_number(spread) << ")\n";
        } else if (law == "gb") {
            bool ok = true;
            for (std::size_t i = 1; i < order.size(); ++i) {
                ok = ok && runs[order[i]].metrics.max_overshoot_us >= runs[order[i - 1]].metrics.max_overshoot_us;
            }
            out << "trend: overshoot nondecreasing in " << param << ": " << (ok ? "yes" : "no") << '\n';
        } else if (law.rfind("piac", 0) == 0) {
            bool ok = true;
            for (std::size_t i = 1; i < order.size(); ++i) {
                ok = ok && runs[order[i]].metrics.nadir_hz > runs[order[i - 1]].metrics.nadir_hz;
            }
            out << "trend: nadir depth strictly decreasing in k: " << (ok ? "yes" : "no") << '\n';
        }
        if (ov.out) {
            fs::create_directories(*ov.out);
            write_file(*ov.out / "sweep.csv", table);
        }
        return 0;
    });
}

int cmd_validate_case(const fs::path& case_path, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Network net = load_case(case_path);
        const Aggregates agg = aggregate_constants(net);
        out << "nodes " << net.size() << " (machine " << net.machine_count() << ", freq " << net.freq_count()
            << ", passive " << net.passive_count() << "), lines " << net.lines().size() << ", controllers "
            << net.controller_nodes().size() << '\n';
        out << "M_s " << format_number(agg.inertia) << ", D_s " << format_number(agg.droop) << ", P_s "
            << format_number(agg.injection) << '\n';
        if (const auto& part = net.partition()) {
            for (std::size_t r = 0; r < part->size(); ++r) {
                out << "area " << part->area(r).name << ": " << part->members(r).size() << " nodes, "
                    << boundary_lines(net, *part, r).size() << " boundary lines\n";
            }
        }
        AngleVector theta;
        if (net.controller_nodes().empty()) {
            theta = solve_algebraic(net).theta;
        } else {
            theta = find_equilibrium(net, piac_single(net, 1.0)).theta;
        }
        const SecurityReport sec = security_check(net, theta);
        double max_diff = 0.0;
        for (std::size_t l = 0; l < net.lines().size(); ++l) {
            max_diff = std::max(max_diff, std::abs(theta[net.line_from(l)] - theta[net.line_to(l)]));
        }
        out << "operating point: max angle difference " << format_number(max_diff) << " rad, "
            << (sec.secure ? "secure" : "outside the security region") << (sec.near_boundary ? " (near boundary)" : "")
            << '\n';
        return sec.secure ? 0 : 1;
    });
}

}  // namespace gridfreq
