// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Exit status is nonzero when any criterion fails.

#include "gridfreq/analysis.hpp"
#include "gridfreq/case_io.hpp"
#include "gridfreq/commands.hpp"
#include "gridfreq/scenario.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <map>
#include <random>
#include <sstream>
#include <string>

using namespace gridfreq;
using namespace support;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct TimedRun {
    RunResult run;
    double seconds = 0.0;
};

/// IEEE-39 runs shared by several criteria, executed concurrently.
std::map<std::string, TimedRun> ieee39_runs() {
    const std::vector<std::string> names{"piac_ieee39",          "gb_ieee39",           "agc_ieee39",
                                         "dai_ieee39",           "decentralized_ieee39", "piac_multi_ieee39"};
    std::vector<std::future<TimedRun>> jobs;
    for (const auto& name : names) {
        jobs.push_back(std::async(std::launch::async, [name] {
            const Scenario sc = load_scenario(scenario_path(name + ".json"));
            const auto start = Clock::now();
            RunResult run = run_scenario(sc);
            return TimedRun{std::move(run), seconds_since(start)};
        }));
    }
    std::map<std::string, TimedRun> out;
    for (std::size_t i = 0; i < names.size(); ++i) out.emplace(names[i], jobs[i].get());
    return out;
}

Outcome tracking() {
    const double k = 10.0;
    const double dt = 1e-3;
    const double p_s = -0.5;
    const Network net = load_case(std::string(GRIDFREQ_DATA_DIR) + "/two_node.json");
    SimOptions opts;
    opts.dt = dt;
    opts.t_max = 1.0;
    opts.stride = 1;
    const std::vector<Disturbance> d{{0.0, 2, p_s}};
    const auto start = Clock::now();
    const Trajectory traj = simulate(net, piac_single(net, k), d, opts);
    const double secs = seconds_since(start);
    double err = 0.0;
    for (const Sample& s : traj.samples) err = std::max(err, std::abs(s.u_s + p_s * (1.0 - std::exp(-k * s.t))));
    const double bound = 5.0 * k * dt * std::abs(p_s);
    return {err <= bound && secs < 1.0,
            "max |u_s - closed form| = " + fmt(err) + " (bound " + fmt(bound) + "), runtime " + fmt(secs) + " s"};
}

Outcome no_overshoot(const std::map<std::string, TimedRun>& runs) {
    const TimedRun& piac = runs.at("piac_ieee39");
    const TimedRun& gb = runs.at("gb_ieee39");
    const double po = piac.run.metrics.max_overshoot_us;
    const double go = gb.run.metrics.max_overshoot_us;
    const bool pass = po < 1e-3 && go > 0.01 && piac.seconds < 30.0 && gb.seconds < 30.0;
    return {pass, "PIAC overshoot " + fmt(po) + " p.u., GB overshoot " + fmt(go) + " p.u., runtimes " +
                      fmt(piac.seconds) + " s / " + fmt(gb.seconds) + " s"};
}

Outcome nadir(const std::map<std::string, TimedRun>& runs) {
    const double piac = runs.at("piac_ieee39").run.metrics.nadir_hz;
    const double gb = runs.at("gb_ieee39").run.metrics.nadir_hz;
    if (piac >= 59.55 && piac <= 59.85) return {true, "PIAC nadir " + fmt(piac) + " Hz inside [59.55, 59.85]"};
    return {piac > gb, "PIAC nadir " + fmt(piac) + " Hz outside [59.55, 59.85]; property form: PIAC nadir vs GB nadir " +
                           fmt(gb) + " Hz (PIAC must be shallower)"};
}

Outcome restoration(const std::map<std::string, TimedRun>& runs) {
    bool pass = true;
    std::string detail;
    for (const auto& [name, tr] : runs) {
        const Metrics& m = tr.run.metrics;
        const double total_err = std::abs(m.final_u_s - 0.99);
        const bool ok = m.final_max_abs_omega < 1e-6 && total_err < 1e-6;
        pass = pass && ok;
        detail += (detail.empty() ? "" : "; ") + law_name(tr.run.spec.law) + " max|w| " + fmt(m.final_max_abs_omega) +
                  " |sum u - 0.99| " + fmt(total_err);
    }
    return {pass, detail};
}

Outcome dispatch_optimality(const std::map<std::string, TimedRun>& runs) {
    const double spread = runs.at("piac_ieee39").run.metrics.marginal_spread;
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> alpha(0.05, 1.0);
    std::uniform_real_distribution<double> total(-2.0, 2.0);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + gen() % 3;
        std::vector<CostModel> costs;
        for (std::size_t i = 0; i < n; ++i) costs.push_back(CostModel::quadratic(alpha(gen)));
        const double us = total(gen);
        const double got = oracles::objective(costs, clear(costs, us).u);
        const double ref = oracles::brute_force_minimum(costs, us);
        worst = std::max(worst, std::abs(got - ref) / std::max(ref, 1e-300));
    }
    return {spread <= 1e-9 && worst <= 1e-6,
            "marginal spread " + fmt(spread) + ", worst relative objective gap vs brute force " + fmt(worst)};
}

Outcome decoupling(const std::map<std::string, TimedRun>& runs) {
    const RunResult& run = runs.at("piac_multi_ieee39").run;
    const auto& part = std::get<PiacMulti>(run.spec.law).partition;
    const auto a1 = part.members(0);
    double worst = 0.0;
    for (const Sample& s : run.traj.samples) {
        double sum = 0.0;
        for (std::size_t i : a1) sum += s.u[i];
        worst = std::max(worst, std::abs(sum));
    }
    const double dev = run.metrics.export_deviation.at(0);
    const bool pass = worst < 1e-4 && std::isfinite(dev) && dev < 1e-4;
    return {pass, "max |sum_A1 u| " + fmt(worst) + " p.u., A1 export deviation after settling " + fmt(dev) +
                      " p.u. (settling threshold " + fmt(run.scenario.settling_threshold) + ")"};
}

Outcome lyapunov(const std::map<std::string, TimedRun>& runs) {
    const RunResult& run = runs.at("piac_ieee39").run;
    if (!run.lyapunov) return {false, "no descent report"};
    const DescentReport& r = *run.lyapunov;
    return {r.violations == 0 && r.alpha_ok,
            std::to_string(r.violations) + " violations above " + fmt(r.tolerance) + ", max dV/dt " +
                fmt(r.max_increase_rate) + ", alpha bound " + fmt(r.alpha_bound)};
}

Outcome equilibrium_conditions() {
    const Network net = ieee39();
    auto p = net.injections();
    for (const Disturbance& d : ieee39_step()) p[net.index_of(d.node)] += d.delta;
    const double k = 10.0;
    const ControllerSpec spec = piac_single(net, k);
    const Equilibrium eq = find_equilibrium(net, spec, p);
    double p_s = 0.0;
    for (double x : p) p_s += x;
    const double balance = std::abs(p_s + aggregate_response(spec.costs, eq.lambda[0]));
    const double integral = std::abs(p_s - k * eq.eta[0]);
    const bool secure = security_check(net, eq.theta).secure;
    return {balance <= 1e-10 && integral <= 1e-10 && secure,
            "|sum P + sum J'^-1(lambda*)| " + fmt(balance) + ", |sum P - k eta*| " + fmt(integral) + ", secure " +
                (secure ? "yes" : "no")};
}

Outcome integrator_order() {
    const Network net = load_case(std::string(GRIDFREQ_DATA_DIR) + "/two_node.json");
    const std::vector<Disturbance> d{{0.0, 2, -0.5}};
    SimOptions ref_opts;
    ref_opts.dt = 6.25e-5;
    ref_opts.t_max = 1.0;
    ref_opts.stride = 1;
    ref_opts.integrator = Integrator::Rk4;
    const Trajectory ref = simulate(net, piac_single(net, 10.0), d, ref_opts);

    const std::vector<double> dts{1e-2, 5e-3, 2.5e-3, 1.25e-3};
    std::vector<double> xs;
    std::vector<double> ys;
    for (double dt : dts) {
        SimOptions opts;
        opts.dt = dt;
        opts.t_max = 1.0;
        opts.stride = 1;
        const Trajectory traj = simulate(net, piac_single(net, 10.0), d, opts);
        const auto ratio = static_cast<std::size_t>(std::lround(dt / ref_opts.dt));
        double err = 0.0;
        for (std::size_t s = 0; s < traj.samples.size(); ++s) {
            const Sample& a = traj.samples[s];
            const Sample& b = ref.samples[s * ratio];
            err = std::max(err, std::abs(a.omega[0] - b.omega[0]));
            err = std::max(err, std::abs(a.omega[1] - b.omega[1]));
            err = std::max(err, std::abs((a.theta[1] - a.theta[0]) - (b.theta[1] - b.theta[0])));
            err = std::max(err, std::abs(a.u_s - b.u_s));
        }
        xs.push_back(std::log(dt));
        ys.push_back(std::log(err));
    }
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {std::abs(slope - 1.0) <= 0.15, "log-log slope of Euler error vs RK4 reference " + fmt(slope)};
}

Outcome reductions() {
    // Single-area multi-area law against the centralized law on IEEE-39.
    Network base = ieee39();
    std::vector<int> ids;
    for (const Node& node : base.nodes()) ids.push_back(node.id);
    const Network net = base.with_areas(std::vector<Area>{{"all", ids, 0.0}});
    SimOptions opts;
    opts.t_max = 20.0;
    const auto d = ieee39_step();
    auto single_job = std::async(std::launch::async, [&] { return simulate(net, piac_single(net, 10.0), d, opts); });
    const Trajectory multi = simulate(net, piac_multi(net, {10.0}), d, opts);
    const Trajectory single = single_job.get();
    double diff = 0.0;
    for (std::size_t s = 0; s < single.samples.size(); ++s) {
        for (std::size_t i = 0; i < net.size(); ++i) {
            diff = std::max(diff, std::abs(single.samples[s].omega[i] - multi.samples[s].omega[i]));
            diff = std::max(diff, std::abs(single.samples[s].theta[i] - multi.samples[s].theta[i]));
            diff = std::max(diff, std::abs(single.samples[s].u[i] - multi.samples[s].u[i]));
        }
        diff = std::max(diff, std::abs(single.samples[s].u_s - multi.samples[s].u_s));
    }

    // DAI driven by a common frequency against the aggregate integral law
    // u_s' = -K w_s with K = k sum(alpha) / 2, both closed with M_s w_s' = P_s - D_s w_s + u_s.
    const Network two = load_case(std::string(GRIDFREQ_DATA_DIR) + "/two_node.json");
    const double k = 10.0;
    const double dt = 1e-3;
    const Controller dai_ctrl(two, dai_ring(two, k));
    const Aggregates agg = aggregate_constants(two);
    double alpha_sum = 0.0;
    for (std::size_t i : two.controller_nodes()) alpha_sum += two.node(i).controller->alpha;
    const double big_k = k * alpha_sum / 2.0;
    const double p_s = -0.5;
    ControllerState s = dai_ctrl.initial_state();
    double w_dai = 0.0;
    double w_ref = 0.0;
    double u_ref = 0.0;
    double gap = 0.0;
    const std::vector<double> theta(two.size(), 0.0);
    const auto flows = nodal_flows(two, theta);
    for (int j = 0; j < 10000; ++j) {
        const std::vector<double> omega(two.size(), w_dai);
        const Measurements m{theta, omega, flows};
        const double u_now = s.u_s;
        s = dai_step(dai_ctrl, s, m, dt);
        w_dai += dt * (p_s - agg.droop * w_dai + u_now) / agg.inertia;
        const double u_prev = u_ref;
        u_ref -= dt * big_k * w_ref;
        w_ref += dt * (p_s - agg.droop * w_ref + u_prev) / agg.inertia;
        gap = std::max(gap, std::abs(s.u_s - u_ref));
    }
    return {diff <= 1e-9 && gap <= 1e-6,
            "single-area multi vs single max difference " + fmt(diff) + ", DAI vs aggregate integral law " + fmt(gap)};
}

}  // namespace

int main() {
    std::vector<std::pair<std::string, std::function<Outcome()>>> criteria;
    std::map<std::string, TimedRun> runs;
    bool runs_ok = true;
    std::string runs_error;
    try {
        runs = ieee39_runs();
    } catch (const std::exception& e) {
        runs_ok = false;
        runs_error = e.what();
    }
    auto with_runs = [&](Outcome (*fn)(const std::map<std::string, TimedRun>&)) {
        return [&, fn]() -> Outcome {
            if (!runs_ok) return {false, "IEEE-39 runs failed: " + runs_error};
            return fn(runs);
        };
    };

    criteria.emplace_back("1 exponential tracking", tracking);
    criteria.emplace_back("2 no overshoot", with_runs(no_overshoot));
    criteria.emplace_back("3 frequency nadir", with_runs(nadir));
    criteria.emplace_back("4 nominal-frequency restoration", with_runs(restoration));
    criteria.emplace_back("5 economic dispatch optimality", with_runs(dispatch_optimality));
    criteria.emplace_back("6 multi-area decoupling", with_runs(decoupling));
    criteria.emplace_back("7 energy descent", with_runs(lyapunov));
    criteria.emplace_back("8 equilibrium conditions", equilibrium_conditions);
    criteria.emplace_back("9 integrator order", integrator_order);
    criteria.emplace_back("10 reduction identities", reductions);

    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("%s  criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
