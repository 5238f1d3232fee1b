#include "gridfreq/powerflow.hpp"

#include "gridfreq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gridfreq {

namespace {

constexpr double kBoundaryBand = 1e-6;

void check_size(const Network& net, std::size_t size, const char* what) {
    if (size != net.size()) throw ValidationError(std::string(what) + " has wrong size");
}

double mismatch_norm(const Network& net, std::span<const double> p, std::span<const double> theta,
                     std::span<const std::size_t> unknown, Eigen::VectorXd& r) {
    double norm = 0.0;
    for (std::size_t k = 0; k < unknown.size(); ++k) {
        const std::size_t i = unknown[k];
        double flow = 0.0;
        for (const Edge& e : net.neighbors(i)) flow += e.susceptance * std::sin(theta[i] - theta[e.node]);
        r[static_cast<Eigen::Index>(k)] = p[i] - flow;
        norm = std::max(norm, std::abs(r[static_cast<Eigen::Index>(k)]));
    }
    return std::isfinite(norm) ? norm : std::numeric_limits<double>::infinity();
}

}  // namespace

double line_flow(const Network& net, std::span<const double> theta, std::size_t l) {
    return net.lines().at(l).susceptance * std::sin(theta[net.line_from(l)] - theta[net.line_to(l)]);
}

void nodal_flows(const Network& net, std::span<const double> theta, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t l = 0; l < net.lines().size(); ++l) {
        const std::size_t a = net.line_from(l);
        const std::size_t b = net.line_to(l);
        const double f = net.lines()[l].susceptance * std::sin(theta[a] - theta[b]);
        out[a] += f;
        out[b] -= f;
    }
}

std::vector<double> nodal_flows(const Network& net, std::span<const double> theta) {
    check_size(net, theta.size(), "angle vector");
    std::vector<double> out(net.size());
    nodal_flows(net, theta, out);
    return out;
}

double synchronized_frequency(const Network& net, std::span<const double> injections, std::span<const double> u) {
    check_size(net, injections.size(), "injection vector");
    check_size(net, u.size(), "input vector");
    double num = 0.0;
    for (std::size_t i = 0; i < net.size(); ++i) num += injections[i] + u[i];
    return num / aggregate_constants(net).droop;
}

double synchronized_frequency(const Network& net, std::span<const double> u) {
    const auto p = net.injections();
    return synchronized_frequency(net, p, u);
}

FlowSolution solve_algebraic(const Network& net, std::span<const double> injections, AngleVector initial,
                             std::span<const std::size_t> unknown, const NewtonOptions& opts) {
    check_size(net, injections.size(), "injection vector");
    check_size(net, initial.size(), "angle vector");
    if (unknown.empty()) throw ValidationError("power flow needs at least one unknown angle");

    const auto m = static_cast<Eigen::Index>(unknown.size());
    std::vector<Eigen::Index> slot(net.size(), -1);
    for (std::size_t k = 0; k < unknown.size(); ++k) {
        if (unknown[k] >= net.size()) throw ValidationError("unknown node index out of range");
        slot[unknown[k]] = static_cast<Eigen::Index>(k);
    }

    FlowSolution sol;
    sol.theta = std::move(initial);
    Eigen::VectorXd r(m);
    Eigen::VectorXd trial_r(m);
    DenseMatrix jac(m, m);
    double norm = mismatch_norm(net, injections, sol.theta, unknown, r);

    while (norm > opts.tolerance) {
        if (sol.iterations >= opts.max_iterations) {
            throw NonConvergence("power flow did not converge in " + std::to_string(opts.max_iterations) +
                                 " iterations (mismatch " + std::to_string(norm) + ")");
        }
        ++sol.iterations;

        // d r_i / d theta_j = -L_ij, so the Newton update is L_UU * delta = r.
        jac.setZero();
        for (std::size_t k = 0; k < unknown.size(); ++k) {
            const std::size_t i = unknown[k];
            const auto row = static_cast<Eigen::Index>(k);
            for (const Edge& e : net.neighbors(i)) {
                const double w = e.susceptance * std::cos(sol.theta[i] - sol.theta[e.node]);
                jac(row, row) += w;
                if (slot[e.node] >= 0) jac(row, slot[e.node]) -= w;
            }
        }
        Eigen::FullPivLU<DenseMatrix> lu(jac);
        lu.setThreshold(1e-12);
        if (!jac.allFinite() || lu.rank() < m) throw SingularJacobian("power-flow Jacobian is singular");
        const Eigen::VectorXd delta = lu.solve(r);
        if (!delta.allFinite()) throw SingularJacobian("power-flow Jacobian is singular");

        AngleVector base = sol.theta;
        double scale = 1.0;
        double trial_norm = 0.0;
        for (int h = 0; h <= opts.max_halvings; ++h) {
            for (std::size_t k = 0; k < unknown.size(); ++k) {
                sol.theta[unknown[k]] = base[unknown[k]] + scale * delta[static_cast<Eigen::Index>(k)];
            }
            trial_norm = mismatch_norm(net, injections, sol.theta, unknown, trial_r);
            if (trial_norm < norm) break;
            scale *= 0.5;
        }
        norm = trial_norm;
        r = trial_r;
    }
    sol.residual_norm = norm;
    sol.near_boundary = security_check(net, sol.theta).near_boundary;
    return sol;
}

FlowSolution solve_algebraic(const Network& net, const NewtonOptions& opts) {
    std::vector<std::size_t> unknown;
    for (std::size_t i = 0; i < net.size(); ++i) {
        if (i != net.reference()) unknown.push_back(i);
    }
    const auto p = net.injections();
    return solve_algebraic(net, p, AngleVector(net.size(), 0.0), unknown, opts);
}

SecurityReport security_check(const Network& net, std::span<const double> theta) {
    check_size(net, theta.size(), "angle vector");
    constexpr double half_pi = std::numbers::pi / 2.0;
    SecurityReport rep;
    for (std::size_t l = 0; l < net.lines().size(); ++l) {
        const double d = std::abs(theta[net.line_from(l)] - theta[net.line_to(l)]);
        if (!(d < half_pi)) {
            rep.secure = false;
            rep.violations.push_back(l);
        } else if (d >= half_pi - kBoundaryBand) {
            rep.near_boundary = true;
        }
    }
    return rep;
}

DenseMatrix full_laplacian(const Network& net, std::span<const double> theta) {
    check_size(net, theta.size(), "angle vector");
    const auto n = static_cast<Eigen::Index>(net.size());
    DenseMatrix lap = DenseMatrix::Zero(n, n);
    for (std::size_t l = 0; l < net.lines().size(); ++l) {
        const auto a = static_cast<Eigen::Index>(net.line_from(l));
        const auto b = static_cast<Eigen::Index>(net.line_to(l));
        const double w = net.lines()[l].susceptance * std::cos(theta[net.line_from(l)] - theta[net.line_to(l)]);
        lap(a, a) += w;
        lap(b, b) += w;
        lap(a, b) -= w;
        lap(b, a) -= w;
    }
    return lap;
}

DenseMatrix laplacian(const Network& net, std::span<const double> phi) {
    const DenseMatrix full = full_laplacian(net, phi);
    const auto n = full.rows();
    const auto ref = static_cast<Eigen::Index>(net.reference());
    DenseMatrix reduced(n - 1, n - 1);
    for (Eigen::Index i = 0, ri = 0; i < n; ++i) {
        if (i == ref) continue;
        for (Eigen::Index j = 0, rj = 0; j < n; ++j) {
            if (j == ref) continue;
            reduced(ri, rj++) = full(i, j);
        }
        ++ri;
    }
    return reduced;
}

}  // namespace gridfreq
