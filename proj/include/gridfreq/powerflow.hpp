#pragma once

#include "gridfreq/network.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace gridfreq {

/// Per-node phase angles (rad) in canonical node order.
using AngleVector = std::vector<double>;
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// B_ij sin(theta_i - theta_j) for line l, oriented from Line::from to Line::to.
double line_flow(const Network& net, std::span<const double> theta, std::size_t l);

/// Net power leaving each node over its lines: sum_j B_ij sin(theta_i - theta_j).
std::vector<double> nodal_flows(const Network& net, std::span<const double> theta);
void nodal_flows(const Network& net, std::span<const double> theta, std::span<double> out);

/// (sum P_i + sum u_i) / sum D_i; the common frequency deviation of a synchronous state.
double synchronized_frequency(const Network& net, std::span<const double> u);
double synchronized_frequency(const Network& net, std::span<const double> injections, std::span<const double> u);

struct NewtonOptions {
    double tolerance = 1e-10;
    int max_iterations = 50;
    int max_halvings = 8;
};

struct FlowSolution {
    AngleVector theta;
    double residual_norm = 0.0;  // max-norm over the solved nodes
    int iterations = 0;
    bool near_boundary = false;  // some |theta_i - theta_j| within 1e-6 of pi/2
};

/// Solves 0 = P_i - sum_j B_ij sin(theta_i - theta_j) for the nodes in `unknown`,
/// keeping every other entry of `initial` fixed. `initial` also serves as the
/// starting guess for the unknowns (pass zeros for a flat start).
FlowSolution solve_algebraic(const Network& net, std::span<const double> injections, AngleVector initial,
                             std::span<const std::size_t> unknown, const NewtonOptions& opts = {});

/// Flat-start solve of every node except the reference, using the case injections.
FlowSolution solve_algebraic(const Network& net, const NewtonOptions& opts = {});

struct SecurityReport {
    bool secure = true;
    std::vector<std::size_t> violations;  // line indices with |theta_i - theta_j| >= pi/2
    bool near_boundary = false;
};

SecurityReport security_check(const Network& net, std::span<const double> theta);

/// Full n x n weighted Laplacian with weights B_ij cos(theta_i - theta_j).
DenseMatrix full_laplacian(const Network& net, std::span<const double> theta);

/// Hessian of the potential U with the reference node removed, (n-1) x (n-1).
DenseMatrix laplacian(const Network& net, std::span<const double> phi);

}  // namespace gridfreq
