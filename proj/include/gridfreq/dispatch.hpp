#pragma once

#include "gridfreq/network.hpp"

#include <span>
#include <vector>

namespace gridfreq {

/// Strictly convex control cost of one controller.
///
/// Quadratic:        J(u) = u^2 / alpha
/// BarrierQuadratic: J(u) = u^2 / alpha - mu [log(u - u_lo) + log(u_hi - u)]
///
/// An infinite bound drops its barrier term; with both bounds infinite the
/// barrier kind degenerates to the quadratic one.
class CostModel {
public:
    static CostModel quadratic(double alpha);
    static CostModel barrier(double alpha, double u_lo, double u_hi, double mu = 1e-3);
    /// Quadratic when the bounds are infinite, barrier otherwise.
    static CostModel from_params(const ControllerParams& params, double mu = 1e-3);

    [[nodiscard]] bool is_quadratic() const noexcept { return quadratic_; }
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double lower() const noexcept { return lo_; }
    [[nodiscard]] double upper() const noexcept { return hi_; }
    [[nodiscard]] double mu() const noexcept { return mu_; }
    [[nodiscard]] bool in_domain(double u) const noexcept;

    [[nodiscard]] double cost(double u) const;
    [[nodiscard]] double marginal(double u) const;
    [[nodiscard]] double curvature(double u) const;
    [[nodiscard]] double inverse_marginal(double lambda) const;

    bool operator==(const CostModel&) const = default;

private:
    CostModel(double alpha, double lo, double hi, double mu, bool quadratic);
    void check_domain(double u) const;

    double alpha_;
    double lo_;
    double hi_;
    double mu_;
    bool quadratic_;
};

/// J'(u). Throws DomainError outside the barrier interval.
double marginal(const CostModel& cost, double u);
/// (J')^{-1}(lambda); defined for every real lambda.
double inverse_marginal(const CostModel& cost, double lambda);

struct DispatchResult {
    double lambda = 0.0;
    std::vector<double> u;
    double residual = 0.0;  // |-u_s + sum u_i|
};

struct ClearOptions {
    double tolerance = 1e-12;
    int max_iterations = 200;
};

/// Economic dispatch of a total input u_s: minimizes sum J_i(u_i) subject to
/// sum u_i = u_s by solving sum (J_i')^{-1}(lambda) = u_s for the price lambda.
/// Throws Infeasible when u_s lies outside the open aggregate bound interval
/// and NonConvergence if the scalar root-finder stalls.
DispatchResult clear(std::span<const CostModel> costs, double total, const ClearOptions& opts = {});

/// Sum of (J_i')^{-1}(lambda) over all controllers.
double aggregate_response(std::span<const CostModel> costs, double lambda);

}  // namespace gridfreq
