#include "gridfreq/dispatch.hpp"

#include "gridfreq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gridfreq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double bracket_width_floor(double x) { return 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)); }

}  // namespace

CostModel::CostModel(double alpha, double lo, double hi, double mu, bool quadratic)
    : alpha_(alpha), lo_(lo), hi_(hi), mu_(mu), quadratic_(quadratic) {
    if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) throw ValidationError("cost weight alpha must be positive");
    if (!quadratic_) {
        if (!(mu_ > 0.0)) throw ValidationError("barrier weight mu must be positive");
        if (!(lo_ < hi_)) throw ValidationError("barrier bounds must satisfy u_lo < u_hi");
    }
}

CostModel CostModel::quadratic(double alpha) { return CostModel(alpha, -kInf, kInf, 0.0, true); }

CostModel CostModel::barrier(double alpha, double u_lo, double u_hi, double mu) {
    if (std::isinf(u_lo) && std::isinf(u_hi)) return quadratic(alpha);
    return CostModel(alpha, u_lo, u_hi, mu, false);
}

CostModel CostModel::from_params(const ControllerParams& params, double mu) {
    return barrier(params.alpha, params.u_lo, params.u_hi, mu);
}

bool CostModel::in_domain(double u) const noexcept { return quadratic_ || (u > lo_ && u < hi_); }

void CostModel::check_domain(double u) const {
    if (!in_domain(u)) {
        throw DomainError("input " + std::to_string(u) + " outside barrier domain (" + std::to_string(lo_) + ", " +
                          std::to_string(hi_) + ")");
    }
}

double CostModel::cost(double u) const {
    check_domain(u);
    double j = u * u / alpha_;
    if (!quadratic_) {
        if (std::isfinite(lo_)) j -= mu_ * std::log(u - lo_);
        if (std::isfinite(hi_)) j -= mu_ * std::log(hi_ - u);
    }
    return j;
}

double CostModel::marginal(double u) const {
    check_domain(u);
    double d = 2.0 * u / alpha_;
    if (!quadratic_) {
        if (std::isfinite(lo_)) d -= mu_ / (u - lo_);
        if (std::isfinite(hi_)) d += mu_ / (hi_ - u);
    }
    return d;
}

double CostModel::curvature(double u) const {
    check_domain(u);
    double c = 2.0 / alpha_;
    if (!quadratic_) {
        if (std::isfinite(lo_)) c += mu_ / ((u - lo_) * (u - lo_));
        if (std::isfinite(hi_)) c += mu_ / ((hi_ - u) * (hi_ - u));
    }
    return c;
}

double CostModel::inverse_marginal(double lambda) const {
    if (quadratic_) return alpha_ * lambda / 2.0;

    // J' is strictly increasing from -inf to +inf on (lo, hi): bracket, then
    // Newton steps kept inside the bracket, bisection otherwise.
    const double guess = alpha_ * lambda / 2.0;
    double a = lo_;
    double b = hi_;
    if (std::isinf(a)) {
        a = std::min(guess, hi_) - 1.0;
        for (double step = 1.0; marginal(a) > lambda; step *= 2.0) a -= step;
    }
    if (std::isinf(b)) {
        b = std::max(guess, lo_) + 1.0;
        for (double step = 1.0; marginal(b) < lambda; step *= 2.0) b += step;
    }
    double u = std::clamp(guess, a, b);
    if (!(u > lo_ && u < hi_)) u = 0.5 * (a + b);
    if (!(u > lo_ && u < hi_)) u = std::isfinite(lo_) ? (std::isfinite(hi_) ? 0.5 * (lo_ + hi_) : lo_ + 1.0) : hi_ - 1.0;

    const double tol = 1e-13 * std::max(1.0, std::abs(lambda));
    double best = u;
    double best_r = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 400; ++it) {
        const double r = marginal(u) - lambda;
        if (std::abs(r) < best_r) {
            best = u;
            best_r = std::abs(r);
        }
        if (best_r <= tol) return best;
        if (r > 0.0) b = u; else a = u;
        // Stop once no double lies strictly inside the bracket.
        const double mid = 0.5 * (a + b);
        if (!(mid > a && mid < b)) return best;
        double next = u - r / curvature(u);
        if (!(next > a && next < b)) next = mid;
        u = next;
    }
    return best;
}

double marginal(const CostModel& cost, double u) { return cost.marginal(u); }

double inverse_marginal(const CostModel& cost, double lambda) { return cost.inverse_marginal(lambda); }

double aggregate_response(std::span<const CostModel> costs, double lambda) {
    double s = 0.0;
    for (const CostModel& c : costs) s += c.inverse_marginal(lambda);
    return s;
}

DispatchResult clear(std::span<const CostModel> costs, double total, const ClearOptions& opts) {
    if (costs.empty()) throw Infeasible("dispatch requires at least one controller");
    if (!std::isfinite(total)) throw Infeasible("total input is not finite");

    DispatchResult res;
    res.u.resize(costs.size());
    const bool all_quadratic = std::all_of(costs.begin(), costs.end(), [](const CostModel& c) { return c.is_quadratic(); });
    const double alpha_sum = std::accumulate(costs.begin(), costs.end(), 0.0,
                                             [](double s, const CostModel& c) { return s + c.alpha(); });

    if (all_quadratic) {
        res.lambda = 2.0 * total / alpha_sum;
        for (std::size_t i = 0; i < costs.size(); ++i) res.u[i] = costs[i].alpha() * res.lambda / 2.0;
    } else {
        double lo_sum = 0.0;
        double hi_sum = 0.0;
        for (const CostModel& c : costs) {
            lo_sum += c.lower();
            hi_sum += c.upper();
        }
        if (!(total > lo_sum && total < hi_sum)) {
            throw Infeasible("total input " + std::to_string(total) + " outside aggregate bounds (" +
                             std::to_string(lo_sum) + ", " + std::to_string(hi_sum) + ")");
        }
        // g(lambda) = sum (J')^{-1}(lambda) - total is strictly increasing.
        auto g = [&](double lam) { return aggregate_response(costs, lam) - total; };
        double lam = 2.0 * total / alpha_sum;
        double a = lam - 1.0;
        double b = lam + 1.0;
        for (double step = 1.0; g(a) > 0.0; step *= 2.0) a -= step;
        for (double step = 1.0; g(b) < 0.0; step *= 2.0) b += step;
        const double tol = opts.tolerance * std::max(1.0, std::abs(total));
        bool converged = false;
        for (int it = 0; it < opts.max_iterations; ++it) {
            double slope = 0.0;
            double r = -total;
            for (const CostModel& c : costs) {
                const double ui = c.inverse_marginal(lam);
                r += ui;
                slope += 1.0 / c.curvature(ui);
            }
            if (std::abs(r) <= tol) {
                converged = true;
                break;
            }
            if (r > 0.0) b = lam; else a = lam;
            if (b - a <= bracket_width_floor(lam)) {
                converged = true;
                break;
            }
            double next = lam - r / slope;
            if (!(next > a && next < b)) next = 0.5 * (a + b);
            lam = next;
        }
        if (!converged) throw NonConvergence("dispatch price did not converge");
        res.lambda = lam;
        for (std::size_t i = 0; i < costs.size(); ++i) res.u[i] = costs[i].inverse_marginal(lam);
    }
    res.residual = std::abs(std::accumulate(res.u.begin(), res.u.end(), 0.0) - total);
    return res;
}

}  // namespace gridfreq
