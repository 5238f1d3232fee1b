#pragma once

#include "gridfreq/controller_spec.hpp"
#include "gridfreq/equilibrium.hpp"

#include <span>
#include <vector>

namespace gridfreq {

/// Internal state and outputs of a secondary controller.
///
/// The dynamic variables are `eta` for the PIAC family (one per area for the
/// multi-area law, one per actuated node for the decentralized law) and
/// `lambda` for AGC, gather-broadcast (one entry) and DAI (one per controller).
/// For PIAC the prices in `lambda` are outputs of the dispatch.
struct ControllerState {
    std::vector<double> eta;
    std::vector<double> lambda;
    std::vector<double> u;  // per node; zero off the actuated set
    double u_s = 0.0;
};

/// Perfect local measurements at one instant. Frequencies of passive nodes are ignored.
struct Measurements {
    std::span<const double> theta;
    std::span<const double> omega;
    std::span<const double> flows;  // nodal_flows(theta)
};

/// A control law bound to a network. Holds only immutable data, so one
/// instance may serve many simulations.
class Controller {
public:
    Controller(const Network& net, ControllerSpec spec);

    [[nodiscard]] const Network& network() const noexcept { return net_; }
    [[nodiscard]] const ControllerSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] std::string name() const { return law_name(spec_.law); }
    /// Canonical indices of the nodes whose inputs this law sets.
    [[nodiscard]] const std::vector<std::size_t>& actuated() const noexcept { return actuated_; }
    /// Groups of V_K positions that share a price at the optimum.
    [[nodiscard]] const std::vector<std::vector<std::size_t>>& price_groups() const noexcept { return groups_; }

    /// Controller state at an equilibrium (outputs recomputed with zero frequency).
    [[nodiscard]] ControllerState initial_state(const Equilibrium& eq) const;
    [[nodiscard]] ControllerState initial_state() const;

    [[nodiscard]] std::size_t dynamic_size(const ControllerState& s) const;
    [[nodiscard]] std::span<double> dynamic(ControllerState& s) const;
    [[nodiscard]] std::span<const double> dynamic(const ControllerState& s) const;

    /// Time derivative of the dynamic variables.
    void rates(const ControllerState& s, const Measurements& m, std::span<double> out) const;
    [[nodiscard]] std::vector<double> rates(const ControllerState& s, const Measurements& m) const;
    /// Dynamic variables += h * rate.
    void integrate(ControllerState& s, std::span<const double> rate, double h) const;
    /// Recomputes u, u_s and dispatch prices from the dynamic variables and the
    /// machine frequencies in `omega`.
    void update_outputs(ControllerState& s, std::span<const double> omega) const;

    /// One forward-Euler step: dynamic variables advanced with the measurements
    /// at the start of the step, outputs formed with the machine frequencies at its end.
    [[nodiscard]] ControllerState step(const ControllerState& s, const Measurements& start,
                                       std::span<const double> omega_next, double dt) const;

    /// J'_i(u_i) per controller in V_K; NaN where u_i is outside the cost domain.
    [[nodiscard]] std::vector<double> marginal_costs(const ControllerState& s) const;
    /// Scalar price summary: the common price, or the mean over areas / nodes.
    [[nodiscard]] double price(const ControllerState& s) const;

private:
    Network net_;
    ControllerSpec spec_;
    std::vector<std::size_t> actuated_;
    std::vector<std::vector<std::size_t>> groups_;
    std::vector<std::vector<CostModel>> group_costs_;
    std::vector<std::vector<BoundaryLine>> boundaries_;
    std::vector<double> reference_flows_;
};

ControllerState piac_single_step(const Controller& c, const ControllerState& s, const Measurements& start,
                                 std::span<const double> omega_next, double dt);
ControllerState piac_multi_step(const Controller& c, const ControllerState& s, const Measurements& start,
                                std::span<const double> omega_next, double dt);
ControllerState piac_decentralized_step(const Controller& c, const ControllerState& s, const Measurements& start,
                                        std::span<const double> omega_next, double dt);
ControllerState agc_step(const Controller& c, const ControllerState& s, const Measurements& start, double dt);
ControllerState gb_step(const Controller& c, const ControllerState& s, const Measurements& start, double dt);
ControllerState dai_step(const Controller& c, const ControllerState& s, const Measurements& start, double dt);

/// Power exported by each area over its boundary lines, in area order.
std::vector<double> area_exports(const Network& net, const AreaPartition& part, std::span<const double> theta);

/// Forward-Euler trace of the aggregate frequency M_s w' = P_s - D_s w + u_s.
/// `p_s` and `u_s` hold the values at the start of each step (the last entry
/// of each is unused); returns one value per entry.
std::vector<double> abstract_frequency_trace(const Network& net, std::span<const double> p_s,
                                             std::span<const double> u_s, double dt, double omega0 = 0.0);

}  // namespace gridfreq
