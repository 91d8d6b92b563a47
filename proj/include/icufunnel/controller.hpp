/*
* Copyright (C) 2026 icufunnel contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#ifndef ICUFUNNEL_CONTROLLER_HPP
#define ICUFUNNEL_CONTROLLER_HPP

#include "icufunnel/constants.hpp"
#include "icufunnel/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace icufunnel
{

/**
 * Safety distances of the bang-bang funnel controller together with the funnel boundaries.
 *
 * Plain value; use valid() / validate() to check the ordering constraint
 * phi_minus + eps_minus < phi_plus - eps_plus. Membership reports accept invalid values.
 */
struct ControllerParams {
    double eps_plus  = 0.0;
    double eps_minus = 0.0;
    double phi_plus  = 0.0;
    double phi_minus = 0.0;

    /// Switch-on threshold phi_plus - eps_plus.
    double upper_threshold() const noexcept
    {
        return phi_plus - eps_plus;
    }
    /// Switch-off threshold phi_minus + eps_minus.
    double lower_threshold() const noexcept
    {
        return phi_minus + eps_minus;
    }

    bool valid() const noexcept
    {
        return eps_plus > 0.0 && eps_minus > 0.0 && phi_minus == 0.0 && lower_threshold() < upper_threshold();
    }

    void validate() const
    {
        if (!(eps_plus > 0.0) || !(eps_minus > 0.0)) {
            throw std::invalid_argument("eps_plus and eps_minus must be > 0");
        }
        if (phi_minus != 0.0) {
            throw std::invalid_argument("phi_minus must be 0");
        }
        if (!(lower_threshold() < upper_threshold())) {
            throw std::invalid_argument("ordering violated: phi_minus + eps_minus < phi_plus - eps_plus required");
        }
    }

    friend bool operator==(const ControllerParams&, const ControllerParams&) = default;
};

/// Controller parameters for the funnel of a given capacity policy.
inline ControllerParams make_controller(const CapacityPolicy& capacity, double eps_plus, double eps_minus)
{
    return {eps_plus, eps_minus, capacity.phi_plus(), capacity.phi_minus()};
}

/// Held input u(t-). A fresh controller starts with u(0-) = 0.
struct ControllerState {
    Input u_prev = Input::off;
};

/**
 * Bang-bang funnel law. Returns on when I_S >= phi_plus - eps_plus, off when
 * I_S <= phi_minus + eps_minus, otherwise the held input; the state is updated to the result.
 */
inline Input control_update(double I_S, ControllerState& state, const ControllerParams& cp) noexcept
{
    Input u = state.u_prev;
    if (I_S >= cp.upper_threshold()) {
        u = Input::on;
    }
    else if (I_S <= cp.lower_threshold()) {
        u = Input::off;
    }
    state.u_prev = u;
    return u;
}

class QDomainError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

/**
 * Worst-case peak function q(eps) bounding I_S after the switch-on threshold eps is reached:
 *
 *   q(eps) = [p z eps (1 - R0/N - eps/(pN)) + p (M1 eps - M2)(zeta+1) eps] / [alpha_S/(1-rho) + M1 eps - M2]
 *
 * with z = beta_A*zeta + beta_S. Throws QDomainError when the denominator is not positive.
 * Its natural domain is [M2/M1, phi_plus]; see q_in_domain().
 */
inline double q_eval(double eps, const DerivedConstants& dc, const Scenario& scenario)
{
    const auto& P      = scenario.params();
    const double slope = dc.M1 * eps - dc.M2;
    const double denom = dc.exit_rate_S + slope;
    if (!(denom > 0.0)) {
        throw QDomainError("q undefined: denominator alpha_S/(1-rho) + M1*eps - M2 = " + std::to_string(denom));
    }
    const double z     = P.beta_A * dc.zeta + P.beta_S;
    const double R0    = scenario.init().R0;
    const double numer = P.p * z * eps * (1.0 - R0 / dc.N - eps / (P.p * dc.N)) + P.p * slope * (dc.zeta + 1.0) * eps;
    return numer / denom;
}

/// True if eps lies in [M2/M1, phi_plus], the range on which the A4/A5 analysis uses q.
inline bool q_in_domain(double eps, const DerivedConstants& dc) noexcept
{
    return eps >= dc.M2 / dc.M1 && eps <= dc.phi_plus;
}

/// Verdicts for (eps_minus, eps_plus) in C_Z with the compared values.
struct CZReport {
    Condition positivity; ///< eps_minus > 0 and eps_plus > 0 (lhs = min of both)
    Condition ordering;   ///< eps_minus < phi_plus - eps_plus
    Condition a4;         ///< eps_plus < phi_plus - M2/M1
    Condition a5;         ///< q(phi_plus - eps_plus) < phi_plus

    bool member() const noexcept
    {
        return positivity.holds && ordering.holds && a4.holds && a5.holds;
    }

    /// Smallest relative slack over the four inequalities; negative when one fails.
    double min_margin() const noexcept
    {
        auto rel = [](const Condition& c) {
            const double scale = std::max(std::abs(c.rhs), 1e-300);
            return (c.rhs - c.lhs) / scale;
        };
        const double pos = positivity.lhs > 0.0 ? 1.0 : -1.0;
        return std::min({pos, rel(ordering), rel(a4), rel(a5)});
    }
};

inline CZReport in_CZ(const ControllerParams& cp, const Scenario& scenario, const DerivedConstants& dc)
{
    CZReport r;
    const double min_eps = std::min(cp.eps_minus, cp.eps_plus);
    r.positivity         = detail::greater("CZ.positive", "min{eps_minus, eps_plus} > 0", min_eps, 0.0);
    r.ordering = detail::less("CZ.ordering", "eps_minus < phi_plus - eps_plus", cp.eps_minus + cp.phi_minus,
                              cp.upper_threshold());
    r.a4 = detail::less("A4", "eps_plus < phi_plus - M2/M1", cp.eps_plus, cp.phi_plus - dc.M2 / dc.M1);

    const double eps = cp.upper_threshold();
    try {
        r.a5 = detail::less("A5", "q(phi_plus - eps_plus) < phi_plus", q_eval(eps, dc, scenario), cp.phi_plus);
        if (!q_in_domain(eps, dc)) {
            r.a5.note = "phi_plus - eps_plus outside [M2/M1, phi_plus]";
        }
    }
    catch (const QDomainError& e) {
        r.a5 = {"A5", "q(phi_plus - eps_plus) < phi_plus", std::nan(""), cp.phi_plus, false, false, e.what()};
    }
    return r;
}

/// No admissible controller could be constructed; what() starts with "infeasible: ".
class Infeasible : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Which feasible grid point find_feasible_eps returns.
enum class FeasiblePick {
    largest,  ///< largest eps with q(eps) < phi_plus, i.e. the smallest eps_plus
    centered, ///< feasible grid point closest to the middle of the feasible range
};

inline constexpr std::size_t default_feasible_grid = 10000;

namespace detail
{
inline void require_sigma(const Scenario& scenario, const DerivedConstants& dc)
{
    const auto report = check_sigma(scenario, dc);
    for (const char* group : {"A1", "A2", "A3"}) {
        if (!report.group_holds(group)) {
            throw Infeasible(std::string("infeasible: ") + group);
        }
    }
}
} // namespace detail

/**
 * Scans the given switch-on thresholds eps and returns a controller with eps_plus = phi_plus - eps
 * and eps_minus = eps/2 for the chosen feasible eps. Grid points outside (M2/M1, phi_plus) are skipped.
 */
inline ControllerParams find_feasible_eps(const Scenario& scenario, const DerivedConstants& dc,
                                          std::span<const double> grid, FeasiblePick pick = FeasiblePick::centered)
{
    detail::require_sigma(scenario, dc);
    const double lo = dc.M2 / dc.M1;
    const double hi = dc.phi_plus;

    std::vector<double> feasible;
    for (double eps : grid) {
        if (!(eps > lo && eps < hi)) {
            continue;
        }
        try {
            if (q_eval(eps, dc, scenario) < dc.phi_plus) {
                feasible.push_back(eps);
            }
        }
        catch (const QDomainError&) {
        }
    }
    if (feasible.empty()) {
        throw Infeasible("infeasible: no grid point satisfies q(eps) < phi_plus");
    }

    const auto [min_it, max_it] = std::minmax_element(feasible.begin(), feasible.end());
    double eps                  = *max_it;
    if (pick == FeasiblePick::centered) {
        const double mid = 0.5 * (*min_it + *max_it);
        eps              = *std::min_element(feasible.begin(), feasible.end(), [mid](double a, double b) {
            return std::abs(a - mid) < std::abs(b - mid);
        });
    }

    const ControllerParams cp = make_controller(scenario.capacity(), dc.phi_plus - eps, 0.5 * eps);
    if (!in_CZ(cp, scenario, dc).member()) {
        throw Infeasible("infeasible: constructed pair rejected by the C_Z check (numerical trouble)");
    }
    return cp;
}

/// Uniform grid of `points` interior points of (M2/M1, phi_plus).
inline std::vector<double> feasible_eps_grid(const DerivedConstants& dc, std::size_t points)
{
    const double lo = dc.M2 / dc.M1;
    const double hi = dc.phi_plus;
    std::vector<double> grid;
    grid.reserve(points);
    for (std::size_t k = 1; k <= points; ++k) {
        grid.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points + 1));
    }
    return grid;
}

inline ControllerParams find_feasible_eps(const Scenario& scenario, const DerivedConstants& dc,
                                          std::size_t points = default_feasible_grid,
                                          FeasiblePick pick  = FeasiblePick::centered)
{
    detail::require_sigma(scenario, dc);
    const auto grid = feasible_eps_grid(dc, points);
    return find_feasible_eps(scenario, dc, std::span<const double>(grid), pick);
}

/// Lower bounds on the length of the on-phase and the off-phase of the input (days).
struct DwellBounds {
    double down_bound = 0.0; ///< switch-on to switch-off
    double up_bound   = 0.0; ///< switch-off to switch-on; <= 0 carries no information

    bool up_informative() const noexcept
    {
        return up_bound > 0.0;
    }
};

/**
 * down_bound = (1-rho)/alpha_S * ln((phi_plus - eps_plus)/eps_minus)
 * up_bound   = 1/mu * ln((phi_plus - eps_plus)^2 / (eps_minus^2 + I_A(t0)^2))
 */
inline DwellBounds dwell_lower_bounds(const ControllerParams& cp, const DerivedConstants& dc, double IA_at_switch)
{
    cp.validate();
    if (!(IA_at_switch >= 0.0)) {
        throw std::invalid_argument("IA_at_switch must be >= 0");
    }
    const double upper = cp.upper_threshold();
    DwellBounds b;
    b.down_bound = std::log(upper / cp.eps_minus) / dc.exit_rate_S;
    b.up_bound   = std::log(upper * upper / (cp.eps_minus * cp.eps_minus + IA_at_switch * IA_at_switch)) / dc.mu;
    return b;
}

} // namespace icufunnel

#endif // ICUFUNNEL_CONTROLLER_HPP
