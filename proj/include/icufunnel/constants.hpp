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
#ifndef ICUFUNNEL_CONSTANTS_HPP
#define ICUFUNNEL_CONSTANTS_HPP

#include "icufunnel/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace icufunnel
{

/// Default floor of the growth rate mu used by the dwell-time bound (per day).
inline constexpr double default_dwell_delta = 1e-6;

/// Value the published study reports for max{M2/M1, M3}; kept only for side-by-side printing.
inline constexpr double reported_a3_bound = 23.9;

/**
 * Scenario-derived quantities used by the admissibility conditions, the controller
 * parameter set and the dwell-time bounds.
 */
struct DerivedConstants {
    double N          = 0.0; ///< population (individuals)
    double phi_plus   = 0.0; ///< ICU threshold (individuals)
    double S_min      = 0.0; ///< lower bound of S along solutions (individuals)
    double beta_tilde = 0.0; ///< p*beta_S + (1-p)*beta_A (1/day)
    double A_const    = 0.0; ///< 1/day
    double B_const    = 0.0; ///< 1/day
    double zeta       = 0.0; ///< upper bound of I_A/I_S
    double K_psi_bar  = 0.0; ///< lower bound of the response gain
    double M1         = 0.0; ///< 1/day
    double M2         = 0.0; ///< 1/(day*individual)
    double M3         = 0.0; ///< individuals
    double mu         = 0.0; ///< growth-rate bound of (I_A^2 + I_S^2)/2 (1/day)
    double psi_floor  = 0.0; ///< K_psi_bar * psi_bar
    double exit_rate_S = 0.0; ///< alpha_S/(1-rho), total outflow rate of I_S (1/day)

    /// max{M2/M1, M3}, the smallest ICU threshold admitted by A3.
    double a3_bound() const noexcept
    {
        return std::max(M2 / M1, M3);
    }

    friend bool operator==(const DerivedConstants&, const DerivedConstants&) = default;
};

/// A precondition of derive_constants is violated; the message names the affected quantity.
class ConstantsError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

/// Positive root of B^2 + A*B - c = 0 for c >= 0, computed without cancellation or overflow.
inline double positive_quadratic_root(double A, double c)
{
    const double half = 0.5 * A;
    const double root = std::hypot(half, std::sqrt(c));
    if (half > 0.0) {
        return c / (half + root);
    }
    return root - half;
}

/**
 * Computes every derived constant of a scenario.
 *
 * The S_min term of A is skipped when alpha_S/(1-rho) == alpha_A holds exactly, because S_min is
 * astronomically small for realistic data and 0/S_min must stay 0. B uses the cancellation-free
 * root so that a huge A yields a small positive B instead of inf - inf.
 */
inline DerivedConstants derive_constants(const Scenario& scenario, double dwell_delta = default_dwell_delta)
{
    const auto& P = scenario.params();
    const auto& I = scenario.init();
    if (!(dwell_delta > 0.0)) {
        throw ConstantsError("mu undefined: dwell_delta must be > 0");
    }
    if (!(P.rho < 1.0)) {
        throw ConstantsError("constants undefined: rho must be < 1");
    }
    if (!(I.IS0 > 0.0)) {
        throw ConstantsError("zeta undefined: IS0 = 0");
    }
    const double alpha_min = std::min(P.alpha_A, P.alpha_S);
    if (!(alpha_min > 0.0)) {
        throw ConstantsError("S_min undefined: min{alpha_A, alpha_S} = 0");
    }
    if (!(I.R0 > 0.0)) {
        throw ConstantsError("S_min undefined: R0 = 0");
    }

    DerivedConstants dc;
    dc.N           = scenario.population();
    dc.phi_plus    = scenario.capacity().phi_plus();
    dc.exit_rate_S = P.alpha_S / (1.0 - P.rho);
    dc.K_psi_bar   = 1.0 - P.gamma_K * (P.rho * P.alpha_A / (1.0 - P.rho));
    dc.psi_floor   = dc.K_psi_bar * P.psi_bar;

    const double beta_max = std::max(P.beta_A, P.beta_S);
    dc.S_min = I.S0 * std::exp(-beta_max * (dc.N - I.R0) / (alpha_min * I.R0));

    dc.beta_tilde = P.p * P.beta_S + (1.0 - P.p) * P.beta_A;

    const double rate_gap = dc.exit_rate_S - P.alpha_A;
    const double gap_term = rate_gap == 0.0 ? 0.0 : rate_gap * dc.N / (dc.psi_floor * dc.S_min);
    dc.A_const = (1.0 - P.p) * P.beta_A - P.p * P.beta_S + gap_term;

    const double c = P.p * (1.0 - P.p) * P.beta_A * P.beta_S;
    dc.B_const     = positive_quadratic_root(dc.A_const, c);
    if (!(dc.B_const > 0.0)) {
        throw ConstantsError("zeta undefined: B = " + std::to_string(dc.B_const) + " is not positive");
    }
    dc.zeta = std::max(I.IA0 / I.IS0, (1.0 - P.p) * P.beta_S / dc.B_const);

    dc.M1 = dc.psi_floor * dc.beta_tilde * (1.0 - I.R0 / dc.N) - P.alpha_A;
    dc.M2 = (1.0 + dc.psi_floor) * dc.beta_tilde / (P.p * dc.N) - P.rho * P.alpha_S / ((1.0 - P.rho) * dc.N);
    dc.M3 = P.p * (P.beta_A * dc.zeta + P.beta_S) * (1.0 - I.R0 / dc.N - dc.M2 / (P.p * dc.N * dc.M1)) *
            ((1.0 - P.rho) * dc.M2 / (P.alpha_S * dc.M1));

    dc.mu = std::max({(1.0 + P.p) / 2.0 * P.beta_S + P.p / 2.0 * P.beta_A - dc.exit_rate_S,
                      (2.0 - P.p) / 2.0 * P.beta_A + (1.0 - P.p) / 2.0 * P.beta_S - P.alpha_A, dwell_delta});
    return dc;
}

/// One inequality of an admissibility condition, with both compared sides.
struct Condition {
    std::string id;         ///< e.g. "A1.M1_positive"
    std::string expression; ///< human-readable inequality
    double lhs   = 0.0;
    double rhs   = 0.0;
    bool holds   = false;
    bool vacuous = false; ///< comparison undefined (division by zero) and treated as satisfied
    std::string note;
};

/**
 * Verdicts of the assumption checks. Each condition id starts with its group ("A1." ... "A6.").
 */
struct AssumptionReport {
    std::vector<Condition> conditions;

    bool group_holds(const std::string& group) const
    {
        bool seen = false;
        for (const auto& c : conditions) {
            if (c.id.rfind(group + ".", 0) == 0) {
                seen = true;
                if (!c.holds) {
                    return false;
                }
            }
        }
        return seen;
    }
    bool has_group(const std::string& group) const
    {
        return std::any_of(conditions.begin(), conditions.end(), [&](const Condition& c) {
            return c.id.rfind(group + ".", 0) == 0;
        });
    }

    bool a1() const
    {
        return group_holds("A1");
    }
    bool a2() const
    {
        return group_holds("A2");
    }
    bool a3() const
    {
        return group_holds("A3");
    }
    bool a6() const
    {
        return group_holds("A6");
    }
    bool in_sigma() const
    {
        return a1() && a2() && a3();
    }
    bool in_sigma_rob() const
    {
        return in_sigma() && a6();
    }

    /// Ids of all failing conditions, in report order.
    std::vector<std::string> failures() const
    {
        std::vector<std::string> ids;
        for (const auto& c : conditions) {
            if (!c.holds) {
                ids.push_back(c.id);
            }
        }
        return ids;
    }
};

namespace detail
{
inline Condition less(std::string id, std::string expr, double lhs, double rhs)
{
    return {std::move(id), std::move(expr), lhs, rhs, lhs < rhs, false, {}};
}
inline Condition less_equal(std::string id, std::string expr, double lhs, double rhs)
{
    return {std::move(id), std::move(expr), lhs, rhs, lhs <= rhs, false, {}};
}
inline Condition greater(std::string id, std::string expr, double lhs, double rhs)
{
    return {std::move(id), std::move(expr), lhs, rhs, lhs > rhs, false, {}};
}
inline Condition greater_equal(std::string id, std::string expr, double lhs, double rhs)
{
    return {std::move(id), std::move(expr), lhs, rhs, lhs >= rhs, false, {}};
}
} // namespace detail

/// Evaluates A1-A3. Comparisons are exact; no slack is added.
/**
 * The conditions of A1 and A2 that involve only the raw parameters. Usable when the derived
 * constants are undefined; check_sigma reports these plus the constant-dependent ones.
 */
inline AssumptionReport check_parameter_conditions(const Scenario& scenario)
{
    using namespace detail;
    const auto& P = scenario.params();
    const auto& I = scenario.init();
    AssumptionReport r;

    r.conditions.push_back(greater("A1.p_positive", "p > 0", P.p, 0.0));
    r.conditions.push_back(less("A1.rho_below_one", "rho < 1", P.rho, 1.0));
    r.conditions.push_back(greater("A1.alpha_A_positive", "alpha_A > 0", P.alpha_A, 0.0));
    r.conditions.push_back(
        less_equal("A1.alpha_order", "alpha_A <= alpha_S/(1-rho)", P.alpha_A, P.alpha_S / (1.0 - P.rho)));
    {
        const double denom = P.rho * P.alpha_A;
        if (denom == 0.0) {
            Condition c{"A1.gamma_K_bound", "gamma_K < (1-rho)/(rho*alpha_A)",
                        P.gamma_K, std::numeric_limits<double>::infinity(), true, true,
                        "rho*alpha_A = 0, bound is vacuous"};
            r.conditions.push_back(c);
        }
        else {
            r.conditions.push_back(
                less("A1.gamma_K_bound", "gamma_K < (1-rho)/(rho*alpha_A)", P.gamma_K, (1.0 - P.rho) / denom));
        }
    }

    r.conditions.push_back(greater("A2.S0_positive", "S0 > 0", I.S0, 0.0));
    r.conditions.push_back(greater("A2.R0_positive", "R0 > 0", I.R0, 0.0));
    r.conditions.push_back(greater("A2.IS0_positive", "IS0 > 0", I.IS0, 0.0));
    if (P.p > 0.0) {
        r.conditions.push_back(
            greater_equal("A2.IA0_ratio", "IA0 >= (1-p)/p * IS0", I.IA0, (1.0 - P.p) / P.p * I.IS0));
    }
    else {
        Condition c{"A2.IA0_ratio", "IA0 >= (1-p)/p * IS0", I.IA0, std::numeric_limits<double>::infinity(), true,
                    true, "p = 0, ratio undefined (A1 already fails)"};
        r.conditions.push_back(c);
    }

    return r;
}

inline AssumptionReport check_sigma(const Scenario& scenario, const DerivedConstants& dc)
{
    using namespace detail;
    AssumptionReport r = check_parameter_conditions(scenario);
    const auto a2      = std::find_if(r.conditions.begin(), r.conditions.end(), [](const Condition& c) {
        return c.id.starts_with("A2.");
    });
    r.conditions.insert(a2, greater("A1.M1_positive", "M1 > 0", dc.M1, 0.0));
    r.conditions.push_back(greater("A3.phi_plus_bound", "phi_plus > max{M2/M1, M3}", dc.phi_plus, dc.a3_bound()));
    return r;
}

/**
 * Evaluates A1-A3 plus both A6 inequalities. A6 fails with a note when M2 <= 0, since 1/M2 is
 * then meaningless for the monotonicity argument it supports.
 */
inline AssumptionReport check_sigma_rob(const Scenario& scenario, const DerivedConstants& dc)
{
    const auto& P      = scenario.params();
    const auto& I      = scenario.init();
    AssumptionReport r = check_sigma(scenario, dc);

    const double pN = P.p * dc.N;
    if (dc.M2 > 0.0) {
        const double lhs = (1.0 / dc.M2 - (1.0 - P.rho) / P.alpha_S) * (pN * dc.M1 - P.p * I.R0 * dc.M1 - dc.M2);
        r.conditions.push_back(detail::greater(
            "A6.first", "(1/M2 - (1-rho)/alpha_S) * (p*N*M1 - p*R0*M1 - M2) > 1", lhs, 1.0));
    }
    else {
        r.conditions.push_back({"A6.first", "(1/M2 - (1-rho)/alpha_S) * (p*N*M1 - p*R0*M1 - M2) > 1", dc.M2, 0.0,
                                false, false, "M2 <= 0"});
    }
    r.conditions.push_back(detail::greater("A6.second", "p*N*M1*(zeta+1) > beta_A*zeta + beta_S",
                                           pN * dc.M1 * (dc.zeta + 1.0), P.beta_A * dc.zeta + P.beta_S));
    return r;
}

} // namespace icufunnel

#endif // ICUFUNNEL_CONSTANTS_HPP
