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
#ifndef ICUFUNNEL_ANALYSIS_HPP
#define ICUFUNNEL_ANALYSIS_HPP

#include "icufunnel/constants.hpp"
#include "icufunnel/controller.hpp"
#include "icufunnel/model.hpp"
#include "icufunnel/simulator.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <future>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace icufunnel
{

/// Number of coordinates of a system-parameter tuple.
inline constexpr std::size_t parameter_dim = 18;
using ParameterPoint = std::array<double, parameter_dim>;

/// Coordinate names in tuple order.
inline constexpr std::array<const char*, parameter_dim> parameter_names{
    "alpha_A", "alpha_S", "beta_A", "beta_S", "rho", "p",   "gamma_0", "gamma_1", "psi_bar",
    "gamma_K", "xi",      "n_icu",  "S0",     "IA0", "IS0", "R0",      "D0",      "psi0"};

inline ParameterPoint to_parameter_point(const Scenario& z)
{
    const auto& P = z.params();
    const auto& I = z.init();
    const auto& C = z.capacity();
    return {P.alpha_A, P.alpha_S, P.beta_A, P.beta_S, P.rho,   P.p,   P.gamma_0, P.gamma_1, P.psi_bar,
            P.gamma_K, C.xi,      C.n_icu,  I.S0,     I.IA0, I.IS0, I.R0,      I.D0,      I.psi0};
}

/// Throws std::invalid_argument if the point violates the Scenario invariants.
inline Scenario from_parameter_point(const ParameterPoint& c)
{
    EpidemicParams P{c[2], c[3], c[0], c[1], c[5], c[4], c[6], c[7], c[8], c[9]};
    InitialState I{c[12], c[13], c[14], c[15], c[16], c[17]};
    CapacityPolicy C{c[11], c[10]};
    return Scenario(P, I, C);
}

/// Admissible range of coordinate i: [0,1] for rates, proportions, gain and psi0; [0, inf) otherwise.
inline std::pair<double, double> parameter_range(std::size_t i) noexcept
{
    const bool unit = i <= 9 || i == 17;
    return {0.0, unit ? 1.0 : std::numeric_limits<double>::infinity()};
}

/**
 * Moves each coordinate by delta * w_i * |value| (delta * w_i for zero-valued coordinates) and
 * clips it to its admissible range. w holds unit-box directions in [-1, 1].
 */
inline ParameterPoint perturb(const ParameterPoint& base, const ParameterPoint& w, double delta) noexcept
{
    ParameterPoint out{};
    for (std::size_t i = 0; i < parameter_dim; ++i) {
        const double scale  = base[i] != 0.0 ? std::abs(base[i]) : 1.0;
        const auto [lo, hi] = parameter_range(i);
        out[i]              = std::clamp(base[i] + delta * w[i] * scale, lo, hi);
    }
    return out;
}

/// `count` directions drawn uniformly from [-1, 1)^18. Bit-reproducible for a given seed.
inline std::vector<ParameterPoint> unit_perturbations(std::size_t count, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::vector<ParameterPoint> dirs(count);
    for (auto& d : dirs) {
        for (auto& w : d) {
            // 53 random mantissa bits, independent of the standard library's distribution code.
            const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
            w                 = 2.0 * unit - 1.0;
        }
    }
    return dirs;
}

struct RobustnessResult {
    double delta              = 0.0;
    std::size_t samples       = 0;
    double pass_fraction      = 0.0; ///< Z~ in Sigma_rob and the fixed pair in C_Z~
    double sigma_rob_fraction = 0.0;
    double cz_fraction        = 0.0;
    /// Largest tested radius at which every sample passed. A sampled under-approximation of
    /// the robustness radius, not a certificate over the whole ball.
    double certified_delta = 0.0;
    /// How often each condition id failed at `delta` (including "scenario" / "constants" when a
    /// perturbed point could not be evaluated).
    std::map<std::string, std::size_t> failure_counts;
};

namespace detail
{

struct SampleVerdict {
    bool sigma_rob = false;
    bool cz        = false;
    std::vector<std::string> failures;

    bool passed() const noexcept
    {
        return sigma_rob && cz;
    }
};

inline SampleVerdict evaluate_perturbed(const ParameterPoint& point, const ControllerParams& cp, double dwell_delta)
{
    SampleVerdict v;
    std::optional<Scenario> z;
    try {
        z.emplace(from_parameter_point(point));
    }
    catch (const std::invalid_argument&) {
        v.failures.push_back("scenario");
        return v;
    }
    DerivedConstants dc;
    try {
        dc = derive_constants(*z, dwell_delta);
    }
    catch (const ConstantsError&) {
        v.failures.push_back("constants");
        return v;
    }
    const auto sigma = check_sigma_rob(*z, dc);
    v.sigma_rob      = sigma.in_sigma_rob();
    for (auto& id : sigma.failures()) {
        v.failures.push_back(std::move(id));
    }
    const auto cz = in_CZ(make_controller(z->capacity(), cp.eps_plus, cp.eps_minus), *z, dc);
    v.cz          = cz.member();
    for (const Condition* c : {&cz.positivity, &cz.ordering, &cz.a4, &cz.a5}) {
        if (!c->holds) {
            v.failures.push_back(c->id);
        }
    }
    return v;
}

} // namespace detail

struct RobustnessOptions {
    std::size_t samples         = 256;
    std::uint64_t seed          = 0;
    std::size_t bisection_depth = 20;
    double dwell_delta          = default_dwell_delta;
};

/**
 * Samples perturbed parameter tuples inside a relative box of radius delta around the scenario and
 * tests, for the fixed safety distances of cp, membership in Sigma_rob and C_Z~. The certified radius
 * is bisected over [0, delta] with "all samples pass" as predicate, reusing the same directions.
 */
inline RobustnessResult robustness_probe(const Scenario& scenario, const ControllerParams& cp, double delta,
                                         const RobustnessOptions& opt = {})
{
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
        throw std::invalid_argument("delta must be finite and >= 0");
    }
    if (opt.samples == 0) {
        throw std::invalid_argument("samples must be > 0");
    }
    const auto dc = derive_constants(scenario, opt.dwell_delta);
    if (!check_sigma_rob(scenario, dc).in_sigma_rob()) {
        throw std::invalid_argument("robustness_probe requires a scenario in Sigma_rob");
    }
    if (!in_CZ(cp, scenario, dc).member()) {
        throw std::invalid_argument("robustness_probe requires controller parameters in C_Z");
    }

    const ParameterPoint base = to_parameter_point(scenario);
    const auto dirs           = unit_perturbations(opt.samples, opt.seed);

    auto all_pass = [&](double radius) {
        for (const auto& w : dirs) {
            if (!detail::evaluate_perturbed(perturb(base, w, radius), cp, opt.dwell_delta).passed()) {
                return false;
            }
        }
        return true;
    };

    RobustnessResult r;
    r.delta   = delta;
    r.samples = opt.samples;
    std::size_t pass = 0, rob = 0, cz = 0;
    for (const auto& w : dirs) {
        const auto v = detail::evaluate_perturbed(perturb(base, w, delta), cp, opt.dwell_delta);
        pass += v.passed();
        rob += v.sigma_rob;
        cz += v.cz;
        for (const auto& id : v.failures) {
            ++r.failure_counts[id];
        }
    }
    const double n       = static_cast<double>(opt.samples);
    r.pass_fraction      = static_cast<double>(pass) / n;
    r.sigma_rob_fraction = static_cast<double>(rob) / n;
    r.cz_fraction        = static_cast<double>(cz) / n;

    if (pass == opt.samples) {
        r.certified_delta = delta;
    }
    else {
        double lo = 0.0, hi = delta;
        for (std::size_t i = 0; i < opt.bisection_depth; ++i) {
            const double mid = 0.5 * (lo + hi);
            (all_pass(mid) ? lo : hi) = mid;
        }
        r.certified_delta = lo;
    }
    return r;
}

/**
 * Numerator q1 of q'(eps) = q1(eps) / q2(eps)^2, q2(eps) = alpha_S/(1-rho) + M1 eps - M2.
 */
inline double q_derivative_numerator(double eps, const DerivedConstants& dc, const Scenario& scenario)
{
    const auto& P    = scenario.params();
    const double R0  = scenario.init().R0;
    const double z   = P.beta_A * dc.zeta + P.beta_S;
    const double pN  = P.p * dc.N;
    const double q2  = dc.exit_rate_S + dc.M1 * eps - dc.M2;
    const double lin = 1.0 - R0 / dc.N;
    return (P.p * z * (lin - 2.0 * eps / pN) + P.p * (dc.zeta + 1.0) * (2.0 * dc.M1 * eps - dc.M2)) * q2 -
           P.p * z * dc.M1 * eps * (lin - eps / pN) - P.p * dc.M1 * (dc.zeta + 1.0) * eps * (dc.M1 * eps - dc.M2);
}

/// Index i of the first pair (i, i+1) with q[i+1] <= q[i], if any.
inline std::optional<std::size_t> first_non_increase(std::span<const double> values) noexcept
{
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        if (!(values[i + 1] > values[i])) {
            return i;
        }
    }
    return std::nullopt;
}

struct MonotonicityReport {
    bool strictly_increasing = false;
    /// First consecutive grid pair (eps_i, eps_{i+1}) on which q does not increase.
    std::optional<std::pair<double, double>> offending;
    std::size_t grid_points = 0;
    double q_lower          = 0.0; ///< q(M2/M1)
    double q_upper          = 0.0; ///< q(phi_plus)
    double q1_at_lower      = 0.0; ///< q1(M2/M1)
    double q1_slope_factor  = 0.0; ///< p(zeta+1)M1 - z/N; q1' = 2 * factor * q2
    bool in_sigma_rob       = false;

    bool q1_at_lower_positive() const noexcept
    {
        return q1_at_lower > 0.0;
    }
    bool q1_increasing() const noexcept
    {
        return q1_slope_factor > 0.0;
    }
    bool passed() const noexcept
    {
        return strictly_increasing && q1_at_lower_positive() && q1_increasing();
    }
};

/// Checks strict increase of q on `grid_points` equispaced points of [M2/M1, phi_plus] (both ends included).
inline MonotonicityReport q_monotonicity_check(const Scenario& scenario, const DerivedConstants& dc,
                                               std::size_t grid_points = 10000)
{
    if (grid_points < 2) {
        throw std::invalid_argument("q_monotonicity_check needs at least 2 grid points");
    }
    const auto& P   = scenario.params();
    const double lo = dc.M2 / dc.M1;
    const double hi = dc.phi_plus;

    MonotonicityReport r;
    r.grid_points  = grid_points;
    r.in_sigma_rob = check_sigma_rob(scenario, dc).in_sigma_rob();

    std::vector<double> eps(grid_points), q(grid_points);
    for (std::size_t k = 0; k < grid_points; ++k) {
        eps[k] = k + 1 == grid_points ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(grid_points - 1);
        q[k]   = q_eval(eps[k], dc, scenario);
    }
    const auto bad        = first_non_increase(q);
    r.strictly_increasing = !bad.has_value();
    if (bad) {
        r.offending = std::make_pair(eps[*bad], eps[*bad + 1]);
    }
    r.q_lower         = q.front();
    r.q_upper         = q.back();
    r.q1_at_lower     = q_derivative_numerator(lo, dc, scenario);
    r.q1_slope_factor = P.p * (dc.zeta + 1.0) * dc.M1 - (P.beta_A * dc.zeta + P.beta_S) / dc.N;
    return r;
}

struct SweepRow {
    double eps_minus = 0.0;
    std::optional<RunReport> report;
    std::string error; ///< set when the run failed
};

struct SweepResult {
    double eps_plus = 0.0;
    std::vector<SweepRow> rows;
};

/// One closed-loop run per eps_minus, executed concurrently; rows keep the input order.
inline SweepResult sweep_eps_minus(const Scenario& scenario, double eps_plus, std::span<const double> eps_minus_list,
                                   SimConfig cfg)
{
    cfg.open_loop_u.reset();
    std::vector<std::future<SweepRow>> jobs;
    jobs.reserve(eps_minus_list.size());
    for (double eps_minus : eps_minus_list) {
        jobs.push_back(std::async(std::launch::async, [&scenario, &cfg, eps_plus, eps_minus] {
            SweepRow row{eps_minus, std::nullopt, {}};
            try {
                const auto cp = make_controller(scenario.capacity(), eps_plus, eps_minus);
                row.report    = simulate(scenario, cp, cfg).report;
            }
            catch (const std::exception& e) {
                row.error = e.what();
            }
            return row;
        }));
    }
    SweepResult result{eps_plus, {}};
    for (auto& job : jobs) {
        result.rows.push_back(job.get());
    }
    return result;
}

} // namespace icufunnel

#endif // ICUFUNNEL_ANALYSIS_HPP
