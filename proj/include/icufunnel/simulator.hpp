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
#ifndef ICUFUNNEL_SIMULATOR_HPP
#define ICUFUNNEL_SIMULATOR_HPP

#include "icufunnel/constants.hpp"
#include "icufunnel/controller.hpp"
#include "icufunnel/model.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace icufunnel
{

/// Integration and output settings. Times in days.
struct SimConfig {
    double horizon        = 1000.0;
    double output_dt      = 1.0;
    double rtol           = 1e-8;
    double atol           = 1e-10;
    double event_time_tol = 1e-9;
    /// Fixed input overriding the controller (open loop).
    std::optional<Input> open_loop_u;
    /// Largest step the integrator may take; bounds the chance of stepping over two crossings.
    double max_step = 1.0;
    std::size_t max_switches = 1'000'000;

    void validate() const
    {
        if (!(horizon > 0.0) || !std::isfinite(horizon)) {
            throw std::invalid_argument("horizon must be finite and > 0");
        }
        if (!(output_dt > 0.0 && output_dt <= horizon)) {
            throw std::invalid_argument("output_dt must satisfy 0 < output_dt <= horizon");
        }
        if (!(rtol > 0.0) || !(atol > 0.0) || !(event_time_tol > 0.0) || !(max_step > 0.0)) {
            throw std::invalid_argument("rtol, atol, event_time_tol and max_step must be > 0");
        }
    }
};

/// Input switch located at time t; the input equals u_new from t on.
struct SwitchEvent {
    double t    = 0.0;
    Input u_new = Input::off;

    friend bool operator==(const SwitchEvent&, const SwitchEvent&) = default;
};

/// State sample together with the (right-continuous) input active at that time.
struct Sample {
    State state;
    Input u = Input::off;

    friend bool operator==(const Sample&, const Sample&) = default;
};

struct Peak {
    double t     = 0.0;
    double value = 0.0;
};

/**
 * Sampled closed- or open-loop solution. Samples are taken at multiples of output_dt, at the
 * horizon and at every event time; the input path is initial_u changed at each event.
 */
struct Trajectory {
    std::vector<Sample> samples;
    std::vector<SwitchEvent> events;
    Input initial_u = Input::off; ///< u(0-)
    double horizon  = 0.0;
    /// Located maximum of I_S over [0, horizon], when the producer tracked it between samples.
    std::optional<Peak> peak_IS;

    /// u(t), right-continuous.
    Input input_at(double t) const noexcept
    {
        Input u = initial_u;
        for (const auto& e : events) {
            if (e.t > t) {
                break;
            }
            u = e.u_new;
        }
        return u;
    }

    Input final_input() const noexcept
    {
        return events.empty() ? initial_u : events.back().u_new;
    }
};

/// Exact L1 norm of u on [0, t] (days), from the located switch times.
inline double input_cost(const Trajectory& traj, double t)
{
    if (!(t >= 0.0 && t <= traj.horizon)) {
        throw std::out_of_range("input_cost: t must lie in [0, horizon]");
    }
    double cost     = 0.0;
    double on_since = traj.initial_u == Input::on ? 0.0 : -1.0;
    for (const auto& e : traj.events) {
        if (e.t > t) {
            break;
        }
        if (e.u_new == Input::on && on_since < 0.0) {
            on_since = e.t;
        }
        else if (e.u_new == Input::off && on_since >= 0.0) {
            cost += e.t - on_since;
            on_since = -1.0;
        }
    }
    if (on_since >= 0.0) {
        cost += t - on_since;
    }
    return cost;
}

/// Summary metrics of one run.
struct RunReport {
    double D_max                = 0.0; ///< D at the horizon
    double total_infected_proxy = 0.0; ///< N - R0 - S(horizon)
    double input_cost           = 0.0; ///< days with u = 1
    std::size_t switch_count    = 0;
    std::optional<double> min_observed_dwell; ///< shortest time between consecutive switches
    double pandemic_end = 0.0; ///< last switch to u = 0, or 0 without one
    double max_IS       = 0.0;
    double phi_plus     = 0.0;
    bool icu_bound_satisfied = false; ///< max_IS < phi_plus
    bool released_at_horizon = false; ///< input is off at the horizon
    bool IS_decreasing_at_horizon = false;
};

struct SimulationResult {
    Trajectory trajectory;
    RunReport report;
};

/// Integrator failure or runaway switching.
class SimulationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Closed-loop hypotheses (I_S(0) <= phi_plus - eps_plus, D0 = 0, psi0 = 1) or config violated.
class PreconditionError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Computes the RunReport metrics of a finished trajectory.
inline RunReport summarize(const Trajectory& traj, const Scenario& scenario)
{
    RunReport r;
    if (traj.samples.empty()) {
        throw std::invalid_argument("summarize: empty trajectory");
    }
    const State& last = traj.samples.back().state;
    const auto& init  = scenario.init();
    r.D_max                = last.D;
    r.total_infected_proxy = scenario.population() - init.R0 - last.S;
    r.input_cost           = input_cost(traj, traj.horizon);
    r.switch_count         = traj.events.size();
    for (std::size_t i = 1; i < traj.events.size(); ++i) {
        const double dwell = traj.events[i].t - traj.events[i - 1].t;
        r.min_observed_dwell = std::min(r.min_observed_dwell.value_or(dwell), dwell);
    }
    for (const auto& e : traj.events) {
        if (e.u_new == Input::off) {
            r.pandemic_end = e.t;
        }
    }
    r.max_IS = 0.0;
    for (const auto& s : traj.samples) {
        r.max_IS = std::max(r.max_IS, s.state.I_S);
    }
    if (traj.peak_IS) {
        r.max_IS = std::max(r.max_IS, traj.peak_IS->value);
    }
    r.phi_plus            = scenario.capacity().phi_plus();
    r.icu_bound_satisfied = r.max_IS < r.phi_plus;
    r.released_at_horizon = traj.final_input() == Input::off;
    const auto dx = vector_field(last, traj.final_input(), scenario.params(), scenario.population());
    r.IS_decreasing_at_horizon = dx[static_cast<std::size_t>(Compartment::I_S)] < 0.0;
    return r;
}

namespace detail
{

/// Guard of the active mode: true once the controller would leave `mode` at this I_S.
inline bool guard_fires(double I_S, Input mode, const ControllerParams& cp) noexcept
{
    ControllerState probe{mode};
    return control_update(I_S, probe, cp) != mode;
}

} // namespace detail

/**
 * Integrates the two-mode hybrid system on [0, horizon].
 *
 * Within a mode the smooth vector field is integrated by an adaptive Dormand-Prince 5(4) pair with
 * dense output. Closed loop, the guard of the current mode (I_S reaching phi_plus - eps_plus while
 * off, I_S reaching eps_minus while on) is checked at the end of every step; a crossing is located
 * by bisection on the dense output until the bracket is below event_time_tol, the step is cut at
 * the crossing, the mode flips and integration restarts there.
 */
inline SimulationResult simulate(const Scenario& scenario, const std::optional<ControllerParams>& cp,
                                 const SimConfig& cfg)
{
    namespace odeint = boost::numeric::odeint;
    cfg.validate();

    const bool closed_loop = !cfg.open_loop_u.has_value();
    const auto& init       = scenario.init();
    if (closed_loop) {
        if (!cp) {
            throw PreconditionError("closed-loop simulation needs controller parameters or an open-loop input");
        }
        cp->validate();
        if (cp->phi_plus != scenario.capacity().phi_plus()) {
            throw PreconditionError("controller phi_plus does not match the scenario capacity policy");
        }
        if (!(init.IS0 <= cp->upper_threshold())) {
            throw PreconditionError("closed loop requires IS0 <= phi_plus - eps_plus");
        }
        if (init.D0 != 0.0) {
            throw PreconditionError("closed loop requires D0 = 0");
        }
        if (init.psi0 != 1.0) {
            throw PreconditionError("closed loop requires psi0 = 1");
        }
    }

    const EpidemicParams& params = scenario.params();
    const double N               = scenario.population();
    constexpr std::size_t IS     = static_cast<std::size_t>(Compartment::I_S);

    Trajectory traj;
    traj.horizon   = cfg.horizon;
    traj.initial_u = Input::off;

    StateVector x = ics_from_scenario(scenario).vector();
    double t      = 0.0;
    Input mode    = Input::off;
    if (closed_loop) {
        ControllerState cs;
        mode = control_update(x[IS], cs, *cp);
        if (mode == Input::on) {
            traj.events.push_back({0.0, Input::on});
        }
    }
    else {
        mode           = *cfg.open_loop_u;
        traj.initial_u = mode;
    }
    traj.samples.push_back({State::from_vector(x, 0.0), mode});

    Peak peak{0.0, x[IS]};
    auto slope_IS = [&](const StateVector& y) {
        return vector_field(y, mode, params, N)[IS];
    };

    auto system = [&](const StateVector& y, StateVector& dydt, double) {
        dydt = vector_field(y, mode, params, N);
    };
    auto stepper = odeint::make_dense_output(cfg.atol, cfg.rtol, cfg.max_step, odeint::runge_kutta_dopri5<StateVector>());
    stepper.initialize(x, t, std::min(cfg.max_step, 1e-2));

    std::size_t next_output = 1;
    auto output_time        = [&](std::size_t k) {
        return std::min(static_cast<double>(k) * cfg.output_dt, cfg.horizon);
    };

    StateVector y;
    while (t < cfg.horizon) {
        std::pair<double, double> span;
        try {
            span = stepper.do_step(system);
        }
        catch (const odeint::odeint_error& e) {
            throw SimulationError(std::string("integrator step failure at t = ") + std::to_string(t) + ": " + e.what());
        }
        const double t0 = span.first;
        double t_stop   = std::min(span.second, cfg.horizon);

        bool event_found = false;
        if (closed_loop) {
            stepper.calc_state(t_stop, y);
            if (detail::guard_fires(y[IS], mode, *cp)) {
                double lo = t0, hi = t_stop;
                while (hi - lo > cfg.event_time_tol) {
                    const double mid = 0.5 * (lo + hi);
                    if (mid <= lo || mid >= hi) {
                        break;
                    }
                    stepper.calc_state(mid, y);
                    (detail::guard_fires(y[IS], mode, *cp) ? hi : lo) = mid;
                }
                t_stop      = hi;
                event_found = true;
            }
        }

        // Interior maximum of I_S: its slope changes sign from + to - inside [t0, t_stop].
        {
            StateVector ya, yb;
            stepper.calc_state(t0, ya);
            stepper.calc_state(t_stop, yb);
            if (yb[IS] > peak.value) {
                peak = {t_stop, yb[IS]};
            }
            if (slope_IS(ya) > 0.0 && slope_IS(yb) < 0.0) {
                double lo = t0, hi = t_stop;
                for (int it = 0; it < 200 && hi - lo > cfg.event_time_tol; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    stepper.calc_state(mid, y);
                    (slope_IS(y) > 0.0 ? lo : hi) = mid;
                }
                stepper.calc_state(0.5 * (lo + hi), y);
                if (y[IS] > peak.value) {
                    peak = {0.5 * (lo + hi), y[IS]};
                }
            }
        }

        for (;;) {
            const double to = output_time(next_output);
            if (to > t_stop || (event_found && to >= t_stop)) {
                break;
            }
            if (to > traj.samples.back().state.t) {
                stepper.calc_state(to, y);
                traj.samples.push_back({State::from_vector(y, to), mode});
            }
            ++next_output;
            if (to >= cfg.horizon) {
                break;
            }
        }

        if (event_found) {
            stepper.calc_state(t_stop, y);
            mode = flipped(mode);
            traj.events.push_back({t_stop, mode});
            if (traj.events.size() > cfg.max_switches) {
                throw SimulationError("switch accumulation: more than " + std::to_string(cfg.max_switches) +
                                      " input switches");
            }
            if (traj.samples.back().state.t < t_stop) {
                traj.samples.push_back({State::from_vector(y, t_stop), mode});
            }
            else {
                traj.samples.back().u = mode;
            }
            const double dt = stepper.current_time_step();
            stepper.initialize(y, t_stop, std::min(dt > 0.0 ? dt : 1e-2, cfg.max_step));
        }
        t = t_stop;
    }

    if (traj.samples.back().state.t < cfg.horizon) {
        stepper.calc_state(cfg.horizon, y);
        traj.samples.push_back({State::from_vector(y, cfg.horizon), mode});
    }
    traj.peak_IS = peak;

    SimulationResult result{std::move(traj), {}};
    result.report = summarize(result.trajectory, scenario);
    return result;
}

/// Tolerances for validate_trajectory. Compartment checks use compartment_rel_tol * N.
struct ValidationOptions {
    double compartment_rel_tol = 1e-6;
    double psi_tol             = 1e-6;
    double dwell_tol           = 1e-9;
};

struct Violation {
    double t         = 0.0;
    double magnitude = 0.0; ///< amount by which the inequality is violated
};

struct CheckResult {
    std::string id;
    std::string description;
    bool evaluated = true; ///< false when the hypotheses of the check do not hold
    std::size_t violation_count = 0;
    std::vector<Violation> violations; ///< first few violations, in time order

    bool passed() const noexcept
    {
        return violation_count == 0;
    }
};

struct ValidationReport {
    std::vector<CheckResult> checks;

    bool all_passed() const noexcept
    {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) {
            return c.passed();
        });
    }

    const CheckResult* find(const std::string& id) const noexcept
    {
        for (const auto& c : checks) {
            if (c.id == id) {
                return &c;
            }
        }
        return nullptr;
    }
};

namespace detail
{
inline void record(CheckResult& check, double t, double magnitude)
{
    ++check.violation_count;
    if (check.violations.size() < 8) {
        check.violations.push_back({t, magnitude});
    }
}
} // namespace detail

/**
 * Checks a trajectory against the properties every solution is known to satisfy:
 * (a) nonnegative compartments, (b) conservation, (c) I_A >= (1-p)/p I_S under A1/A2,
 * (d) S >= S_min under A2, (e) I_A <= zeta I_S, (f) psi in [K_psi_bar psi_bar, 1] when psi0 = 1,
 * (g) I_S < phi_plus in closed loop, (h) every complete on-phase lasts at least the dwell bound.
 */
inline ValidationReport validate_trajectory(const Trajectory& traj, const Scenario& scenario,
                                            const DerivedConstants& dc, const std::optional<ControllerParams>& cp,
                                            const ValidationOptions& opt = {})
{
    const auto& P    = scenario.params();
    const double N   = scenario.population();
    const double tol = opt.compartment_rel_tol * N;
    const auto sigma = check_sigma(scenario, dc);

    CheckResult nonneg{"a", "all compartments >= -tol", true, 0, {}};
    CheckResult conserve{"b", "|S+I_A+I_S+R+D - N| <= tol", true, 0, {}};
    CheckResult lower_ratio{"c", "I_A >= (1-p)/p * I_S - tol", true, 0, {}};
    CheckResult smin{"d", "S >= S_min - tol", true, 0, {}};
    CheckResult upper_ratio{"e", "I_A <= zeta * I_S + tol", true, 0, {}};
    CheckResult psi_band{"f", "psi in [K_psi_bar*psi_bar - tol, 1 + tol]", true, 0, {}};
    CheckResult icu{"g", "I_S < phi_plus", true, 0, {}};
    CheckResult dwell{"h", "on-phase duration >= down dwell bound - tol", true, 0, {}};

    lower_ratio.evaluated = sigma.a1() && sigma.a2();
    smin.evaluated        = sigma.a2();
    psi_band.evaluated    = scenario.init().psi0 == 1.0;
    icu.evaluated         = cp.has_value();
    dwell.evaluated       = cp.has_value();

    for (const auto& sample : traj.samples) {
        const State& s = sample.state;
        const double worst = std::min({s.S, s.I_A, s.I_S, s.R, s.D});
        if (worst < -tol) {
            detail::record(nonneg, s.t, -worst);
        }
        const double drift = std::abs(s.compartment_sum() - N);
        if (drift > tol) {
            detail::record(conserve, s.t, drift);
        }
        if (lower_ratio.evaluated) {
            const double gap = (1.0 - P.p) / P.p * s.I_S - tol - s.I_A;
            if (gap > 0.0) {
                detail::record(lower_ratio, s.t, gap);
            }
        }
        if (smin.evaluated && s.S < dc.S_min - tol) {
            detail::record(smin, s.t, dc.S_min - s.S);
        }
        if (s.I_A > dc.zeta * s.I_S + tol) {
            detail::record(upper_ratio, s.t, s.I_A - dc.zeta * s.I_S);
        }
        if (psi_band.evaluated) {
            if (s.psi < dc.psi_floor - opt.psi_tol) {
                detail::record(psi_band, s.t, dc.psi_floor - s.psi);
            }
            else if (s.psi > 1.0 + opt.psi_tol) {
                detail::record(psi_band, s.t, s.psi - 1.0);
            }
        }
        if (icu.evaluated && !(s.I_S < cp->phi_plus)) {
            detail::record(icu, s.t, s.I_S - cp->phi_plus);
        }
    }
    if (icu.evaluated && traj.peak_IS && !(traj.peak_IS->value < cp->phi_plus)) {
        detail::record(icu, traj.peak_IS->t, traj.peak_IS->value - cp->phi_plus);
    }
    if (dwell.evaluated) {
        const double bound = std::log(cp->upper_threshold() / cp->eps_minus) / dc.exit_rate_S;
        for (std::size_t i = 0; i + 1 < traj.events.size(); ++i) {
            if (traj.events[i].u_new == Input::on && traj.events[i + 1].u_new == Input::off) {
                const double duration = traj.events[i + 1].t - traj.events[i].t;
                if (duration < bound - opt.dwell_tol) {
                    detail::record(dwell, traj.events[i].t, bound - duration);
                }
            }
        }
    }

    ValidationReport report;
    report.checks = {nonneg, conserve, lower_ratio, smin, upper_ratio, psi_band, icu, dwell};
    return report;
}

} // namespace icufunnel

#endif // ICUFUNNEL_SIMULATOR_HPP
