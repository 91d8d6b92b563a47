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
#ifndef ICUFUNNEL_IO_HPP
#define ICUFUNNEL_IO_HPP

#include "icufunnel/analysis.hpp"
#include "icufunnel/constants.hpp"
#include "icufunnel/controller.hpp"
#include "icufunnel/model.hpp"
#include "icufunnel/simulator.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace icufunnel
{

/// Shortest decimal representation that parses back to the same double.
inline std::string format_number(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Parses a complete decimal number; nullopt on any trailing or missing characters.
inline std::optional<double> parse_number(std::string_view text)
{
    double v       = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        return std::nullopt;
    }
    return v;
}

/// Malformed scenario file; the message carries the line number or key.
class ParseError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct ControllerSection {
    double eps_plus  = 0.0;
    double eps_minus = 0.0;
};

/// Optional [sim] overrides of the SimConfig defaults.
struct SimSection {
    std::optional<double> horizon;
    std::optional<double> output_dt;
    std::optional<double> rtol;
    std::optional<double> atol;
    std::optional<double> event_time_tol;

    SimConfig apply(SimConfig cfg) const
    {
        cfg.horizon        = horizon.value_or(cfg.horizon);
        cfg.output_dt      = output_dt.value_or(cfg.output_dt);
        cfg.rtol           = rtol.value_or(cfg.rtol);
        cfg.atol           = atol.value_or(cfg.atol);
        cfg.event_time_tol = event_time_tol.value_or(cfg.event_time_tol);
        return cfg;
    }

    friend bool operator==(const SimSection&, const SimSection&) = default;
};

/// Contents of one scenario file: the 18 system parameters plus optional controller and sim sections.
struct ScenarioFile {
    Scenario scenario;
    std::optional<ControllerSection> controller;
    SimSection sim;

    std::optional<ControllerParams> controller_params() const
    {
        if (!controller) {
            return std::nullopt;
        }
        return make_controller(scenario.capacity(), controller->eps_plus, controller->eps_minus);
    }
};

namespace detail
{

inline constexpr std::array<std::string_view, 18> scenario_keys{
    "beta_A", "beta_S", "alpha_A", "alpha_S", "p",   "rho", "gamma_0", "gamma_1", "psi_bar",
    "gamma_K", "S0",    "IA0",     "IS0",     "R0",  "D0",  "psi0",    "n_icu",   "xi"};
inline constexpr std::array<std::string_view, 2> controller_keys{"eps_plus", "eps_minus"};
inline constexpr std::array<std::string_view, 5> sim_keys{"horizon", "output_dt", "rtol", "atol", "event_time_tol"};

template <std::size_t K>
bool contains(const std::array<std::string_view, K>& keys, std::string_view key)
{
    return std::find(keys.begin(), keys.end(), key) != keys.end();
}

inline std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::string section_of(std::string_view key)
{
    if (contains(scenario_keys, key)) {
        return "scenario";
    }
    if (contains(controller_keys, key)) {
        return "controller";
    }
    if (contains(sim_keys, key)) {
        return "sim";
    }
    return {};
}

} // namespace detail

/**
 * Reads a scenario document: `key = value` lines, `#` comments, and optional `[scenario]`,
 * `[controller]`, `[sim]` headers. Keys under a header must belong to it. Unknown, duplicate and
 * missing required keys are rejected.
 */
inline ScenarioFile read_scenario(std::istream& in)
{
    std::map<std::string, double> values;
    std::string current_section;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = detail::trim(line);
        if (line.empty()) {
            continue;
        }
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ParseError(where + "malformed section header");
            }
            current_section = std::string(detail::trim(line.substr(1, line.size() - 2)));
            if (current_section != "scenario" && current_section != "controller" && current_section != "sim") {
                throw ParseError(where + "unknown section [" + current_section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError(where + "expected 'key = value'");
        }
        const std::string key(detail::trim(line.substr(0, eq)));
        const auto value_text = detail::trim(line.substr(eq + 1));
        const std::string owner = detail::section_of(key);
        if (owner.empty()) {
            throw ParseError(where + "unknown key '" + key + "'");
        }
        if (!current_section.empty() && owner != current_section) {
            throw ParseError(where + "key '" + key + "' does not belong to section [" + current_section + "]");
        }
        const auto value = parse_number(value_text);
        if (!value) {
            throw ParseError(where + "invalid number for '" + key + "': '" + std::string(value_text) + "'");
        }
        if (!values.emplace(key, *value).second) {
            throw ParseError(where + "duplicate key '" + key + "'");
        }
    }

    for (auto key : detail::scenario_keys) {
        if (!values.count(std::string(key))) {
            throw ParseError("missing required key '" + std::string(key) + "'");
        }
    }
    auto get = [&](const char* key) {
        return values.at(key);
    };
    EpidemicParams P{get("beta_A"), get("beta_S"), get("alpha_A"), get("alpha_S"), get("p"),
                     get("rho"),    get("gamma_0"), get("gamma_1"), get("psi_bar"), get("gamma_K")};
    InitialState I{get("S0"), get("IA0"), get("IS0"), get("R0"), get("D0"), get("psi0")};
    CapacityPolicy C{get("n_icu"), get("xi")};

    std::optional<Scenario> scenario;
    try {
        scenario.emplace(P, I, C);
    }
    catch (const std::invalid_argument& e) {
        throw ParseError(std::string("invalid scenario: ") + e.what());
    }

    ScenarioFile file{*scenario, std::nullopt, {}};
    const bool has_plus = values.count("eps_plus") > 0, has_minus = values.count("eps_minus") > 0;
    if (has_plus != has_minus) {
        throw ParseError(std::string("missing required key '") + (has_plus ? "eps_minus" : "eps_plus") +
                         "' (controller section needs both safety distances)");
    }
    if (has_plus) {
        file.controller = ControllerSection{get("eps_plus"), get("eps_minus")};
    }
    auto opt = [&](const char* key) -> std::optional<double> {
        const auto it = values.find(key);
        return it == values.end() ? std::nullopt : std::optional<double>(it->second);
    };
    file.sim = {opt("horizon"), opt("output_dt"), opt("rtol"), opt("atol"), opt("event_time_tol")};
    return file;
}

inline ScenarioFile read_scenario_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open scenario file '" + path + "'");
    }
    try {
        return read_scenario(in);
    }
    catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline void write_scenario(std::ostream& os, const ScenarioFile& file)
{
    const auto& P = file.scenario.params();
    const auto& I = file.scenario.init();
    const auto& C = file.scenario.capacity();
    auto kv       = [&os](std::string_view key, double v) {
        os << key << " = " << format_number(v) << '\n';
    };
    os << "[scenario]\n";
    kv("beta_A", P.beta_A);
    kv("beta_S", P.beta_S);
    kv("alpha_A", P.alpha_A);
    kv("alpha_S", P.alpha_S);
    kv("p", P.p);
    kv("rho", P.rho);
    kv("gamma_0", P.gamma_0);
    kv("gamma_1", P.gamma_1);
    kv("psi_bar", P.psi_bar);
    kv("gamma_K", P.gamma_K);
    kv("S0", I.S0);
    kv("IA0", I.IA0);
    kv("IS0", I.IS0);
    kv("R0", I.R0);
    kv("D0", I.D0);
    kv("psi0", I.psi0);
    kv("n_icu", C.n_icu);
    kv("xi", C.xi);
    if (file.controller) {
        os << "\n[controller]\n";
        kv("eps_plus", file.controller->eps_plus);
        kv("eps_minus", file.controller->eps_minus);
    }
    const auto& s = file.sim;
    if (s.horizon || s.output_dt || s.rtol || s.atol || s.event_time_tol) {
        os << "\n[sim]\n";
        for (const auto& [key, v] : std::initializer_list<std::pair<std::string_view, std::optional<double>>>{
                 {"horizon", s.horizon},
                 {"output_dt", s.output_dt},
                 {"rtol", s.rtol},
                 {"atol", s.atol},
                 {"event_time_tol", s.event_time_tol}}) {
            if (v) {
                kv(key, *v);
            }
        }
    }
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj)
{
    os << "t,S,I_A,I_S,R,D,psi,u\n";
    for (const auto& sample : traj.samples) {
        const State& s = sample.state;
        os << format_number(s.t) << ',' << format_number(s.S) << ',' << format_number(s.I_A) << ','
           << format_number(s.I_S) << ',' << format_number(s.R) << ',' << format_number(s.D) << ','
           << format_number(s.psi) << ',' << (sample.u == Input::on ? 1 : 0) << '\n';
    }
}

inline void write_events_csv(std::ostream& os, const Trajectory& traj)
{
    os << "t,u_new\n";
    for (const auto& e : traj.events) {
        os << format_number(e.t) << ',' << (e.u_new == Input::on ? 1 : 0) << '\n';
    }
}

inline const char* to_string(bool b) noexcept
{
    return b ? "true" : "false";
}

inline void write_run_report(std::ostream& os, const RunReport& r)
{
    os << "D_max = " << format_number(r.D_max) << '\n'
       << "total_infected_proxy = " << format_number(r.total_infected_proxy) << '\n'
       << "input_cost = " << format_number(r.input_cost) << '\n'
       << "switch_count = " << r.switch_count << '\n'
       << "min_observed_dwell = " << (r.min_observed_dwell ? format_number(*r.min_observed_dwell) : "none") << '\n'
       << "pandemic_end = " << format_number(r.pandemic_end) << '\n'
       << "released_at_horizon = " << to_string(r.released_at_horizon) << '\n'
       << "IS_decreasing_at_horizon = " << to_string(r.IS_decreasing_at_horizon) << '\n'
       << "max_IS = " << format_number(r.max_IS) << '\n'
       << "phi_plus = " << format_number(r.phi_plus) << '\n'
       << "icu_bound_satisfied = " << to_string(r.icu_bound_satisfied) << '\n';
}

inline void write_validation(std::ostream& os, const ValidationReport& v)
{
    for (const auto& c : v.checks) {
        os << "validation." << c.id << " = " << (!c.evaluated ? "skipped" : c.passed() ? "pass" : "fail");
        if (c.violation_count > 0) {
            os << " (" << c.violation_count << " violations, first at t = " << format_number(c.violations.front().t)
               << ", magnitude " << format_number(c.violations.front().magnitude) << ")";
        }
        os << "  # " << c.description << '\n';
    }
}

inline void write_assumption_report(std::ostream& os, const AssumptionReport& r)
{
    for (const auto& c : r.conditions) {
        os << c.id << " = " << (c.holds ? "pass" : "fail") << "  # " << c.expression << ": " << format_number(c.lhs)
           << " vs " << format_number(c.rhs);
        if (c.vacuous) {
            os << " (vacuous)";
        }
        if (!c.note.empty()) {
            os << " [" << c.note << "]";
        }
        os << '\n';
    }
}

inline void write_cz_report(std::ostream& os, const CZReport& r)
{
    for (const Condition* c : {&r.positivity, &r.ordering, &r.a4, &r.a5}) {
        os << c->id << " = " << (c->holds ? "pass" : "fail") << "  # " << c->expression << ": "
           << format_number(c->lhs) << " vs " << format_number(c->rhs);
        if (!c->note.empty()) {
            os << " [" << c->note << "]";
        }
        os << '\n';
    }
    os << "in_CZ = " << to_string(r.member()) << '\n';
}

inline void write_constants(std::ostream& os, const DerivedConstants& dc)
{
    const std::initializer_list<std::pair<std::string_view, double>> rows{
        {"N", dc.N},           {"phi_plus", dc.phi_plus}, {"S_min", dc.S_min},       {"beta_tilde", dc.beta_tilde},
        {"A", dc.A_const},     {"B", dc.B_const},         {"zeta", dc.zeta},         {"K_psi_bar", dc.K_psi_bar},
        {"psi_floor", dc.psi_floor}, {"M1", dc.M1},       {"M2", dc.M2},             {"M3", dc.M3},
        {"M2_over_M1", dc.M2 / dc.M1}, {"mu", dc.mu},    {"exit_rate_S", dc.exit_rate_S}};
    for (const auto& [key, v] : rows) {
        os << key << " = " << format_number(v) << '\n';
    }
    os << "a3_bound = " << format_number(dc.a3_bound()) << '\n'
       << "a3_bound_reported = " << format_number(reported_a3_bound) << '\n';
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& sweep)
{
    os << "eps_minus,eps_plus,D_max,switch_count,pandemic_end,input_cost,max_IS,error\n";
    for (const auto& row : sweep.rows) {
        os << format_number(row.eps_minus) << ',' << format_number(sweep.eps_plus) << ',';
        if (row.report) {
            const auto& r = *row.report;
            os << format_number(r.D_max) << ',' << r.switch_count << ',' << format_number(r.pandemic_end) << ','
               << format_number(r.input_cost) << ',' << format_number(r.max_IS) << ",\n";
        }
        else {
            std::string msg = row.error;
            std::replace(msg.begin(), msg.end(), ',', ';');
            os << ",,,,," << msg << '\n';
        }
    }
}

inline void write_robustness_csv(std::ostream& os, const RobustnessResult& r)
{
    os << "delta,samples,pass_fraction,sigma_rob_fraction,cz_fraction,certified_delta\n"
       << format_number(r.delta) << ',' << r.samples << ',' << format_number(r.pass_fraction) << ','
       << format_number(r.sigma_rob_fraction) << ',' << format_number(r.cz_fraction) << ','
       << format_number(r.certified_delta) << '\n';
}

} // namespace icufunnel

#endif // ICUFUNNEL_IO_HPP
