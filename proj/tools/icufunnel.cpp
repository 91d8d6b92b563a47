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
// Command-line front end: check, constants, simulate, dwell, feasible, robust, sweep.
//
// Exit codes: 0 success or membership, 1 negative analysis verdict or failed run, 2 usage or parse error.

#include "icufunnel.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace
{

using namespace icufunnel;

constexpr int exit_ok       = 0;
constexpr int exit_negative = 1;
constexpr int exit_usage    = 2;

/// Controller overrides shared by several subcommands.
struct ControllerFlags {
    std::optional<double> eps_plus;
    std::optional<double> eps_minus;

    void attach(CLI::App* cmd)
    {
        cmd->add_option("--eps-plus", eps_plus, "safety distance below phi_plus (individuals)");
        cmd->add_option("--eps-minus", eps_minus, "switch-off level above phi_minus (individuals)");
    }

    /// File values overridden by flags; nullopt if neither provides both distances.
    std::optional<ControllerParams> resolve(const ScenarioFile& file) const
    {
        std::optional<double> plus  = eps_plus;
        std::optional<double> minus = eps_minus;
        if (file.controller) {
            plus  = plus.value_or(file.controller->eps_plus);
            minus = minus.value_or(file.controller->eps_minus);
        }
        if (!plus || !minus) {
            return std::nullopt;
        }
        return make_controller(file.scenario.capacity(), *plus, *minus);
    }
};

struct SimFlags {
    std::optional<double> horizon, output_dt, rtol, atol, event_time_tol;

    void attach(CLI::App* cmd)
    {
        cmd->add_option("--horizon", horizon, "simulation horizon (days)");
        cmd->add_option("--output-dt", output_dt, "sampling interval (days)");
        cmd->add_option("--rtol", rtol, "relative integrator tolerance");
        cmd->add_option("--atol", atol, "absolute integrator tolerance");
        cmd->add_option("--event-time-tol", event_time_tol, "event location tolerance (days)");
    }

    SimConfig resolve(const ScenarioFile& file) const
    {
        SimSection overrides{horizon, output_dt, rtol, atol, event_time_tol};
        SimConfig cfg = overrides.apply(file.sim.apply(SimConfig{}));
        cfg.validate();
        return cfg;
    }
};

void write_file(const std::string& path, const std::function<void(std::ostream&)>& emit)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    emit(out);
}

int cmd_check(const ScenarioFile& file)
{
    DerivedConstants dc;
    try {
        dc = derive_constants(file.scenario);
    }
    catch (const ConstantsError& e) {
        write_assumption_report(std::cout, check_parameter_conditions(file.scenario));
        std::cout << "constants = undefined  # " << e.what() << '\n'
                  << "in_sigma = false\n"
                  << "in_sigma_rob = false\n";
        return exit_negative;
    }
    const auto report = check_sigma_rob(file.scenario, dc);
    write_assumption_report(std::cout, report);
    std::cout << "in_sigma = " << to_string(report.in_sigma()) << '\n'
              << "in_sigma_rob = " << to_string(report.in_sigma_rob()) << '\n';
    if (const auto cp = file.controller_params()) {
        write_cz_report(std::cout, in_CZ(*cp, file.scenario, dc));
    }
    return report.in_sigma() ? exit_ok : exit_negative;
}

int cmd_constants(const ScenarioFile& file, double dwell_delta)
{
    write_constants(std::cout, derive_constants(file.scenario, dwell_delta));
    return exit_ok;
}

struct SimulateFlags {
    std::optional<int> open_loop;
    std::string out, events_out, report_out;
};

int cmd_simulate(const ScenarioFile& file, const ControllerFlags& ctl, const SimFlags& simf, const SimulateFlags& f)
{
    SimConfig cfg = simf.resolve(file);
    std::optional<ControllerParams> cp;
    if (f.open_loop) {
        if (*f.open_loop != 0 && *f.open_loop != 1) {
            throw std::invalid_argument("--open-loop takes 0 or 1");
        }
        cfg.open_loop_u = *f.open_loop == 1 ? Input::on : Input::off;
    }
    else {
        cp = ctl.resolve(file);
        if (!cp) {
            throw std::invalid_argument("closed loop needs eps_plus and eps_minus (file or flags), or use --open-loop");
        }
        cp->validate();
    }

    const auto result     = simulate(file.scenario, cp, cfg);
    const auto dc         = derive_constants(file.scenario);
    const auto validation = validate_trajectory(result.trajectory, file.scenario, dc, cp,
                                                ValidationOptions{1e-6, 1e-6, cfg.event_time_tol});

    if (!f.out.empty()) {
        write_file(f.out, [&](std::ostream& os) { write_trajectory_csv(os, result.trajectory); });
    }
    if (!f.events_out.empty()) {
        write_file(f.events_out, [&](std::ostream& os) { write_events_csv(os, result.trajectory); });
    }
    if (!f.report_out.empty()) {
        write_file(f.report_out, [&](std::ostream& os) {
            write_run_report(os, result.report);
            write_validation(os, validation);
        });
    }
    write_run_report(std::cout, result.report);
    write_validation(std::cout, validation);
    return exit_ok;
}

int cmd_dwell(const ScenarioFile& file, const ControllerFlags& ctl, std::optional<double> ia_at_switch)
{
    const auto cp = ctl.resolve(file);
    if (!cp) {
        throw std::invalid_argument("dwell needs eps_plus and eps_minus (file or flags)");
    }
    const auto dc     = derive_constants(file.scenario);
    const double ia   = ia_at_switch.value_or(file.scenario.init().IA0);
    const auto bounds = dwell_lower_bounds(*cp, dc, ia);
    std::cout << "down_bound = " << format_number(bounds.down_bound) << "  # days, u = 1 phase\n"
              << "up_bound = " << format_number(bounds.up_bound) << "  # days, u = 0 phase, I_A at switch = "
              << format_number(ia) << '\n'
              << "up_bound_informative = " << to_string(bounds.up_informative()) << '\n';
    return exit_ok;
}

int cmd_feasible(const ScenarioFile& file, std::size_t grid, const std::string& pick_name)
{
    const auto dc   = derive_constants(file.scenario);
    const auto pick = pick_name == "largest" ? FeasiblePick::largest : FeasiblePick::centered;
    try {
        const auto cp = find_feasible_eps(file.scenario, dc, grid, pick);
        std::cout << "eps_plus = " << format_number(cp.eps_plus) << '\n'
                  << "eps_minus = " << format_number(cp.eps_minus) << '\n';
        write_cz_report(std::cout, in_CZ(cp, file.scenario, dc));
        return exit_ok;
    }
    catch (const Infeasible& e) {
        std::cout << e.what() << '\n';
        std::cerr << e.what() << '\n';
        return exit_negative;
    }
}

struct RobustFlags {
    double delta          = 1e-3;
    std::size_t samples   = 256;
    std::uint64_t seed    = 0;
    std::size_t depth     = 20;
    std::string out;
};

int cmd_robust(const ScenarioFile& file, const ControllerFlags& ctl, const RobustFlags& f)
{
    const auto dc = derive_constants(file.scenario);
    auto cp       = ctl.resolve(file);
    if (!ctl.eps_plus && !ctl.eps_minus) {
        // Without explicit flags the probe uses the constructed feasible pair.
        cp = find_feasible_eps(file.scenario, dc);
    }
    else if (!cp) {
        throw std::invalid_argument("robust needs both eps_plus and eps_minus (file or flags)");
    }
    std::cout << "eps_plus = " << format_number(cp->eps_plus) << '\n'
              << "eps_minus = " << format_number(cp->eps_minus) << '\n';
    const auto r = robustness_probe(file.scenario, *cp, f.delta, {f.samples, f.seed, f.depth, default_dwell_delta});
    std::cout << "delta = " << format_number(r.delta) << '\n'
              << "samples = " << r.samples << '\n'
              << "pass_fraction = " << format_number(r.pass_fraction) << '\n'
              << "sigma_rob_fraction = " << format_number(r.sigma_rob_fraction) << '\n'
              << "cz_fraction = " << format_number(r.cz_fraction) << '\n'
              << "certified_delta = " << format_number(r.certified_delta) << "  # sampled under-approximation\n";
    for (const auto& [id, count] : r.failure_counts) {
        std::cout << "failures." << id << " = " << count << '\n';
    }
    const auto mono = q_monotonicity_check(file.scenario, dc);
    std::cout << "q_monotone = " << to_string(mono.passed()) << '\n';
    if (!f.out.empty()) {
        write_file(f.out, [&](std::ostream& os) { write_robustness_csv(os, r); });
    }
    return r.pass_fraction == 1.0 ? exit_ok : exit_negative;
}

int cmd_sweep(const ScenarioFile& file, const ControllerFlags& ctl, const SimFlags& simf,
              const std::vector<double>& eps_minus_list, const std::string& out)
{
    std::optional<double> eps_plus = ctl.eps_plus;
    if (!eps_plus && file.controller) {
        eps_plus = file.controller->eps_plus;
    }
    if (!eps_plus) {
        throw std::invalid_argument("sweep needs --eps-plus or a controller section");
    }
    if (eps_minus_list.empty()) {
        throw std::invalid_argument("sweep needs --eps-minus-list");
    }
    const auto sweep = sweep_eps_minus(file.scenario, *eps_plus, eps_minus_list, simf.resolve(file));
    if (out.empty()) {
        write_sweep_csv(std::cout, sweep);
    }
    else {
        write_file(out, [&](std::ostream& os) { write_sweep_csv(os, sweep); });
        write_sweep_csv(std::cout, sweep);
    }
    const bool all_ok = std::all_of(sweep.rows.begin(), sweep.rows.end(), [](const SweepRow& r) {
        return r.report.has_value();
    });
    return all_ok ? exit_ok : exit_negative;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Bang-bang funnel control of an SIRASD epidemic under an ICU capacity bound"};
    app.require_subcommand(1);

    std::string scenario_path;
    ControllerFlags ctl;
    SimFlags simf;

    auto* check = app.add_subcommand("check", "evaluate the admissibility conditions A1-A3 and A6");
    check->add_option("scenario", scenario_path)->required();

    double dwell_delta = default_dwell_delta;
    auto* constants    = app.add_subcommand("constants", "print all derived constants");
    constants->add_option("scenario", scenario_path)->required();
    constants->add_option("--dwell-delta", dwell_delta, "positive floor of mu (1/day)");

    SimulateFlags simulate_flags;
    auto* sim = app.add_subcommand("simulate", "simulate the open or closed loop and write CSV output");
    sim->add_option("scenario", scenario_path)->required();
    sim->add_option("--open-loop", simulate_flags.open_loop, "fixed input 0 or 1 instead of the controller");
    ctl.attach(sim);
    simf.attach(sim);
    sim->add_option("--out", simulate_flags.out, "trajectory CSV");
    sim->add_option("--events-out", simulate_flags.events_out, "switch events CSV");
    sim->add_option("--report-out", simulate_flags.report_out, "run report");

    std::optional<double> ia_at_switch;
    auto* dwell = app.add_subcommand("dwell", "dwell-time lower bounds");
    dwell->add_option("scenario", scenario_path)->required();
    ctl.attach(dwell);
    dwell->add_option("--ia-at-switch", ia_at_switch, "I_A at the switch-off instant (default IA0)");

    std::size_t grid      = default_feasible_grid;
    std::string pick_name = "centered";
    auto* feasible        = app.add_subcommand("feasible", "construct safety distances in C_Z");
    feasible->add_option("scenario", scenario_path)->required();
    feasible->add_option("--grid", grid, "number of grid points")->check(CLI::PositiveNumber);
    feasible->add_option("--pick", pick_name, "centered or largest")->check(CLI::IsMember({"centered", "largest"}));

    RobustFlags robust_flags;
    auto* robust = app.add_subcommand("robust", "sampled robustness probe around the scenario");
    robust->add_option("scenario", scenario_path)->required();
    ctl.attach(robust);
    robust->add_option("--delta", robust_flags.delta, "relative perturbation radius");
    robust->add_option("--samples", robust_flags.samples, "number of sampled perturbations")->check(CLI::PositiveNumber);
    robust->add_option("--seed", robust_flags.seed, "random seed");
    robust->add_option("--depth", robust_flags.depth, "bisection depth for the certified radius");
    robust->add_option("--out", robust_flags.out, "robustness CSV");

    std::vector<double> eps_minus_list;
    std::string sweep_out;
    auto* sweep = app.add_subcommand("sweep", "closed-loop runs over a list of eps_minus values");
    sweep->add_option("scenario", scenario_path)->required();
    ctl.attach(sweep);
    simf.attach(sweep);
    sweep->add_option("--eps-minus-list", eps_minus_list, "comma-separated eps_minus values")->delimiter(',');
    sweep->add_option("--out", sweep_out, "sweep CSV");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    ScenarioFile file = [&] {
        try {
            return read_scenario_file(scenario_path);
        }
        catch (const ParseError& e) {
            std::cerr << "error: " << e.what() << '\n';
            std::exit(exit_usage);
        }
    }();

    try {
        if (*check) {
            return cmd_check(file);
        }
        if (*constants) {
            return cmd_constants(file, dwell_delta);
        }
        if (*sim) {
            return cmd_simulate(file, ctl, simf, simulate_flags);
        }
        if (*dwell) {
            return cmd_dwell(file, ctl, ia_at_switch);
        }
        if (*feasible) {
            return cmd_feasible(file, grid, pick_name);
        }
        if (*robust) {
            return cmd_robust(file, ctl, robust_flags);
        }
        if (*sweep) {
            return cmd_sweep(file, ctl, simf, eps_minus_list, sweep_out);
        }
    }
    catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_negative;
    }
    return exit_usage;
}
