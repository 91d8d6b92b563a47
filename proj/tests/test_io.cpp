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
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

using namespace icufunnel;
using namespace icufunnel::test;

namespace
{

std::string example_text()
{
    std::ostringstream os;
    write_scenario(os, ScenarioFile{example_city(), ControllerSection{10.0, 8.0}, {}});
    return os.str();
}

std::string without_line(const std::string& text, const std::string& prefix)
{
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(prefix, 0) != 0) {
            out << line << '\n';
        }
    }
    return out.str();
}

ScenarioFile parse(const std::string& text)
{
    std::istringstream in(text);
    return read_scenario(in);
}

void expect_parse_error(const std::string& text, const std::string& fragment)
{
    try {
        parse(text);
        ADD_FAILURE() << "expected ParseError containing '" << fragment << "'";
    }
    catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
}

} // namespace

TEST(Io, NumberRoundTrip)
{
    std::mt19937_64 gen(21);
    for (int i = 0; i < 5000; ++i) {
        const double v = std::ldexp(uniform(gen, -1.0, 1.0), static_cast<int>(gen() % 200) - 100);
        const auto back = parse_number(format_number(v));
        ASSERT_TRUE(back.has_value());
        ASSERT_EQ(*back, v);
    }
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(44.0), "44");
    EXPECT_EQ(format_number(1e-10), "1e-10");
}

TEST(Io, NumberParsingIsStrict)
{
    EXPECT_EQ(parse_number("0.37"), 0.37);
    EXPECT_EQ(parse_number("-2"), -2.0);
    EXPECT_EQ(parse_number("1e3"), 1000.0);
    EXPECT_FALSE(parse_number("").has_value());
    EXPECT_FALSE(parse_number("0.3x").has_value());
    EXPECT_FALSE(parse_number("abc").has_value());
    EXPECT_FALSE(parse_number("1 2").has_value());
}

TEST(Io, ScenarioRoundTrip)
{
    ScenarioFile file{example_city(), ControllerSection{10.0, 8.0}, {}};
    file.sim.horizon = 365.0;
    file.sim.rtol    = 1e-9;
    std::ostringstream os;
    write_scenario(os, file);
    const auto back = parse(os.str());
    EXPECT_EQ(back.scenario, file.scenario);
    ASSERT_TRUE(back.controller.has_value());
    EXPECT_EQ(back.controller->eps_plus, 10.0);
    EXPECT_EQ(back.controller->eps_minus, 8.0);
    EXPECT_EQ(back.sim, file.sim);

    std::ostringstream again;
    write_scenario(again, back);
    EXPECT_EQ(again.str(), os.str());
}

TEST(Io, RandomScenarioRoundTrip)
{
    std::mt19937_64 gen(4);
    for (int trial = 0; trial < 200; ++trial) {
        EpidemicParams P;
        for (double* f : {&P.beta_A, &P.beta_S, &P.alpha_A, &P.alpha_S, &P.p, &P.rho, &P.gamma_0, &P.gamma_1,
                          &P.psi_bar, &P.gamma_K}) {
            *f = uniform(gen, 0.0, 1.0);
        }
        const InitialState I{uniform(gen, 1.0, 1e6), uniform(gen, 0.0, 100.0), uniform(gen, 0.0, 10.0),
                             uniform(gen, 0.0, 1e5), uniform(gen, 0.0, 10.0), uniform(gen, 0.0, 1.0)};
        const Scenario z(P, I, CapacityPolicy{uniform(gen, 1.0, 100.0), uniform(gen, 0.0, 1.0)});
        std::ostringstream os;
        write_scenario(os, ScenarioFile{z, std::nullopt, {}});
        const auto back = parse(os.str());
        ASSERT_EQ(back.scenario, z);
        ASSERT_FALSE(back.controller.has_value());
    }
}

TEST(Io, BundledScenarioFile)
{
    const auto file = read_scenario_file(ICUFUNNEL_EXAMPLE_SCENARIO);
    EXPECT_EQ(file.scenario, example_city());
    ASSERT_TRUE(file.controller_params().has_value());
    EXPECT_EQ(*file.controller_params(), make_controller(example_city_capacity(), 10.0, 8.0));
    EXPECT_EQ(file.sim.horizon, 1000.0);
    EXPECT_EQ(file.sim.output_dt, 1.0);
    EXPECT_FALSE(file.sim.rtol.has_value());
}

TEST(Io, HeadersAndCommentsAreOptional)
{
    const std::string text = "beta_A=0.37\nbeta_S=0.43\nalpha_A=0.1\nalpha_S=0.085 # per day\np=0.02\nrho=0.15\n"
                             "gamma_0=1\ngamma_1=1\npsi_bar=0.31\ngamma_K=1\nS0=89950\nIA0=49\nIS0=1\nR0=10000\n"
                             "D0=0\npsi0=1\nn_icu=40\nxi=0.1\n\n   # trailing comment\n";
    const auto file = parse(text);
    EXPECT_EQ(file.scenario, example_city());
    EXPECT_FALSE(file.controller.has_value());
    EXPECT_EQ(file.sim, SimSection{});
}

TEST(Io, MissingKeyNamed)
{
    expect_parse_error(without_line(example_text(), "beta_A"), "missing required key 'beta_A'");
    expect_parse_error(without_line(example_text(), "eps_minus"), "eps_minus");
}

TEST(Io, UnknownKeyRejected)
{
    expect_parse_error(example_text() + "beta_C = 0.1\n", "unknown key 'beta_C'");
}

TEST(Io, DuplicateKeyRejected)
{
    const std::string text = example_text();
    expect_parse_error("[scenario]\nrho = 0.15\n" + text, "duplicate key 'rho'");
}

TEST(Io, SectionMembershipEnforced)
{
    expect_parse_error(example_text() + "[sim]\neps_plus = 3\n", "does not belong to section [sim]");
    expect_parse_error(example_text() + "[plots]\n", "unknown section");
    expect_parse_error(example_text() + "[sim\n", "malformed section header");
}

TEST(Io, MalformedLines)
{
    expect_parse_error(example_text() + "[sim]\nhorizon 100\n", "expected 'key = value'");
    expect_parse_error(example_text() + "[sim]\nhorizon = ten\n", "invalid number for 'horizon'");
}

TEST(Io, ErrorsCarryLineNumbers)
{
    expect_parse_error("[scenario]\nbeta_A = 0.37\nbogus = 1\n", "line 3:");
}

TEST(Io, InvalidScenarioReported)
{
    std::string text = without_line(example_text(), "S0");
    text += "[scenario]\nS0 = -5\n";
    expect_parse_error(text, "invalid scenario");
}

TEST(Io, MissingFile)
{
    EXPECT_THROW(read_scenario_file("/nonexistent/none.scn"), ParseError);
}

TEST(Io, TrajectoryCsv)
{
    Trajectory traj;
    traj.horizon = 1.0;
    traj.samples = {{{1.0, 2.0, 3.0, 4.0, 0.0, 1.0, 0.0}, Input::off},
                    {{0.5, 2.5, 3.0, 4.0, 0.1, 0.25, 1.0}, Input::on}};
    traj.events  = {{0.75, Input::on}};
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    EXPECT_EQ(os.str(), "t,S,I_A,I_S,R,D,psi,u\n0,1,2,3,4,0,1,0\n1,0.5,2.5,3,4,0.1,0.25,1\n");
    std::ostringstream ev;
    write_events_csv(ev, traj);
    EXPECT_EQ(ev.str(), "t,u_new\n0.75,1\n");
}

TEST(Io, ConstantsListingIncludesReportedBound)
{
    std::ostringstream os;
    write_constants(os, derive_constants(example_city()));
    const auto text = os.str();
    EXPECT_NE(text.find("a3_bound = "), std::string::npos);
    EXPECT_NE(text.find("a3_bound_reported = 23.9"), std::string::npos);
    EXPECT_NE(text.find("beta_tilde = 0.3712"), std::string::npos);
}

TEST(Io, ValidationListing)
{
    ValidationReport v;
    v.checks = {{"a", "x", true, 0, {}}, {"g", "y", false, 0, {}}, {"b", "z", true, 2, {{3.0, 0.5}}}};
    std::ostringstream os;
    write_validation(os, v);
    const auto text = os.str();
    EXPECT_NE(text.find("validation.a = pass"), std::string::npos);
    EXPECT_NE(text.find("validation.g = skipped"), std::string::npos);
    EXPECT_NE(text.find("validation.b = fail (2 violations, first at t = 3, magnitude 0.5)"), std::string::npos);
}
