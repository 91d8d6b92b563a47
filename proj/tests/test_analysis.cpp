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
#include <random>

using namespace icufunnel;
using namespace icufunnel::test;

TEST(Analysis, ParameterPointRoundTrip)
{
    const auto z  = example_city();
    const auto pt = to_parameter_point(z);
    EXPECT_EQ(pt[0], 0.1);
    EXPECT_EQ(pt[1], 0.085);
    EXPECT_EQ(pt[11], 40.0);
    EXPECT_EQ(pt[17], 1.0);
    EXPECT_EQ(from_parameter_point(pt), z);
    EXPECT_STREQ(parameter_names[13], "IA0");
}

TEST(Analysis, PerturbationStaysInRange)
{
    const auto base = to_parameter_point(example_city());
    const auto dirs = unit_perturbations(500, 1);
    for (const auto& w : dirs) {
        for (double v : w) {
            ASSERT_GE(v, -1.0);
            ASSERT_LT(v, 1.0);
        }
        const auto p = perturb(base, w, 0.5);
        for (std::size_t i = 0; i < parameter_dim; ++i) {
            const auto [lo, hi] = parameter_range(i);
            ASSERT_GE(p[i], lo);
            ASSERT_LE(p[i], hi);
            ASSERT_LE(std::abs(p[i] - base[i]), 0.5 * std::max(std::abs(base[i]), 1.0) + 1e-12);
        }
    }
    const auto same = perturb(base, dirs.front(), 0.0);
    EXPECT_EQ(same, base);
}

TEST(Analysis, DirectionsReproducibleBySeed)
{
    EXPECT_EQ(unit_perturbations(64, 17), unit_perturbations(64, 17));
    EXPECT_NE(unit_perturbations(64, 17), unit_perturbations(64, 18));
    // Prefix stability: more samples extend, never reshuffle, the sequence.
    const auto short_run = unit_perturbations(8, 3);
    const auto long_run  = unit_perturbations(16, 3);
    for (std::size_t i = 0; i < short_run.size(); ++i) {
        EXPECT_EQ(short_run[i], long_run[i]);
    }
}

TEST(Analysis, ZeroRadiusAlwaysPasses)
{
    const auto z  = example_city();
    const auto cp = find_feasible_eps(z, derive_constants(z));
    RobustnessOptions opt;
    opt.samples  = 32;
    const auto r = robustness_probe(z, cp, 0.0, opt);
    EXPECT_EQ(r.pass_fraction, 1.0);
    EXPECT_EQ(r.certified_delta, 0.0);
    EXPECT_TRUE(r.failure_counts.empty());
}

TEST(Analysis, BoundaryScenarioHasNoCertifiedRadius)
{
    // example_city meets A2 and the rate ordering of A1 with equality, and the A3 bound jumps as
    // soon as alpha_A drops below alpha_S/(1-rho). No radius survives sampling.
    const auto z  = example_city();
    const auto cp = find_feasible_eps(z, derive_constants(z));
    const auto r  = robustness_probe(z, cp, 1e-3);
    EXPECT_LT(r.pass_fraction, 1.0);
    EXPECT_EQ(r.certified_delta, 0.0);
    for (const char* id : {"A2.IA0_ratio", "A1.alpha_order", "A3.phi_plus_bound"}) {
        EXPECT_GT(r.failure_counts.count(id), 0u) << id;
    }
}

TEST(Analysis, InteriorScenarioHasPositiveRadius)
{
    const auto z  = interior_scenario();
    const auto dc = derive_constants(z);
    const auto cp = find_feasible_eps(z, dc);
    const auto r  = robustness_probe(z, cp, 1e-2);
    EXPECT_EQ(r.pass_fraction, 1.0);
    EXPECT_EQ(r.certified_delta, 1e-2);
    EXPECT_TRUE(r.failure_counts.empty());

    const auto wide = robustness_probe(z, cp, 0.5);
    EXPECT_LT(wide.pass_fraction, 1.0);
    EXPECT_GT(wide.certified_delta, 0.0);
    EXPECT_LT(wide.certified_delta, 0.5);
    // The bisected radius is a radius at which every sample passes.
    RobustnessOptions opt;
    const auto again = robustness_probe(z, cp, wide.certified_delta, opt);
    EXPECT_EQ(again.pass_fraction, 1.0);
}

TEST(Analysis, ProbeInvariants)
{
    const auto z  = interior_scenario();
    const auto cp = find_feasible_eps(z, derive_constants(z));
    for (double delta : {1e-4, 1e-2, 0.1, 0.3}) {
        RobustnessOptions opt;
        opt.samples  = 64;
        opt.seed     = 5;
        const auto r = robustness_probe(z, cp, delta, opt);
        EXPECT_GE(r.pass_fraction, 0.0);
        EXPECT_LE(r.pass_fraction, 1.0);
        EXPECT_LE(r.certified_delta, delta);
        EXPECT_LE(r.pass_fraction, r.sigma_rob_fraction);
        EXPECT_LE(r.pass_fraction, r.cz_fraction);
        const auto twin = robustness_probe(z, cp, delta, opt);
        EXPECT_EQ(twin.pass_fraction, r.pass_fraction);
        EXPECT_EQ(twin.certified_delta, r.certified_delta);
        EXPECT_EQ(twin.failure_counts, r.failure_counts);
    }
}

TEST(Analysis, ProbePreconditions)
{
    const auto z  = example_city();
    const auto dc = derive_constants(z);
    EXPECT_THROW(robustness_probe(z, make_controller(z.capacity(), 10.0, 8.0), 1e-3), std::invalid_argument);
    const auto cp = find_feasible_eps(z, dc);
    EXPECT_THROW(robustness_probe(z, cp, -1.0), std::invalid_argument);
    RobustnessOptions opt;
    opt.samples = 0;
    EXPECT_THROW(robustness_probe(z, cp, 1e-3, opt), std::invalid_argument);
}

TEST(Analysis, QIsIncreasingOnExampleCity)
{
    const auto z  = example_city();
    const auto dc = derive_constants(z);
    const auto r  = q_monotonicity_check(z, dc, 10000);
    EXPECT_TRUE(r.strictly_increasing);
    EXPECT_FALSE(r.offending.has_value());
    EXPECT_TRUE(r.q1_at_lower_positive());
    EXPECT_TRUE(r.q1_increasing());
    EXPECT_TRUE(r.passed());
    EXPECT_TRUE(r.in_sigma_rob);
    EXPECT_NEAR(r.q_lower / oracle::M3, 1.0, 1e-12);
    EXPECT_EQ(r.q_upper, q_eval(44.0, dc, z));
}

TEST(Analysis, TwoPointGrid)
{
    const auto z  = example_city();
    const auto dc = derive_constants(z);
    const auto r  = q_monotonicity_check(z, dc, 2);
    EXPECT_EQ(r.strictly_increasing, q_eval(dc.M2 / dc.M1, dc, z) < q_eval(dc.phi_plus, dc, z));
    EXPECT_THROW(q_monotonicity_check(z, dc, 1), std::invalid_argument);
}

TEST(Analysis, FirstNonIncrease)
{
    const std::vector<double> up{1.0, 2.0, 3.0};
    EXPECT_FALSE(first_non_increase(up).has_value());
    const std::vector<double> flat{1.0, 2.0, 2.0, 3.0};
    EXPECT_EQ(first_non_increase(flat), 1u);
    const std::vector<double> down{1.0, 0.5};
    EXPECT_EQ(first_non_increase(down), 0u);
    EXPECT_FALSE(first_non_increase(std::vector<double>{}).has_value());
}

TEST(Analysis, QDerivativeMatchesFiniteDifference)
{
    const auto z  = example_city();
    const auto dc = derive_constants(z);
    for (double eps : {0.5, 5.0, 15.0, 30.0, 43.0}) {
        const double h    = 1e-5 * eps;
        const double fd   = (q_eval(eps + h, dc, z) - q_eval(eps - h, dc, z)) / (2.0 * h);
        const double q2   = dc.exit_rate_S + dc.M1 * eps - dc.M2;
        const double anal = q_derivative_numerator(eps, dc, z) / (q2 * q2);
        EXPECT_NEAR(anal / fd, 1.0, 1e-6) << eps;
    }
}

TEST(Analysis, MonotonePredicateProperty)
{
    // Randomized strictly increasing sequences pass; inserting one non-increase is located exactly.
    std::mt19937_64 gen(13);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(2 + gen() % 50);
        double x = uniform(gen, -10.0, 10.0);
        for (auto& e : v) {
            x += uniform(gen, 1e-6, 1.0);
            e = x;
        }
        ASSERT_FALSE(first_non_increase(v).has_value());
        const std::size_t k = gen() % (v.size() - 1);
        v[k + 1]            = v[k] - uniform(gen, 0.0, 1.0);
        const auto bad      = first_non_increase(v);
        ASSERT_TRUE(bad.has_value());
        ASSERT_EQ(*bad, k);
    }
}

TEST(Analysis, SweepReproducesComparison)
{
    const auto z = example_city();
    const std::vector<double> list{8.0, 20.0};
    const auto sweep = sweep_eps_minus(z, 10.0, list, SimConfig{});
    ASSERT_EQ(sweep.rows.size(), 2u);
    EXPECT_EQ(sweep.eps_plus, 10.0);
    EXPECT_EQ(sweep.rows[0].eps_minus, 8.0);
    EXPECT_EQ(sweep.rows[1].eps_minus, 20.0);
    const auto& r8  = *sweep.rows[0].report;
    const auto& r20 = *sweep.rows[1].report;
    EXPECT_GT(r20.switch_count, r8.switch_count);
    EXPECT_LT(r20.pandemic_end, r8.pandemic_end);
    EXPECT_LT(r8.D_max, r20.D_max);
    EXPECT_GT(r8.input_cost, r20.input_cost);
}

TEST(Analysis, SweepRowEqualsDirectRun)
{
    const auto z = example_city();
    const std::vector<double> list{12.0};
    const auto sweep  = sweep_eps_minus(z, 10.0, list, SimConfig{});
    const auto direct = simulate(z, make_controller(z.capacity(), 10.0, 12.0), SimConfig{}).report;
    ASSERT_EQ(sweep.rows.size(), 1u);
    ASSERT_TRUE(sweep.rows[0].report.has_value());
    const auto& r = *sweep.rows[0].report;
    EXPECT_EQ(r.D_max, direct.D_max);
    EXPECT_EQ(r.switch_count, direct.switch_count);
    EXPECT_EQ(r.pandemic_end, direct.pandemic_end);
    EXPECT_EQ(r.input_cost, direct.input_cost);
    EXPECT_EQ(r.max_IS, direct.max_IS);
}

TEST(Analysis, SweepKeepsOrderAndReportsErrors)
{
    const auto z = example_city();
    SimConfig cfg;
    cfg.horizon = 200.0;
    const std::vector<double> list{30.0, 40.0, 5.0, 15.0};
    const auto sweep = sweep_eps_minus(z, 10.0, list, cfg);
    ASSERT_EQ(sweep.rows.size(), list.size());
    for (std::size_t i = 0; i < list.size(); ++i) {
        EXPECT_EQ(sweep.rows[i].eps_minus, list[i]);
    }
    // eps_minus = 40 exceeds phi_plus - eps_plus = 34.
    EXPECT_FALSE(sweep.rows[1].report.has_value());
    EXPECT_FALSE(sweep.rows[1].error.empty());
    EXPECT_TRUE(sweep.rows[0].report.has_value());
    EXPECT_TRUE(sweep.rows[2].report.has_value());
}
