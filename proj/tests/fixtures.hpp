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
#ifndef ICUFUNNEL_TESTS_FIXTURES_HPP
#define ICUFUNNEL_TESTS_FIXTURES_HPP

#include "icufunnel.hpp"

#include <cstdint>
#include <random>

namespace icufunnel::test
{

inline EpidemicParams example_city_params()
{
    EpidemicParams P;
    P.beta_A  = 0.37;
    P.beta_S  = 0.43;
    P.alpha_A = 0.1;
    P.alpha_S = 0.085;
    P.p       = 0.02;
    P.rho     = 0.15;
    P.gamma_0 = 1.0;
    P.gamma_1 = 1.0;
    P.psi_bar = 0.31;
    P.gamma_K = 1.0;
    return P;
}

inline InitialState example_city_init()
{
    return {0.9e5 - 50.0, 49.0, 1.0, 0.1e5, 0.0, 1.0};
}

inline CapacityPolicy example_city_capacity()
{
    return {40.0, 0.1};
}

inline Scenario example_city()
{
    return Scenario(example_city_params(), example_city_init(), example_city_capacity());
}

/**
 * A scenario strictly inside the robust admissible set: every inequality holds with margin, and
 * alpha_A < alpha_S/(1-rho) with a moderate S_min.
 */
inline Scenario interior_scenario()
{
    const EpidemicParams P{0.33, 0.34, 0.12, 0.115, 0.03, 0.18, 0.8, 0.75, 0.9, 0.9};
    return Scenario(P, InitialState{50918.0, 80.0, 2.0, 49000.0, 0.0, 1.0}, CapacityPolicy{110.0, 0.1});
}

/// Reference values computed with 40-digit arithmetic by an independent script.
namespace oracle
{
inline constexpr double K_psi_bar   = 0.98235294117647058824;
inline constexpr double S_min       = 1.5164527184462744916e-15;
inline constexpr double beta_tilde  = 0.3712;
inline constexpr double A_const     = 0.354;
inline constexpr double B_const     = 0.0086;
inline constexpr double zeta        = 49.0;
inline constexpr double M1          = 0.0017371858823529411765;
inline constexpr double M2          = 0.00024197065882352941176;
inline constexpr double M3          = 0.46530024847628550747;
inline constexpr double M2_over_M1  = 0.13928887016730235784;
inline constexpr double mu          = 0.477;
inline constexpr double q_34        = 82.759928512102913703;
inline constexpr double q_24        = 62.960730216149075157;
inline constexpr double a6_first    = 12890.517197480258538;
inline constexpr double a6_second_l = 173.71858823529411765;
inline constexpr double a6_second_r = 18.56;
inline constexpr double down_8      = 14.469189829363254614;
inline constexpr double down_20     = 5.3062825106217039623;
inline constexpr double up_8_ia49   = -1.5874759690659700266;
inline constexpr double S_dot_0     = -16.69472;
/// Root of q(eps) = phi_plus on (M2/M1, phi_plus).
inline constexpr double eps_star = 15.587869168486309515;
} // namespace oracle

/// Uniform double in [lo, hi).
inline double uniform(std::mt19937_64& gen, double lo, double hi)
{
    return lo + (hi - lo) * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
}

} // namespace icufunnel::test

#endif // ICUFUNNEL_TESTS_FIXTURES_HPP
