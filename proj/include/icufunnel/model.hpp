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
#ifndef ICUFUNNEL_MODEL_HPP
#define ICUFUNNEL_MODEL_HPP

#include <array>
#include <cmath>
#include <limits>
#include <utility>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace icufunnel
{

/// Binary policy input: `off` means no distancing measures, `on` means distancing is enacted.
enum class Input : std::uint8_t {
    off = 0,
    on  = 1,
};

constexpr double to_value(Input u) noexcept
{
    return u == Input::on ? 1.0 : 0.0;
}

constexpr Input flipped(Input u) noexcept
{
    return u == Input::on ? Input::off : Input::on;
}

/// Raised when N - D <= 0, i.e. the living population has vanished.
class DegeneratePopulation : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

/**
 * Epidemic rates and population-response parameters. Rates are per day.
 */
struct EpidemicParams {
    double beta_A  = 0.0; ///< transmission rate of asymptomatic infected
    double beta_S  = 0.0; ///< transmission rate of symptomatic infected
    double alpha_A = 0.0; ///< recovery rate, asymptomatic
    double alpha_S = 0.0; ///< recovery rate, symptomatic
    double p       = 0.0; ///< proportion of infections that develop symptoms
    double rho     = 0.0; ///< death probability of a symptomatic infected
    double gamma_0 = 0.0; ///< response settling rate when measures are lifted
    double gamma_1 = 0.0; ///< response settling rate when measures are enacted
    double psi_bar = 0.0; ///< strictest achievable isolation level
    double gamma_K = 0.0; ///< gain coefficient of K_psi

    /// Throws std::invalid_argument naming the first field outside [0,1].
    void validate() const
    {
        const std::array<std::pair<const char*, double>, 10> fields{{{"beta_A", beta_A},
                                                                      {"beta_S", beta_S},
                                                                      {"alpha_A", alpha_A},
                                                                      {"alpha_S", alpha_S},
                                                                      {"p", p},
                                                                      {"rho", rho},
                                                                      {"gamma_0", gamma_0},
                                                                      {"gamma_1", gamma_1},
                                                                      {"psi_bar", psi_bar},
                                                                      {"gamma_K", gamma_K}}};
        for (const auto& [name, value] : fields) {
            if (!(value >= 0.0 && value <= 1.0)) {
                throw std::invalid_argument(std::string(name) + " must lie in [0,1], got " + std::to_string(value));
            }
        }
    }

    friend bool operator==(const EpidemicParams&, const EpidemicParams&) = default;
};

/// Initial compartments (individuals) and initial population response.
struct InitialState {
    double S0   = 0.0;
    double IA0  = 0.0;
    double IS0  = 0.0;
    double R0   = 0.0;
    double D0   = 0.0;
    double psi0 = 1.0;

    void validate() const
    {
        const std::array<std::pair<const char*, double>, 5> fields{
            {{"S0", S0}, {"IA0", IA0}, {"IS0", IS0}, {"R0", R0}, {"D0", D0}}};
        for (const auto& [name, value] : fields) {
            if (!(value >= 0.0) || value == std::numeric_limits<double>::infinity()) {
                throw std::invalid_argument(std::string(name) + " must be finite and >= 0, got " +
                                            std::to_string(value));
            }
        }
        if (!(psi0 >= 0.0 && psi0 <= 1.0)) {
            throw std::invalid_argument("psi0 must lie in [0,1], got " + std::to_string(psi0));
        }
    }

    friend bool operator==(const InitialState&, const InitialState&) = default;
};

/// ICU capacity and the tolerance for symptomatic cases that do not need intensive care.
struct CapacityPolicy {
    double n_icu = 0.0;
    double xi    = 0.0;

    /// Upper funnel boundary (1 + xi) * n_icu.
    double phi_plus() const noexcept
    {
        return (1.0 + xi) * n_icu;
    }
    /// Lower funnel boundary, fixed at zero.
    double phi_minus() const noexcept
    {
        return 0.0;
    }

    void validate() const
    {
        if (!(n_icu >= 0.0) || !(xi >= 0.0)) {
            throw std::invalid_argument("n_icu and xi must be >= 0");
        }
        if (!(phi_plus() > 0.0) || !std::isfinite(phi_plus())) {
            throw std::invalid_argument("phi_plus = (1+xi)*n_icu must be finite and > 0");
        }
    }

    friend bool operator==(const CapacityPolicy&, const CapacityPolicy&) = default;
};

/**
 * A complete system description: epidemic parameters, initial data and capacity policy.
 *
 * The constructor enforces every field invariant and N > 0; a Scenario object is always valid.
 * N includes D0 and is fixed for the lifetime of the scenario.
 */
class Scenario
{
public:
    Scenario(const EpidemicParams& params, const InitialState& init, const CapacityPolicy& capacity)
        : m_params(params)
        , m_init(init)
        , m_capacity(capacity)
    {
        m_params.validate();
        m_init.validate();
        m_capacity.validate();
        m_population = m_init.S0 + m_init.IA0 + m_init.IS0 + m_init.R0 + m_init.D0;
        if (!(m_population > 0.0) || !std::isfinite(m_population)) {
            throw std::invalid_argument("population N = S0+IA0+IS0+R0+D0 must be finite and > 0");
        }
    }

    const EpidemicParams& params() const noexcept
    {
        return m_params;
    }
    const InitialState& init() const noexcept
    {
        return m_init;
    }
    const CapacityPolicy& capacity() const noexcept
    {
        return m_capacity;
    }
    double population() const noexcept
    {
        return m_population;
    }

    friend bool operator==(const Scenario& a, const Scenario& b)
    {
        return a.m_params == b.m_params && a.m_init == b.m_init && a.m_capacity == b.m_capacity;
    }

private:
    EpidemicParams m_params;
    InitialState m_init;
    CapacityPolicy m_capacity;
    double m_population = 0.0;
};

/// Index of each component inside a StateVector.
enum class Compartment : std::size_t {
    S   = 0,
    I_A = 1,
    I_S = 2,
    R   = 3,
    D   = 4,
    psi = 5,
};

/// (S, I_A, I_S, R, D, psi), the layout integrated by the simulator.
using StateVector = std::array<double, 6>;
/// Time derivative of a StateVector, per day.
using StateDerivative = std::array<double, 6>;

constexpr double& at(StateVector& x, Compartment c) noexcept
{
    return x[static_cast<std::size_t>(c)];
}
constexpr double at(const StateVector& x, Compartment c) noexcept
{
    return x[static_cast<std::size_t>(c)];
}

/// Point on a trajectory. t is in days.
struct State {
    double S   = 0.0;
    double I_A = 0.0;
    double I_S = 0.0;
    double R   = 0.0;
    double D   = 0.0;
    double psi = 1.0;
    double t   = 0.0;

    StateVector vector() const noexcept
    {
        return {S, I_A, I_S, R, D, psi};
    }

    static State from_vector(const StateVector& x, double t) noexcept
    {
        return {x[0], x[1], x[2], x[3], x[4], x[5], t};
    }

    double compartment_sum() const noexcept
    {
        return S + I_A + I_S + R + D;
    }

    friend bool operator==(const State&, const State&) = default;
};

/// K_psi = 1 - gamma_K * rho*alpha_A/(1-rho) * I_A/(N-D).
inline double response_gain(double I_A, double D, const EpidemicParams& params, double N)
{
    return 1.0 - params.gamma_K * (params.rho * params.alpha_A / (1.0 - params.rho)) * I_A / (N - D);
}

/**
 * Right-hand side of the controlled SIRASD dynamics.
 *
 * The infection pressure (beta_A*I_A + beta_S*I_S) * psi * S/(N-D) is computed once and split
 * between the compartments, so the first five components sum to zero up to rounding.
 */
inline StateDerivative vector_field(const StateVector& x, Input u, const EpidemicParams& params, double N)
{
    const double S = x[0], I_A = x[1], I_S = x[2], D = x[4], psi = x[5];
    const double alive = N - D;
    if (!(alive > 0.0)) {
        throw DegeneratePopulation("N - D must be positive, got " + std::to_string(alive));
    }
    const double exit_S    = params.alpha_S / (1.0 - params.rho);
    const double infection = (params.beta_A * psi * I_A + params.beta_S * psi * I_S) * (S / alive);
    const double recover_S = params.alpha_S * I_S;
    const double death_S   = params.rho * params.alpha_S / (1.0 - params.rho) * I_S;
    const double recover_A = params.alpha_A * I_A;
    const double uu        = to_value(u);
    const double gain      = response_gain(I_A, D, params, N);

    StateDerivative dx;
    dx[0] = -infection;
    dx[1] = (1.0 - params.p) * infection - recover_A;
    dx[2] = params.p * infection - exit_S * I_S;
    dx[3] = recover_A + recover_S;
    dx[4] = death_S;
    dx[5] = params.gamma_0 * (1.0 - psi) * (1.0 - uu) + params.gamma_1 * (gain * params.psi_bar - psi) * uu;
    return dx;
}

inline StateDerivative vector_field(const State& state, Input u, const EpidemicParams& params, double N)
{
    return vector_field(state.vector(), u, params, N);
}

/// State at t = 0 copied from the scenario's initial data.
inline State ics_from_scenario(const Scenario& scenario)
{
    const auto& i = scenario.init();
    return {i.S0, i.IA0, i.IS0, i.R0, i.D0, i.psi0, 0.0};
}

} // namespace icufunnel

#endif // ICUFUNNEL_MODEL_HPP
