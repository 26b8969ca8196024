#pragma once

#include <cstdint>
#include <vector>

#include "jumpsyn/simulation.hpp"

namespace jumpsyn {

// Generator admits no unique stationary distribution.
struct ReducibleChain : Error {
    using Error::Error;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    int runs = 0;
    double horizon = 0.0;
    // share of the mean contributed by the last 10% of the window
    double tail_fraction = 0.0;
};

// Monte Carlo mean of the output energy integral with the disturbance forced
// to zero (the H2 bound is stated for w == 0).
McEstimate estimate_h2(const Scenario& scenario, const GainSet& gains, int runs,
                       std::uint64_t seed);

// Monte Carlo mean of the dissipation functional with the given disturbance
// (the scenario's when none is supplied); no supremum over disturbances.
McEstimate estimate_hinf_functional(const Scenario& scenario, const GainSet& gains, int runs,
                                    std::uint64_t seed,
                                    const DisturbanceSpec* disturbance = nullptr);

enum class StabilityVerdict { Saturating, Diverging, Inconclusive };

const char* to_string(StabilityVerdict verdict);

struct StabilityReport {
    std::vector<double> horizons;
    std::vector<McEstimate> energies; // E[int_0^T |x|^2 dt] at each horizon
    McEstimate final_state_sq;        // E[|x(T_max)|^2]
    StabilityVerdict verdict = StabilityVerdict::Inconclusive;
};

// Estimates the state energy at increasing horizons with w == 0 and
// classifies growth: saturating when the last increment is within 5% of the
// value, diverging when increments keep growing.
StabilityReport stability_diagnostic(const Scenario& scenario, const GainSet& gains, int runs,
                                     std::vector<double> horizons, std::uint64_t seed);

// Solves p' G = 0, sum(p) = 1 by a dense kernel computation; throws
// ReducibleChain when the kernel is not one-dimensional.
Vector stationary_distribution(const Matrix& generator);

// Trapezoid integral of a sampled scalar series over the trajectory grid up
// to `horizon` (the full grid when horizon < 0). Exposed for tests.
double trapezoid_integral(const std::vector<double>& time, const std::vector<double>& values,
                          double horizon = -1.0);

} // namespace jumpsyn
