#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "jumpsyn/model.hpp"
#include "jumpsyn/synthesis.hpp"

namespace jumpsyn {

// Deterministic stream with explicit bit-to-double conversion so results are
// reproducible across standard libraries. Each Monte Carlo run derives its
// own stream from the master seed and run index.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : gen_(seed) {}
    static RngStream for_run(std::uint64_t master_seed, std::uint64_t run_index);

    // uniform in (0, 1), 53-bit resolution
    double uniform();
    double exponential(double rate);
    // index drawn proportionally to nonnegative weights
    int categorical(const std::vector<double>& weights);

  private:
    std::mt19937_64 gen_;
};

struct JumpEvent {
    double time = 0.0;
    int state = 0;
};

struct JumpPath {
    int state_count = 0;
    int initial_state = 0;
    double horizon = 0.0;
    std::vector<JumpEvent> events; // strictly increasing times; consecutive states differ

    // right-continuous: at an event time the new state already holds
    int state_at(double t) const;
};

// Exact-event sampling: holding time Exponential(|g_ii|), next state with
// probability g_ij / |g_ii|; all-zero rows are absorbing.
JumpPath sample_ctmc_path(const Matrix& generator, int initial_state, double horizon,
                          RngStream& rng);

// Mechanistic observation process: whenever the observed mode disagrees with
// the true one, a catch-up delay Exponential(g(observed, true)) is pending;
// any true-mode switch cancels it and a fresh delay is drawn.
JumpPath sample_observation_path(const JumpPath& r_path, const Matrix& observation_rates,
                                 int robs0, RngStream& rng);

// Exact-event sampling of the joint (true, observed) chain.
JumpPath sample_joint_path_augmented(const Matrix& kappa, int s0, double horizon, RngStream& rng);

JumpPath project_true_mode(const JumpPath& joint, int num_modes);
JumpPath project_observed_mode(const JumpPath& joint, int num_modes);

// Fraction of [0, horizon] spent in each state.
std::vector<double> occupation_fractions(const JumpPath& path);

struct DelaySignal {
    DelaySignalSpec spec;
    double tau0 = 0.0;
    double tau_plus = 0.0;
    bool admissible = true; // sine violates the nonnegative-slope bound

    double operator()(double t) const;
    double max_value() const;
};

// Validates the requested signal against the delay bounds.
DelaySignal make_delay_signal(const DelaySpec& delay, const DelaySignalSpec& spec);

struct DisturbanceSignal {
    DisturbanceSpec spec;
    int dimension = 0;

    Vector operator()(double t) const;
    bool is_zero() const { return spec.kind == DisturbanceSpec::Kind::Zero; }
};

DisturbanceSignal make_disturbance_signal(const DisturbanceSpec& spec, int q);

struct Trajectory {
    std::vector<double> time;
    Matrix x, u, z, y, w;      // one column per sample
    std::vector<int> r, robs;  // 0-based modes, right-continuous
    std::vector<double> tau;

    int samples() const { return static_cast<int>(time.size()); }
};

// Classical 4-stage Runge-Kutta with the method of steps: the delayed state
// is read from stored history by linear interpolation and the grid is
// subdivided at every jump time so coefficients are constant within a step.
Trajectory integrate_closed_loop(const MjlsModel& model, const HistoryFunction& phi, double tau0,
                                 const GainSet& gains, const JumpPath& r_path,
                                 const JumpPath& robs_path, const DelaySignal& tau,
                                 const DisturbanceSignal& w, double horizon, double dt);

// Samples the two mode paths and integrates one closed-loop run of the
// scenario. The optional overrides serve the performance estimators.
Trajectory simulate_run(const Scenario& scenario, const GainSet& gains, std::uint64_t run_index,
                        const DisturbanceSpec* disturbance_override = nullptr,
                        double horizon_override = -1.0);

} // namespace jumpsyn
