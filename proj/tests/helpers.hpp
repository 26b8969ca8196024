#pragma once

#include <string>

#include "jumpsyn/augmentation.hpp"
#include "jumpsyn/scenario_io.hpp"
#include "jumpsyn/synthesis.hpp"

namespace jumpsyn::testing {

inline std::string data_path(const std::string& name) {
    return std::string(JUMPSYN_DATA_DIR) + "/" + name;
}

inline Scenario sec5_scenario() {
    return load_scenario(data_path("example_sec5.json"));
}

// Gains reported for the two-mode example, used as a fixed reference.
inline GainSet sec5_reference_gains() {
    Matrix k1(1, 2), k2(1, 2);
    k1 << -0.7423, -0.4074;
    k2 << -0.4397, -0.2309;
    return {k1, k2};
}

inline Matrix scalar(double v) {
    Matrix m(1, 1);
    m << v;
    return m;
}

// Single-mode scalar plant used across the synthesis and simulation tests.
inline MjlsModel scalar_plant(double a, double b, double c, double j, double e, double psi,
                              double phi) {
    MjlsModel model;
    model.num_modes = 1;
    model.n = model.m = model.l = model.q = 1;
    model.A = {scalar(a)};
    model.B = {scalar(b)};
    model.C = {scalar(c)};
    model.J = {scalar(j)};
    model.E = {scalar(e)};
    model.Psi = {scalar(psi)};
    model.Phi = {scalar(phi)};
    model.generator = scalar(0.0);
    return model;
}

inline AugmentedModel scalar_augmented(const MjlsModel& model) {
    ObservationModel obs;
    obs.rates = scalar(0.0); // diagonal unused for N = 1
    return build_augmented_model(model, obs);
}

// Deterministic scalar scenario around the plant above.
inline Scenario scalar_scenario(const MjlsModel& model, double x0, double horizon, double dt) {
    Scenario s;
    s.model = model;
    s.obs.rates = scalar(0.0);
    s.delay.tau0 = 1.0;
    s.delay.tau_plus = 0.5;
    s.perf.gamma = 1.0;
    s.perf.f2 = 100.0;
    s.perf.f_inf = 100.0;
    s.perf.X = 1.0;
    s.perf.L = {scalar(1.0)};
    Vector phi0(1);
    phi0 << x0;
    s.perf.phi = HistoryFunction::constant_history(phi0);
    s.sim.r0 = 0;
    s.sim.robs0 = 0;
    s.sim.horizon = horizon;
    s.sim.dt = dt;
    s.sim.seed = 42;
    s.sim.runs = 1;
    s.sim.disturbance.kind = DisturbanceSpec::Kind::Zero;
    s.sim.delay_signal.kind = DelaySignalSpec::Kind::Constant;
    s.sim.delay_signal.constant_value = 0.0;
    return s;
}

// Two stable modes with benign disturbance feedthrough; fully synthesizable.
inline Scenario stable_two_mode_scenario() {
    Scenario s;
    s.model.num_modes = 2;
    s.model.n = 2;
    s.model.m = 1;
    s.model.l = 2;
    s.model.q = 1;
    Matrix a1(2, 2), a2(2, 2);
    a1 << -1, 0, 0, -2;
    a2 << -2, 0.1, 0, -1;
    Matrix b1(2, 1), b2(2, 1);
    b1 << 1, 0;
    b2 << 0, 1;
    Matrix e(2, 1);
    e << 0.01, 0.02;
    s.model.A = {a1, a2};
    s.model.B = {b1, b2};
    s.model.C = {0.5 * Matrix::Identity(2, 2), 0.5 * Matrix::Identity(2, 2)};
    s.model.J = {0.1 * Matrix::Identity(2, 2), 0.1 * Matrix::Identity(2, 2)};
    s.model.E = {e, e};
    s.model.Psi = {Matrix::Zero(2, 1), Matrix::Zero(2, 1)};
    s.model.Phi = {0.1 * Matrix::Ones(2, 1), 0.1 * Matrix::Ones(2, 1)};
    Matrix pi(2, 2);
    pi << -1, 1, 2, -2;
    s.model.generator = pi;
    s.obs.rates = Matrix::Constant(2, 2, 4.0);
    s.delay.tau0 = 0.5;
    s.delay.tau_plus = 0.5;
    s.perf.gamma = 1.0;
    s.perf.f2 = 100.0;
    s.perf.f_inf = 100.0;
    s.perf.X = 1.0;
    s.perf.L.assign(4, Matrix::Identity(2, 2));
    Vector phi0(2);
    phi0 << 1, 0;
    s.perf.phi = HistoryFunction::constant_history(phi0);
    s.sim.r0 = 0;
    s.sim.robs0 = 0;
    s.sim.horizon = 20.0;
    s.sim.dt = 1e-3;
    s.sim.seed = 9;
    s.sim.runs = 50;
    s.sim.disturbance.kind = DisturbanceSpec::Kind::Zero;
    s.sim.delay_signal.kind = DelaySignalSpec::Kind::Ramp;
    return s;
}

} // namespace jumpsyn::testing
