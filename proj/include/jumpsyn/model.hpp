#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jumpsyn/errors.hpp"

namespace jumpsyn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Open-loop jump linear system: per-mode matrices plus the generator of the
// mode process. Mode indices are 0-based internally; file formats and
// diagnostics use 1-based labels.
struct MjlsModel {
    int num_modes = 0; // N
    int n = 0;         // state dimension
    int m = 0;         // input dimension
    int l = 0;         // output dimension (z and y share it)
    int q = 0;         // disturbance dimension

    std::vector<Matrix> A, B, C, J, E, Psi, Phi; // one entry per mode
    Matrix generator;                            // N x N, rows sum to zero
};

// Rates of the exponential mode-observation delay. Entry (i, j) is the rate
// at which an observation showing mode i catches up to true mode j.
// Diagonal entries are unused.
struct ObservationModel {
    Matrix rates; // N x N, off-diagonal entries > 0
};

struct DelaySpec {
    double tau0 = 0.0;     // maximum delay
    double tau_plus = 0.0; // maximum delay rate, in (0, 1]
};

// Initial state history on [-tau0, 0]. Either a constant vector or a sampled
// grid with linear interpolation between nodes (clamped outside).
struct HistoryFunction {
    enum class Kind { Constant, Sampled };
    Kind kind = Kind::Constant;
    Vector constant;            // used when kind == Constant
    std::vector<double> times;  // strictly increasing, within [-tau0, 0]
    std::vector<Vector> values; // same length as times

    Vector operator()(double t) const;
    Vector at_zero() const;
    int dimension() const;

    static HistoryFunction constant_history(Vector value);
};

struct PerformanceSpec {
    double gamma = 0.0;
    double f2 = 0.0;
    double f_inf = 0.0;
    std::vector<Matrix> L; // N^2 weights, each n x n symmetric positive definite
    double X = 0.0;        // initial-history energy surrogate
    HistoryFunction phi;   // initial function on [-tau0, 0]
};

struct DisturbanceSpec {
    enum class Kind { Zero, ExampleWaveform, Sampled };
    Kind kind = Kind::Zero;
    std::vector<double> times;
    std::vector<Vector> values;
};

struct DelaySignalSpec {
    enum class Kind { Constant, Ramp, Sine };
    Kind kind = Kind::Ramp;
    double constant_value = 0.0; // Constant
    double initial = 0.0;        // Ramp start value
    double offset = 0.0;         // Sine midline
    double amplitude = 0.0;      // Sine amplitude
    double period = 1.0;         // Sine period
};

struct SimSpec {
    int r0 = 0;    // initial true mode, 0-based
    int robs0 = 0; // initial observed mode, 0-based
    double horizon = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    int runs = 1;
    DisturbanceSpec disturbance;
    DelaySignalSpec delay_signal;
};

struct Scenario {
    MjlsModel model;
    ObservationModel obs;
    DelaySpec delay;
    PerformanceSpec perf;
    SimSpec sim;
};

// Checks every MjlsModel invariant; throws DimensionMismatch or
// GeneratorInvalid naming the offending matrix. Returns the model unchanged.
const MjlsModel& validate_model(const MjlsModel& model);

// Row sums of a candidate generator must vanish to this relative tolerance.
inline constexpr double kGeneratorRowSumTol = 1e-12;

// Checks a generator matrix in isolation (square, signs, row sums).
void validate_generator(const Matrix& pi, const std::string& name);

void validate_observation(const ObservationModel& obs, int num_modes);
void validate_delay(const DelaySpec& delay);
void validate_performance(const PerformanceSpec& perf, int num_modes, int n);
void validate_scenario(const Scenario& scenario);

// sqrt of the history energy integral over [-tau0, 0] by trapezoid
// quadrature; used for the optional X consistency check.
double initial_history_energy(const HistoryFunction& phi, double tau0);

} // namespace jumpsyn
