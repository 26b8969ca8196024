#pragma once

#include <vector>

#include "jumpsyn/model.hpp"

namespace jumpsyn {

// Joint (true mode, observed mode) process embedded as a single Markov chain
// on N^2 states. State k decodes to (true_mode[k], observed_mode[k]); the
// per-state plant matrices are those of the true mode, while the controller
// gain index is the observed mode.
struct AugmentedModel {
    MjlsModel base;                 // copy of the validated plant
    Matrix kappa;                   // N^2 x N^2 generator of the joint chain
    std::vector<int> true_mode;     // 0-based, length N^2
    std::vector<int> observed_mode; // 0-based, length N^2

    int size() const { return static_cast<int>(true_mode.size()); }
    int base_modes() const { return base.num_modes; }

    const Matrix& A(int k) const { return base.A[static_cast<std::size_t>(true_mode[static_cast<std::size_t>(k)])]; }
    const Matrix& B(int k) const { return base.B[static_cast<std::size_t>(true_mode[static_cast<std::size_t>(k)])]; }
    const Matrix& C(int k) const { return base.C[static_cast<std::size_t>(true_mode[static_cast<std::size_t>(k)])]; }
    const Matrix& J(int k) const { return base.J[static_cast<std::size_t>(true_mode[static_cast<std::size_t>(k)])]; }
    const Matrix& E(int k) const { return base.E[static_cast<std::size_t>(true_mode[static_cast<std::size_t>(k)])]; }
    const Matrix& Psi(int k) const { return base.Psi[static_cast<std::size_t>(true_mode[static_cast<std::size_t>(k)])]; }
    const Matrix& Phi(int k) const { return base.Phi[static_cast<std::size_t>(true_mode[static_cast<std::size_t>(k)])]; }
    int gain_index(int k) const { return observed_mode[static_cast<std::size_t>(k)]; }
};

// Lexicographic pair index, 1-based on both sides: (i, j) -> (i-1)*N + j.
// True mode is the major coordinate so the joint generator reproduces the
// reference ordering exactly.
int mode_pair_index(int i, int j, int num_modes);

// 0-based inverse of the pair map.
inline int pair_true_mode(int k, int num_modes) { return k / num_modes; }
inline int pair_observed_mode(int k, int num_modes) { return k % num_modes; }

// Generator of the joint chain. Row (i1,j1) carries the mode jumps
// (i1 -> i2, observation frozen) and, when j1 != i1, the observation
// catch-up (j1 -> i1) at rate g(j1, i1). Observation events from already
// correct states are no-ops and contribute nothing.
Matrix build_augmented_generator(const Matrix& pi, const Matrix& observation_rates);

AugmentedModel build_augmented_model(const MjlsModel& model, const ObservationModel& obs);

} // namespace jumpsyn
