#include "jumpsyn/augmentation.hpp"

#include <string>

namespace jumpsyn {

int mode_pair_index(int i, int j, int num_modes) {
    if (i < 1 || i > num_modes || j < 1 || j > num_modes) {
        throw IndexOutOfRange("mode pair (" + std::to_string(i) + "," + std::to_string(j) +
                              ") outside {1.." + std::to_string(num_modes) + "}^2");
    }
    return (i - 1) * num_modes + j;
}

Matrix build_augmented_generator(const Matrix& pi, const Matrix& observation_rates) {
    validate_generator(pi, "generator");
    const int N = static_cast<int>(pi.rows());
    if (observation_rates.rows() != N || observation_rates.cols() != N) {
        throw DimensionMismatch("observation_rates must match the generator size");
    }
    const int n2 = N * N;
    Matrix kappa = Matrix::Zero(n2, n2);
    for (int i1 = 0; i1 < N; ++i1) {
        for (int j1 = 0; j1 < N; ++j1) {
            const int row = i1 * N + j1;
            double outflow = 0.0;
            // mode jumps leave the observation frozen
            for (int i2 = 0; i2 < N; ++i2) {
                if (i2 == i1) continue;
                const int col = i2 * N + j1;
                kappa(row, col) = pi(i1, i2);
                outflow += pi(i1, i2);
            }
            // observation catches up to the true mode
            if (j1 != i1) {
                const int col = i1 * N + i1;
                kappa(row, col) += observation_rates(j1, i1);
                outflow += observation_rates(j1, i1);
            }
            kappa(row, row) = -outflow;
        }
    }
    return kappa;
}

AugmentedModel build_augmented_model(const MjlsModel& model, const ObservationModel& obs) {
    validate_model(model);
    validate_observation(obs, model.num_modes);
    AugmentedModel aug;
    aug.base = model;
    aug.kappa = build_augmented_generator(model.generator, obs.rates);
    const int N = model.num_modes;
    aug.true_mode.resize(static_cast<std::size_t>(N * N));
    aug.observed_mode.resize(static_cast<std::size_t>(N * N));
    for (int k = 0; k < N * N; ++k) {
        aug.true_mode[static_cast<std::size_t>(k)] = pair_true_mode(k, N);
        aug.observed_mode[static_cast<std::size_t>(k)] = pair_observed_mode(k, N);
    }
    return aug;
}

} // namespace jumpsyn
