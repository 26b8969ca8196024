#include <doctest.h>

#include "helpers.hpp"
#include "jumpsyn/performance.hpp"

using namespace jumpsyn;
using jumpsyn::testing::sec5_scenario;

TEST_SUITE_BEGIN("augmentation");

TEST_CASE("pair index is lexicographic with the true mode major") {
    CHECK(mode_pair_index(1, 1, 2) == 1);
    CHECK(mode_pair_index(2, 2, 2) == 4);
    CHECK(mode_pair_index(2, 1, 3) == 4);
    CHECK_THROWS_AS(mode_pair_index(0, 1, 2), IndexOutOfRange);
    CHECK_THROWS_AS(mode_pair_index(1, 3, 2), IndexOutOfRange);
}

TEST_CASE("pair index is a bijection with the stated inverse") {
    for (int N : {1, 2, 3, 5}) {
        std::vector<bool> seen(static_cast<std::size_t>(N * N), false);
        for (int i = 1; i <= N; ++i) {
            for (int j = 1; j <= N; ++j) {
                const int k = mode_pair_index(i, j, N);
                REQUIRE(k >= 1);
                REQUIRE(k <= N * N);
                CHECK(!seen[static_cast<std::size_t>(k - 1)]);
                seen[static_cast<std::size_t>(k - 1)] = true;
                CHECK(pair_true_mode(k - 1, N) == i - 1);
                CHECK(pair_observed_mode(k - 1, N) == j - 1);
            }
        }
    }
}

TEST_CASE("two-mode example reproduces the reference joint generator exactly") {
    Matrix pi(2, 2);
    pi << -5, 5, 3, -3;
    Matrix g = Matrix::Constant(2, 2, 3.0);
    const Matrix kappa = build_augmented_generator(pi, g);
    Matrix expected(4, 4);
    expected << -5, 0, 5, 0, 3, -8, 0, 5, 3, 0, -6, 3, 0, 3, 0, -3;
    CHECK((kappa - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single mode augments to the zero generator") {
    const Matrix kappa = build_augmented_generator(Matrix::Zero(1, 1), Matrix::Zero(1, 1));
    CHECK(kappa.rows() == 1);
    CHECK(kappa(0, 0) == 0.0);
}

TEST_CASE("asymmetric observation rates place each catch-up entry correctly") {
    // hand enumeration of all four rows
    Matrix pi(2, 2);
    pi << -1, 1, 2, -2;
    Matrix g(2, 2);
    g << 0, 4, 5, 0; // g12 = 4, g21 = 5; diagonal unused
    const Matrix kappa = build_augmented_generator(pi, g);
    Matrix expected(4, 4);
    expected << -1, 0, 1, 0, 5, -6, 0, 1, 2, 0, -6, 4, 0, 2, 0, -2;
    CHECK((kappa - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("joint rows sum to zero exactly and follow the sparsity pattern") {
    const Scenario s = sec5_scenario();
    const Matrix kappa = build_augmented_generator(s.model.generator, s.obs.rates);
    const int N = s.model.num_modes;
    for (int row = 0; row < kappa.rows(); ++row) {
        CHECK(kappa.row(row).sum() == 0.0);
        int mode_jumps = 0, observations = 0;
        for (int col = 0; col < kappa.cols(); ++col) {
            if (col == row || kappa(row, col) == 0.0) continue;
            const int i1 = pair_true_mode(row, N), j1 = pair_observed_mode(row, N);
            const int i2 = pair_true_mode(col, N), j2 = pair_observed_mode(col, N);
            if (j1 == j2 && i1 != i2) {
                ++mode_jumps;
            } else {
                CHECK(i2 == i1);
                CHECK(j2 == i1);
                ++observations;
            }
        }
        CHECK(mode_jumps <= N - 1);
        CHECK(observations <= 1);
    }
}

TEST_CASE("hat selectors pick the true-mode matrices and the observed gain index") {
    const Scenario s = sec5_scenario();
    const AugmentedModel aug = build_augmented_model(s.model, s.obs);
    REQUIRE(aug.size() == 4);
    // k = 2 decodes to (true 1, observed 2)
    CHECK((aug.A(1) - s.model.A[0]).cwiseAbs().maxCoeff() == 0.0);
    CHECK(aug.gain_index(1) == 1);
    // k = 3 decodes to (true 2, observed 1)
    CHECK((aug.A(2) - s.model.A[1]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((aug.C(2) - s.model.C[1]).cwiseAbs().maxCoeff() == 0.0);
    CHECK(aug.gain_index(2) == 0);
}

TEST_CASE("single-mode augmented model is the plant itself") {
    const MjlsModel plant = jumpsyn::testing::scalar_plant(-1, 1, 1, 0.1, 0.01, 0, 0);
    const AugmentedModel aug = jumpsyn::testing::scalar_augmented(plant);
    CHECK(aug.size() == 1);
    CHECK(aug.A(0)(0, 0) == -1.0);
    CHECK(aug.gain_index(0) == 0);
}

TEST_CASE("stationary marginal over the true mode matches the base chain") {
    const Scenario s = sec5_scenario();
    const Matrix kappa = build_augmented_generator(s.model.generator, s.obs.rates);
    const Vector joint = stationary_distribution(kappa);
    const Vector base = stationary_distribution(s.model.generator);
    const int N = s.model.num_modes;
    for (int i = 0; i < N; ++i) {
        double marginal = 0.0;
        for (int j = 0; j < N; ++j) marginal += joint(i * N + j);
        CHECK(marginal == doctest::Approx(base(i)).epsilon(1e-12));
    }
}

TEST_SUITE_END();
