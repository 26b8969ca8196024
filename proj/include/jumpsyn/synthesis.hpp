#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "jumpsyn/augmentation.hpp"
#include "jumpsyn/conic.hpp"

namespace jumpsyn {

// One state-feedback gain (m x n) per observed mode.
using GainSet = std::vector<Matrix>;

enum class LmiVariant {
    Corrected, // delay block replaced by (1-tau+)^{-1} L_k - Y_j - Y_j'
    AsPrinted  // diagnostic: keeps the +I_n delay block, provably infeasible
};

struct SynthesisOptions {
    LmiVariant variant = LmiVariant::Corrected;
    // Strict blocks are required <= -eps I with eps = epsilon_scale * (1 + max input magnitude).
    double epsilon_scale = 1e-7;
    // Shrink lambda and Lambda to their tight values after a feasible solve.
    bool minimize_budget = true;
    SolveOptions solver;
};

struct SynthesisProgram {
    ConicProgram program;
    std::vector<VariableHandle> Y; // symmetric, per observed mode
    std::vector<VariableHandle> Z; // m x n, per observed mode
    VariableHandle lambda;
    VariableHandle Lambda;
    double epsilon = 0.0;
};

// Builds the gain-synthesis feasibility system over the augmented chain:
// per augmented mode one H2 block and one H-infinity block, per observed
// mode a lambda Schur block and a positivity block, per augmented mode a
// scalar Lambda bound, plus the budget lambda + Lambda <= min(f2, f_inf).
SynthesisProgram assemble_synthesis_program(const AugmentedModel& aug, const DelaySpec& delay,
                                            const PerformanceSpec& perf,
                                            const SynthesisOptions& options = {});

struct SynthesisResult {
    SolveStatus status = SolveStatus::SolverFailure;
    std::vector<Matrix> Y;
    std::vector<Matrix> Z;
    GainSet gains; // K_j = Z_j Y_j^{-1}
    double lambda = 0.0;
    double Lambda = 0.0;
    double epsilon = 0.0;
    std::vector<ConstraintMargin> margins;
    std::string message;
};

// Solves the assembled program; on feasibility extracts gains, optionally
// minimizes the budget scalars, and verifies the certificate by eigensolve.
SynthesisResult synthesize(const AugmentedModel& aug, const DelaySpec& delay,
                           const PerformanceSpec& perf, const SynthesisOptions& options = {});

struct AnalysisOptions {
    double epsilon_scale = 1e-7;
    SolveOptions solver;
};

// Initial data needed to evaluate the closed-form performance bound.
struct InitialData {
    HistoryFunction phi;
    double tau0 = 0.0;
    int initial_state = 0; // augmented index, 0-based
};

struct AnalysisResult {
    SolveStatus status = SolveStatus::SolverFailure;
    std::vector<Matrix> P; // per augmented mode
    std::vector<ConstraintMargin> margins;
    double bound = std::numeric_limits<double>::quiet_NaN();
    std::string message;
};

// Searches for per-augmented-mode Lyapunov matrices P_k certifying the H2
// blocks for fixed gains; Qhat_k = (1 - tau_plus) Q_k.
AnalysisResult verify_h2_analysis(const AugmentedModel& aug, const GainSet& gains,
                                  const std::vector<Matrix>& Q, double tau_plus,
                                  const AnalysisOptions& options = {},
                                  const InitialData* init = nullptr);

AnalysisResult verify_hinf_analysis(const AugmentedModel& aug, const GainSet& gains,
                                    const std::vector<Matrix>& Q, double tau_plus, double gamma,
                                    const AnalysisOptions& options = {},
                                    const InitialData* init = nullptr);

// phi(0)' P phi(0) + integral_{-tau0}^0 phi' Q phi, trapezoid on phi's grid.
double performance_bound(const Matrix& P0, const Matrix& Q0, const HistoryFunction& phi,
                         double tau0);

struct CertificateReport {
    struct BlockMargin {
        std::string label;
        double max_eigenvalue = 0.0;
        bool ok = false;
    };
    std::vector<BlockMargin> blocks;
    double worst = -std::numeric_limits<double>::infinity();
};

// Reconstructs P_k = Y_{j(k)}^{-1}, K_j = Z_j Y_j^{-1}, Q_k = L_k^{-1} and
// verifies the substituted H2 and H-infinity analysis blocks are negative
// definite by dense symmetric eigensolve (max eigenvalue <= -tolerance).
// Throws CertificateInvalid listing the failing blocks.
CertificateReport check_certificate(const AugmentedModel& aug, const DelaySpec& delay,
                                    const PerformanceSpec& perf, const SynthesisResult& result,
                                    double tolerance);

} // namespace jumpsyn
