#include "jumpsyn/synthesis.hpp"

#include <cmath>
#include <sstream>

namespace jumpsyn {

namespace {

double family_magnitude(const std::vector<Matrix>& fam) {
    double mag = 0.0;
    for (const auto& m : fam) mag = std::max(mag, m.cwiseAbs().maxCoeff());
    return mag;
}

double max_eig_sym(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

double min_eig_sym(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

Matrix symmetric_inverse(const Matrix& m, const std::string& what) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) {
        throw CertificateInvalid(what + " is not positive definite");
    }
    return llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

double lambda_max_inverse(const Matrix& L) {
    // largest eigenvalue of L^{-1} = 1 / (smallest eigenvalue of L)
    const double lmin = min_eig_sym(L);
    if (lmin <= 0.0) throw RangeError("weight matrix is not positive definite");
    return 1.0 / lmin;
}

std::vector<Matrix> expand_weights(const std::vector<Matrix>& Q, int count, int n,
                                   const std::string& name) {
    std::vector<Matrix> out;
    if (static_cast<int>(Q.size()) == 1) {
        out.assign(static_cast<std::size_t>(count), Q.front());
    } else if (static_cast<int>(Q.size()) == count) {
        out = Q;
    } else {
        throw DimensionMismatch(name + " family must have 1 or N^2 entries");
    }
    for (const auto& m : out) {
        if (m.rows() != n || m.cols() != n) {
            throw DimensionMismatch(name + " entries must be n x n");
        }
        if (min_eig_sym(m) <= 0.0) throw RangeError(name + " entries must be positive definite");
    }
    return out;
}

void check_gains(const GainSet& gains, const AugmentedModel& aug) {
    if (static_cast<int>(gains.size()) != aug.base_modes()) {
        throw DimensionMismatch("gain set must have one gain per observed mode");
    }
    for (const auto& K : gains) {
        if (K.rows() != aug.base.m || K.cols() != aug.base.n) {
            throw DimensionMismatch("gains must be m x n");
        }
    }
}

} // namespace

SynthesisProgram assemble_synthesis_program(const AugmentedModel& aug, const DelaySpec& delay,
                                            const PerformanceSpec& perf,
                                            const SynthesisOptions& options) {
    const int N = aug.base_modes();
    const int n2 = aug.size();
    const int n = aug.base.n;
    const int m = aug.base.m;
    const int l = aug.base.l;
    const int q = aug.base.q;
    const double tau_plus = delay.tau_plus;
    if (tau_plus < 0.0 || tau_plus >= 1.0) {
        // the corrected delay block needs (1 - tau+)^{-1}; tau+ = 1 has no
        // finite surrogate, and the as-printed variant is kept comparable
        throw RangeError("synthesis requires tau_plus in [0, 1)");
    }
    if (static_cast<int>(perf.L.size()) != n2) {
        throw DimensionMismatch("performance spec must carry N^2 weight matrices");
    }
    const Vector phi0 = perf.phi.at_zero();
    if (phi0.size() != n) throw DimensionMismatch("phi(0) must have dimension n");

    // strictness scale from the raw inputs
    double mag = std::max({family_magnitude(aug.base.A), family_magnitude(aug.base.B),
                           family_magnitude(aug.base.C), family_magnitude(aug.base.J),
                           family_magnitude(aug.base.E), family_magnitude(aug.base.Phi),
                           family_magnitude(perf.L), aug.kappa.cwiseAbs().maxCoeff(),
                           perf.gamma * perf.gamma, perf.f2, perf.f_inf, perf.X * perf.X});
    mag = std::max(mag, phi0.cwiseAbs().maxCoeff());
    if (tau_plus < 1.0) mag = std::max(mag, family_magnitude(perf.L) / (1.0 - tau_plus));
    const double eps = options.epsilon_scale * (1.0 + mag);

    SynthesisProgram sp;
    sp.epsilon = eps;
    for (int j = 0; j < N; ++j) {
        sp.Y.push_back(sp.program.symmetric_variable(n, "Y_" + std::to_string(j + 1)));
    }
    for (int j = 0; j < N; ++j) {
        sp.Z.push_back(sp.program.rectangular_variable(m, n, "Z_" + std::to_string(j + 1)));
    }
    sp.lambda = sp.program.scalar_variable("lambda");
    sp.Lambda = sp.program.scalar_variable("Lambda");

    const Matrix In = Matrix::Identity(n, n);
    const Matrix Il = Matrix::Identity(l, l);
    const Matrix Iq = Matrix::Identity(q, q);
    const int coupling = (n2 - 1) * n; // vanishes when N = 1

    for (int k = 0; k < n2; ++k) {
        const int i = aug.true_mode[static_cast<std::size_t>(k)];
        const int j = aug.gain_index(k);
        const Matrix& A = aug.A(k);
        const Matrix& B = aug.B(k);
        const Matrix& C = aug.C(k);
        const Matrix& J = aug.J(k);
        const Matrix& E = aug.E(k);
        const Matrix& Phi = aug.Phi(k);
        const Matrix& Lk = perf.L[static_cast<std::size_t>(k)];
        const VariableHandle& Yj = sp.Y[static_cast<std::size_t>(j)];
        const VariableHandle& Zj = sp.Z[static_cast<std::size_t>(j)];
        const std::string suffix = " k=" + std::to_string(k + 1) + " (i=" + std::to_string(i + 1) +
                                   ",j=" + std::to_string(j + 1) + ")";

        auto state_block = [&](AffineMatrix& expr) {
            expr.add_linear(0, 0, Yj, A, In);
            expr.add_linear(0, 0, Yj, In, A.transpose());
            expr.add_linear(0, 0, Yj, aug.kappa(k, k));
        };
        auto delay_block = [&](AffineMatrix& expr, int at) {
            if (options.variant == LmiVariant::Corrected) {
                expr.add_constant(at, at, (1.0 / (1.0 - tau_plus)) * Lk);
                expr.add_linear(at, at, Yj, -2.0);
            } else {
                expr.add_constant(at, at, In);
            }
        };
        auto coupling_blocks = [&](AffineMatrix& expr, int at) {
            int col = at;
            for (int kp = 0; kp < n2; ++kp) {
                if (kp == k) continue;
                const double rate = aug.kappa(k, kp);
                if (rate > 0.0) expr.add_linear(0, col, Yj, std::sqrt(rate));
                expr.add_linear(col, col, sp.Y[static_cast<std::size_t>(aug.gain_index(kp))], -1.0);
                col += n;
            }
        };

        {
            // H2 block rows: state | weight | output | delay | coupling
            AffineMatrix expr(3 * n + l + coupling);
            const int r1 = n, r2 = 2 * n, r3 = 2 * n + l, r4 = 3 * n + l;
            state_block(expr);
            expr.add_linear(r1, 0, Yj, 1.0);
            expr.add_constant(r1, r1, -Lk);
            expr.add_linear(r2, 0, Yj, C, In);
            expr.add_constant(r2, r2, -Il);
            expr.add_linear(0, r3, Zj, B, In);
            delay_block(expr, r3);
            if (coupling > 0) coupling_blocks(expr, r4);
            std::vector<std::pair<std::string, int>> rows = {
                {"state", n}, {"weight", n}, {"output", l}, {"delay", n}};
            if (coupling > 0) rows.emplace_back("coupling", coupling);
            sp.program.require_negative_semidefinite(std::move(expr), "h2" + suffix, eps, rows);
        }
        {
            // H-infinity block rows: state | weight | output | delay | coupling | disturbance
            AffineMatrix expr(3 * n + l + coupling + q);
            const int r1 = n, r2 = 2 * n, r3 = 2 * n + l, r4 = 3 * n + l;
            const int r5 = 3 * n + l + coupling;
            state_block(expr);
            expr.add_linear(0, r1, Yj, 1.0);
            expr.add_constant(r1, r1, -Lk);
            expr.add_linear(0, r2, Yj, In, J.transpose());
            expr.add_constant(r2, r2, -Il);
            expr.add_linear(0, r3, Zj, B, In);
            delay_block(expr, r3);
            if (coupling > 0) coupling_blocks(expr, r4);
            expr.add_constant(0, r5, E);
            expr.add_linear(0, r5, Yj, In, J.transpose() * Phi);
            expr.add_constant(r5, r5, -perf.gamma * perf.gamma * Iq + Phi.transpose() * Phi);
            std::vector<std::pair<std::string, int>> rows = {
                {"state", n}, {"weight", n}, {"output", l}, {"delay", n}};
            if (coupling > 0) rows.emplace_back("coupling", coupling);
            rows.emplace_back("disturbance", q);
            sp.program.require_negative_semidefinite(std::move(expr), "hinf" + suffix, eps, rows);
        }
        // scalar bound Lambda >= X^2 * lammax(L_k^{-1})
        sp.program.require_scalar_inequality({{sp.Lambda, -1.0}},
                                             perf.X * perf.X * lambda_max_inverse(Lk),
                                             "Lambda-bound" + suffix);
    }

    for (int j = 0; j < N; ++j) {
        const VariableHandle& Yj = sp.Y[static_cast<std::size_t>(j)];
        {
            AffineMatrix expr(1 + n);
            expr.add_linear(0, 0, sp.lambda, -1.0);
            expr.add_constant(1, 0, phi0);
            expr.add_linear(1, 1, Yj, -1.0);
            sp.program.require_negative_semidefinite(std::move(expr),
                                                     "lambda-schur j=" + std::to_string(j + 1));
        }
        {
            AffineMatrix expr(n);
            expr.add_linear(0, 0, Yj, -1.0);
            sp.program.require_negative_semidefinite(std::move(expr),
                                                     "Y-pos j=" + std::to_string(j + 1), eps);
        }
    }
    sp.program.require_scalar_inequality({{sp.lambda, 1.0}, {sp.Lambda, 1.0}},
                                         -std::min(perf.f2, perf.f_inf), "budget");
    sp.program.require_scalar_inequality({{sp.lambda, -1.0}}, 0.0, "lambda-pos", eps);
    sp.program.require_scalar_inequality({{sp.Lambda, -1.0}}, 0.0, "Lambda-pos", eps);
    return sp;
}

SynthesisResult synthesize(const AugmentedModel& aug, const DelaySpec& delay,
                           const PerformanceSpec& perf, const SynthesisOptions& options) {
    SynthesisProgram sp = assemble_synthesis_program(aug, delay, perf, options);
    SolveResult solved = solve_feasibility(sp.program, options.solver);

    SynthesisResult result;
    result.status = solved.status;
    result.epsilon = sp.epsilon;
    result.margins = solved.margins;
    result.message = solved.message;
    if (solved.status != SolveStatus::Feasible) return result;

    Vector x = solved.x;
    const int N = aug.base_modes();
    const Vector phi0 = perf.phi.at_zero();

    if (options.minimize_budget) {
        // lambda and Lambda enter only the Schur/bound rows and the budget;
        // their smallest admissible values keep every other constraint intact.
        double lam = sp.epsilon;
        for (int j = 0; j < N; ++j) {
            const Matrix Yj = sp.Y[static_cast<std::size_t>(j)].value(x);
            lam = std::max(lam, phi0.dot(Eigen::LLT<Matrix>(Yj).solve(phi0)));
        }
        double Lam = sp.epsilon;
        for (const auto& Lk : perf.L) Lam = std::max(Lam, perf.X * perf.X * lambda_max_inverse(Lk));
        x(sp.lambda.offset) = lam;
        x(sp.Lambda.offset) = Lam;
    }

    result.lambda = x(sp.lambda.offset);
    result.Lambda = x(sp.Lambda.offset);
    for (int j = 0; j < N; ++j) {
        const Matrix Yj = sp.Y[static_cast<std::size_t>(j)].value(x);
        const Matrix Zj = sp.Z[static_cast<std::size_t>(j)].value(x);
        result.Y.push_back(Yj);
        result.Z.push_back(Zj);
        // K = Z Y^{-1} via a symmetric solve on Y' K' = Z'
        result.gains.push_back(Eigen::LLT<Matrix>(Yj).solve(Zj.transpose()).transpose());
    }

    // margins of the returned assignment (after budget post-processing)
    result.margins.clear();
    const double slop = 1e-10 * (1.0 + sp.program.data_magnitude());
    bool ok = true;
    for (const auto& c : sp.program.constraints()) {
        const double me = max_eig_sym(c.expr.evaluate(x));
        result.margins.push_back({c.label, me, -c.margin});
        if (me > -c.margin + slop) ok = false;
    }
    if (!ok) {
        result.status = SolveStatus::SolverFailure;
        result.message = "post-processed assignment violates a constraint margin";
        return result;
    }

    try {
        check_certificate(aug, delay, perf, result, 0.0);
    } catch (const CertificateInvalid& ex) {
        result.status = SolveStatus::SolverFailure;
        result.message = std::string("certificate verification failed: ") + ex.what();
        return result;
    }
    result.message = solved.message;
    return result;
}

namespace {

AnalysisResult run_analysis(const AugmentedModel& aug, const GainSet& gains,
                            const std::vector<Matrix>& Qin, double tau_plus, double gamma,
                            bool hinf, const AnalysisOptions& options, const InitialData* init) {
    check_gains(gains, aug);
    if (tau_plus < 0.0 || tau_plus >= 1.0) {
        throw RangeError("analysis requires tau_plus in [0, 1)");
    }
    const int n2 = aug.size();
    const int n = aug.base.n;
    const int q = aug.base.q;
    const std::vector<Matrix> Q = expand_weights(Qin, n2, n, "Q");

    double mag = std::max({family_magnitude(aug.base.A), family_magnitude(aug.base.B),
                           family_magnitude(aug.base.C), family_magnitude(aug.base.J),
                           family_magnitude(aug.base.E), family_magnitude(aug.base.Phi),
                           family_magnitude(Q), family_magnitude(gains),
                           aug.kappa.cwiseAbs().maxCoeff(), gamma * gamma});
    const double eps = options.epsilon_scale * (1.0 + mag);

    ConicProgram program;
    std::vector<VariableHandle> P;
    for (int k = 0; k < n2; ++k) {
        P.push_back(program.symmetric_variable(n, "P_" + std::to_string(k + 1)));
    }
    const Matrix In = Matrix::Identity(n, n);
    const Matrix Iq = Matrix::Identity(q, q);

    for (int k = 0; k < n2; ++k) {
        const int i = aug.true_mode[static_cast<std::size_t>(k)];
        const int j = aug.gain_index(k);
        const Matrix& A = aug.A(k);
        const Matrix BK = aug.B(k) * gains[static_cast<std::size_t>(j)];
        const Matrix& Qk = Q[static_cast<std::size_t>(k)];
        const Matrix Qhat = (1.0 - tau_plus) * Qk;
        const std::string suffix = " k=" + std::to_string(k + 1) + " (i=" + std::to_string(i + 1) +
                                   ",j=" + std::to_string(j + 1) + ")";

        AffineMatrix expr(hinf ? 2 * n + q : 2 * n);
        expr.add_linear(0, 0, P[static_cast<std::size_t>(k)], A.transpose(), In);
        expr.add_linear(0, 0, P[static_cast<std::size_t>(k)], In, A);
        for (int kp = 0; kp < n2; ++kp) {
            expr.add_linear(0, 0, P[static_cast<std::size_t>(kp)], aug.kappa(k, kp));
        }
        const Matrix& out = hinf ? aug.J(k) : aug.C(k);
        expr.add_constant(0, 0, Qk + out.transpose() * out);
        expr.add_linear(0, n, P[static_cast<std::size_t>(k)], In, BK);
        expr.add_constant(n, n, -Qhat);
        std::vector<std::pair<std::string, int>> rows = {{"state", n}, {"delay", n}};
        if (hinf) {
            expr.add_linear(0, 2 * n, P[static_cast<std::size_t>(k)], In, aug.E(k));
            expr.add_constant(0, 2 * n, aug.J(k).transpose() * aug.Phi(k));
            expr.add_constant(2 * n, 2 * n, -gamma * gamma * Iq + aug.Phi(k).transpose() * aug.Phi(k));
            rows.emplace_back("disturbance", q);
        }
        program.require_negative_semidefinite(std::move(expr), (hinf ? "hinf" : "h2") + suffix, eps,
                                              rows);
    }
    for (int k = 0; k < n2; ++k) {
        AffineMatrix expr(n);
        expr.add_linear(0, 0, P[static_cast<std::size_t>(k)], -1.0);
        program.require_negative_semidefinite(std::move(expr), "P-pos k=" + std::to_string(k + 1),
                                              eps);
    }

    SolveResult solved = solve_feasibility(program, options.solver);
    AnalysisResult result;
    result.status = solved.status;
    result.margins = solved.margins;
    result.message = solved.message;
    if (solved.status == SolveStatus::Feasible) {
        // The slack maximization leaves the certificate much larger than
        // needed; shrink it along its ray to the smallest scale that still
        // clears every margin, which tightens the reported bound.
        auto feasible_at = [&](double alpha) {
            for (const auto& c : program.constraints()) {
                Eigen::SelfAdjointEigenSolver<Matrix> es(c.expr.evaluate(alpha * solved.x),
                                                         Eigen::EigenvaluesOnly);
                if (es.eigenvalues().maxCoeff() > -c.margin) return false;
            }
            return true;
        };
        double lo = 0.0, hi = 1.0;
        for (int iter = 0; iter < 40; ++iter) {
            const double mid = 0.5 * (lo + hi);
            (feasible_at(mid) ? hi : lo) = mid;
        }
        const Vector x = hi * solved.x;
        result.margins.clear();
        for (const auto& c : program.constraints()) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(c.expr.evaluate(x), Eigen::EigenvaluesOnly);
            result.margins.push_back({c.label, es.eigenvalues().maxCoeff(), -c.margin});
        }
        for (int k = 0; k < n2; ++k) {
            result.P.push_back(P[static_cast<std::size_t>(k)].value(x));
        }
        if (init != nullptr) {
            const auto k0 = static_cast<std::size_t>(init->initial_state);
            result.bound = performance_bound(result.P[k0], Q[k0], init->phi, init->tau0);
        }
    }
    return result;
}

} // namespace

AnalysisResult verify_h2_analysis(const AugmentedModel& aug, const GainSet& gains,
                                  const std::vector<Matrix>& Q, double tau_plus,
                                  const AnalysisOptions& options, const InitialData* init) {
    return run_analysis(aug, gains, Q, tau_plus, 1.0, false, options, init);
}

AnalysisResult verify_hinf_analysis(const AugmentedModel& aug, const GainSet& gains,
                                    const std::vector<Matrix>& Q, double tau_plus, double gamma,
                                    const AnalysisOptions& options, const InitialData* init) {
    if (!(gamma > 0.0)) throw RangeError("gamma must be > 0");
    return run_analysis(aug, gains, Q, tau_plus, gamma, true, options, init);
}

double performance_bound(const Matrix& P0, const Matrix& Q0, const HistoryFunction& phi,
                         double tau0) {
    if (min_eig_sym(P0) <= 0.0 || min_eig_sym(Q0) <= 0.0) {
        throw RangeError("performance bound needs positive definite P and Q");
    }
    const Vector phi0 = phi.at_zero();
    double value = phi0.dot(P0 * phi0);
    std::vector<double> nodes;
    if (phi.kind == HistoryFunction::Kind::Constant) {
        nodes = {-tau0, 0.0};
    } else {
        nodes.push_back(-tau0);
        for (double t : phi.times) {
            if (t > -tau0 && t < 0.0) nodes.push_back(t);
        }
        nodes.push_back(0.0);
    }
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const Vector a = phi(nodes[i]);
        const Vector b = phi(nodes[i + 1]);
        value += 0.5 * (a.dot(Q0 * a) + b.dot(Q0 * b)) * (nodes[i + 1] - nodes[i]);
    }
    return value;
}

CertificateReport check_certificate(const AugmentedModel& aug, const DelaySpec& delay,
                                    const PerformanceSpec& perf, const SynthesisResult& result,
                                    double tolerance) {
    const int N = aug.base_modes();
    const int n2 = aug.size();
    const int n = aug.base.n;
    const int q = aug.base.q;
    if (static_cast<int>(result.Y.size()) != N || static_cast<int>(result.gains.size()) != N) {
        throw DimensionMismatch("result must carry one Y and one gain per observed mode");
    }

    CertificateReport report;
    std::vector<std::string> failures;
    auto record = [&](const std::string& label, double max_eig) {
        const bool ok = max_eig <= -tolerance;
        report.blocks.push_back({label, max_eig, ok});
        report.worst = std::max(report.worst, max_eig);
        if (!ok) failures.push_back(label + " (max eig " + std::to_string(max_eig) + ")");
    };

    std::vector<Matrix> P(static_cast<std::size_t>(n2));
    bool positivity_ok = true;
    for (int j = 0; j < N; ++j) {
        const Matrix& Yj = result.Y[static_cast<std::size_t>(j)];
        const double mineig = min_eig_sym(Yj);
        if (mineig <= 0.0) {
            report.blocks.push_back({"Y-pos j=" + std::to_string(j + 1), -mineig, false});
            failures.push_back("Y_" + std::to_string(j + 1) + " not positive definite");
            positivity_ok = false;
        }
    }
    if (!positivity_ok) {
        throw CertificateInvalid("certificate failed positivity: " + failures.front());
    }
    for (int k = 0; k < n2; ++k) {
        const int j = aug.gain_index(k);
        P[static_cast<std::size_t>(k)] =
            symmetric_inverse(result.Y[static_cast<std::size_t>(j)], "Y_" + std::to_string(j + 1));
    }

    for (int k = 0; k < n2; ++k) {
        const int i = aug.true_mode[static_cast<std::size_t>(k)];
        const int j = aug.gain_index(k);
        const Matrix& A = aug.A(k);
        const Matrix& Pk = P[static_cast<std::size_t>(k)];
        const Matrix Qk = symmetric_inverse(perf.L[static_cast<std::size_t>(k)],
                                            "L_" + std::to_string(k + 1));
        const Matrix Qhat = (1.0 - delay.tau_plus) * Qk;
        const Matrix PBK = Pk * aug.B(k) * result.gains[static_cast<std::size_t>(j)];
        Matrix coupled = Matrix::Zero(n, n);
        for (int kp = 0; kp < n2; ++kp) coupled += aug.kappa(k, kp) * P[static_cast<std::size_t>(kp)];
        const std::string suffix = " k=" + std::to_string(k + 1) + " (i=" + std::to_string(i + 1) +
                                   ",j=" + std::to_string(j + 1) + ")";

        {
            Matrix M(2 * n, 2 * n);
            M << A.transpose() * Pk + Pk * A + Qk + coupled + aug.C(k).transpose() * aug.C(k), PBK,
                PBK.transpose(), -Qhat;
            record("h2" + suffix, max_eig_sym(M));
        }
        {
            Matrix M = Matrix::Zero(2 * n + q, 2 * n + q);
            M.block(0, 0, n, n) =
                A.transpose() * Pk + Pk * A + Qk + coupled + aug.J(k).transpose() * aug.J(k);
            M.block(0, n, n, n) = PBK;
            M.block(n, 0, n, n) = PBK.transpose();
            M.block(n, n, n, n) = -Qhat;
            M.block(0, 2 * n, n, q) = Pk * aug.E(k) + aug.J(k).transpose() * aug.Phi(k);
            M.block(2 * n, 0, q, n) = M.block(0, 2 * n, n, q).transpose();
            M.block(2 * n, 2 * n, q, q) = -perf.gamma * perf.gamma * Matrix::Identity(q, q) +
                                          aug.Phi(k).transpose() * aug.Phi(k);
            record("hinf" + suffix, max_eig_sym(M));
        }
    }

    if (!failures.empty()) {
        std::ostringstream os;
        os << "certificate failed " << failures.size() << " block(s):";
        for (const auto& f : failures) os << "\n  " << f;
        throw CertificateInvalid(os.str());
    }
    return report;
}

} // namespace jumpsyn
