#include "jumpsyn/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace jumpsyn {

namespace {

// One matrix constraint, flattened for the barrier: the slack
// S = -shifted - sum_s x_s F_s - t I must stay positive definite, where
// shifted = constant + margin * I.
struct Block {
    Matrix shifted;
    std::vector<std::pair<int, Matrix>> coeffs;
    int dim = 0;
};

struct Diagnostic {
    int constraint = -1;
    int row = -1;
    double value = 0.0;
};

std::string block_name_at_row(const Constraint& c, int row) {
    int offset = 0;
    for (const auto& [name, size] : c.row_blocks) {
        if (row < offset + size) {
            std::ostringstream os;
            os << name << " (rows " << offset + 1 << ".." << offset + size << ")";
            return os.str();
        }
        offset += size;
    }
    return "row " + std::to_string(row + 1);
}

// A diagonal entry with no variable dependence and value > -margin can never
// reach the required cone; such programs are infeasible before any solve.
bool find_structural_obstruction(const ConicProgram& program, Diagnostic& diag) {
    const auto& cons = program.constraints();
    for (std::size_t b = 0; b < cons.size(); ++b) {
        const auto& c = cons[b];
        for (int d = 0; d < c.expr.dim(); ++d) {
            bool constant_entry = true;
            for (const auto& [s, coeff] : c.expr.coefficients()) {
                if (coeff(d, d) != 0.0) {
                    constant_entry = false;
                    break;
                }
            }
            if (constant_entry && c.expr.constant()(d, d) > -c.margin) {
                diag.constraint = static_cast<int>(b);
                diag.row = d;
                diag.value = c.expr.constant()(d, d);
                return true;
            }
        }
    }
    return false;
}

double min_eigenvalue(const Matrix& m) {
    if (m.rows() == 1) return m(0, 0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const Matrix& m) {
    if (m.rows() == 1) return m(0, 0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

bool positive_definite(const Matrix& m) {
    if (m.rows() == 1) return m(0, 0) > 0.0;
    Eigen::LLT<Matrix> llt(m);
    return llt.info() == Eigen::Success;
}

} // namespace

SolveResult solve_feasibility(const ConicProgram& program, const SolveOptions& options) {
    SolveResult result;
    const auto& cons = program.constraints();
    const int p = program.scalar_count();

    auto fill_margins = [&](const Vector& xv) {
        result.margins.clear();
        for (const auto& c : cons) {
            result.margins.push_back({c.label, max_eigenvalue(c.expr.evaluate(xv)), -c.margin});
        }
    };

    Diagnostic diag;
    if (find_structural_obstruction(program, diag)) {
        const auto& c = cons[static_cast<std::size_t>(diag.constraint)];
        std::ostringstream os;
        os << "structurally infeasible: constraint '" << c.label
           << "' has a constant diagonal entry " << diag.value << " at row " << diag.row + 1
           << ", block " << block_name_at_row(c, diag.row)
           << "; the expression can never be below the required -" << c.margin << " there";
        result.status = SolveStatus::Infeasible;
        result.message = os.str();
        result.x = Vector::Zero(p);
        result.margin = -std::numeric_limits<double>::infinity();
        fill_margins(result.x);
        return result;
    }

    std::vector<Block> blocks;
    blocks.reserve(cons.size());
    for (const auto& c : cons) {
        Block b;
        b.dim = c.expr.dim();
        b.shifted = c.expr.constant() + c.margin * Matrix::Identity(b.dim, b.dim);
        for (const auto& [s, coeff] : c.expr.coefficients()) b.coeffs.emplace_back(s, coeff);
        blocks.push_back(std::move(b));
    }

    const double scale = std::max(1.0, program.data_magnitude());
    const double gap_tol = options.gap_tol * scale;
    const double R = options.variable_bound;
    const double t_cap = options.slack_cap;

    // total barrier parameter: matrix blocks + variable box (2p) + slack cap
    double nu = 1.0 + 2.0 * p;
    for (const auto& b : blocks) nu += b.dim;

    // strictly feasible start: x = 0 with t below every eigenvalue floor
    Vector x = Vector::Zero(p);
    double t = -1.0;
    for (const auto& b : blocks) t = std::min(t, min_eigenvalue(-b.shifted) - 1.0);
    t = std::min(t, t_cap - 1.0);

    auto slack_of = [&](const Vector& xv, double tv, std::size_t bi) {
        const Block& b = blocks[bi];
        Matrix s = -b.shifted - tv * Matrix::Identity(b.dim, b.dim);
        for (const auto& [idx, coeff] : b.coeffs) s -= xv(idx) * coeff;
        return s;
    };

    auto interior = [&](const Vector& xv, double tv) {
        if (tv >= t_cap) return false;
        for (int s = 0; s < p; ++s) {
            if (std::abs(xv(s)) >= R) return false;
        }
        for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
            if (!positive_definite(slack_of(xv, tv, bi))) return false;
        }
        return true;
    };

    auto barrier = [&](const Vector& xv, double tv, double mu) {
        double value = -tv / mu - std::log(t_cap - tv);
        for (int s = 0; s < p; ++s) value -= std::log(R - xv(s)) + std::log(R + xv(s));
        for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
            Eigen::LLT<Matrix> llt(slack_of(xv, tv, bi));
            if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
            const Matrix& Lf = llt.matrixLLT();
            for (int d = 0; d < blocks[bi].dim; ++d) value -= 2.0 * std::log(Lf(d, d));
        }
        return value;
    };

    int steps = 0;
    double mu = std::max(1.0, std::abs(t));
    const double mu_floor = 1e-13 * scale;
    bool fatal_stall = false;
    std::string fatal_message;

    while (true) {
        // damped Newton centering at the current mu
        double decrement2 = std::numeric_limits<double>::infinity();
        for (int inner = 0; inner < 100; ++inner) {
            if (++steps > options.max_newton_steps) {
                fatal_stall = true;
                fatal_message = "newton step budget exhausted";
                break;
            }
            Vector grad = Vector::Zero(p + 1);
            Matrix hess = Matrix::Zero(p + 1, p + 1);
            grad(p) = -1.0 / mu + 1.0 / (t_cap - t);
            hess(p, p) += 1.0 / ((t_cap - t) * (t_cap - t));
            for (int s = 0; s < p; ++s) {
                grad(s) += 1.0 / (R - x(s)) - 1.0 / (R + x(s));
                hess(s, s) += 1.0 / ((R - x(s)) * (R - x(s))) + 1.0 / ((R + x(s)) * (R + x(s)));
            }
            bool lost = false;
            for (std::size_t bi = 0; bi < blocks.size() && !lost; ++bi) {
                const Block& b = blocks[bi];
                Eigen::LLT<Matrix> llt(slack_of(x, t, bi));
                if (llt.info() != Eigen::Success) {
                    lost = true;
                    break;
                }
                const Matrix Sinv = llt.solve(Matrix::Identity(b.dim, b.dim));
                const int nb = static_cast<int>(b.coeffs.size());
                std::vector<Matrix> W(static_cast<std::size_t>(nb) + 1);
                for (int a = 0; a < nb; ++a) {
                    W[static_cast<std::size_t>(a)] = Sinv * b.coeffs[static_cast<std::size_t>(a)].second;
                }
                W[static_cast<std::size_t>(nb)] = Sinv; // slack direction has identity coefficient
                auto var_of = [&](int a) { return a < nb ? b.coeffs[static_cast<std::size_t>(a)].first : p; };
                for (int a = 0; a <= nb; ++a) {
                    grad(var_of(a)) += W[static_cast<std::size_t>(a)].trace();
                    for (int a2 = a; a2 <= nb; ++a2) {
                        const double h = W[static_cast<std::size_t>(a)]
                                             .cwiseProduct(W[static_cast<std::size_t>(a2)].transpose())
                                             .sum();
                        hess(var_of(a), var_of(a2)) += h;
                        if (var_of(a) != var_of(a2)) hess(var_of(a2), var_of(a)) += h;
                    }
                }
            }
            if (lost) {
                fatal_stall = true;
                fatal_message = "lost interiority during centering";
                break;
            }

            Vector dir;
            double ridge = 0.0;
            const double base = std::max(hess.trace() / (p + 1), 1e-300);
            for (int attempt = 0;; ++attempt) {
                Matrix H = hess;
                if (ridge > 0.0) H += ridge * Matrix::Identity(p + 1, p + 1);
                Eigen::LLT<Matrix> llt(H);
                if (llt.info() == Eigen::Success) {
                    dir = llt.solve(-grad);
                    break;
                }
                ridge = (ridge == 0.0) ? 1e-14 * base : ridge * 100.0;
                if (attempt > 14) {
                    fatal_stall = true;
                    fatal_message = "newton system not positive definite";
                    break;
                }
            }
            if (fatal_stall) break;

            decrement2 = -grad.dot(dir);
            if (decrement2 <= 1e-9) break;

            double alpha = 1.0;
            Vector xn = x + dir.head(p);
            double tn = t + dir(p);
            int ls = 0;
            while (!interior(xn, tn) && ls < 80) {
                alpha *= 0.5;
                xn = x + alpha * dir.head(p);
                tn = t + alpha * dir(p);
                ++ls;
            }
            if (ls >= 80) {
                if (decrement2 > 1e-4) {
                    fatal_stall = true;
                    fatal_message = "line search could not stay interior";
                }
                break;
            }
            const double f0 = barrier(x, t, mu);
            while (barrier(xn, tn, mu) > f0 - 0.01 * alpha * decrement2 && alpha > 1e-16) {
                alpha *= 0.5;
                xn = x + alpha * dir.head(p);
                tn = t + alpha * dir(p);
            }
            if (!(barrier(xn, tn, mu) < f0)) {
                if (decrement2 > 1e-4) {
                    fatal_stall = true;
                    fatal_message = "no descent despite large decrement";
                }
                break;
            }
            x = xn;
            t = tn;
        }
        if (fatal_stall) break;

        const double gap = 2.0 * nu * mu;
        if (t > 0.0 && (gap < 0.05 * t || mu <= mu_floor)) break;         // proven feasible
        if (t <= 0.0 && t + gap < 0.0) break;                             // proven infeasible
        if (t <= 0.0 && gap < gap_tol) break;                             // as tight as requested
        if (mu <= mu_floor) break;
        mu = std::max(mu / 8.0, mu_floor);
    }

    result.x = x;
    result.newton_steps = steps;
    result.margin = t;
    result.gap = 2.0 * nu * mu;
    fill_margins(x);

    if (t > 0.0) {
        // The iterate itself certifies feasibility; recheck by eigensolve.
        const double slop = std::max(10.0 * gap_tol, 1e-12 * scale);
        for (std::size_t b = 0; b < cons.size(); ++b) {
            if (result.margins[b].max_eigenvalue > result.margins[b].required + slop) {
                result.status = SolveStatus::SolverFailure;
                result.message =
                    "assignment failed the eigenvalue recheck on '" + cons[b].label + "'";
                return result;
            }
        }
        result.status = SolveStatus::Feasible;
        std::ostringstream os;
        os << "feasible with shared slack " << t << " (gap " << result.gap << ")";
        result.message = os.str();
        return result;
    }
    if (!fatal_stall && t + result.gap < 0.0) {
        result.status = SolveStatus::Infeasible;
        std::ostringstream os;
        os << "infeasible: best achievable shared slack " << t << " (certified gap " << result.gap
           << ", search box |x| <= " << R << "); unsatisfied constraints:";
        int listed = 0;
        for (const auto& m : result.margins) {
            if (m.max_eigenvalue > m.required && listed < 8) {
                os << "\n  '" << m.label << "' max eigenvalue " << m.max_eigenvalue
                   << " > required " << m.required;
                ++listed;
            }
        }
        result.message = os.str();
        return result;
    }
    result.status = SolveStatus::SolverFailure;
    std::ostringstream os;
    os << "indeterminate margin: slack " << t << " with certified gap " << result.gap;
    if (!fatal_message.empty()) os << " (" << fatal_message << ")";
    result.message = os.str();
    return result;
}

} // namespace jumpsyn
