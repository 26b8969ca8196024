#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "jumpsyn/model.hpp"

namespace jumpsyn {

// A declared decision variable, flattened into a contiguous range of the
// program's scalar vector. Symmetric variables store the lower triangle.
struct VariableHandle {
    enum class Kind { Symmetric, Rectangular, Scalar };
    Kind kind = Kind::Scalar;
    int id = -1;
    int rows = 1;
    int cols = 1;
    int offset = 0; // first scalar index
    int count = 0;  // number of scalar components

    // Basis matrix of the s-th scalar component (local index).
    Matrix basis(int s) const;
    // Matrix value given the program-level scalar vector.
    Matrix value(const Vector& x) const;
};

// Affine symmetric matrix expression in the program's scalars. Placements at
// off-diagonal offsets mirror the transpose automatically; diagonal
// placements are taken verbatim, so callers add both halves of terms such as
// A*Y + Y*A'. Symmetry is validated when the expression enters a program.
class AffineMatrix {
  public:
    explicit AffineMatrix(int dim) : dim_(dim), constant_(Matrix::Zero(dim, dim)) {}

    int dim() const { return dim_; }

    void add_constant(int row, int col, const Matrix& value);
    // Adds scale * left * V * right at (row, col).
    void add_linear(int row, int col, const VariableHandle& v, const Matrix& left,
                    const Matrix& right, double scale = 1.0);
    // Identity left/right convenience: scale * V at (row, col).
    void add_linear(int row, int col, const VariableHandle& v, double scale = 1.0);

    const Matrix& constant() const { return constant_; }
    const std::map<int, Matrix>& coefficients() const { return coeffs_; }

    Matrix evaluate(const Vector& x) const;
    bool is_symmetric(double tol) const;

  private:
    void place(int row, int col, const Matrix& value, Matrix& target) const;

    int dim_;
    Matrix constant_;
    std::map<int, Matrix> coeffs_; // program scalar index -> d x d coefficient
};

struct Constraint {
    AffineMatrix expr;
    std::string label;
    double margin = 0.0; // required: expr <= -margin * I (0 = non-strict)
    // Optional row partition for diagnostics: (block name, size).
    std::vector<std::pair<std::string, int>> row_blocks;
};

class ConicProgram {
  public:
    VariableHandle symmetric_variable(int n, std::string name);
    VariableHandle rectangular_variable(int rows, int cols, std::string name);
    VariableHandle scalar_variable(std::string name);

    void require_negative_semidefinite(AffineMatrix expr, std::string label, double margin = 0.0,
                                       std::vector<std::pair<std::string, int>> row_blocks = {});
    // sum coeff_i * scalar_i + constant <= -margin, as a 1x1 cone.
    void require_scalar_inequality(const std::vector<std::pair<VariableHandle, double>>& terms,
                                   double constant, std::string label, double margin = 0.0);

    int scalar_count() const { return scalar_count_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    const std::vector<VariableHandle>& variables() const { return variables_; }
    const std::string& variable_name(int id) const { return names_[static_cast<std::size_t>(id)]; }

    // Largest absolute entry over all constraint data.
    double data_magnitude() const;

    // Debug dump in a sparse block text format.
    std::string dump() const;

    // Debug dump in sparse SDPA format (.dat-s): find x with
    // sum_i x_i F_i - F0 >= 0 block-diagonally, zero objective.
    std::string dump_sdpa() const;

  private:
    std::vector<VariableHandle> variables_;
    std::vector<std::string> names_;
    std::vector<Constraint> constraints_;
    int scalar_count_ = 0;
};

enum class SolveStatus { Feasible, Infeasible, SolverFailure };

const char* to_string(SolveStatus status);

struct ConstraintMargin {
    std::string label;
    double max_eigenvalue = 0.0; // of the substituted expression
    double required = 0.0;       // feasibility means max_eigenvalue <= required
};

struct SolveResult {
    SolveStatus status = SolveStatus::SolverFailure;
    Vector x;              // assignment (valid when Feasible; best iterate otherwise)
    double margin = 0.0;   // achieved shared slack: expr + margin_b*I <= -margin*I
    double gap = 0.0;      // certified optimality gap on the shared slack
    std::vector<ConstraintMargin> margins;
    std::string message;
    int newton_steps = 0;
};

struct SolveOptions {
    double gap_tol = 1e-9;       // absolute, scaled by (1 + data magnitude)
    double variable_bound = 1e8; // box |x_s| <= bound enclosing the search
    double slack_cap = 1e6;      // upper cap on the shared slack variable
    int max_newton_steps = 20000;
    bool verbose = false;
};

// Feasibility by maximizing the shared slack t with expr_b + margin_b*I <=
// -t*I over all constraints, via a feasible-start log-det barrier method.
// Feasible iff the optimal slack is positive; an Infeasible verdict carries
// the unsatisfied-constraint report. Deterministic given identical inputs.
SolveResult solve_feasibility(const ConicProgram& program, const SolveOptions& options = {});

} // namespace jumpsyn
