#include "jumpsyn/conic.hpp"

#include <cmath>
#include <sstream>

namespace jumpsyn {

Matrix VariableHandle::basis(int s) const {
    Matrix b = Matrix::Zero(rows, cols);
    switch (kind) {
        case Kind::Scalar:
            b(0, 0) = 1.0;
            break;
        case Kind::Rectangular:
            b(s / cols, s % cols) = 1.0;
            break;
        case Kind::Symmetric: {
            // lower-triangle enumeration: (0,0),(1,0),(1,1),(2,0),...
            int i = 0;
            while ((i + 1) * (i + 2) / 2 <= s) ++i;
            const int j = s - i * (i + 1) / 2;
            b(i, j) = 1.0;
            b(j, i) = 1.0;
            break;
        }
    }
    return b;
}

Matrix VariableHandle::value(const Vector& x) const {
    Matrix m = Matrix::Zero(rows, cols);
    for (int s = 0; s < count; ++s) {
        const double v = x(offset + s);
        switch (kind) {
            case Kind::Scalar:
                m(0, 0) = v;
                break;
            case Kind::Rectangular:
                m(s / cols, s % cols) = v;
                break;
            case Kind::Symmetric: {
                int i = 0;
                while ((i + 1) * (i + 2) / 2 <= s) ++i;
                const int j = s - i * (i + 1) / 2;
                m(i, j) = v;
                m(j, i) = v;
                break;
            }
        }
    }
    return m;
}

void AffineMatrix::place(int row, int col, const Matrix& value, Matrix& target) const {
    if (row < 0 || col < 0 || row + value.rows() > dim_ || col + value.cols() > dim_) {
        throw DimensionMismatch("block placement outside the expression");
    }
    target.block(row, col, value.rows(), value.cols()) += value;
    if (row != col) {
        target.block(col, row, value.cols(), value.rows()) += value.transpose();
    }
}

void AffineMatrix::add_constant(int row, int col, const Matrix& value) {
    place(row, col, value, constant_);
}

void AffineMatrix::add_linear(int row, int col, const VariableHandle& v, const Matrix& left,
                              const Matrix& right, double scale) {
    if (left.cols() != v.rows || right.rows() != v.cols) {
        throw DimensionMismatch("left/right factors do not match the variable shape");
    }
    if (scale == 0.0) return;
    for (int s = 0; s < v.count; ++s) {
        const Matrix contribution = scale * left * v.basis(s) * right;
        auto [it, inserted] = coeffs_.try_emplace(v.offset + s, Matrix::Zero(dim_, dim_));
        place(row, col, contribution, it->second);
    }
}

void AffineMatrix::add_linear(int row, int col, const VariableHandle& v, double scale) {
    add_linear(row, col, v, Matrix::Identity(v.rows, v.rows), Matrix::Identity(v.cols, v.cols), scale);
}

Matrix AffineMatrix::evaluate(const Vector& x) const {
    Matrix m = constant_;
    for (const auto& [s, coeff] : coeffs_) m += x(s) * coeff;
    return m;
}

bool AffineMatrix::is_symmetric(double tol) const {
    auto sym = [tol](const Matrix& m) {
        const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
    };
    if (!sym(constant_)) return false;
    for (const auto& [s, coeff] : coeffs_) {
        if (!sym(coeff)) return false;
    }
    return true;
}

VariableHandle ConicProgram::symmetric_variable(int n, std::string name) {
    VariableHandle v;
    v.kind = VariableHandle::Kind::Symmetric;
    v.id = static_cast<int>(variables_.size());
    v.rows = v.cols = n;
    v.offset = scalar_count_;
    v.count = n * (n + 1) / 2;
    scalar_count_ += v.count;
    variables_.push_back(v);
    names_.push_back(std::move(name));
    return v;
}

VariableHandle ConicProgram::rectangular_variable(int rows, int cols, std::string name) {
    VariableHandle v;
    v.kind = VariableHandle::Kind::Rectangular;
    v.id = static_cast<int>(variables_.size());
    v.rows = rows;
    v.cols = cols;
    v.offset = scalar_count_;
    v.count = rows * cols;
    scalar_count_ += v.count;
    variables_.push_back(v);
    names_.push_back(std::move(name));
    return v;
}

VariableHandle ConicProgram::scalar_variable(std::string name) {
    VariableHandle v;
    v.kind = VariableHandle::Kind::Scalar;
    v.id = static_cast<int>(variables_.size());
    v.rows = v.cols = 1;
    v.offset = scalar_count_;
    v.count = 1;
    scalar_count_ += 1;
    variables_.push_back(v);
    names_.push_back(std::move(name));
    return v;
}

void ConicProgram::require_negative_semidefinite(AffineMatrix expr, std::string label, double margin,
                                                 std::vector<std::pair<std::string, int>> row_blocks) {
    if (!expr.is_symmetric(1e-9)) {
        throw Error("constraint '" + label + "' is not symmetric by construction");
    }
    constraints_.push_back(Constraint{std::move(expr), std::move(label), margin, std::move(row_blocks)});
}

void ConicProgram::require_scalar_inequality(const std::vector<std::pair<VariableHandle, double>>& terms,
                                             double constant, std::string label, double margin) {
    AffineMatrix expr(1);
    Matrix c(1, 1);
    c(0, 0) = constant;
    expr.add_constant(0, 0, c);
    for (const auto& [v, coeff] : terms) {
        if (v.kind != VariableHandle::Kind::Scalar) {
            throw Error("scalar inequality term on non-scalar variable");
        }
        expr.add_linear(0, 0, v, coeff);
    }
    require_negative_semidefinite(std::move(expr), std::move(label), margin);
}

double ConicProgram::data_magnitude() const {
    double mag = 0.0;
    for (const auto& c : constraints_) {
        mag = std::max(mag, c.expr.constant().cwiseAbs().maxCoeff());
        for (const auto& [s, coeff] : c.expr.coefficients()) {
            mag = std::max(mag, coeff.cwiseAbs().maxCoeff());
        }
    }
    return mag;
}

std::string ConicProgram::dump() const {
    std::ostringstream os;
    os << "scalars " << scalar_count_ << "\n";
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        const auto& v = variables_[i];
        os << "var " << names_[i] << " kind "
           << (v.kind == VariableHandle::Kind::Symmetric
                   ? "sym"
                   : (v.kind == VariableHandle::Kind::Rectangular ? "rect" : "scalar"))
           << " " << v.rows << "x" << v.cols << " offset " << v.offset << "\n";
    }
    for (const auto& c : constraints_) {
        os << "constraint '" << c.label << "' dim " << c.expr.dim() << " margin " << c.margin << "\n";
        os << "  const:\n" << c.expr.constant() << "\n";
        for (const auto& [s, coeff] : c.expr.coefficients()) {
            os << "  d/dx[" << s << "]:\n" << coeff << "\n";
        }
    }
    return os.str();
}

std::string ConicProgram::dump_sdpa() const {
    std::ostringstream os;
    os << "\"feasibility program, " << constraints_.size() << " blocks\"\n";
    os << scalar_count_ << " = mDIM\n";
    os << constraints_.size() << " = nBLOCK\n";
    for (std::size_t b = 0; b < constraints_.size(); ++b) {
        os << constraints_[b].expr.dim() << (b + 1 < constraints_.size() ? " " : "");
    }
    os << " = bLOCKsTRUCT\n";
    for (int s = 0; s < scalar_count_; ++s) os << "0" << (s + 1 < scalar_count_ ? " " : "");
    os << "\n";
    // F0 = constant + margin I; Fi = -coefficient, upper triangles only
    for (std::size_t b = 0; b < constraints_.size(); ++b) {
        const auto& c = constraints_[b];
        const Matrix f0 = c.expr.constant() + c.margin * Matrix::Identity(c.expr.dim(), c.expr.dim());
        for (int i = 0; i < c.expr.dim(); ++i) {
            for (int j = i; j < c.expr.dim(); ++j) {
                if (f0(i, j) != 0.0) {
                    os << "0 " << b + 1 << " " << i + 1 << " " << j + 1 << " " << f0(i, j) << "\n";
                }
            }
        }
        for (const auto& [s, coeff] : c.expr.coefficients()) {
            for (int i = 0; i < c.expr.dim(); ++i) {
                for (int j = i; j < c.expr.dim(); ++j) {
                    if (coeff(i, j) != 0.0) {
                        os << s + 1 << " " << b + 1 << " " << i + 1 << " " << j + 1 << " "
                           << -coeff(i, j) << "\n";
                    }
                }
            }
        }
    }
    return os.str();
}

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Feasible: return "feasible";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::SolverFailure: return "solver-failure";
    }
    return "unknown";
}

} // namespace jumpsyn
