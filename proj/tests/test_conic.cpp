#include <doctest.h>

#include <random>

#include "jumpsyn/conic.hpp"

using namespace jumpsyn;

TEST_SUITE_BEGIN("conic");

namespace {

Matrix scalar1(double v) {
    Matrix m(1, 1);
    m << v;
    return m;
}

// programs used by the contract examples, with all data scaled by `s`
ConicProgram upper_bound_program(double s) {
    ConicProgram p;
    const VariableHandle y = p.scalar_variable("y");
    AffineMatrix expr(1);
    expr.add_linear(0, 0, y, s);
    expr.add_constant(0, 0, scalar1(-2.0 * s));
    p.require_negative_semidefinite(std::move(expr), "y-2<=-eps", 0.1 * s);
    return p;
}

ConicProgram contradiction_program(double s) {
    ConicProgram p;
    const VariableHandle y = p.scalar_variable("y");
    p.require_scalar_inequality({{y, -s}}, 3.0 * s, "y>=3");
    p.require_scalar_inequality({{y, s}}, -2.0 * s, "y<=2");
    return p;
}

ConicProgram schur_program(double s) {
    ConicProgram p;
    const VariableHandle y = p.scalar_variable("y");
    AffineMatrix expr(2);
    expr.add_linear(0, 0, y, -s);
    expr.add_constant(0, 1, scalar1(s));
    expr.add_constant(1, 1, scalar1(-s));
    p.require_negative_semidefinite(std::move(expr), "schur");
    return p;
}

} // namespace

TEST_CASE("scalar cone returns a point satisfying the shifted bound") {
    const SolveResult r = solve_feasibility(upper_bound_program(1.0));
    REQUIRE(r.status == SolveStatus::Feasible);
    CHECK(r.x(0) <= 1.9);
}

TEST_CASE("contradictory scalar bounds are infeasible with a report") {
    const SolveResult r = solve_feasibility(contradiction_program(1.0));
    REQUIRE(r.status == SolveStatus::Infeasible);
    CHECK(r.message.find("unsatisfied") != std::string::npos);
}

TEST_CASE("2x2 schur block forces y at least one") {
    const SolveResult r = solve_feasibility(schur_program(1.0));
    REQUIRE(r.status == SolveStatus::Feasible);
    CHECK(r.x(0) >= 1.0 - 1e-9);
    // returned assignment satisfies the block by eigensolve
    Matrix m(2, 2);
    m << -r.x(0), 1, 1, -1;
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    CHECK(es.eigenvalues().maxCoeff() <= 1e-9);
}

TEST_CASE("scaling all constraint data by ten flips no verdicts") {
    CHECK(solve_feasibility(upper_bound_program(10.0)).status == SolveStatus::Feasible);
    CHECK(solve_feasibility(contradiction_program(10.0)).status == SolveStatus::Infeasible);
    CHECK(solve_feasibility(schur_program(10.0)).status == SolveStatus::Feasible);
}

TEST_CASE("assignments pass a dense eigensolve recheck on every constraint") {
    // random small SDPs that are feasible by construction
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        ConicProgram p;
        const VariableHandle Y = p.symmetric_variable(3, "Y");
        AffineMatrix lower(3);
        lower.add_linear(0, 0, Y, -1.0); // Y >= eps I
        p.require_negative_semidefinite(std::move(lower), "pos", 1e-6);
        Matrix G(3, 3);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) G(i, j) = unif(gen);
        }
        AffineMatrix upper(3);
        upper.add_linear(0, 0, Y, 1.0);
        upper.add_constant(0, 0, Matrix(-(G * G.transpose() + Matrix::Identity(3, 3))));
        p.require_negative_semidefinite(std::move(upper), "cap", 1e-6);
        const SolveResult r = solve_feasibility(p);
        REQUIRE(r.status == SolveStatus::Feasible);
        for (const auto& m : r.margins) CHECK(m.max_eigenvalue <= m.required + 1e-7);
    }
}

TEST_CASE("structural scan names the offending diagonal block") {
    ConicProgram p;
    const VariableHandle y = p.scalar_variable("y");
    AffineMatrix expr(3);
    expr.add_linear(0, 0, y, -1.0);
    expr.add_constant(1, 1, Matrix::Identity(2, 2)); // constant +I block
    p.require_negative_semidefinite(std::move(expr), "printed-block", 1e-7,
                                    {{"head", 1}, {"tail", 2}});
    const SolveResult r = solve_feasibility(p);
    REQUIRE(r.status == SolveStatus::Infeasible);
    CHECK(r.message.find("structurally infeasible") != std::string::npos);
    CHECK(r.message.find("tail") != std::string::npos);
}

TEST_CASE("unsymmetric expressions are rejected at construction") {
    ConicProgram p;
    const VariableHandle Y = p.symmetric_variable(2, "Y");
    AffineMatrix expr(2);
    Matrix a(2, 2);
    a << 0, 1, 0, 0;
    expr.add_constant(0, 0, a); // verbatim diagonal placement, not symmetric
    CHECK_THROWS_AS(p.require_negative_semidefinite(std::move(expr), "bad"), Error);
    (void)Y;
}

TEST_CASE("sparse dump lists every block and entry") {
    ConicProgram p = schur_program(1.0);
    const std::string text = p.dump_sdpa();
    CHECK(text.find("1 = mDIM") != std::string::npos);
    CHECK(text.find("1 = nBLOCK") != std::string::npos);
    CHECK(text.find("2 = bLOCKsTRUCT") != std::string::npos);
    // the variable coefficient -(-1) on the (1,1) entry
    CHECK(text.find("1 1 1 1 1\n") != std::string::npos);
}

TEST_CASE("symmetric variable round-trips through basis and value") {
    ConicProgram p;
    const VariableHandle Y = p.symmetric_variable(3, "Y");
    Vector x = Vector::Zero(p.scalar_count());
    Matrix target(3, 3);
    target << 1, 2, 4, 2, 3, 5, 4, 5, 6;
    // fill scalars via the basis convention and read the matrix back
    int s = 0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j <= i; ++j) x(Y.offset + s++) = target(i, j);
    }
    CHECK((Y.value(x) - target).cwiseAbs().maxCoeff() == 0.0);
    // the affine evaluation agrees entry by entry
    AffineMatrix expr(3);
    expr.add_linear(0, 0, Y, 1.0);
    CHECK((expr.evaluate(x) - target).cwiseAbs().maxCoeff() == 0.0);
}

TEST_SUITE_END();
