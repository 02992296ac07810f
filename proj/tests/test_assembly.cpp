// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <random>
#include <sstream>

#include "lstab/assembly.hpp"
#include "lstab/linear_solver.hpp"
#include "test_util.hpp"

using namespace lstab;

namespace {

std::shared_ptr<const Mesh> unit_square(int n) {
  return std::make_shared<Mesh>(build_structured(Box{}, n, n));
}

Matrix dense(const SystemContribution& contrib) {
  Matrix full = Matrix::Zero(contrib.n, contrib.n);
  for (const Triplet& t : contrib.triplets) full(t.row(), t.col()) += t.value();
  return full;
}

/// 1D stabilized model problem; exact solution x - (1-exp(x/mu))/(1-exp(1/mu)).
DiscreteFunction solve_1d_model(int n, double mu, double tau_value) {
  auto mesh = std::make_shared<Mesh>(build_interval(0, 1, n));
  auto space = std::make_shared<FiniteElementSpace>(build_space(mesh, 1));
  ProblemSpec problem;
  problem.velocity = constant_velocity(Point(1, 0));
  problem.diffusion = constant_field(mu);
  problem.source = constant_field(1.0);
  const TauField tau = TauField::Constant(mesh->num_elements(), tau_value);
  return solve_stabilized(space, problem, StabilizationMethod::term_by_term(), tau);
}

}  // namespace

TEST_CASE("P1 stiffness of the reference right triangle") {
  std::istringstream in("mesh 2 3 1\n0 0\n1 0\n0 1\n1 2 3\n");
  auto mesh = std::make_shared<Mesh>(import_mesh(in));
  const FiniteElementSpace space = build_space(mesh, 1);
  const Matrix K = dense(assemble_diffusion(space, constant_field(1.0)));
  Matrix expected(3, 3);
  expected << 1.0, -0.5, -0.5, -0.5, 0.5, 0.0, -0.5, 0.0, 0.5;
  CHECK((K - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("load vector for f = 1: each basis integrates adjacent area / 3") {
  auto mesh = unit_square(1);
  const FiniteElementSpace space = build_space(mesh, 1);
  const Vector rhs = assemble_load(space, constant_field(1.0));
  // corner vertices touch one triangle (area 1/2), diagonal vertices touch two
  Vector expected(4);
  for (int i = 0; i < 4; ++i) {
    double adjacent = 0;
    for (int k = 0; k < mesh->num_elements(); ++k)
      for (int a = 0; a < 3; ++a)
        if (mesh->elements(k, a) == i) adjacent += element_geometry(*mesh, k).area;
    expected[i] = adjacent / 3.0;
  }
  CHECK((rhs - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("advection block skew-symmetry on interior DOFs") {
  auto mesh = unit_square(6);
  const FiniteElementSpace space = build_space(mesh, 2);
  const Point a(3.0, -2.0);
  const Matrix C = dense(assemble_advection(space, constant_velocity(a)));
  double worst = 0;
  for (int i = 0; i < space.num_dofs(); ++i) {
    if (space.is_dirichlet(i)) continue;
    for (int j = 0; j < space.num_dofs(); ++j) {
      if (space.is_dirichlet(j)) continue;
      worst = std::max(worst, std::abs(C(i, j) + C(j, i)));
    }
  }
  CHECK(worst <= 1e-12 * a.norm() * (std::sqrt(2.0) / 6.0));
}

TEST_CASE("zero tau: stabilization contributes nothing") {
  auto mesh = unit_square(3);
  const FiniteElementSpace space = build_space(mesh, 1);
  ProblemSpec problem;
  problem.velocity = constant_velocity(Point(2, 1));
  problem.diffusion = constant_field(0.01);
  problem.source = constant_field(1.0);

  const TauField zero = TauField::Zero(mesh->num_elements());
  const SystemContribution stab =
      assemble_stabilization(space, problem, StabilizationMethod::residual(0), zero);
  CHECK(stab.triplets.empty());
  CHECK(stab.rhs.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("P1: residual and term-by-term stabilization matrices coincide") {
  auto mesh = unit_square(4);
  const FiniteElementSpace space = build_space(mesh, 1);
  ProblemSpec problem;
  problem.velocity = constant_velocity(Point(1.5, 0.5));
  problem.diffusion = constant_field(0.02);
  problem.source = constant_field(1.0);
  const TauField tau = TauField::Constant(mesh->num_elements(), 0.37);

  const Matrix tbt =
      dense(assemble_stabilization(space, problem, StabilizationMethod::term_by_term(), tau));
  for (int eps : {-1, 0, 1}) {
    const Matrix res =
        dense(assemble_stabilization(space, problem, StabilizationMethod::residual(eps), tau));
    CHECK((tbt - res).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("constant-velocity P1 stabilization equals the streamline mass oracle") {
  auto mesh = unit_square(2);
  const FiniteElementSpace space = build_space(mesh, 1);
  const Point a(1.0, 0.0);
  const double tau_value = 0.123;
  ProblemSpec problem;
  problem.velocity = constant_velocity(a);
  problem.diffusion = constant_field(1.0);
  const TauField tau = TauField::Constant(mesh->num_elements(), tau_value);
  const Matrix S =
      dense(assemble_stabilization(space, problem, StabilizationMethod::term_by_term(), tau));

  // independent dense assembly: P1 gradients from the rotated-edge formula,
  // (a.grad phi_j)(a.grad phi_i) constant per element
  Matrix oracle = Matrix::Zero(space.num_dofs(), space.num_dofs());
  for (int k = 0; k < mesh->num_elements(); ++k) {
    const ElementGeometry g = element_geometry(*mesh, k);
    Eigen::Matrix<double, 3, 2> grad;
    for (int i = 0; i < 3; ++i) {
      const Point e = g.vertex[(i + 2) % 3] - g.vertex[(i + 1) % 3];
      grad.row(i) = Point(-e.y(), e.x()).transpose() / (2.0 * g.area);
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        oracle(mesh->elements(k, i), mesh->elements(k, j)) +=
            tau_value * g.area * (grad.row(j) * a)(0) * (grad.row(i) * a)(0);
  }
  CHECK((S - oracle).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("least-squares stabilization matrix is PSD") {
  auto mesh = unit_square(3);
  const FiniteElementSpace space = build_space(mesh, 2);
  ProblemSpec problem;
  problem.velocity = constant_velocity(Point(1.0, 0.7));
  problem.diffusion = constant_field(0.05);
  const TauField tau = TauField::Constant(mesh->num_elements(), 0.01);
  const Matrix S =
      dense(assemble_stabilization(space, problem, StabilizationMethod::residual(-1), tau));
  CHECK((S - S.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (S + S.transpose()));
  CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("term-by-term form is positive semidefinite in the field of values") {
  auto mesh = unit_square(3);
  const FiniteElementSpace space = build_space(mesh, 1);
  ProblemSpec problem;
  problem.velocity = constant_velocity(Point(-2.0, 1.0));
  problem.diffusion = constant_field(1.0);
  const TauField tau = TauField::Constant(mesh->num_elements(), 0.05);
  const Matrix S =
      dense(assemble_stabilization(space, problem, StabilizationMethod::term_by_term(), tau));
  std::mt19937 rng(5);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 20; ++trial) {
    Vector v(space.num_dofs());
    for (int i = 0; i < v.size(); ++i) v[i] = dist(rng);
    CHECK(v.dot(S * v) >= -1e-12 * v.squaredNorm());
  }
}

TEST_CASE("negative tau and non-positive diffusion are rejected") {
  auto mesh = unit_square(2);
  const FiniteElementSpace space = build_space(mesh, 1);
  ProblemSpec problem;
  TauField tau = TauField::Constant(mesh->num_elements(), 0.1);
  tau[3] = -1e-10;
  CHECK_THROWS_AS(
      assemble_stabilization(space, problem, StabilizationMethod::term_by_term(), tau),
      std::invalid_argument);

  ProblemSpec bad;
  bad.diffusion = [](const Point& p) { return p.x() - 0.4; };
  CHECK_THROWS_WITH_AS(assemble_diffusion(space, bad.diffusion),
                       doctest::Contains("quadrature point"), std::runtime_error);
}

TEST_CASE("Dirichlet: all-boundary mesh reproduces boundary values exactly") {
  auto mesh = unit_square(1);
  auto space = std::make_shared<FiniteElementSpace>(build_space(mesh, 1));
  ProblemSpec problem;
  problem.diffusion = constant_field(1.0);
  problem.dirichlet_value = [](const Point& p) { return 1.0 + 2.0 * p.x() - p.y(); };
  const TauField tau = TauField::Zero(mesh->num_elements());
  const DiscreteFunction u = solve_stabilized(space, problem, StabilizationMethod::term_by_term(), tau);
  for (int i = 0; i < space->num_dofs(); ++i)
    CHECK(u.values[i] == doctest::Approx(problem.dirichlet_value(space->dof_point(i))).epsilon(1e-14));
}

TEST_CASE("homogeneous data: constrained entries are exactly zero") {
  auto mesh = unit_square(3);
  auto space = std::make_shared<FiniteElementSpace>(build_space(mesh, 2));
  ProblemSpec problem;
  problem.velocity = constant_velocity(Point(1, 0));
  problem.diffusion = constant_field(0.1);
  problem.source = constant_field(1.0);
  const TauField tau = TauField::Constant(mesh->num_elements(), 0.01);
  const DiscreteFunction u = solve_stabilized(space, problem, StabilizationMethod::term_by_term(), tau);
  for (int dof : space->dirichlet_dofs) CHECK(u.values[dof] == 0.0);
}

TEST_CASE("column elimination matches the row-only oracle on the interior") {
  auto mesh = unit_square(4);
  auto space = std::make_shared<FiniteElementSpace>(build_space(mesh, 1));
  ProblemSpec problem;
  problem.diffusion = constant_field(1.0);
  problem.source = constant_field(1.0);
  problem.dirichlet_value = [](const Point& p) { return p.x() * p.y(); };

  const SystemContribution contrib = assemble_galerkin(*space, problem);
  const LinearSystem sys = apply_dirichlet(contrib, *space, problem.dirichlet_value);
  const Vector x = solve(sys);

  // oracle: replace rows only, keep columns
  Matrix full = dense(contrib);
  Vector rhs = contrib.rhs;
  for (int dof : space->dirichlet_dofs) {
    full.row(dof).setZero();
    full(dof, dof) = 1.0;
    rhs[dof] = problem.dirichlet_value(space->dof_point(dof));
  }
  const Vector y = full.fullPivLu().solve(rhs);
  CHECK((x - y).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("1D nodal exactness with the optimal coefficient") {
  const double mu = 0.3;
  const int n = 20;
  const double h = 1.0 / n;
  const double pe = h / (2.0 * mu);
  const double tau = mu * (pe / std::tanh(pe) - 1.0);  // a = 1
  const DiscreteFunction u = solve_1d_model(n, mu, tau);
  for (int i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i) / n;
    const double exact = x - (1.0 - std::exp(x / mu)) / (1.0 - std::exp(1.0 / mu));
    CHECK(u.values[i] == doctest::Approx(exact).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("tau = 0 equals the pure Galerkin solve bitwise") {
  auto mesh = unit_square(4);
  auto space = std::make_shared<FiniteElementSpace>(build_space(mesh, 1));
  ProblemSpec problem;
  problem.velocity = constant_velocity(Point(0.5, 0.2));
  problem.diffusion = constant_field(1.0);
  problem.source = constant_field(1.0);

  const TauField zero = TauField::Zero(mesh->num_elements());
  const DiscreteFunction stabilized =
      solve_stabilized(space, problem, StabilizationMethod::term_by_term(), zero);

  const SystemContribution galerkin = assemble_galerkin(*space, problem);
  const LinearSystem sys = apply_dirichlet(galerkin, *space, problem.dirichlet_value);
  const Vector direct = solve(sys);
  CHECK(lstab::testing::bitwise_equal(stabilized.values, direct));  // bitwise
}

TEST_CASE("stabilized 2D solve has a small solver residual") {
  auto mesh = unit_square(40);
  auto space = std::make_shared<FiniteElementSpace>(build_space(mesh, 1));
  ProblemSpec problem;
  problem.velocity = constant_velocity(Point(400 * std::sqrt(2.0), 0.0));
  problem.diffusion = constant_field(1.0);
  problem.source = [](const Point& p) { return std::sin(M_PI * p.x()) * std::cos(M_PI * p.y()); };
  const ElementGeometry g = element_geometry(*mesh, 0);
  const TauField tau = TauField::Constant(
      mesh->num_elements(), g.h_K / (2.0 * 400 * std::sqrt(2.0)));
  SolverReport report;
  const DiscreteFunction u =
      solve_stabilized(space, problem, StabilizationMethod::term_by_term(), tau, &report);
  CHECK(report.relative_residual <= 1e-10);
  CHECK(u.values.cwiseAbs().maxCoeff() < 1e3);
  CHECK(std::isfinite(u.values.cwiseAbs().maxCoeff()));
}
