// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LSTAB_BENCHMARKS_HPP
#define LSTAB_BENCHMARKS_HPP

#include "lstab/calibration.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace lstab {

/// L2/Linf distance between a coarse solution and the Lagrange interpolate
/// of a reference solution (usually on a nested refinement).
struct ErrorReport {
  double l2 = 0;
  double linf = 0;  // max over coarse Lagrange nodes
};
ErrorReport error_norms(const DiscreteFunction& u_h, const DiscreteFunction& u_ref);

/// Quadrature L2 distance to a pointwise-evaluable exact solution; each
/// element is subdivided `subdivisions` times per axis to push the rule past
/// the discretization order.
double l2_error_vs_exact(const DiscreteFunction& u_h, const ScalarField& exact, int subdivisions = 2);

/// One output record; aggregate rows carry "MEAN" in param1.
struct BenchRow {
  std::string formula;
  int degree = 1;
  std::string test;
  std::string param1;
  std::string param2;
  double l2 = 0;
  double linf = 0;
};
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

/// Row-order-independent lookup of the overall mean for one formula.
const BenchRow* find_mean_row(const std::vector<BenchRow>& rows, const std::string& formula);

// -- problem catalog ---------------------------------------------------------

/// Constant velocity (k sqrt2 cos(n pi/10), k sqrt2 sin(n pi/10)) on the unit
/// square, mu = 1, f = sin(pi x) cos(pi y).
ProblemSpec make_test1_problem(int angle_index, double k, double mu = 1.0);

/// Rotational piecewise velocity about (0.5, 0.5) on (0,1)x(0,1/2), f = 1.
ProblemSpec make_test2_problem(double mu);
Point test2_velocity(const Point& p);

// -- sweep harnesses ---------------------------------------------------------

struct Test1Spec {
  int degree = 1;
  int nx = 120;
  std::vector<int> angles = {0, 2, 4, 6, 8, 10, 12, 14, 16, 18};
  std::vector<double> magnitudes = {400, 800, 1600, 3200, 6400, 12800, 25600, 51200, 102400};
  double mu = 1.0;
  int fine_factor = 10;
  StabilizationMethod method = StabilizationMethod::term_by_term();
  TauFormula reference = TauFormula::analytic(TauFormula::Kind::codina);
  int jobs = 1;
};
std::vector<BenchRow> run_test1(const Test1Spec& spec, const std::vector<TauFormula>& formulas);

struct Test2Spec {
  int degree = 1;
  int nx = 96;  // ny = nx/2
  std::vector<double> mu_values = {1.25e-5, 2.5e-5, 5e-5, 1e-4, 2e-4, 4e-4, 8e-4, 1.6e-3};
  int fine_factor = 12;
  StabilizationMethod method = StabilizationMethod::term_by_term();
  TauFormula reference = TauFormula::analytic(TauFormula::Kind::codina);
  int jobs = 1;
};
std::vector<BenchRow> run_test2(const Test2Spec& spec, const std::vector<TauFormula>& formulas);

/// Nodal velocity data for imported meshes, interpolated with P1 inside
/// elements.
struct NodalVelocity {
  Matrix values;  // num_nodes x dim
};
NodalVelocity read_velocity_file(std::istream& in);
void write_velocity_file(std::ostream& out, const NodalVelocity& velocity, int dimension);

struct UnstructuredSpec {
  int degree = 1;
  std::vector<double> mu_values = {5e-6, 7.5e-6, 1e-5, 2.5e-5, 5e-5, 7.5e-5, 1e-4, 2.5e-4, 5e-4};
  int refine_factor = 2;  // reference splits each triangle into factor^2
  std::string source = "zero";  // zero | one | test1
  StabilizationMethod method = StabilizationMethod::term_by_term();
  TauFormula reference = TauFormula::analytic(TauFormula::Kind::codina);
  int jobs = 1;
};
std::vector<BenchRow> run_unstructured(const Mesh& mesh, const NodalVelocity& velocity,
                                       const UnstructuredSpec& spec,
                                       const std::vector<TauFormula>& formulas);

/// Range over elements of the scalar element Peclet number (effective h);
/// multiply by the degree for the raw-diameter convention.
std::pair<double, double> peclet_range(const FiniteElementSpace& space,
                                       const ProblemSpec& problem);

/// Least-squares slope of log L2 error vs log h on a smooth manufactured
/// diffusion-dominated problem (Galerkin, tau = 0), plus the
/// interpolation-only slope.
struct ConvergenceResult {
  std::vector<double> h;
  std::vector<double> l2;
  std::vector<double> interp_l2;
  double slope = 0;
  double interp_slope = 0;
};
ConvergenceResult convergence_study(int degree, const std::vector<int>& nx_list);

}  // namespace lstab

#endif
