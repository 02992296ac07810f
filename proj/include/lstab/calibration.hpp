// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LSTAB_CALIBRATION_HPP
#define LSTAB_CALIBRATION_HPP

#include "lstab/assembly.hpp"
#include "lstab/tau_formulas.hpp"

#include <memory>
#include <string>
#include <vector>

namespace lstab {

/// A constant-coefficient training instance together with everything the
/// least-squares fit needs: the method being calibrated, the reference
/// configuration and the bracket [alpha_min h^2, alpha_max h^2].
///
/// alpha_min = alpha_max = 0 selects the instance-adaptive bracket: the span
/// of the five analytic coefficient formulas for this instance, widened by a
/// factor of 100 on each side.
struct CalibrationProblem {
  std::shared_ptr<const FiniteElementSpace> space;  // coarse
  ProblemSpec problem;                              // constant a and mu
  StabilizationMethod method = StabilizationMethod::term_by_term();
  TauFormula reference_formula = TauFormula::analytic(TauFormula::Kind::codina);
  int fine_factor = 0;       // 0 -> 10/6/4 for degree 1/2/3
  double alpha_min = 0;
  double alpha_max = 0;
  bool use_derivatives = true;
  double grad_tol_scale = 1e-12;  // grad_tol = scale * sqrt(J at the start point)
  double tau_tol = 1e-8;          // bracket width tolerance, relative to h^2

  int effective_fine_factor() const;
  double h_effective() const;  // effective mesh length entering the bracket and phi
};

struct CalibrationIterate {
  double tau = 0, J = 0, Jp = 0, Jpp = 0;
};

struct CalibrationResult {
  double tau_opt = 0;
  double J_min = 0;
  double phi = 0;  // ||a|| tau_opt / h_eff
  double tau_min = 0, tau_max = 0;
  std::vector<CalibrationIterate> trace;
  bool boundary_hit = false;
  int evaluations = 0;
};

/// The bracket [tau_min, tau_max] for this instance.
std::pair<double, double> calibration_bracket(const CalibrationProblem& calib);

/// High-fidelity reference: the same stabilized method on the coarse mesh
/// refined by fine_factor, with coefficients from reference_formula.
DiscreteFunction reference_solution(const CalibrationProblem& calib);

/// J(tau) = 1/2 || u_h(tau) - Pi_h(reference) ||_0^2 on the coarse space.
double functional_J(double tau, const CalibrationProblem& calib, const DiscreteFunction& reference);

/// z_h = d u_h / d tau: same matrix as the state solve, right-hand side from
/// differentiating the discrete system exactly (the consistency term of
/// residual methods contributes (f, Q v); term-by-term has none).
DiscreteFunction sensitivity_z(double tau, const DiscreteFunction& u_h,
                               const CalibrationProblem& calib);

/// w_h = d^2 u_h / d tau^2, right-hand side -2 (P z_h, Q v).
DiscreteFunction sensitivity_w(double tau, const DiscreteFunction& z_h,
                               const CalibrationProblem& calib);

struct JDerivatives {
  double J = 0, Jp = 0, Jpp = 0;
};

/// J'  = (u_h - Pi_h u, z_h),  J'' = ||z_h||^2 + (u_h - Pi_h u, w_h),
/// both in the quadrature L2 pairing.
JDerivatives derivatives_J(double tau, const CalibrationProblem& calib,
                           const DiscreteFunction& reference);

/// Safeguarded Newton on J' with bisection fallback; golden-section search
/// on J when use_derivatives is false.
CalibrationResult minimize_J(const CalibrationProblem& calib, const DiscreteFunction& reference);

struct TrainingOptions {
  int cells = 0;        // 0 -> 40/degree per side
  int fine_factor = 0;  // 0 -> per-degree default
  StabilizationMethod method = StabilizationMethod::term_by_term();
  std::string reference_formula;  // "" -> "1d" in 1D, "codina" in 2D
};

/// Constant-coefficient training instance realizing the requested Peclet
/// node: unit interval/square, unit velocity along peclet's direction,
/// mu = h_eff / (2 ||peclet||), f = 1 (1D) or sin(pi x) cos(pi y) (2D).
CalibrationProblem make_training_problem(int dimension, int degree, const Vector& peclet,
                                         const TrainingOptions& options = {});

/// Default training cell count per side (40 for P1, scaled by degree).
int default_training_cells(int degree);

}  // namespace lstab

#endif
