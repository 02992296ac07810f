// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LSTAB_PROBLEM_HPP
#define LSTAB_PROBLEM_HPP

#include "lstab/types.hpp"

#include <stdexcept>
#include <string>

namespace lstab {

/// Per-element stabilization coefficients (units of time), >= 0 and finite.
using TauField = Vector;

/// One advection-diffusion instance: a . grad u - div(mu grad u) = f with
/// Dirichlet data on the whole boundary. The assembled variational form is
/// (a . grad u, v) + (mu grad u, grad v) = (f, v).
struct ProblemSpec {
  VectorField velocity = constant_velocity(Point::Zero());
  ScalarField diffusion = constant_field(1.0);
  ScalarField source = constant_field(0.0);
  ScalarField dirichlet_value = constant_field(0.0);
};

/// Which stabilization operators (P, Q) multiply tau_K, and whether the
/// right-hand side carries the consistency term s_h(f, Q(v)).
///
/// residual kinds:  P(u) = a.grad u - mu lap u,  Q(v) = a.grad v + eps mu lap v
///   eps = -1 least-squares, 0 streamline upwind, +1 adjoint
/// term-by-term:    P(u) = Q(u) = a.grad u, plain right-hand side.
struct StabilizationMethod {
  enum class Kind { residual, term_by_term };
  Kind kind = Kind::term_by_term;
  int epsilon = 0;
  bool rhs_stabilized = false;

  static StabilizationMethod residual(int eps) {
    if (eps < -1 || eps > 1)
      throw std::invalid_argument("StabilizationMethod: epsilon must be -1, 0 or 1");
    return {Kind::residual, eps, true};
  }
  static StabilizationMethod term_by_term() { return {Kind::term_by_term, 0, false}; }

  std::string name() const {
    if (kind == Kind::term_by_term) return "tbt";
    return epsilon == -1 ? "gls" : (epsilon == 0 ? "supg" : "adjoint");
  }
  static StabilizationMethod by_name(const std::string& name) {
    if (name == "tbt") return term_by_term();
    if (name == "gls") return residual(-1);
    if (name == "supg") return residual(0);
    if (name == "adjoint") return residual(1);
    throw std::invalid_argument("unknown stabilization kind `" + name + "`");
  }
};

}  // namespace lstab

#endif
