// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LSTAB_ASSEMBLY_HPP
#define LSTAB_ASSEMBLY_HPP

#include "lstab/fe_space.hpp"
#include "lstab/problem.hpp"

#include <utility>
#include <vector>

namespace lstab {

/// Unreduced matrix/vector contributions; several can be concatenated
/// before the Dirichlet reduction.
struct SystemContribution {
  int n = 0;
  std::vector<Triplet> triplets;
  Vector rhs;

  void append(const SystemContribution& other);
};

/// Square system ready for the linear solver, with the Dirichlet rows
/// replaced by identity and columns eliminated into the right-hand side.
struct LinearSystem {
  SparseMatrix matrix;
  Vector rhs;
  std::vector<std::pair<int, double>> constraints;  // (dof, value)
};

/// Galerkin form: A[i][j] = (a.grad phi_j, phi_i) + (mu grad phi_j, grad phi_i),
/// rhs[i] = (f, phi_i).
SystemContribution assemble_galerkin(const FiniteElementSpace& space, const ProblemSpec& problem);

/// Individual Galerkin blocks (useful for block-level checks).
SystemContribution assemble_advection(const FiniteElementSpace& space, const VectorField& velocity);
SystemContribution assemble_diffusion(const FiniteElementSpace& space, const ScalarField& mu);
Vector assemble_load(const FiniteElementSpace& space, const ScalarField& f);

/// Stabilization form sum_K tau_K (P phi_j, Q phi_i)_K; for residual kinds
/// the right-hand side also gains sum_K tau_K (f, Q phi_i)_K.
SystemContribution assemble_stabilization(const FiniteElementSpace& space,
                                          const ProblemSpec& problem,
                                          const StabilizationMethod& method,
                                          const TauField& tau);

/// Strong Dirichlet conditions by row replacement and column elimination.
LinearSystem apply_dirichlet(const SystemContribution& system, const FiniteElementSpace& space,
                             const ScalarField& value);

struct SolverReport;  // linear_solver.hpp

/// assemble -> constrain -> solve. A zero tau field reduces to the pure
/// Galerkin path (the stabilization assembly is skipped entirely).
DiscreteFunction solve_stabilized(std::shared_ptr<const FiniteElementSpace> space,
                                  const ProblemSpec& problem, const StabilizationMethod& method,
                                  const TauField& tau, SolverReport* report = nullptr);

}  // namespace lstab

#endif
