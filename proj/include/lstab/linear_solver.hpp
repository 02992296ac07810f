// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LSTAB_LINEAR_SOLVER_HPP
#define LSTAB_LINEAR_SOLVER_HPP

#include "lstab/assembly.hpp"
#include "lstab/types.hpp"

#include <memory>

namespace lstab {

struct SolverReport {
  double relative_residual = 0;  // ||b - A x|| / ||b|| (Euclidean)
  long factor_nonzeros = 0;
  int iterations = 0;  // 0 for the direct path
};

enum class SolverMethod { direct, iterative };

/// Solves the constrained system. Sparse LU by default; BiCGSTAB with an
/// incomplete-LU preconditioner as an optional mode for large sweeps.
/// Throws on singular matrices and on iterative non-convergence.
Vector solve(const LinearSystem& system, SolverReport* report = nullptr,
             SolverMethod method = SolverMethod::direct);

/// A kept LU factorization for solving several right-hand sides against the
/// same matrix (the calibration sensitivities reuse the state matrix).
class FactorizedOperator {
 public:
  explicit FactorizedOperator(const SparseMatrix& matrix);
  ~FactorizedOperator();
  FactorizedOperator(FactorizedOperator&&) noexcept;
  FactorizedOperator& operator=(FactorizedOperator&&) noexcept;

  Vector solve(const Vector& rhs) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace lstab

#endif
