// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#include "lstab/linear_solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <sstream>
#include <stdexcept>

namespace lstab {

struct FactorizedOperator::Impl {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
};

FactorizedOperator::FactorizedOperator(const SparseMatrix& matrix) : impl_(new Impl) {
  impl_->lu.compute(matrix);
  if (impl_->lu.info() != Eigen::Success)
    throw std::runtime_error("FactorizedOperator: singular matrix (" +
                             std::string(impl_->lu.lastErrorMessage()) + ")");
}
FactorizedOperator::~FactorizedOperator() = default;
FactorizedOperator::FactorizedOperator(FactorizedOperator&&) noexcept = default;
FactorizedOperator& FactorizedOperator::operator=(FactorizedOperator&&) noexcept = default;

Vector FactorizedOperator::solve(const Vector& rhs) const {
  Vector x = impl_->lu.solve(rhs);
  if (impl_->lu.info() != Eigen::Success)
    throw std::runtime_error("FactorizedOperator: back-substitution failed");
  return x;
}

Vector solve(const LinearSystem& system, SolverReport* report, SolverMethod method) {
  if (system.matrix.rows() != system.matrix.cols() || system.matrix.rows() != system.rhs.size())
    throw std::invalid_argument("solve: system is not square");

  Vector x;
  long factor_nnz = 0;
  int iterations = 0;
  if (method == SolverMethod::direct) {
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(system.matrix);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("solve: factorization failed (" +
                               std::string(lu.lastErrorMessage()) + ")");
    x = lu.solve(system.rhs);
    if (lu.info() != Eigen::Success) throw std::runtime_error("solve: back-substitution failed");
    factor_nnz = lu.nnzL() + lu.nnzU();
  } else {
    Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<double>> it;
    it.setTolerance(1e-12);
    it.setMaxIterations(2000);
    it.compute(system.matrix);
    x = it.solve(system.rhs);
    iterations = static_cast<int>(it.iterations());
    if (it.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "solve: iterative solver did not converge, achieved residual " << it.error();
      throw std::runtime_error(msg.str());
    }
  }

  const double bnorm = system.rhs.norm();
  const double res = (system.rhs - system.matrix * x).norm() / (bnorm > 0 ? bnorm : 1.0);
  if (!std::isfinite(res)) throw std::runtime_error("solve: non-finite solution");
  if (report) {
    report->relative_residual = res;
    report->factor_nonzeros = factor_nnz;
    report->iterations = iterations;
  }
  return x;
}

}  // namespace lstab
