// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LSTAB_FE_SPACE_HPP
#define LSTAB_FE_SPACE_HPP

#include "lstab/mesh.hpp"
#include "lstab/quadrature.hpp"

#include <memory>
#include <vector>

namespace lstab {

/// Conforming Lagrange space P_l (l = 1,2,3) on a triangulation.
///
/// DOFs are numbered deterministically: mesh vertices first, then (l-1)
/// nodes per edge walked from the lower- to the higher-numbered vertex,
/// then element-interior nodes in element order.
class FiniteElementSpace {
 public:
  std::shared_ptr<const Mesh> mesh;
  int degree = 1;
  Matrix dof_coords;            // num_dofs x dimension
  Eigen::MatrixXi element_dofs; // num_elements x local_dof_count
  std::vector<int> dirichlet_dofs;  // sorted: all DOFs supported on the boundary

  int num_dofs() const { return static_cast<int>(dof_coords.rows()); }
  int local_dof_count() const { return static_cast<int>(element_dofs.cols()); }
  Point dof_point(int i) const;
  bool is_dirichlet(int i) const;
};

FiniteElementSpace build_space(std::shared_ptr<const Mesh> mesh, int degree);

/// Values and derivatives of all local basis functions at reference
/// (barycentric) points, tabulated once per quadrature rule.
struct BasisTable {
  Matrix values;                 // npts x ndof
  std::vector<Matrix> d_lambda;  // nverts entries, each npts x ndof
  std::vector<Matrix> d2_lambda; // nverts*nverts entries (m*nverts+n), npts x ndof
  int nverts = 3;
};
BasisTable tabulate_basis(int dimension, int degree, const Matrix& bary_points);

/// Affine geometry of one element: constant barycentric gradients and the
/// element measure.
struct ElementMap {
  Matrix grad_lambda;  // nverts x dimension
  double measure = 0;  // area (2D) or length (1D)
};
ElementMap element_map(const Mesh& mesh, int k);

/// Values and physical gradients of the local basis at one barycentric point.
struct BasisPointEval {
  Vector values;
  Matrix gradients;  // ndof x dimension
};
BasisPointEval eval_basis(const FiniteElementSpace& space, int element, const Vector& bary);

/// Coefficient vector over a space; Lagrange coefficients are point values.
struct DiscreteFunction {
  std::shared_ptr<const FiniteElementSpace> space;
  Vector values;
};

/// Lagrange interpolation: coefficient i = f(dof_coords[i]). Dirichlet
/// values are not touched here; constraining is the caller's business.
DiscreteFunction interpolate(std::shared_ptr<const FiniteElementSpace> space, const ScalarField& f);

/// Point evaluation of a discrete function, with an owning locator so the
/// evaluator can be treated as a plain scalar field.
class FieldEvaluator {
 public:
  explicit FieldEvaluator(DiscreteFunction fn);
  double operator()(const Point& p) const;
  const DiscreteFunction& function() const { return fn_; }

 private:
  DiscreteFunction fn_;
  MeshLocator locator_;
};

/// Lagrange interpolation of a (usually finer) discrete function onto
/// `space`: each DOF takes the pointwise value of `from` at its node.
DiscreteFunction interpolate_onto(std::shared_ptr<const FiniteElementSpace> space,
                                  const DiscreteFunction& from);

/// Consistent mass matrix (exact for 2*degree).
SparseMatrix mass_matrix(const FiniteElementSpace& space);

/// L2 norm sqrt(v' M v) of a coefficient vector over the space.
double l2_norm(const FiniteElementSpace& space, const Vector& coeffs);

}  // namespace lstab

#endif
