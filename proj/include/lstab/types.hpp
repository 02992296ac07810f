// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LSTAB_TYPES_HPP
#define LSTAB_TYPES_HPP

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>

namespace lstab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Spatial point. 1D meshes use the x component and keep y = 0 so that all
/// downstream modules stay dimension-generic.
using Point = Eigen::Vector2d;

/// Pointwise-evaluable coefficient fields.
using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Point(const Point&)>;

inline ScalarField constant_field(double c) {
  return [c](const Point&) { return c; };
}
inline VectorField constant_velocity(const Point& a) {
  return [a](const Point&) { return a; };
}

}  // namespace lstab

#endif
