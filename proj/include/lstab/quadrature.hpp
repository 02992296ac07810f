// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LSTAB_QUADRATURE_HPP
#define LSTAB_QUADRATURE_HPP

#include "lstab/types.hpp"

namespace lstab {

/// Reference-element quadrature. Points are stored in barycentric
/// coordinates (3 per triangle, 2 per segment); weights sum to the
/// reference measure (1/2 for the triangle, 1 for the unit segment).
struct QuadratureRule {
  Matrix points;
  Vector weights;
  int exactness = 0;  // highest polynomial degree integrated exactly
  int num_points() const { return static_cast<int>(points.rows()); }
};

enum class QuadraturePurpose { mass, stiffness, stabilization };

/// Smallest tabulated symmetric triangle rule exact to >= order.
QuadratureRule triangle_rule(int order);

/// Gauss-Legendre rule on [0,1], exact to >= order.
QuadratureRule interval_rule(int order);

/// Rule used for a given (dimension, degree, purpose). Orders are fixed per
/// pair: mass/stiffness need 2l, stabilization terms with second derivatives
/// need 2(l-1)+2 = 2l as well, so everything shares the 2l budget.
QuadratureRule quadrature_for(int dimension, int degree, QuadraturePurpose purpose);

}  // namespace lstab

#endif
