// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#include "lstab/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace lstab {

namespace {

QuadratureRule make_triangle(int npts, int exactness) {
  QuadratureRule rule;
  rule.points.resize(npts, 3);
  rule.weights.resize(npts);
  rule.exactness = exactness;
  return rule;
}

/// Appends a symmetric orbit: (a,b,b) permutations, weight w each
/// (normalized so that all weights sum to 1 before the 1/2 scaling).
int put_orbit3(QuadratureRule& rule, int at, double a, double w) {
  const double b = (1.0 - a) / 2.0;
  rule.points.row(at + 0) << a, b, b;
  rule.points.row(at + 1) << b, a, b;
  rule.points.row(at + 2) << b, b, a;
  rule.weights.segment(at, 3).setConstant(w * 0.5);
  return at + 3;
}

int put_orbit6(QuadratureRule& rule, int at, double a, double b, double w) {
  const double c = 1.0 - a - b;
  const double coords[6][3] = {{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}};
  for (int i = 0; i < 6; ++i) {
    rule.points.row(at + i) << coords[i][0], coords[i][1], coords[i][2];
    rule.weights[at + i] = w * 0.5;
  }
  return at + 6;
}

}  // namespace

QuadratureRule triangle_rule(int order) {
  if (order <= 1) {
    QuadratureRule rule = make_triangle(1, 1);
    rule.points.row(0).setConstant(1.0 / 3.0);
    rule.weights[0] = 0.5;
    return rule;
  }
  if (order <= 2) {
    QuadratureRule rule = make_triangle(3, 2);
    put_orbit3(rule, 0, 2.0 / 3.0, 1.0 / 3.0);
    return rule;
  }
  if (order <= 4) {
    // Dunavant degree 4, 6 points
    QuadratureRule rule = make_triangle(6, 4);
    int at = put_orbit3(rule, 0, 1.0 - 2 * 0.445948490915965, 0.223381589678011);
    put_orbit3(rule, at, 1.0 - 2 * 0.091576213509771, 0.109951743655322);
    return rule;
  }
  if (order <= 6) {
    // Dunavant degree 6, 12 points
    QuadratureRule rule = make_triangle(12, 6);
    int at = put_orbit3(rule, 0, 1.0 - 2 * 0.063089014491502, 0.050844906370207);
    at = put_orbit3(rule, at, 1.0 - 2 * 0.249286745170910, 0.116786275726379);
    put_orbit6(rule, at, 0.310352451033785, 0.053145049844816, 0.082851075618374);
    return rule;
  }
  throw std::invalid_argument("triangle_rule: no tabulated rule of order " + std::to_string(order));
}

QuadratureRule interval_rule(int order) {
  const int n = std::max(1, (order + 2) / 2);  // n-point Gauss exact to 2n-1
  if (n > 5) throw std::invalid_argument("interval_rule: order too high");
  QuadratureRule rule;
  rule.exactness = 2 * n - 1;
  Eigen::VectorXd x(n), w(n);  // on [-1,1]
  switch (n) {
    case 1:
      x << 0.0;
      w << 2.0;
      break;
    case 2:
      x << -1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0);
      w << 1.0, 1.0;
      break;
    case 3:
      x << -std::sqrt(3.0 / 5.0), 0.0, std::sqrt(3.0 / 5.0);
      w << 5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0;
      break;
    case 4: {
      const double a = std::sqrt((3.0 - 2.0 * std::sqrt(6.0 / 5.0)) / 7.0);
      const double b = std::sqrt((3.0 + 2.0 * std::sqrt(6.0 / 5.0)) / 7.0);
      const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
      const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
      x << -b, -a, a, b;
      w << wb, wa, wa, wb;
      break;
    }
    case 5: {
      const double a = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
      const double b = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
      const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
      const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
      x << -b, -a, 0.0, a, b;
      w << wb, wa, 128.0 / 225.0, wa, wb;
      break;
    }
  }
  rule.points.resize(n, 2);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double t = (1.0 + x[i]) / 2.0;
    rule.points.row(i) << 1.0 - t, t;
    rule.weights[i] = w[i] / 2.0;
  }
  return rule;
}

QuadratureRule quadrature_for(int dimension, int degree, QuadraturePurpose purpose) {
  (void)purpose;  // all purposes currently share the 2l order budget
  const int order = std::max(2, 2 * degree);
  return dimension == 1 ? interval_rule(order) : triangle_rule(order);
}

}  // namespace lstab
