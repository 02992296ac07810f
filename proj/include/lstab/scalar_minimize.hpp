// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LSTAB_SCALAR_MINIMIZE_HPP
#define LSTAB_SCALAR_MINIMIZE_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace lstab {

struct MinimizeResult {
  double x = 0;
  double f = 0;
  int evaluations = 0;
  bool boundary_hit = false;
};

/// Golden-section search on [lo, hi]. `tol` is the absolute bracket width
/// at which to stop (plus a relative floor at machine precision).
template <class F>
MinimizeResult golden_section_minimize(F&& f, double lo, double hi, double tol) {
  if (!(hi > lo)) throw std::invalid_argument("golden_section_minimize: empty bracket");
  constexpr double invphi = 0.6180339887498949;
  MinimizeResult res;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  res.evaluations = 2;
  while (b - a > tol + 4e-16 * (std::abs(a) + std::abs(b))) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
    ++res.evaluations;
    if (res.evaluations > 400)
      throw std::runtime_error("golden_section_minimize: too many evaluations");
  }
  if (f1 <= f2) {
    res.x = x1;
    res.f = f1;
  } else {
    res.x = x2;
    res.f = f2;
  }
  res.boundary_hit = (res.x - lo) < tol || (hi - res.x) < tol;
  return res;
}

struct NewtonIterate {
  double x, f, df, d2f;
};

struct NewtonOptions {
  double grad_tol = 0;       // stop when |f'| <= grad_tol
  double width_tol = 0;      // stop when bracket width <= width_tol
  int max_iterations = 200;
};

/// Safeguarded Newton minimization of a smooth convex-ish function on
/// [lo, hi] from (f, f', f'') evaluations. Newton steps that leave the
/// current sign-change bracket, or see f'' <= 0, fall back to bisection.
/// Boundary minima (f' one-signed over the bracket) are detected up front.
template <class FDF>
MinimizeResult safeguarded_newton_minimize(FDF&& fdf, double lo, double hi,
                                           const NewtonOptions& opts,
                                           std::vector<NewtonIterate>* trace = nullptr) {
  if (!(hi > lo)) throw std::invalid_argument("safeguarded_newton_minimize: empty bracket");
  auto eval = [&](double x) {
    NewtonIterate it = fdf(x);
    if (!std::isfinite(it.f) || !std::isfinite(it.df))
      throw std::runtime_error("safeguarded_newton_minimize: non-finite value at x = " +
                               std::to_string(x));
    if (trace) trace->push_back(it);
    return it;
  };

  MinimizeResult res;
  NewtonIterate at_lo = eval(lo);
  res.evaluations++;
  if (at_lo.df >= 0) {  // increasing from the left end
    res.x = lo;
    res.f = at_lo.f;
    res.boundary_hit = true;
    return res;
  }
  NewtonIterate at_hi = eval(hi);
  res.evaluations++;
  if (at_hi.df <= 0) {
    res.x = hi;
    res.f = at_hi.f;
    res.boundary_hit = true;
    return res;
  }

  double a = lo, b = hi;  // f'(a) < 0 < f'(b)
  double x = (lo > 0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
  NewtonIterate cur{};
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    cur = eval(x);
    res.evaluations++;
    if (std::abs(cur.df) <= opts.grad_tol) break;
    if (cur.df < 0)
      a = x;
    else
      b = x;
    if (b - a <= opts.width_tol) {
      x = 0.5 * (a + b);
      cur = eval(x);
      res.evaluations++;
      break;
    }
    double next = x - cur.df / cur.d2f;
    if (!(cur.d2f > 0) || !(next > a) || !(next < b)) next = 0.5 * (a + b);
    x = next;
    if (iter == opts.max_iterations - 1)
      throw std::runtime_error("safeguarded_newton_minimize: iteration limit reached");
  }
  res.x = x;
  res.f = cur.f;
  res.boundary_hit = (x - lo) <= opts.width_tol || (hi - x) <= opts.width_tol;
  return res;
}

}  // namespace lstab

#endif
