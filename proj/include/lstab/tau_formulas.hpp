// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LSTAB_TAU_FORMULAS_HPP
#define LSTAB_TAU_FORMULAS_HPP

#include "lstab/fe_space.hpp"
#include "lstab/phi_table.hpp"
#include "lstab/problem.hpp"

#include <atomic>
#include <memory>
#include <string>

namespace lstab {

/// Element-level flow quantities entering the coefficient formulas.
/// h_K and h_flow are the raw geometric lengths; every formula divides them
/// by the polynomial degree first (the Lagrange node spacing argument).
struct ElementFlowData {
  Point a_bar = Point::Zero();  // quadrature-mean velocity
  double a_norm = 0;            // Euclidean norm of a_bar
  double mu_K = 1;              // quadrature-mean diffusion
  double h_K = 0;
  double h_flow = 0;
  int degree = 1;

  double h_eff() const { return h_K / degree; }
  double h_flow_eff() const { return h_flow / degree; }
};

/// h -> h/l, the degree scaling applied to every coefficient formula.
double effective_h(double h, int degree);

/// Directional element Peclet numbers a_i h / (2 mu), effective h.
Vector peclet_vector(const ElementFlowData& data, int dimension);

/// Scalar element Peclet number ||a|| h / (2 mu), effective h.
double peclet_scalar(const ElementFlowData& data);

double tau_one_d(const ElementFlowData& data);
double tau_codina(const ElementFlowData& data);
double tau_codina_colomes(const ElementFlowData& data);
double tau_hauke(const ElementFlowData& data);
double tau_franca_valentin(const ElementFlowData& data);

/// Lookup counters for the table-backed coefficients (queries with negative
/// Peclet components are looked up at |P|; out-of-box queries are clamped).
struct TauLookupStats {
  std::atomic<long> sign_flips{0};
  std::atomic<long> clamps{0};
};

enum class LsVariant { isotropic, flow };

/// Table-backed coefficient tau = h/||a|| phi(|P|) (h_flow for the flow
/// variant). Falls back to tau_codina when the mean velocity vanishes.
double tau_least_squares(const ElementFlowData& data, const PhiTable& table, LsVariant variant,
                         TauLookupStats* stats = nullptr);

/// Selector over all coefficient formulas; table-backed kinds carry a table.
struct TauFormula {
  enum class Kind { one_d, codina, codina_colomes, hauke, franca_valentin, least_squares, least_squares_flow };
  Kind kind = Kind::codina;
  std::shared_ptr<const PhiTable> table;  // required for the least_squares kinds

  static TauFormula analytic(Kind kind);
  static TauFormula least_squares(std::shared_ptr<const PhiTable> table, LsVariant variant);
  static TauFormula by_name(const std::string& name,
                            std::shared_ptr<const PhiTable> table = nullptr);
  std::string name() const;
  bool needs_table() const {
    return kind == Kind::least_squares || kind == Kind::least_squares_flow;
  }
};

double evaluate_tau(const TauFormula& formula, const ElementFlowData& data,
                    TauLookupStats* stats = nullptr);

/// Quadrature-mean flow data of one element.
ElementFlowData element_flow_data(const FiniteElementSpace& space, const ProblemSpec& problem,
                                  int element);

/// Per-element coefficients for a whole space.
TauField make_tau_field(const FiniteElementSpace& space, const ProblemSpec& problem,
                        const TauFormula& formula, TauLookupStats* stats = nullptr);

}  // namespace lstab

#endif
