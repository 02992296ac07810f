// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#include "lstab/tau_formulas.hpp"

#include <cmath>
#include <stdexcept>

namespace lstab {

double effective_h(double h, int degree) { return h / degree; }

Vector peclet_vector(const ElementFlowData& data, int dimension) {
  Vector p(dimension);
  for (int i = 0; i < dimension; ++i)
    p[i] = data.a_bar[i] * data.h_eff() / (2.0 * data.mu_K);
  return p;
}

double peclet_scalar(const ElementFlowData& data) {
  return data.a_norm * data.h_eff() / (2.0 * data.mu_K);
}

double tau_one_d(const ElementFlowData& data) {
  if (data.a_norm == 0) return 0.0;
  const double pe = peclet_scalar(data);
  double factor;  // Pe coth Pe - 1
  if (pe < 1e-6)
    factor = pe * pe / 3.0 - pe * pe * pe * pe / 45.0;  // series, avoids cancellation
  else
    factor = pe / std::tanh(pe) - 1.0;
  return data.mu_K / (data.a_norm * data.a_norm) * factor;
}

double tau_codina(const ElementFlowData& data) {
  const double h = data.h_eff();
  const double diff = 4.0 * data.mu_K / (h * h);
  const double adv = 2.0 * data.a_norm / h;
  return 1.0 / std::sqrt(diff * diff + adv * adv);
}

double tau_codina_colomes(const ElementFlowData& data) {
  const double h = data.h_eff();
  const double hf = data.h_flow_eff();
  const double diff = 4.0 * data.mu_K / (h * h);
  const double adv = 2.0 * data.a_norm / hf;
  return 1.0 / std::sqrt(diff * diff + adv * adv);
}

double tau_hauke(const ElementFlowData& data) {
  const double h = data.h_eff();
  const double diffusive = h * h / (24.24 * data.mu_K);
  if (data.a_norm == 0) return diffusive;
  const double advective = data.h_flow_eff() / (std::sqrt(3.0) * data.a_norm);
  return std::min(advective, diffusive);
}

double tau_franca_valentin(const ElementFlowData& data) {
  const double h = data.h_eff();
  const double m_k = 1.0 / 3.0;
  const double pe = m_k * data.a_norm * h / data.mu_K;
  if (pe <= 1.0) return m_k * h * h / (2.0 * data.mu_K);
  return h / (2.0 * data.a_norm);
}

double tau_least_squares(const ElementFlowData& data, const PhiTable& table, LsVariant variant,
                         TauLookupStats* stats) {
  if (data.a_norm == 0) return tau_codina(data);  // phi/||a|| form is singular there
  const int d = table.dimension;
  Vector p = peclet_vector(data, d);
  bool flipped = false, clamped = false;
  for (int i = 0; i < d; ++i) {
    if (p[i] < 0) {
      p[i] = -p[i];
      flipped = true;
    }
    if (p[i] > table.axis_nodes[i].back()) clamped = true;
  }
  if (stats) {
    if (flipped) stats->sign_flips.fetch_add(1, std::memory_order_relaxed);
    if (clamped) stats->clamps.fetch_add(1, std::memory_order_relaxed);
  }
  const double phi = interpolate_phi(table, p);
  const double h = variant == LsVariant::flow ? data.h_flow_eff() : data.h_eff();
  return h / data.a_norm * phi;
}

TauFormula TauFormula::analytic(Kind kind) {
  if (kind == Kind::least_squares || kind == Kind::least_squares_flow)
    throw std::invalid_argument("TauFormula::analytic: table-backed kind");
  return TauFormula{kind, nullptr};
}

TauFormula TauFormula::least_squares(std::shared_ptr<const PhiTable> table, LsVariant variant) {
  if (!table) throw std::invalid_argument("TauFormula::least_squares: missing table");
  return TauFormula{variant == LsVariant::flow ? Kind::least_squares_flow : Kind::least_squares,
                    std::move(table)};
}

std::string TauFormula::name() const {
  switch (kind) {
    case Kind::one_d: return "1d";
    case Kind::codina: return "codina";
    case Kind::codina_colomes: return "cc";
    case Kind::hauke: return "hauke";
    case Kind::franca_valentin: return "fv";
    case Kind::least_squares: return "ls";
    case Kind::least_squares_flow: return "lsflow";
  }
  return "?";
}

TauFormula TauFormula::by_name(const std::string& name, std::shared_ptr<const PhiTable> table) {
  if (name == "1d") return analytic(Kind::one_d);
  if (name == "codina") return analytic(Kind::codina);
  if (name == "cc") return analytic(Kind::codina_colomes);
  if (name == "hauke") return analytic(Kind::hauke);
  if (name == "fv") return analytic(Kind::franca_valentin);
  if (name == "ls") return least_squares(std::move(table), LsVariant::isotropic);
  if (name == "lsflow") return least_squares(std::move(table), LsVariant::flow);
  throw std::invalid_argument("unknown tau formula `" + name + "`");
}

double evaluate_tau(const TauFormula& formula, const ElementFlowData& data, TauLookupStats* stats) {
  switch (formula.kind) {
    case TauFormula::Kind::one_d: return tau_one_d(data);
    case TauFormula::Kind::codina: return tau_codina(data);
    case TauFormula::Kind::codina_colomes: return tau_codina_colomes(data);
    case TauFormula::Kind::hauke: return tau_hauke(data);
    case TauFormula::Kind::franca_valentin: return tau_franca_valentin(data);
    case TauFormula::Kind::least_squares:
      return tau_least_squares(data, *formula.table, LsVariant::isotropic, stats);
    case TauFormula::Kind::least_squares_flow:
      return tau_least_squares(data, *formula.table, LsVariant::flow, stats);
  }
  throw std::logic_error("evaluate_tau: bad kind");
}

ElementFlowData element_flow_data(const FiniteElementSpace& space, const ProblemSpec& problem,
                                  int element) {
  const Mesh& mesh = *space.mesh;
  const ElementGeometry geom = element_geometry(mesh, element);
  const QuadratureRule rule =
      quadrature_for(mesh.dimension, space.degree, QuadraturePurpose::stabilization);

  ElementFlowData data;
  data.degree = space.degree;
  data.h_K = geom.h_K;

  Point a_mean = Point::Zero();
  double mu_mean = 0, wsum = 0;
  const int nverts = mesh.dimension + 1;
  for (int q = 0; q < rule.num_points(); ++q) {
    Point p = Point::Zero();
    for (int m = 0; m < nverts; ++m) p += rule.points(q, m) * geom.vertex[m];
    const double w = rule.weights[q];
    a_mean += w * problem.velocity(p);
    mu_mean += w * problem.diffusion(p);
    wsum += w;
  }
  data.a_bar = a_mean / wsum;
  data.a_norm = data.a_bar.norm();
  data.mu_K = mu_mean / wsum;
  if (!(data.mu_K > 0))
    throw std::runtime_error("element_flow_data: non-positive mean diffusion on element " +
                             std::to_string(element));
  data.h_flow = h_flow(geom, data.a_bar);
  return data;
}

TauField make_tau_field(const FiniteElementSpace& space, const ProblemSpec& problem,
                        const TauFormula& formula, TauLookupStats* stats) {
  if (formula.needs_table() && !formula.table)
    throw std::invalid_argument("make_tau_field: least-squares formula without a table");
  if (formula.needs_table() && formula.table->degree != space.degree)
    throw std::invalid_argument("make_tau_field: table built for degree " +
                                std::to_string(formula.table->degree) +
                                " used with a degree " + std::to_string(space.degree) +
                                " space");
  TauField tau(space.mesh->num_elements());
  for (int k = 0; k < space.mesh->num_elements(); ++k)
    tau[k] = evaluate_tau(formula, element_flow_data(space, problem, k), stats);
  return tau;
}

}  // namespace lstab
