// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#include "lstab/assembly.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lstab/linear_solver.hpp"

namespace lstab {

void SystemContribution::append(const SystemContribution& other) {
  if (n == 0) {
    n = other.n;
    rhs = Vector::Zero(n);
  }
  if (other.n != n) throw std::invalid_argument("SystemContribution: size mismatch");
  triplets.insert(triplets.end(), other.triplets.begin(), other.triplets.end());
  if (other.rhs.size() == n) rhs += other.rhs;
}

namespace {

/// Per-quadrature-point element data shared by the assembly loops.
struct ElementScratch {
  const QuadratureRule rule;
  const BasisTable table;
  const int nl;
  const int dim;

  ElementMap map;
  double scale = 0;                     // measure / reference measure
  std::vector<Point> phys_points;      // per q
  std::vector<Matrix> grad;            // per q: nl x dim
  Matrix lap;                          // npts x nl (zero for degree 1)

  ElementScratch(const FiniteElementSpace& space, QuadraturePurpose purpose)
      : rule(quadrature_for(space.mesh->dimension, space.degree, purpose)),
        table(tabulate_basis(space.mesh->dimension, space.degree, rule.points)),
        nl(space.local_dof_count()),
        dim(space.mesh->dimension) {
    phys_points.resize(rule.num_points());
    grad.assign(rule.num_points(), Matrix::Zero(nl, dim));
    lap = Matrix::Zero(rule.num_points(), nl);
  }

  void load(const Mesh& mesh, int k, bool need_second) {
    map = element_map(mesh, k);
    scale = map.measure / rule.weights.sum();
    const int nverts = dim + 1;
    for (int q = 0; q < rule.num_points(); ++q) {
      Point p = Point::Zero();
      for (int m = 0; m < nverts; ++m) {
        const Point vm = mesh.node(mesh.elements(k, m));
        p += rule.points(q, m) * vm;
      }
      phys_points[q] = p;
      grad[q].setZero();
      for (int m = 0; m < nverts; ++m)
        grad[q].noalias() += table.d_lambda[m].row(q).transpose() * map.grad_lambda.row(m);
    }
    if (need_second) {
      lap.setZero();
      for (int m = 0; m < nverts; ++m) {
        for (int n = 0; n < nverts; ++n) {
          const double gmn = map.grad_lambda.row(m).dot(map.grad_lambda.row(n));
          lap.noalias() += gmn * table.d2_lambda[static_cast<size_t>(m) * nverts + n];
        }
      }
    }
  }
};

[[noreturn]] void nonpositive_mu(const Point& p, double value) {
  std::ostringstream msg;
  msg << "assemble: non-positive diffusion mu = " << value << " sampled at quadrature point ("
      << p.x() << ", " << p.y() << ")";
  throw std::runtime_error(msg.str());
}

}  // namespace

SystemContribution assemble_advection(const FiniteElementSpace& space, const VectorField& velocity) {
  const Mesh& mesh = *space.mesh;
  ElementScratch s(space, QuadraturePurpose::stiffness);
  SystemContribution out;
  out.n = space.num_dofs();
  out.rhs = Vector::Zero(out.n);
  out.triplets.reserve(static_cast<size_t>(mesh.num_elements()) * s.nl * s.nl);

  Matrix local(s.nl, s.nl);
  Vector adv(s.nl);
  for (int k = 0; k < mesh.num_elements(); ++k) {
    s.load(mesh, k, false);
    local.setZero();
    for (int q = 0; q < s.rule.num_points(); ++q) {
      const double w = s.rule.weights[q] * s.scale;
      const Point a = velocity(s.phys_points[q]);
      adv.noalias() = s.grad[q] * a.head(s.dim);
      local.noalias() += w * (s.table.values.row(q).transpose() * adv.transpose());
    }
    for (int i = 0; i < s.nl; ++i)
      for (int j = 0; j < s.nl; ++j)
        out.triplets.emplace_back(space.element_dofs(k, i), space.element_dofs(k, j), local(i, j));
  }
  return out;
}

SystemContribution assemble_diffusion(const FiniteElementSpace& space, const ScalarField& mu) {
  const Mesh& mesh = *space.mesh;
  ElementScratch s(space, QuadraturePurpose::stiffness);
  SystemContribution out;
  out.n = space.num_dofs();
  out.rhs = Vector::Zero(out.n);
  out.triplets.reserve(static_cast<size_t>(mesh.num_elements()) * s.nl * s.nl);

  Matrix local(s.nl, s.nl);
  for (int k = 0; k < mesh.num_elements(); ++k) {
    s.load(mesh, k, false);
    local.setZero();
    for (int q = 0; q < s.rule.num_points(); ++q) {
      const double w = s.rule.weights[q] * s.scale;
      const double m = mu(s.phys_points[q]);
      if (!(m > 0)) nonpositive_mu(s.phys_points[q], m);
      local.noalias() += (w * m) * (s.grad[q] * s.grad[q].transpose());
    }
    for (int i = 0; i < s.nl; ++i)
      for (int j = 0; j < s.nl; ++j)
        out.triplets.emplace_back(space.element_dofs(k, i), space.element_dofs(k, j), local(i, j));
  }
  return out;
}

Vector assemble_load(const FiniteElementSpace& space, const ScalarField& f) {
  const Mesh& mesh = *space.mesh;
  ElementScratch s(space, QuadraturePurpose::mass);
  Vector rhs = Vector::Zero(space.num_dofs());
  for (int k = 0; k < mesh.num_elements(); ++k) {
    s.load(mesh, k, false);
    for (int q = 0; q < s.rule.num_points(); ++q) {
      const double wf = s.rule.weights[q] * s.scale * f(s.phys_points[q]);
      for (int i = 0; i < s.nl; ++i)
        rhs[space.element_dofs(k, i)] += wf * s.table.values(q, i);
    }
  }
  return rhs;
}

SystemContribution assemble_galerkin(const FiniteElementSpace& space, const ProblemSpec& problem) {
  SystemContribution out = assemble_advection(space, problem.velocity);
  out.append(assemble_diffusion(space, problem.diffusion));
  out.rhs += assemble_load(space, problem.source);
  return out;
}

SystemContribution assemble_stabilization(const FiniteElementSpace& space,
                                          const ProblemSpec& problem,
                                          const StabilizationMethod& method,
                                          const TauField& tau) {
  const Mesh& mesh = *space.mesh;
  if (tau.size() != mesh.num_elements())
    throw std::invalid_argument("assemble_stabilization: tau must have one entry per element");
  for (int k = 0; k < mesh.num_elements(); ++k)
    if (!(tau[k] >= 0) || !std::isfinite(tau[k]))
      throw std::invalid_argument("assemble_stabilization: negative or non-finite tau at element " +
                                  std::to_string(k));

  const bool residual = method.kind == StabilizationMethod::Kind::residual;
  const bool second = residual && space.degree >= 2;
  ElementScratch s(space, QuadraturePurpose::stabilization);

  SystemContribution out;
  out.n = space.num_dofs();
  out.rhs = Vector::Zero(out.n);
  out.triplets.reserve(static_cast<size_t>(mesh.num_elements()) * s.nl * s.nl);

  Matrix local(s.nl, s.nl);
  Vector local_rhs(s.nl), Pj(s.nl), Qi(s.nl);
  for (int k = 0; k < mesh.num_elements(); ++k) {
    if (tau[k] == 0) continue;
    s.load(mesh, k, second);
    local.setZero();
    local_rhs.setZero();
    for (int q = 0; q < s.rule.num_points(); ++q) {
      const double w = s.rule.weights[q] * s.scale * tau[k];
      const Point a = problem.velocity(s.phys_points[q]);
      Pj.noalias() = s.grad[q] * a.head(s.dim);
      Qi = Pj;
      if (residual) {
        const double m = problem.diffusion(s.phys_points[q]);
        if (!(m > 0)) nonpositive_mu(s.phys_points[q], m);
        if (second) {
          Pj.noalias() -= m * s.lap.row(q).transpose();
          Qi.noalias() += (method.epsilon * m) * s.lap.row(q).transpose();
        }
        local_rhs.noalias() += (w * problem.source(s.phys_points[q])) * Qi;
      }
      local.noalias() += w * (Qi * Pj.transpose());
    }
    for (int i = 0; i < s.nl; ++i) {
      out.rhs[space.element_dofs(k, i)] += local_rhs[i];
      for (int j = 0; j < s.nl; ++j)
        out.triplets.emplace_back(space.element_dofs(k, i), space.element_dofs(k, j), local(i, j));
    }
  }
  return out;
}

LinearSystem apply_dirichlet(const SystemContribution& system, const FiniteElementSpace& space,
                             const ScalarField& value) {
  const int n = system.n;
  std::vector<char> constrained(n, 0);
  Vector g = Vector::Zero(n);
  LinearSystem out;
  out.constraints.reserve(space.dirichlet_dofs.size());
  for (int dof : space.dirichlet_dofs) {
    constrained[dof] = 1;
    g[dof] = value(space.dof_point(dof));
    out.constraints.emplace_back(dof, g[dof]);
  }

  out.rhs = system.rhs;
  std::vector<Triplet> kept;
  kept.reserve(system.triplets.size() + space.dirichlet_dofs.size());
  for (const Triplet& t : system.triplets) {
    if (constrained[t.row()]) continue;
    if (constrained[t.col()]) {
      out.rhs[t.row()] -= t.value() * g[t.col()];
      continue;
    }
    kept.push_back(t);
  }
  for (int dof : space.dirichlet_dofs) {
    kept.emplace_back(dof, dof, 1.0);
    out.rhs[dof] = g[dof];
  }
  out.matrix.resize(n, n);
  out.matrix.setFromTriplets(kept.begin(), kept.end());
  out.matrix.makeCompressed();
  return out;
}

DiscreteFunction solve_stabilized(std::shared_ptr<const FiniteElementSpace> space,
                                  const ProblemSpec& problem, const StabilizationMethod& method,
                                  const TauField& tau, SolverReport* report) {
  SystemContribution contrib = assemble_galerkin(*space, problem);
  contrib.append(assemble_stabilization(*space, problem, method, tau));
  const LinearSystem system = apply_dirichlet(contrib, *space, problem.dirichlet_value);
  DiscreteFunction u;
  u.space = std::move(space);
  u.values = solve(system, report);
  return u;
}

}  // namespace lstab
