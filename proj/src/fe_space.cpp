// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#include "lstab/fe_space.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lstab {

namespace {

/// Multi-index lattice of degree l on the reference simplex, in the local
/// ordering used everywhere: vertices, then edge nodes, then interior.
/// 2D rows are (i,j,k) with i+j+k = l; 1D rows are (i,j) with i+j = l.
std::vector<std::array<int, 3>> lattice_indices(int dimension, int degree) {
  const int l = degree;
  std::vector<std::array<int, 3>> idx;
  if (dimension == 1) {
    idx.push_back({l, 0, 0});
    idx.push_back({0, l, 0});
    for (int j = 1; j < l; ++j) idx.push_back({l - j, j, 0});
    return idx;
  }
  idx.push_back({l, 0, 0});
  idx.push_back({0, l, 0});
  idx.push_back({0, 0, l});
  for (int j = 1; j < l; ++j) idx.push_back({l - j, j, 0});  // edge v0-v1
  for (int j = 1; j < l; ++j) idx.push_back({0, l - j, j});  // edge v1-v2
  for (int j = 1; j < l; ++j) idx.push_back({l - j, 0, j});  // edge v0-v2
  for (int i = 1; i < l; ++i)
    for (int j = 1; i + j < l; ++j) idx.push_back({l - i - j, i, j});
  return idx;
}

/// Value and first/second derivatives of
///   P_m(t) = prod_{s=0}^{m-1} (l t - s)/(m - s)
/// the univariate factor of the equispaced simplex Lagrange basis.
struct Poly1 {
  double v = 1, d1 = 0, d2 = 0;
};
Poly1 eval_factor(int l, int m, double t) {
  Poly1 p{1.0, 0.0, 0.0};
  for (int s = 0; s < m; ++s) {
    const double f = (l * t - s) / (m - s);
    const double df = static_cast<double>(l) / (m - s);
    p.d2 = p.d2 * f + 2.0 * p.d1 * df;
    p.d1 = p.d1 * f + p.v * df;
    p.v = p.v * f;
  }
  return p;
}

int local_dof_count(int dimension, int degree) {
  return dimension == 1 ? degree + 1 : (degree + 1) * (degree + 2) / 2;
}

}  // namespace

BasisTable tabulate_basis(int dimension, int degree, const Matrix& bary_points) {
  const int nverts = dimension + 1;
  const auto idx = lattice_indices(dimension, degree);
  const int ndof = static_cast<int>(idx.size());
  const int npts = static_cast<int>(bary_points.rows());

  BasisTable tab;
  tab.nverts = nverts;
  tab.values.resize(npts, ndof);
  tab.d_lambda.assign(nverts, Matrix::Zero(npts, ndof));
  tab.d2_lambda.assign(static_cast<size_t>(nverts) * nverts, Matrix::Zero(npts, ndof));

  for (int q = 0; q < npts; ++q) {
    for (int i = 0; i < ndof; ++i) {
      Poly1 f[3];
      for (int m = 0; m < nverts; ++m)
        f[m] = eval_factor(degree, idx[i][m], bary_points(q, m));
      if (nverts == 2) f[2] = Poly1{1.0, 0.0, 0.0};

      tab.values(q, i) = f[0].v * f[1].v * f[2].v;
      for (int m = 0; m < nverts; ++m) {
        double g = f[m].d1;
        for (int n = 0; n < nverts; ++n)
          if (n != m) g *= f[n].v;
        tab.d_lambda[m](q, i) = g;
      }
      for (int m = 0; m < nverts; ++m) {
        for (int n = 0; n < nverts; ++n) {
          double h;
          if (m == n) {
            h = f[m].d2;
            for (int o = 0; o < nverts; ++o)
              if (o != m) h *= f[o].v;
          } else {
            h = f[m].d1 * f[n].d1;
            for (int o = 0; o < nverts; ++o)
              if (o != m && o != n) h *= f[o].v;
          }
          tab.d2_lambda[static_cast<size_t>(m) * nverts + n](q, i) = h;
        }
      }
    }
  }
  return tab;
}

ElementMap element_map(const Mesh& mesh, int k) {
  ElementMap map;
  if (mesh.dimension == 1) {
    const double x0 = mesh.nodes(mesh.elements(k, 0), 0);
    const double x1 = mesh.nodes(mesh.elements(k, 1), 0);
    map.measure = std::abs(x1 - x0);
    map.grad_lambda.resize(2, 1);
    map.grad_lambda(0, 0) = -1.0 / (x1 - x0);
    map.grad_lambda(1, 0) = 1.0 / (x1 - x0);
    return map;
  }
  Eigen::Matrix3d B;
  for (int a = 0; a < 3; ++a) {
    const Point p = mesh.node(mesh.elements(k, a));
    B(0, a) = 1.0;
    B(1, a) = p.x();
    B(2, a) = p.y();
  }
  const double det = B.determinant();  // = 2 * signed area
  map.measure = std::abs(det) / 2.0;
  const Eigen::Matrix3d Binv = B.inverse();
  map.grad_lambda.resize(3, 2);
  for (int a = 0; a < 3; ++a) {
    map.grad_lambda(a, 0) = Binv(a, 1);
    map.grad_lambda(a, 1) = Binv(a, 2);
  }
  return map;
}

Point FiniteElementSpace::dof_point(int i) const {
  Point p = Point::Zero();
  for (int c = 0; c < mesh->dimension; ++c) p[c] = dof_coords(i, c);
  return p;
}

bool FiniteElementSpace::is_dirichlet(int i) const {
  return std::binary_search(dirichlet_dofs.begin(), dirichlet_dofs.end(), i);
}

FiniteElementSpace build_space(std::shared_ptr<const Mesh> mesh, int degree) {
  if (degree < 1 || degree > 3)
    throw std::invalid_argument("build_space: degree must be 1, 2 or 3");
  const Mesh& m = *mesh;
  const int l = degree;
  const int dim = m.dimension;

  FiniteElementSpace space;
  space.mesh = mesh;
  space.degree = degree;

  const int ndof_local = local_dof_count(dim, l);
  space.element_dofs.resize(m.num_elements(), ndof_local);

  std::vector<Point> coords(m.num_nodes());
  for (int i = 0; i < m.num_nodes(); ++i) coords[i] = m.node(i);

  if (dim == 1) {
    int next = m.num_nodes();
    for (int k = 0; k < m.num_elements(); ++k) {
      space.element_dofs(k, 0) = m.elements(k, 0);
      space.element_dofs(k, 1) = m.elements(k, 1);
      const Point p0 = m.node(m.elements(k, 0)), p1 = m.node(m.elements(k, 1));
      for (int j = 1; j < l; ++j) {
        coords.push_back(p0 + (p1 - p0) * (static_cast<double>(j) / l));
        space.element_dofs(k, 1 + j) = next++;
      }
    }
    space.dof_coords.resize(static_cast<int>(coords.size()), 1);
    for (size_t i = 0; i < coords.size(); ++i) space.dof_coords(static_cast<int>(i), 0) = coords[i].x();
    std::set<int> dir(m.boundary_nodes.begin(), m.boundary_nodes.end());
    space.dirichlet_dofs.assign(dir.begin(), dir.end());
    return space;
  }

  // shared edge nodes, walked from the lower global vertex id
  std::map<std::array<int, 2>, int> edge_base;
  auto edge_dof = [&](int ga, int gb, int j) {  // j in 1..l-1, measured from ga
    const std::array<int, 2> key{std::min(ga, gb), std::max(ga, gb)};
    auto it = edge_base.find(key);
    if (it == edge_base.end()) {
      const Point pmin = coords[key[0]], pmax = coords[key[1]];
      const int base = static_cast<int>(coords.size());
      for (int t = 1; t < l; ++t)
        coords.push_back(pmin + (pmax - pmin) * (static_cast<double>(t) / l));
      it = edge_base.emplace(key, base).first;
    }
    const int along = (ga < gb) ? j : l - j;
    return it->second + (along - 1);
  };

  const auto idx = lattice_indices(dim, l);
  for (int k = 0; k < m.num_elements(); ++k) {
    const int g[3] = {m.elements(k, 0), m.elements(k, 1), m.elements(k, 2)};
    int at = 0;
    for (int a = 0; a < 3; ++a) space.element_dofs(k, at++) = g[a];
    for (int j = 1; j < l; ++j) space.element_dofs(k, at++) = edge_dof(g[0], g[1], j);
    for (int j = 1; j < l; ++j) space.element_dofs(k, at++) = edge_dof(g[1], g[2], j);
    for (int j = 1; j < l; ++j) space.element_dofs(k, at++) = edge_dof(g[0], g[2], j);
    for (int i = at; i < ndof_local; ++i) {
      const auto& mi = idx[i];
      const Point p = coords[g[0]] * (static_cast<double>(mi[0]) / l) +
                      coords[g[1]] * (static_cast<double>(mi[1]) / l) +
                      coords[g[2]] * (static_cast<double>(mi[2]) / l);
      space.element_dofs(k, i) = static_cast<int>(coords.size());
      coords.push_back(p);
    }
  }

  space.dof_coords.resize(static_cast<int>(coords.size()), 2);
  for (size_t i = 0; i < coords.size(); ++i)
    space.dof_coords.row(static_cast<int>(i)) = coords[i].transpose();

  std::set<int> dir(m.boundary_nodes.begin(), m.boundary_nodes.end());
  for (const auto& edge : m.boundary_edges) {
    if (l < 2) break;
    const int base = edge_base.count(edge) ? edge_base.at(edge) : -1;
    if (base >= 0)
      for (int t = 0; t < l - 1; ++t) dir.insert(base + t);
  }
  space.dirichlet_dofs.assign(dir.begin(), dir.end());
  return space;
}

BasisPointEval eval_basis(const FiniteElementSpace& space, int element, const Vector& bary) {
  const int nverts = space.mesh->dimension + 1;
  Matrix pts(1, nverts);
  for (int m = 0; m < nverts; ++m) pts(0, m) = bary[m];
  const BasisTable tab = tabulate_basis(space.mesh->dimension, space.degree, pts);
  const ElementMap map = element_map(*space.mesh, element);

  BasisPointEval out;
  out.values = tab.values.row(0).transpose();
  out.gradients = Matrix::Zero(space.local_dof_count(), space.mesh->dimension);
  for (int m = 0; m < nverts; ++m)
    out.gradients += tab.d_lambda[m].row(0).transpose() * map.grad_lambda.row(m);
  return out;
}

DiscreteFunction interpolate(std::shared_ptr<const FiniteElementSpace> space, const ScalarField& f) {
  DiscreteFunction fn;
  fn.space = space;
  fn.values.resize(space->num_dofs());
  for (int i = 0; i < space->num_dofs(); ++i) {
    const Point p = space->dof_point(i);
    try {
      fn.values[i] = f(p);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "interpolate: evaluation failed at node (" << p.x() << ", " << p.y()
          << "): " << e.what();
      throw std::runtime_error(msg.str());
    }
  }
  return fn;
}

FieldEvaluator::FieldEvaluator(DiscreteFunction fn)
    : fn_(std::move(fn)), locator_(*fn_.space->mesh) {}

double FieldEvaluator::operator()(const Point& p) const {
  const LocatedPoint loc = locator_.locate(p);
  if (loc.element < 0) throw std::runtime_error("FieldEvaluator: point not located");
  const int nverts = fn_.space->mesh->dimension + 1;
  Vector bary(nverts);
  for (int m = 0; m < nverts; ++m) bary[m] = loc.bary[m];
  const BasisPointEval basis = eval_basis(*fn_.space, loc.element, bary);
  double v = 0;
  for (int i = 0; i < fn_.space->local_dof_count(); ++i)
    v += basis.values[i] * fn_.values[fn_.space->element_dofs(loc.element, i)];
  return v;
}

DiscreteFunction interpolate_onto(std::shared_ptr<const FiniteElementSpace> space,
                                  const DiscreteFunction& from) {
  const FieldEvaluator eval(from);
  return interpolate(space, [&eval](const Point& p) { return eval(p); });
}

SparseMatrix mass_matrix(const FiniteElementSpace& space) {
  const Mesh& mesh = *space.mesh;
  const QuadratureRule rule = quadrature_for(mesh.dimension, space.degree, QuadraturePurpose::mass);
  const BasisTable tab = tabulate_basis(mesh.dimension, space.degree, rule.points);
  const int nl = space.local_dof_count();

  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<size_t>(mesh.num_elements()) * nl * nl);
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const ElementMap map = element_map(mesh, k);
    const double scale = map.measure / rule.weights.sum();
    Matrix local = Matrix::Zero(nl, nl);
    for (int q = 0; q < rule.num_points(); ++q) {
      const double w = rule.weights[q] * scale;
      local.noalias() += w * (tab.values.row(q).transpose() * tab.values.row(q));
    }
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < nl; ++j)
        triplets.emplace_back(space.element_dofs(k, i), space.element_dofs(k, j), local(i, j));
  }
  SparseMatrix M(space.num_dofs(), space.num_dofs());
  M.setFromTriplets(triplets.begin(), triplets.end());
  return M;
}

double l2_norm(const FiniteElementSpace& space, const Vector& coeffs) {
  const SparseMatrix M = mass_matrix(space);
  return std::sqrt(std::max(0.0, coeffs.dot(M * coeffs)));
}

}  // namespace lstab
