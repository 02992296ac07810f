// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#include "lstab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "lstab/detail/format.hpp"

namespace lstab {

namespace {

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
  throw MeshParseError("mesh parse error at line " + std::to_string(line) + ": " + what);
}

/// Recomputes boundary_nodes (and boundary_edges in 2D) from connectivity.
void compute_boundary(Mesh& mesh) {
  mesh.boundary_nodes.clear();
  mesh.boundary_edges.clear();
  if (mesh.dimension == 1) {
    std::vector<int> count(mesh.num_nodes(), 0);
    for (int k = 0; k < mesh.num_elements(); ++k) {
      ++count[mesh.elements(k, 0)];
      ++count[mesh.elements(k, 1)];
    }
    for (int i = 0; i < mesh.num_nodes(); ++i)
      if (count[i] == 1) mesh.boundary_nodes.push_back(i);
    return;
  }
  std::map<std::array<int, 2>, int> edge_count;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    for (int e = 0; e < 3; ++e) {
      int a = mesh.elements(k, e), b = mesh.elements(k, (e + 1) % 3);
      ++edge_count[{std::min(a, b), std::max(a, b)}];
    }
  }
  std::set<int> bnodes;
  for (const auto& [edge, count] : edge_count) {
    if (count == 1) {
      mesh.boundary_edges.push_back(edge);
      bnodes.insert(edge[0]);
      bnodes.insert(edge[1]);
    }
  }
  mesh.boundary_nodes.assign(bnodes.begin(), bnodes.end());
}

/// Orientation normalization plus the connectivity invariants. `where`
/// names elements in error messages (import reports 1-based ids).
void validate_and_orient(Mesh& mesh, bool from_import) {
  const int nv = mesh.vertices_per_element();
  for (int k = 0; k < mesh.num_elements(); ++k) {
    for (int a = 0; a < nv; ++a) {
      int v = mesh.elements(k, a);
      if (v < 0 || v >= mesh.num_nodes())
        throw MeshParseError("element " + std::to_string(k + 1) +
                             ": vertex index out of range");
      for (int b = a + 1; b < nv; ++b)
        if (v == mesh.elements(k, b))
          throw MeshParseError("element " + std::to_string(k + 1) +
                               ": repeated vertex index");
    }
    if (mesh.dimension == 2) {
      Point p0 = mesh.node(mesh.elements(k, 0));
      Point p1 = mesh.node(mesh.elements(k, 1));
      Point p2 = mesh.node(mesh.elements(k, 2));
      double s = signed_area(p0, p1, p2);
      if (s < 0) {
        std::swap(mesh.elements(k, 1), mesh.elements(k, 2));
        s = -s;
      }
      double scale = std::max({p0.squaredNorm(), p1.squaredNorm(), p2.squaredNorm(), 1e-300});
      if (s <= scale * 1e-14)
        throw MeshParseError("element " + std::to_string(k + 1) +
                             ": degenerate (zero area) triangle");
    } else {
      double len = std::abs(mesh.nodes(mesh.elements(k, 1), 0) -
                            mesh.nodes(mesh.elements(k, 0), 0));
      if (len <= 0)
        throw MeshParseError("element " + std::to_string(k + 1) +
                             ": degenerate (zero length) segment");
    }
  }
  (void)from_import;
  compute_boundary(mesh);
}

}  // namespace

Point Mesh::node(int i) const {
  Point p = Point::Zero();
  for (int c = 0; c < dimension; ++c) p[c] = nodes(i, c);
  return p;
}

bool Mesh::is_boundary_node(int i) const {
  return std::binary_search(boundary_nodes.begin(), boundary_nodes.end(), i);
}

Mesh build_structured(const Box& box, int nx, int ny) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("build_structured: counts must be >= 1");
  const double lx = box.hi.x() - box.lo.x();
  const double ly = box.hi.y() - box.lo.y();
  if (lx <= 0 || ly <= 0) throw std::invalid_argument("build_structured: box has zero size");

  Mesh mesh;
  mesh.dimension = 2;
  mesh.nodes.resize((nx + 1) * (ny + 1), 2);
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const int id = j * (nx + 1) + i;
      // i/nx before scaling keeps nested refinements bitwise consistent
      mesh.nodes(id, 0) = box.lo.x() + lx * (static_cast<double>(i) / nx);
      mesh.nodes(id, 1) = box.lo.y() + ly * (static_cast<double>(j) / ny);
    }
  }
  mesh.elements.resize(2 * nx * ny, 3);
  int e = 0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = j * (nx + 1) + i;
      const int v10 = v00 + 1;
      const int v01 = v00 + (nx + 1);
      const int v11 = v01 + 1;
      // diagonal v00 -> v11
      mesh.elements.row(e++) << v00, v10, v11;
      mesh.elements.row(e++) << v00, v11, v01;
    }
  }
  mesh.structured = StructuredInfo{box, nx, ny};
  validate_and_orient(mesh, false);
  return mesh;
}

Mesh build_interval(double x0, double x1, int n) {
  if (n < 1) throw std::invalid_argument("build_interval: count must be >= 1");
  if (x1 <= x0) throw std::invalid_argument("build_interval: empty interval");
  Mesh mesh;
  mesh.dimension = 1;
  mesh.nodes.resize(n + 1, 1);
  for (int i = 0; i <= n; ++i)
    mesh.nodes(i, 0) = x0 + (x1 - x0) * (static_cast<double>(i) / n);
  mesh.elements.resize(n, 2);
  for (int k = 0; k < n; ++k) mesh.elements.row(k) << k, k + 1;
  Box box;
  box.lo = Point(x0, 0);
  box.hi = Point(x1, 0);
  mesh.structured = StructuredInfo{box, n, 0};
  validate_and_orient(mesh, false);
  return mesh;
}

Mesh import_mesh(std::istream& in) {
  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> std::string {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r\n") != std::string::npos) return line;
    }
    parse_fail(lineno + 1, "unexpected end of stream");
  };

  std::istringstream head(next_line());
  std::string tag;
  int dim = 0;
  long node_count = 0, elem_count = 0;
  if (!(head >> tag >> dim >> node_count >> elem_count) || tag != "mesh")
    parse_fail(lineno, "expected header `mesh <dim> <nodes> <elements>`");
  if (dim != 1 && dim != 2) parse_fail(lineno, "dimension must be 1 or 2");
  if (node_count <= 0 || elem_count <= 0) parse_fail(lineno, "malformed counts");

  Mesh mesh;
  mesh.dimension = dim;
  mesh.nodes.resize(node_count, dim);
  for (long i = 0; i < node_count; ++i) {
    std::istringstream ls(next_line());
    for (int c = 0; c < dim; ++c)
      if (!(ls >> mesh.nodes(i, c))) parse_fail(lineno, "malformed node coordinates");
  }
  mesh.elements.resize(elem_count, dim + 1);
  for (long k = 0; k < elem_count; ++k) {
    std::istringstream ls(next_line());
    for (int a = 0; a < dim + 1; ++a) {
      long v;
      if (!(ls >> v)) parse_fail(lineno, "malformed element line");
      if (v < 1 || v > node_count)
        parse_fail(lineno, "vertex index out of range in element " + std::to_string(k + 1));
      mesh.elements(k, a) = static_cast<int>(v - 1);
    }
  }
  validate_and_orient(mesh, true);
  return mesh;
}

void export_mesh(std::ostream& out, const Mesh& mesh) {
  out << "mesh " << mesh.dimension << ' ' << mesh.num_nodes() << ' '
      << mesh.num_elements() << '\n';
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    for (int c = 0; c < mesh.dimension; ++c) {
      if (c) out << ' ';
      out << detail::format_double(mesh.nodes(i, c));
    }
    out << '\n';
  }
  for (int k = 0; k < mesh.num_elements(); ++k) {
    for (int a = 0; a < mesh.vertices_per_element(); ++a) {
      if (a) out << ' ';
      out << mesh.elements(k, a) + 1;
    }
    out << '\n';
  }
}

ElementGeometry element_geometry(const Mesh& mesh, int k) {
  if (k < 0 || k >= mesh.num_elements())
    throw std::out_of_range("element_geometry: index out of range");
  ElementGeometry g;
  g.nvert = mesh.vertices_per_element();
  g.barycenter = Point::Zero();
  for (int a = 0; a < g.nvert; ++a) {
    g.vertex[a] = mesh.node(mesh.elements(k, a));
    g.barycenter += g.vertex[a];
  }
  g.barycenter /= g.nvert;
  g.h_K = 0;
  for (int a = 0; a < g.nvert; ++a)
    for (int b = a + 1; b < g.nvert; ++b)
      g.h_K = std::max(g.h_K, (g.vertex[a] - g.vertex[b]).norm());
  if (mesh.dimension == 2)
    g.area = signed_area(g.vertex[0], g.vertex[1], g.vertex[2]);
  else
    g.area = std::abs(g.vertex[1].x() - g.vertex[0].x());
  return g;
}

double h_flow(const ElementGeometry& geom, const Point& a_bar) {
  if (geom.nvert == 2) return geom.h_K;
  const double norm = a_bar.norm();
  if (norm == 0) return geom.h_K;  // isotropic fallback
  const Point d = a_bar / norm;
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  // Clip the line c + t d against the half-planes of the (CCW) triangle.
  for (int e = 0; e < 3; ++e) {
    const Point p = geom.vertex[e];
    const Point q = geom.vertex[(e + 1) % 3];
    const Point inward(-(q - p).y(), (q - p).x());
    const double s = inward.dot(d);
    const double r = inward.dot(p - geom.barycenter);
    if (std::abs(s) <= 1e-15 * inward.norm()) continue;  // parallel edge, barycenter inside
    if (s > 0)
      tmin = std::max(tmin, r / s);
    else
      tmax = std::min(tmax, r / s);
  }
  return std::max(tmax - tmin, 0.0);
}

Mesh refine_mesh(const Mesh& mesh, int factor) {
  if (factor < 1) throw std::invalid_argument("refine_mesh: factor must be >= 1");
  if (factor == 1) return mesh;
  const int r = factor;

  Mesh fine;
  fine.dimension = mesh.dimension;

  if (mesh.dimension == 1) {
    const int ne = mesh.num_elements();
    fine.nodes.resize(mesh.num_nodes() + ne * (r - 1), 1);
    fine.nodes.topRows(mesh.num_nodes()) = mesh.nodes;
    fine.elements.resize(ne * r, 2);
    int next = mesh.num_nodes(), e = 0;
    for (int k = 0; k < ne; ++k) {
      const int v0 = mesh.elements(k, 0), v1 = mesh.elements(k, 1);
      const double x0 = mesh.nodes(v0, 0), x1 = mesh.nodes(v1, 0);
      int prev = v0;
      for (int s = 1; s < r; ++s) {
        fine.nodes(next, 0) = x0 + (x1 - x0) * (static_cast<double>(s) / r);
        fine.elements.row(e++) << prev, next;
        prev = next++;
      }
      fine.elements.row(e++) << prev, v1;
    }
    validate_and_orient(fine, false);
    return fine;
  }

  // 2D: lattice points per element; vertices and edge points are shared.
  std::map<std::array<int, 2>, int> edge_base;  // canonical edge -> first of (r-1) node ids
  std::vector<Point> extra;
  auto edge_node = [&](int ga, int gb, int s) {  // s in 1..r-1 measured from ga
    const std::array<int, 2> key{std::min(ga, gb), std::max(ga, gb)};
    auto it = edge_base.find(key);
    if (it == edge_base.end()) {
      const Point pmin = mesh.node(key[0]), pmax = mesh.node(key[1]);
      int base = mesh.num_nodes() + static_cast<int>(extra.size());
      for (int t = 1; t < r; ++t)
        extra.push_back(pmin + (pmax - pmin) * (static_cast<double>(t) / r));
      it = edge_base.emplace(key, base).first;
    }
    const int along = (ga < gb) ? s : r - s;
    return it->second + (along - 1);
  };

  std::vector<Eigen::Vector3i> tris;
  tris.reserve(static_cast<size_t>(mesh.num_elements()) * r * r);
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const int g0 = mesh.elements(k, 0), g1 = mesh.elements(k, 1), g2 = mesh.elements(k, 2);
    const Point p0 = mesh.node(g0), p1 = mesh.node(g1), p2 = mesh.node(g2);
    // lattice(i,j) = p0 + (p1-p0) i/r + (p2-p0) j/r, i+j <= r
    std::vector<int> lattice((r + 1) * (r + 2) / 2);
    auto lat = [&](int i, int j) -> int& {
      // row j holds r+1-j entries
      return lattice[j * (r + 1) - j * (j - 1) / 2 + i];
    };
    for (int j = 0; j <= r; ++j) {
      for (int i = 0; i + j <= r; ++i) {
        int id;
        if (i == 0 && j == 0) id = g0;
        else if (i == r && j == 0) id = g1;
        else if (i == 0 && j == r) id = g2;
        else if (j == 0) id = edge_node(g0, g1, i);
        else if (i == 0) id = edge_node(g0, g2, j);
        else if (i + j == r) id = edge_node(g1, g2, j);
        else {
          id = mesh.num_nodes() + static_cast<int>(extra.size());
          extra.push_back(p0 + (p1 - p0) * (static_cast<double>(i) / r) +
                          (p2 - p0) * (static_cast<double>(j) / r));
        }
        lat(i, j) = id;
      }
    }
    for (int j = 0; j < r; ++j) {
      for (int i = 0; i + j < r; ++i) {
        tris.emplace_back(lat(i, j), lat(i + 1, j), lat(i, j + 1));
        if (i + j < r - 1)
          tris.emplace_back(lat(i + 1, j), lat(i + 1, j + 1), lat(i, j + 1));
      }
    }
  }

  fine.nodes.resize(mesh.num_nodes() + static_cast<int>(extra.size()), 2);
  fine.nodes.topRows(mesh.num_nodes()) = mesh.nodes;
  for (size_t i = 0; i < extra.size(); ++i)
    fine.nodes.row(mesh.num_nodes() + static_cast<int>(i)) = extra[i].transpose();
  fine.elements.resize(static_cast<int>(tris.size()), 3);
  for (size_t t = 0; t < tris.size(); ++t) fine.elements.row(static_cast<int>(t)) = tris[t].transpose();

  if (mesh.structured) {
    // a refined structured mesh is still a regular grid over the same box,
    // but node numbering differs from build_structured; keep the generic path
    fine.structured.reset();
  }
  validate_and_orient(fine, false);
  return fine;
}

namespace {

Eigen::Vector3d barycentric(const Mesh& mesh, int k, const Point& p) {
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  if (mesh.dimension == 1) {
    const double x0 = mesh.nodes(mesh.elements(k, 0), 0);
    const double x1 = mesh.nodes(mesh.elements(k, 1), 0);
    const double t = (p.x() - x0) / (x1 - x0);
    b[0] = 1 - t;
    b[1] = t;
    return b;
  }
  const Point p0 = mesh.node(mesh.elements(k, 0));
  const Point p1 = mesh.node(mesh.elements(k, 1));
  const Point p2 = mesh.node(mesh.elements(k, 2));
  const double area = signed_area(p0, p1, p2);
  b[0] = signed_area(p, p1, p2) / area;
  b[1] = signed_area(p0, p, p2) / area;
  b[2] = 1.0 - b[0] - b[1];
  return b;
}

}  // namespace

MeshLocator::MeshLocator(const Mesh& mesh) : mesh_(mesh) {
  if (mesh_.structured) return;
  if (mesh_.dimension == 1) {
    std::vector<std::pair<double, int>> lefts;
    lefts.reserve(mesh_.num_elements());
    for (int k = 0; k < mesh_.num_elements(); ++k) {
      double a = mesh_.nodes(mesh_.elements(k, 0), 0);
      double b = mesh_.nodes(mesh_.elements(k, 1), 0);
      lefts.emplace_back(std::min(a, b), k);
    }
    std::sort(lefts.begin(), lefts.end());
    for (auto& [x, k] : lefts) {
      sorted_x_.push_back(x);
      sorted_elem_.push_back(k);
    }
    return;
  }
  lo_ = Point(mesh_.nodes.col(0).minCoeff(), mesh_.nodes.col(1).minCoeff());
  hi_ = Point(mesh_.nodes.col(0).maxCoeff(), mesh_.nodes.col(1).maxCoeff());
  const int n = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh_.num_elements()))));
  bins_x_ = bins_y_ = n;
  bins_.assign(static_cast<size_t>(n) * n, {});
  const Point span = (hi_ - lo_).cwiseMax(1e-300);
  auto bin_of = [&](double v, double lo, double span, int bins) {
    int b = static_cast<int>((v - lo) / span * bins);
    return std::clamp(b, 0, bins - 1);
  };
  for (int k = 0; k < mesh_.num_elements(); ++k) {
    Point bmin = mesh_.node(mesh_.elements(k, 0)), bmax = bmin;
    for (int a = 1; a < 3; ++a) {
      Point q = mesh_.node(mesh_.elements(k, a));
      bmin = bmin.cwiseMin(q);
      bmax = bmax.cwiseMax(q);
    }
    const int ix0 = bin_of(bmin.x(), lo_.x(), span.x(), bins_x_);
    const int ix1 = bin_of(bmax.x(), lo_.x(), span.x(), bins_x_);
    const int iy0 = bin_of(bmin.y(), lo_.y(), span.y(), bins_y_);
    const int iy1 = bin_of(bmax.y(), lo_.y(), span.y(), bins_y_);
    for (int iy = iy0; iy <= iy1; ++iy)
      for (int ix = ix0; ix <= ix1; ++ix)
        bins_[static_cast<size_t>(iy) * bins_x_ + ix].push_back(k);
  }
}

LocatedPoint MeshLocator::locate_structured(const Point& p) const {
  const StructuredInfo& s = *mesh_.structured;
  LocatedPoint out;
  if (mesh_.dimension == 1) {
    const double fx = (p.x() - s.box.lo.x()) / (s.box.hi.x() - s.box.lo.x()) * s.nx;
    const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, s.nx - 1);
    out.element = i;
    out.bary = barycentric(mesh_, i, p);
    return out;
  }
  const double fx = (p.x() - s.box.lo.x()) / (s.box.hi.x() - s.box.lo.x()) * s.nx;
  const double fy = (p.y() - s.box.lo.y()) / (s.box.hi.y() - s.box.lo.y()) * s.ny;
  const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, s.nx - 1);
  const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, s.ny - 1);
  const double xi = fx - i, eta = fy - j;
  // cell split along xi = eta; lower triangle has eta <= xi
  int k = 2 * (j * s.nx + i) + (eta <= xi ? 0 : 1);
  out.element = k;
  out.bary = barycentric(mesh_, k, p);
  // roundoff can land the query a hair across the diagonal
  if (out.bary.minCoeff() < -1e-12) {
    k ^= 1;
    out.element = k;
    out.bary = barycentric(mesh_, k, p);
  }
  return out;
}

LocatedPoint MeshLocator::locate_generic(const Point& p) const {
  LocatedPoint out;
  if (mesh_.dimension == 1) {
    auto it = std::upper_bound(sorted_x_.begin(), sorted_x_.end(), p.x());
    int idx = static_cast<int>(it - sorted_x_.begin()) - 1;
    idx = std::clamp(idx, 0, static_cast<int>(sorted_elem_.size()) - 1);
    out.element = sorted_elem_[idx];
    out.bary = barycentric(mesh_, out.element, p);
    return out;
  }
  const Point span = (hi_ - lo_).cwiseMax(1e-300);
  const int cx = std::clamp(static_cast<int>((p.x() - lo_.x()) / span.x() * bins_x_), 0, bins_x_ - 1);
  const int cy = std::clamp(static_cast<int>((p.y() - lo_.y()) / span.y() * bins_y_), 0, bins_y_ - 1);

  double best = -std::numeric_limits<double>::infinity();
  // widen the search ring until a containing element is found
  for (int ring = 0; ring <= std::max(bins_x_, bins_y_); ++ring) {
    for (int iy = std::max(0, cy - ring); iy <= std::min(bins_y_ - 1, cy + ring); ++iy) {
      for (int ix = std::max(0, cx - ring); ix <= std::min(bins_x_ - 1, cx + ring); ++ix) {
        if (ring > 0 && std::max(std::abs(ix - cx), std::abs(iy - cy)) != ring) continue;
        for (int k : bins_[static_cast<size_t>(iy) * bins_x_ + ix]) {
          const Eigen::Vector3d b = barycentric(mesh_, k, p);
          const double m = b.minCoeff();
          if (m >= -1e-10) {
            out.element = k;
            out.bary = b;
            return out;
          }
          if (m > best) {
            best = m;
            out.element = k;
            out.bary = b;
          }
        }
      }
    }
    if (out.element >= 0 && ring >= 1) break;  // accept nearest after one ring
  }
  return out;
}

LocatedPoint MeshLocator::locate(const Point& p) const {
  return mesh_.structured ? locate_structured(p) : locate_generic(p);
}

}  // namespace lstab
