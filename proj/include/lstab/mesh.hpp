// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LSTAB_MESH_HPP
#define LSTAB_MESH_HPP

#include "lstab/types.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

namespace lstab {

/// Axis-aligned box; 1D domains use the x interval.
struct Box {
  Point lo = Point::Zero();
  Point hi = Point::Ones();
};

/// Descriptor kept by structured builders so that point location can use
/// grid arithmetic instead of a search.
struct StructuredInfo {
  Box box;
  int nx = 0;
  int ny = 0;  // 0 in 1D
};

/// Triangulation of a planar domain (or partition of an interval in 1D).
///
/// Elements are vertex-index tuples, (d+1) vertices per element, oriented so
/// that 2D signed areas are positive. Boundary entities are recomputed from
/// connectivity: a 2D edge is boundary if it belongs to exactly one element.
class Mesh {
 public:
  int dimension = 2;
  Matrix nodes;             // n_nodes x dimension
  Eigen::MatrixXi elements; // n_elements x (dimension+1), 0-based
  std::vector<int> boundary_nodes;                // sorted, unique
  std::vector<std::array<int, 2>> boundary_edges; // canonical (min,max); 2D only
  std::optional<StructuredInfo> structured;

  int num_nodes() const { return static_cast<int>(nodes.rows()); }
  int num_elements() const { return static_cast<int>(elements.rows()); }
  int vertices_per_element() const { return dimension + 1; }

  Point node(int i) const;
  bool is_boundary_node(int i) const;
};

/// Per-element geometric quantities used by the stabilization formulas.
struct ElementGeometry {
  double h_K = 0;       // diameter = longest edge
  double area = 0;      // measure (length in 1D)
  Point barycenter = Point::Zero();
  std::array<Point, 3> vertex{};
  int nvert = 3;
};

/// Structured triangulation of `box` into 2*nx*ny right triangles. Cell
/// diagonals all run lower-left to upper-right.
Mesh build_structured(const Box& box, int nx, int ny);

/// Uniform 1D mesh of [x0, x1] with n 2-node elements.
Mesh build_interval(double x0, double x1, int n);

/// Reads the line-oriented mesh text format (see export_mesh). Throws
/// MeshParseError with a line number on malformed input.
Mesh import_mesh(std::istream& in);

/// Writes `mesh <dim> <nodes> <elements>`, node coordinate lines, then
/// 1-based element vertex lines, in full round-trip decimal.
void export_mesh(std::ostream& out, const Mesh& mesh);

ElementGeometry element_geometry(const Mesh& mesh, int k);

/// Length of the chord through the element barycenter in direction a_bar,
/// clipped to the element. Returns h_K when a_bar vanishes or in 1D.
double h_flow(const ElementGeometry& geom, const Point& a_bar);

/// Uniform refinement: each triangle is split into factor^2 congruent
/// subtriangles by its barycentric lattice (each segment into factor parts
/// in 1D). Shared lattice nodes are deduplicated so the result is conforming.
Mesh refine_mesh(const Mesh& mesh, int factor);

struct MeshParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Containing element + barycentric coordinates of a query point.
struct LocatedPoint {
  int element = -1;
  Eigen::Vector3d bary = Eigen::Vector3d::Zero();  // first (d+1) entries used
};

/// Point location: grid arithmetic for structured meshes, a bucketed
/// bounding-box grid otherwise. Queries are const and thread-safe.
class MeshLocator {
 public:
  explicit MeshLocator(const Mesh& mesh);
  LocatedPoint locate(const Point& p) const;

 private:
  const Mesh& mesh_;
  // hash-grid state (unstructured path)
  int bins_x_ = 0, bins_y_ = 0;
  Point lo_ = Point::Zero(), hi_ = Point::Zero();
  std::vector<std::vector<int>> bins_;
  std::vector<double> sorted_x_;   // 1D fallback: element left edges
  std::vector<int> sorted_elem_;

  LocatedPoint locate_structured(const Point& p) const;
  LocatedPoint locate_generic(const Point& p) const;
};

}  // namespace lstab

#endif
