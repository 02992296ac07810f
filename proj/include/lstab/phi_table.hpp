// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LSTAB_PHI_TABLE_HPP
#define LSTAB_PHI_TABLE_HPP

#include "lstab/problem.hpp"
#include "lstab/types.hpp"

#include <iosfwd>
#include <array>
#include <string>
#include <vector>

namespace lstab {

/// Tabulated dimensionless stabilization function phi over a Peclet grid.
///
/// Each axis carries the nodes 0, P/M, 2P/M, ..., P of the main grid plus an
/// optional set of refinement nodes (the low-Peclet segment); the values
/// array is row-major over the merged, sorted per-axis node lists.
class PhiTable {
 public:
  int dimension = 1;
  int degree = 1;
  std::string kind = "tbt";  // stabilization method name
  std::vector<double> pmax;
  std::vector<int> main_count;
  std::vector<std::vector<double>> refine_nodes;  // per axis, strictly inside (0, pmax)
  std::vector<std::vector<double>> axis_nodes;    // derived merged grids
  Vector values;
  std::vector<std::pair<std::string, std::string>> metadata;  // ordered `# key value` lines

  int axis_size(int axis) const { return static_cast<int>(axis_nodes[axis].size()); }
  long node_count() const;
  long flat_index(const std::vector<int>& idx) const;
  void rebuild_axes();  // recompute axis_nodes from pmax/main_count/refine_nodes
  const std::string* find_metadata(const std::string& key) const;
};

/// Per-axis quadratic Lagrange interpolation on the 3-node stencil of the
/// cell containing P (shifted inward at the box edges), tensorized in 2D.
/// Components are clamped into the box first.
double interpolate_phi(const PhiTable& table, const Vector& peclet);

void save_table(std::ostream& out, const PhiTable& table);
PhiTable load_table(std::istream& in);

struct TableParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Offline build configuration. Zeros mean "per-degree default":
/// training_cells = 40/degree, fine_factor = 10/6/4 for degree 1/2/3.
struct TableBuildSpec {
  int dimension = 1;
  int degree = 1;
  std::vector<double> pmax;                       // per axis
  std::vector<int> count;                         // per axis, >= 2
  std::vector<std::vector<double>> refine_nodes;  // per axis, may be empty
  StabilizationMethod method = StabilizationMethod::term_by_term();
  std::string reference_formula;  // "codina" (2D default) or "1d" (1D default)
  int training_cells = 0;
  int fine_factor = 0;
  int jobs = 1;
  bool skip_failed = false;
};

/// The spec used when none is given: box 700 per axis, 35 cells, five
/// geometrically spaced low-Peclet refinement nodes.
TableBuildSpec default_table_spec(int dimension, int degree);

/// Per-node calibration record, written to the build log; trace rows are
/// (tau, J, J', J'') per minimizer iterate.
struct TableBuildLogEntry {
  std::vector<int> node_index;
  Vector peclet;
  double tau = 0, J = 0, phi = 0;
  int iterations = 0;
  bool boundary_hit = false;
  bool failed = false;
  std::vector<std::array<double, 4>> trace;
};

/// Calibrates phi at every grid node (see calibration module) and assembles
/// the table. Deterministic: a parallel build equals the serial one.
PhiTable build_table(const TableBuildSpec& spec, std::vector<TableBuildLogEntry>* log = nullptr);

}  // namespace lstab

#endif
