// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#include "lstab/phi_table.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "lstab/calibration.hpp"
#include "lstab/detail/format.hpp"
#include "lstab/detail/parallel.hpp"

namespace lstab {

namespace {

std::vector<double> merged_axis(double pmax, int count, const std::vector<double>& refine) {
  std::vector<double> nodes;
  for (int i = 0; i <= count; ++i) nodes.push_back(pmax * i / count);
  for (double r : refine) {
    if (!(r > 0) || !(r < pmax))
      throw std::invalid_argument("PhiTable: refinement node outside (0, pmax)");
    nodes.push_back(r);
  }
  std::sort(nodes.begin(), nodes.end());
  // drop near-duplicates (a refinement node may coincide with a grid node)
  std::vector<double> out;
  for (double x : nodes)
    if (out.empty() || x - out.back() > 1e-9 * pmax) out.push_back(x);
  return out;
}

}  // namespace

void PhiTable::rebuild_axes() {
  axis_nodes.clear();
  for (int i = 0; i < dimension; ++i) {
    const std::vector<double> refine =
        i < static_cast<int>(refine_nodes.size()) ? refine_nodes[i] : std::vector<double>{};
    axis_nodes.push_back(merged_axis(pmax[i], main_count[i], refine));
  }
}

long PhiTable::node_count() const {
  long n = 1;
  for (int i = 0; i < dimension; ++i) n *= axis_size(i);
  return n;
}

long PhiTable::flat_index(const std::vector<int>& idx) const {
  long flat = 0;
  for (int i = 0; i < dimension; ++i) flat = flat * axis_size(i) + idx[i];
  return flat;
}

const std::string* PhiTable::find_metadata(const std::string& key) const {
  for (const auto& [k, v] : metadata)
    if (k == key) return &v;
  return nullptr;
}

namespace {

/// 3-node stencil start for the cell containing p: {cell-1, cell, cell+1},
/// shifted inward at the ends. One stencil per cell keeps the interpolant
/// continuous (stencils of adjacent cells agree at the shared node).
int stencil_start(const std::vector<double>& nodes, double p) {
  const int n = static_cast<int>(nodes.size());
  int cell = static_cast<int>(std::upper_bound(nodes.begin(), nodes.end(), p) - nodes.begin()) - 1;
  cell = std::clamp(cell, 0, n - 2);
  return std::clamp(cell - 1, 0, n - 3);
}

void lagrange3(const std::vector<double>& nodes, int s, double p, double out[3]) {
  const double x0 = nodes[s], x1 = nodes[s + 1], x2 = nodes[s + 2];
  out[0] = (p - x1) * (p - x2) / ((x0 - x1) * (x0 - x2));
  out[1] = (p - x0) * (p - x2) / ((x1 - x0) * (x1 - x2));
  out[2] = (p - x0) * (p - x1) / ((x2 - x0) * (x2 - x1));
}

}  // namespace

double interpolate_phi(const PhiTable& table, const Vector& peclet) {
  if (peclet.size() != table.dimension)
    throw std::invalid_argument("interpolate_phi: dimension mismatch");
  if (table.dimension == 1) {
    const auto& nodes = table.axis_nodes[0];
    if (static_cast<int>(nodes.size()) < 3)
      throw std::invalid_argument("interpolate_phi: need at least 3 nodes per axis");
    const double p = std::clamp(peclet[0], 0.0, nodes.back());
    const int s = stencil_start(nodes, p);
    double w[3];
    lagrange3(nodes, s, p, w);
    return w[0] * table.values[s] + w[1] * table.values[s + 1] + w[2] * table.values[s + 2];
  }
  const auto& nx = table.axis_nodes[0];
  const auto& ny = table.axis_nodes[1];
  if (static_cast<int>(nx.size()) < 3 || static_cast<int>(ny.size()) < 3)
    throw std::invalid_argument("interpolate_phi: need at least 3 nodes per axis");
  const double px = std::clamp(peclet[0], 0.0, nx.back());
  const double py = std::clamp(peclet[1], 0.0, ny.back());
  const int sx = stencil_start(nx, px);
  const int sy = stencil_start(ny, py);
  double wx[3], wy[3];
  lagrange3(nx, sx, px, wx);
  lagrange3(ny, sy, py, wy);
  const int stride = table.axis_size(1);
  double v = 0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      v += wx[a] * wy[b] * table.values[(sx + a) * stride + (sy + b)];
  return v;
}

void save_table(std::ostream& out, const PhiTable& table) {
  out << "stabtable 1\n";
  out << "dim " << table.dimension << " degree " << table.degree << " kind " << table.kind << '\n';
  for (int i = 0; i < table.dimension; ++i) {
    out << "axis " << i << " pmax " << detail::format_double(table.pmax[i]) << " count "
        << table.main_count[i] << '\n';
  }
  for (int i = 0; i < table.dimension; ++i) {
    if (i >= static_cast<int>(table.refine_nodes.size()) || table.refine_nodes[i].empty())
      continue;
    out << "axisref " << i << ' ' << table.refine_nodes[i].size();
    for (double r : table.refine_nodes[i]) out << ' ' << detail::format_double(r);
    out << '\n';
  }
  std::vector<int> idx(table.dimension, 0);
  for (long flat = 0; flat < table.node_count(); ++flat) {
    for (int i = 0; i < table.dimension; ++i) out << idx[i] << ' ';
    out << detail::format_double(table.values[flat]) << '\n';
    for (int i = table.dimension - 1; i >= 0; --i) {
      if (++idx[i] <= table.axis_size(i) - 1) break;
      idx[i] = 0;
    }
  }
  for (const auto& [key, value] : table.metadata) out << "# " << key << ' ' << value << '\n';
}

PhiTable load_table(std::istream& in) {
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) -> void {
    throw TableParseError("table parse error at line " + std::to_string(lineno) + ": " + what);
  };

  PhiTable table;
  if (!std::getline(in, line)) fail("empty stream");
  ++lineno;
  {
    std::istringstream ls(line);
    std::string tag;
    int version = 0;
    if (!(ls >> tag >> version) || tag != "stabtable") fail("expected `stabtable <version>`");
    if (version != 1) fail("unsupported table version " + std::to_string(version));
  }
  if (!std::getline(in, line)) fail("missing dim line");
  ++lineno;
  {
    std::istringstream ls(line);
    std::string t1, t2, t3;
    if (!(ls >> t1 >> table.dimension >> t2 >> table.degree >> t3 >> table.kind) || t1 != "dim" ||
        t2 != "degree" || t3 != "kind")
      fail("expected `dim <d> degree <l> kind <name>`");
    if (table.dimension != 1 && table.dimension != 2) fail("dimension must be 1 or 2");
  }
  table.pmax.assign(table.dimension, 0);
  table.main_count.assign(table.dimension, 0);
  table.refine_nodes.assign(table.dimension, {});
  for (int i = 0; i < table.dimension; ++i) {
    if (!std::getline(in, line)) fail("missing axis line");
    ++lineno;
    std::istringstream ls(line);
    std::string t1, t2, t3;
    int axis = -1;
    if (!(ls >> t1 >> axis >> t2 >> table.pmax[i] >> t3 >> table.main_count[i]) || t1 != "axis" ||
        t2 != "pmax" || t3 != "count" || axis != i)
      fail("expected `axis " + std::to_string(i) + " pmax <P> count <M>`");
    if (!(table.pmax[i] > 0) || table.main_count[i] < 2) fail("axis must have pmax > 0, count >= 2");
  }
  // optional axisref lines, then node lines
  std::streampos mark = in.tellg();
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag != "axisref") {
      in.seekg(mark);
      --lineno;
      break;
    }
    int axis = -1;
    size_t count = 0;
    if (!(ls >> axis >> count) || axis < 0 || axis >= table.dimension) fail("malformed axisref");
    table.refine_nodes[axis].resize(count);
    for (size_t j = 0; j < count; ++j)
      if (!(ls >> table.refine_nodes[axis][j])) fail("malformed axisref node list");
    mark = in.tellg();
  }
  table.rebuild_axes();

  const long expected = table.node_count();
  table.values.resize(expected);
  std::vector<int> idx(table.dimension, 0);
  for (long flat = 0; flat < expected; ++flat) {
    if (!std::getline(in, line)) {
      fail("truncated file: expected " + std::to_string(expected) + " node lines, found " +
           std::to_string(flat));
    }
    ++lineno;
    std::istringstream ls(line);
    for (int i = 0; i < table.dimension; ++i) {
      int got = -1;
      if (!(ls >> got) || got != idx[i]) fail("node line out of row-major order");
    }
    double phi;
    if (!(ls >> phi)) fail("malformed phi value");
    if (!(phi >= 0) || !std::isfinite(phi)) fail("negative or non-finite phi value");
    table.values[flat] = phi;
    for (int i = table.dimension - 1; i >= 0; --i) {
      if (++idx[i] <= table.axis_size(i) - 1) break;
      idx[i] = 0;
    }
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] != '#') fail("unexpected trailing content (length mismatch?)");
    std::istringstream ls(line.substr(1));
    std::string key;
    ls >> key;
    std::string value;
    std::getline(ls, value);
    if (!value.empty() && value[0] == ' ') value.erase(0, 1);
    table.metadata.emplace_back(key, value);
  }
  return table;
}

TableBuildSpec default_table_spec(int dimension, int degree) {
  TableBuildSpec spec;
  spec.dimension = dimension;
  spec.degree = degree;
  spec.pmax.assign(dimension, 700.0);
  spec.count.assign(dimension, 35);
  spec.refine_nodes.assign(dimension, {0.625, 1.25, 2.5, 5.0, 10.0});
  return spec;
}

namespace {

Vector node_peclet(const PhiTable& table, const std::vector<int>& idx) {
  Vector p(table.dimension);
  for (int i = 0; i < table.dimension; ++i) p[i] = table.axis_nodes[i][idx[i]];
  return p;
}

/// Quadratic (or linear, with two points) extrapolation to x = 0.
double extrapolate_to_zero(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() >= 3) {
    double v = 0;
    for (int a = 0; a < 3; ++a) {
      double w = 1;
      for (int b = 0; b < 3; ++b)
        if (b != a) w *= (0.0 - x[b]) / (x[a] - x[b]);
      v += w * y[a];
    }
    return v;
  }
  if (x.size() == 2) return y[0] + (y[1] - y[0]) * (0.0 - x[0]) / (x[1] - x[0]);
  return x.empty() ? 0.0 : y[0];
}

}  // namespace

PhiTable build_table(const TableBuildSpec& spec, std::vector<TableBuildLogEntry>* log) {
  if (spec.dimension != 1 && spec.dimension != 2)
    throw std::invalid_argument("build_table: dimension must be 1 or 2");
  if (static_cast<int>(spec.pmax.size()) != spec.dimension ||
      static_cast<int>(spec.count.size()) != spec.dimension)
    throw std::invalid_argument("build_table: pmax/count size mismatch");
  for (int i = 0; i < spec.dimension; ++i)
    if (!(spec.pmax[i] > 0) || spec.count[i] < 2)
      throw std::invalid_argument("build_table: need pmax > 0 and count >= 2");

  PhiTable table;
  table.dimension = spec.dimension;
  table.degree = spec.degree;
  table.kind = spec.method.name();
  table.pmax = spec.pmax;
  table.main_count = spec.count;
  table.refine_nodes = spec.refine_nodes;
  table.refine_nodes.resize(spec.dimension);
  table.rebuild_axes();
  table.values = Vector::Zero(table.node_count());

  const long total = table.node_count();
  std::vector<std::vector<int>> all_idx(total);
  {
    std::vector<int> idx(spec.dimension, 0);
    for (long flat = 0; flat < total; ++flat) {
      all_idx[flat] = idx;
      for (int i = spec.dimension - 1; i >= 0; --i) {
        if (++idx[i] <= table.axis_size(i) - 1) break;
        idx[i] = 0;
      }
    }
  }

  std::vector<TableBuildLogEntry> entries(total);
  std::vector<char> failed(total, 0);

  TrainingOptions train;
  train.cells = spec.training_cells;
  train.fine_factor = spec.fine_factor;
  train.method = spec.method;
  train.reference_formula = spec.reference_formula;

  auto run_node = [&](long flat) {
    TableBuildLogEntry& entry = entries[flat];
    entry.node_index = all_idx[flat];
    entry.peclet = node_peclet(table, all_idx[flat]);
    if (entry.peclet.norm() == 0) return;  // origin handled by extrapolation
    try {
      const CalibrationProblem calib =
          make_training_problem(spec.dimension, spec.degree, entry.peclet, train);
      const DiscreteFunction reference = reference_solution(calib);
      const CalibrationResult result = minimize_J(calib, reference);
      table.values[flat] = result.phi;
      entry.tau = result.tau_opt;
      entry.J = result.J_min;
      entry.phi = result.phi;
      entry.iterations = result.evaluations;
      entry.boundary_hit = result.boundary_hit;
      for (const CalibrationIterate& it : result.trace)
        entry.trace.push_back({it.tau, it.J, it.Jp, it.Jpp});
    } catch (const std::exception& e) {
      if (!spec.skip_failed) {
        std::vector<int> idx = all_idx[flat];
        std::string where;
        for (int i : idx) where += std::to_string(i) + " ";
        throw std::runtime_error("build_table: calibration failed at node " + where + "(" +
                                 e.what() + ")");
      }
      entry.failed = true;
      failed[flat] = 1;
    }
  };

  detail::parallel_for(total, spec.jobs, run_node);

  // fill failed nodes from the nearest calibrated neighbor (index distance)
  bool any_failed = false;
  for (long flat = 0; flat < total; ++flat) {
    if (!failed[flat]) continue;
    any_failed = true;
    long best = -1, best_dist = 0;
    for (long other = 0; other < total; ++other) {
      if (failed[other] || all_idx[other] == all_idx[flat] || node_peclet(table, all_idx[other]).norm() == 0)
        continue;
      long dist = 0;
      for (int i = 0; i < spec.dimension; ++i)
        dist += std::abs(all_idx[other][i] - all_idx[flat][i]);
      if (best < 0 || dist < best_dist) {
        best = other;
        best_dist = dist;
      }
    }
    if (best >= 0) table.values[flat] = table.values[best];
  }

  // axis origin: one-sided extrapolation from the nearest positive nodes
  {
    std::vector<int> origin(spec.dimension, 0);
    std::vector<double> xs, ys;
    for (int j = 1; j < table.axis_size(0) && static_cast<int>(xs.size()) < 3; ++j) {
      std::vector<int> idx = origin;
      idx[0] = j;
      if (!failed[table.flat_index(idx)]) {
        xs.push_back(table.axis_nodes[0][j]);
        ys.push_back(table.values[table.flat_index(idx)]);
      }
    }
    table.values[table.flat_index(origin)] = std::max(0.0, extrapolate_to_zero(xs, ys));
  }

  // monotonicity along each axis (others at zero), term-by-term only
  std::string warn_axes;
  if (spec.method.kind == StabilizationMethod::Kind::term_by_term) {
    for (int axis = 0; axis < spec.dimension; ++axis) {
      std::vector<int> idx(spec.dimension, 0);
      double prev = -std::numeric_limits<double>::infinity();
      bool monotone = true;
      for (int j = 1; j < table.axis_size(axis); ++j) {  // skip the extrapolated origin
        idx[axis] = j;
        const double v = table.values[table.flat_index(idx)];
        if (v < prev - 1e-12) monotone = false;
        prev = v;
      }
      if (!monotone) warn_axes += (warn_axes.empty() ? "" : " ") + std::to_string(axis);
    }
  }

  table.metadata.emplace_back("training_cells",
                              std::to_string(train.cells > 0 ? train.cells
                                                             : default_training_cells(spec.degree)));
  {
    CalibrationProblem probe = make_training_problem(spec.dimension, spec.degree,
                                                     Vector::Ones(spec.dimension), train);
    table.metadata.emplace_back("fine_factor", std::to_string(probe.effective_fine_factor()));
    table.metadata.emplace_back("reference", probe.reference_formula.name());
  }
  table.metadata.emplace_back("training_source", spec.dimension == 1 ? "one" : "sincos");
  table.metadata.emplace_back("quadrature_order", std::to_string(std::max(2, 2 * spec.degree)));
  table.metadata.emplace_back("extrapolated_origin", "1");
  if (any_failed) table.metadata.emplace_back("filled_failed_nodes", "1");
  if (!warn_axes.empty()) table.metadata.emplace_back("warn_monotonicity_axes", warn_axes);

  if (log) *log = std::move(entries);
  return table;
}

}  // namespace lstab
