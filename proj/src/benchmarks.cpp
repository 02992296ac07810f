// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#include "lstab/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "lstab/detail/format.hpp"
#include "lstab/detail/parallel.hpp"

namespace lstab {

ErrorReport error_norms(const DiscreteFunction& u_h, const DiscreteFunction& u_ref) {
  const DiscreteFunction pi_ref = interpolate_onto(u_h.space, u_ref);
  const Vector d = u_h.values - pi_ref.values;
  ErrorReport report;
  report.l2 = l2_norm(*u_h.space, d);
  report.linf = d.cwiseAbs().maxCoeff();
  return report;
}

double l2_error_vs_exact(const DiscreteFunction& u_h, const ScalarField& exact, int subdivisions) {
  const FiniteElementSpace& space = *u_h.space;
  const Mesh& mesh = *space.mesh;
  const int dim = mesh.dimension;
  const int s = std::max(1, subdivisions);
  const QuadratureRule rule = quadrature_for(dim, space.degree, QuadraturePurpose::mass);

  // map rule points into every sub-element of the barycentric lattice
  std::vector<Vector> sub_bary;   // parent barycentric coordinates, flattened
  if (dim == 1) {
    for (int i = 0; i < s; ++i) {
      for (int q = 0; q < rule.num_points(); ++q) {
        const double t = (i + rule.points(q, 1)) / s;
        Vector b(2);
        b << 1 - t, t;
        sub_bary.push_back(b);
      }
    }
  } else {
    auto push_tri = [&](const Eigen::Vector2d& v0, const Eigen::Vector2d& v1,
                        const Eigen::Vector2d& v2) {
      for (int q = 0; q < rule.num_points(); ++q) {
        const Eigen::Vector2d p =
            rule.points(q, 0) * v0 + rule.points(q, 1) * v1 + rule.points(q, 2) * v2;
        Vector b(3);
        b << 1 - p.x() - p.y(), p.x(), p.y();
        sub_bary.push_back(b);
      }
    };
    for (int j = 0; j < s; ++j) {
      for (int i = 0; i + j < s; ++i) {
        const Eigen::Vector2d a(static_cast<double>(i) / s, static_cast<double>(j) / s);
        const Eigen::Vector2d b(static_cast<double>(i + 1) / s, static_cast<double>(j) / s);
        const Eigen::Vector2d c(static_cast<double>(i) / s, static_cast<double>(j + 1) / s);
        push_tri(a, b, c);
        if (i + j < s - 1) {
          const Eigen::Vector2d d(static_cast<double>(i + 1) / s, static_cast<double>(j + 1) / s);
          push_tri(b, d, c);
        }
      }
    }
  }

  Matrix pts(static_cast<int>(sub_bary.size()), dim + 1);
  for (size_t i = 0; i < sub_bary.size(); ++i) pts.row(static_cast<int>(i)) = sub_bary[i].transpose();
  const BasisTable tab = tabulate_basis(dim, space.degree, pts);
  const int nsub = dim == 1 ? s : s * s;
  const int per_sub = rule.num_points();

  double total = 0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const ElementMap map = element_map(mesh, k);
    const double scale = map.measure / (rule.weights.sum() * nsub);
    for (int row = 0; row < pts.rows(); ++row) {
      const double w = rule.weights[row % per_sub] * scale;
      Point p = Point::Zero();
      for (int m = 0; m <= dim; ++m) p += pts(row, m) * mesh.node(mesh.elements(k, m));
      double uh = 0;
      for (int i = 0; i < space.local_dof_count(); ++i)
        uh += tab.values(row, i) * u_h.values[space.element_dofs(k, i)];
      const double diff = uh - exact(p);
      total += w * diff * diff;
    }
  }
  return std::sqrt(total);
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "formula,degree,test,param1,param2,l2,linf\n";
  for (const BenchRow& r : rows) {
    out << r.formula << ',' << r.degree << ',' << r.test << ',' << r.param1 << ',' << r.param2
        << ',' << detail::format_double(r.l2) << ',' << detail::format_double(r.linf) << '\n';
  }
  out << "# l2 by coarse-space quadrature against the interpolated reference; "
         "linf over coarse Lagrange nodes\n";
}

const BenchRow* find_mean_row(const std::vector<BenchRow>& rows, const std::string& formula) {
  for (const BenchRow& r : rows)
    if (r.formula == formula && r.param1 == "MEAN") return &r;
  return nullptr;
}

ProblemSpec make_test1_problem(int angle_index, double k, double mu) {
  const double alpha = angle_index * M_PI / 10.0;
  const Point a(k * std::sqrt(2.0) * std::cos(alpha), k * std::sqrt(2.0) * std::sin(alpha));
  ProblemSpec problem;
  problem.velocity = constant_velocity(a);
  problem.diffusion = constant_field(mu);
  problem.source = [](const Point& p) { return std::sin(M_PI * p.x()) * std::cos(M_PI * p.y()); };
  return problem;
}

Point test2_velocity(const Point& p) {
  const double dx = p.x() - 0.5, dy = p.y() - 0.5;
  // the branch circle is closed; the tolerance keeps points at distance
  // exactly 0.01 (up to roundoff) on the inner branch
  const bool inside = dx * dx + dy * dy <= 1e-4 * (1.0 + 1e-9);
  const double c = inside ? 0.1 : 2.0;
  return Point(-c * dy, c * dx);
}

ProblemSpec make_test2_problem(double mu) {
  ProblemSpec problem;
  problem.velocity = [](const Point& p) { return test2_velocity(p); };
  problem.diffusion = constant_field(mu);
  problem.source = constant_field(1.0);
  return problem;
}

namespace {

struct SweepPoint {
  ProblemSpec problem;
  std::string param1, param2;
};

/// Shared sweep driver: one reference solve per point, one coarse solve per
/// formula, then per-formula aggregate rows in deterministic sweep order.
std::vector<BenchRow> run_sweep(const std::string& test, std::shared_ptr<const Mesh> mesh,
                                int degree, int fine_factor, const StabilizationMethod& method,
                                const TauFormula& reference_formula,
                                const std::vector<SweepPoint>& points,
                                const std::vector<TauFormula>& formulas, int jobs,
                                const std::string& mean_param2 = "") {
  auto space = std::make_shared<FiniteElementSpace>(build_space(mesh, degree));

  Mesh fine_mesh;
  if (mesh->structured) {
    const StructuredInfo& s = *mesh->structured;
    fine_mesh = mesh->dimension == 1
                    ? build_interval(s.box.lo.x(), s.box.hi.x(), s.nx * fine_factor)
                    : build_structured(s.box, s.nx * fine_factor, s.ny * fine_factor);
  } else {
    fine_mesh = refine_mesh(*mesh, fine_factor);
  }
  auto fine_space = std::make_shared<FiniteElementSpace>(
      build_space(std::make_shared<Mesh>(std::move(fine_mesh)), degree));

  const long npoints = static_cast<long>(points.size());
  const size_t nf = formulas.size();
  std::vector<ErrorReport> reports(npoints * nf);

  detail::parallel_for(npoints, jobs, [&](long pt) {
    const SweepPoint& point = points[pt];
    const TauField ref_tau = make_tau_field(*fine_space, point.problem, reference_formula);
    const DiscreteFunction u_ref =
        solve_stabilized(fine_space, point.problem, method, ref_tau);
    const DiscreteFunction pi_ref = interpolate_onto(space, u_ref);
    for (size_t f = 0; f < nf; ++f) {
      const TauField tau = make_tau_field(*space, point.problem, formulas[f]);
      const DiscreteFunction u_h = solve_stabilized(space, point.problem, method, tau);
      const Vector d = u_h.values - pi_ref.values;
      ErrorReport& rep = reports[pt * nf + f];
      rep.l2 = l2_norm(*space, d);
      rep.linf = d.cwiseAbs().maxCoeff();
    }
  });

  std::vector<BenchRow> rows;
  for (long pt = 0; pt < npoints; ++pt) {
    for (size_t f = 0; f < nf; ++f) {
      const ErrorReport& rep = reports[pt * nf + f];
      rows.push_back({formulas[f].name(), degree, test, points[pt].param1, points[pt].param2,
                      rep.l2, rep.linf});
    }
  }
  for (size_t f = 0; f < nf; ++f) {
    double l2 = 0, linf = 0;
    for (long pt = 0; pt < npoints; ++pt) {
      l2 += reports[pt * nf + f].l2;
      linf += reports[pt * nf + f].linf;
    }
    rows.push_back({formulas[f].name(), degree, test, "MEAN", mean_param2,
                    l2 / npoints, linf / npoints});
  }
  return rows;
}

double fit_slope(const std::vector<double>& h, const std::vector<double>& e) {
  const int n = static_cast<int>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = std::log(h[i]), y = std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

std::vector<BenchRow> run_test1(const Test1Spec& spec, const std::vector<TauFormula>& formulas) {
  if (spec.angles.empty() || spec.magnitudes.empty())
    throw std::invalid_argument("run_test1: empty sweep lists");
  auto mesh = std::make_shared<Mesh>(build_structured(Box{}, spec.nx, spec.nx));

  std::vector<SweepPoint> points;
  for (int n : spec.angles) {
    for (double k : spec.magnitudes) {
      SweepPoint point;
      point.problem = make_test1_problem(n, k, spec.mu);
      point.param1 = std::to_string(n);
      // the sweep's global Peclet number ||a|| h / (2 mu) with h the cell side
      point.param2 = detail::format_double(k * std::sqrt(2.0) / (2.0 * spec.nx * spec.mu));
      points.push_back(std::move(point));
    }
  }
  std::vector<BenchRow> rows = run_sweep("test1", mesh, spec.degree, spec.fine_factor, spec.method,
                                         spec.reference, points, formulas, spec.jobs);
  // per-angle aggregates (mean over magnitudes), appended after the raw rows
  const size_t nf = formulas.size();
  const size_t nk = spec.magnitudes.size();
  std::vector<BenchRow> angle_rows;
  for (size_t ai = 0; ai < spec.angles.size(); ++ai) {
    for (size_t f = 0; f < nf; ++f) {
      double l2 = 0, linf = 0;
      for (size_t ki = 0; ki < nk; ++ki) {
        const BenchRow& r = rows[(ai * nk + ki) * nf + f];
        l2 += r.l2;
        linf += r.linf;
      }
      angle_rows.push_back({formulas[f].name(), spec.degree, "test1",
                            std::to_string(spec.angles[ai]), "MEAN", l2 / nk, linf / nk});
    }
  }
  rows.insert(rows.end() - static_cast<long>(nf), angle_rows.begin(), angle_rows.end());
  return rows;
}

std::vector<BenchRow> run_test2(const Test2Spec& spec, const std::vector<TauFormula>& formulas) {
  if (spec.mu_values.empty()) throw std::invalid_argument("run_test2: empty mu list");
  Box box;
  box.hi = Point(1.0, 0.5);
  auto mesh = std::make_shared<Mesh>(build_structured(box, spec.nx, spec.nx / 2));

  std::vector<SweepPoint> points;
  for (double mu : spec.mu_values) {
    SweepPoint point;
    point.problem = make_test2_problem(mu);
    point.param1 = detail::format_double(mu);
    point.param2 = "";
    points.push_back(std::move(point));
  }
  return run_sweep("test2", mesh, spec.degree, spec.fine_factor, spec.method, spec.reference,
                   points, formulas, spec.jobs);
}

NodalVelocity read_velocity_file(std::istream& in) {
  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> std::string {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r\n") != std::string::npos) return line;
    }
    throw std::invalid_argument("velocity file: unexpected end at line " + std::to_string(lineno + 1));
  };
  std::istringstream head(next_line());
  std::string tag;
  long count = 0;
  int dim = 0;
  if (!(head >> tag >> count >> dim) || tag != "velocity" || count <= 0 || (dim != 1 && dim != 2))
    throw std::invalid_argument("velocity file: expected header `velocity <node_count> <d>`");
  NodalVelocity v;
  v.values.resize(count, dim);
  for (long i = 0; i < count; ++i) {
    std::istringstream ls(next_line());
    for (int c = 0; c < dim; ++c)
      if (!(ls >> v.values(i, c)))
        throw std::invalid_argument("velocity file: malformed line " + std::to_string(lineno));
  }
  return v;
}

void write_velocity_file(std::ostream& out, const NodalVelocity& velocity, int dimension) {
  out << "velocity " << velocity.values.rows() << ' ' << dimension << '\n';
  for (int i = 0; i < velocity.values.rows(); ++i) {
    for (int c = 0; c < dimension; ++c) {
      if (c) out << ' ';
      out << detail::format_double(velocity.values(i, c));
    }
    out << '\n';
  }
}

std::vector<BenchRow> run_unstructured(const Mesh& mesh, const NodalVelocity& velocity,
                                       const UnstructuredSpec& spec,
                                       const std::vector<TauFormula>& formulas) {
  if (velocity.values.rows() != mesh.num_nodes())
    throw std::invalid_argument("run_unstructured: velocity has " +
                                std::to_string(velocity.values.rows()) + " nodes, mesh has " +
                                std::to_string(mesh.num_nodes()));
  auto mesh_ptr = std::make_shared<Mesh>(mesh);
  auto p1 = std::make_shared<FiniteElementSpace>(build_space(mesh_ptr, 1));

  // P1 interpolation of the nodal components; shared by all sweep points
  const int dim = mesh.dimension;
  std::vector<std::shared_ptr<FieldEvaluator>> comps;
  for (int c = 0; c < dim; ++c) {
    DiscreteFunction fc;
    fc.space = p1;
    fc.values = velocity.values.col(c);
    comps.push_back(std::make_shared<FieldEvaluator>(std::move(fc)));
  }
  VectorField a = [comps, dim](const Point& p) {
    Point v = Point::Zero();
    for (int c = 0; c < dim; ++c) v[c] = (*comps[c])(p);
    return v;
  };

  ScalarField source;
  if (spec.source == "zero")
    source = constant_field(0.0);
  else if (spec.source == "one")
    source = constant_field(1.0);
  else if (spec.source == "test1")
    source = [](const Point& p) { return std::sin(M_PI * p.x()) * std::cos(M_PI * p.y()); };
  else
    throw std::invalid_argument("run_unstructured: unknown source `" + spec.source + "`");

  std::vector<SweepPoint> points;
  for (double mu : spec.mu_values) {
    SweepPoint point;
    point.problem.velocity = a;
    point.problem.diffusion = constant_field(mu);
    point.problem.source = source;
    point.param1 = detail::format_double(mu);
    point.param2 = "";
    points.push_back(std::move(point));
  }
  return run_sweep("unstructured", mesh_ptr, spec.degree, spec.refine_factor, spec.method,
                   spec.reference, points, formulas, spec.jobs);
}

std::pair<double, double> peclet_range(const FiniteElementSpace& space,
                                        const ProblemSpec& problem) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (int k = 0; k < space.mesh->num_elements(); ++k) {
    const double pe = peclet_scalar(element_flow_data(space, problem, k));
    lo = std::min(lo, pe);
    hi = std::max(hi, pe);
  }
  return {lo, hi};
}

ConvergenceResult convergence_study(int degree, const std::vector<int>& nx_list) {
  if (nx_list.size() < 2) throw std::invalid_argument("convergence_study: need >= 2 meshes");
  const auto exact = [](const Point& p) { return std::sin(M_PI * p.x()) * std::sin(M_PI * p.y()); };
  const Point a(1.0, 0.5);
  const double mu = 1.0;
  ProblemSpec problem;
  problem.velocity = constant_velocity(a);
  problem.diffusion = constant_field(mu);
  problem.source = [a, mu](const Point& p) {
    const double sx = std::sin(M_PI * p.x()), cx = std::cos(M_PI * p.x());
    const double sy = std::sin(M_PI * p.y()), cy = std::cos(M_PI * p.y());
    return a.x() * M_PI * cx * sy + a.y() * M_PI * sx * cy + 2.0 * mu * M_PI * M_PI * sx * sy;
  };

  ConvergenceResult result;
  for (int nx : nx_list) {
    auto mesh = std::make_shared<Mesh>(build_structured(Box{}, nx, nx));
    auto space = std::make_shared<FiniteElementSpace>(build_space(mesh, degree));
    const TauField tau = TauField::Zero(mesh->num_elements());
    const DiscreteFunction u_h =
        solve_stabilized(space, problem, StabilizationMethod::term_by_term(), tau);
    result.h.push_back(std::sqrt(2.0) / nx);
    result.l2.push_back(l2_error_vs_exact(u_h, exact));
    const DiscreteFunction pi_u = interpolate(space, exact);
    result.interp_l2.push_back(l2_error_vs_exact(pi_u, exact));
  }
  result.slope = fit_slope(result.h, result.l2);
  result.interp_slope = fit_slope(result.h, result.interp_l2);
  return result;
}

}  // namespace lstab
