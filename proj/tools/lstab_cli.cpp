// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

// Batch front door: offline table builds, single stabilized solves against a
// problem catalog, benchmark sweeps, and table inspection.
//
// Exit codes: 0 success, 1 usage/configuration error, 2 numerical failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lstab/benchmarks.hpp"
#include "lstab/config.hpp"
#include "lstab/detail/format.hpp"
#include "lstab/linear_solver.hpp"
#include "lstab/phi_table.hpp"

using namespace lstab;

namespace {

void check_table_kind(const PhiTable& table, const StabilizationMethod& method);

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

std::shared_ptr<PhiTable> load_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open table file `" + path + "`");
  return std::make_shared<PhiTable>(load_table(in));
}

Mesh load_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open mesh file `" + path + "`");
  return import_mesh(in);
}

NodalVelocity load_velocity_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open velocity file `" + path + "`");
  return read_velocity_file(in);
}

// ---------------------------------------------------------------------- //

struct BuildTableArgs {
  int dim = 0;  // 0 -> default spec
  int degree = 1;
  double pmax = 0;
  int nodes = 0;
  std::string kind = "tbt";
  std::string lowpe;
  std::string reference;
  std::string out;
  int train_n = 0;
  int fine_factor = 0;
  int jobs = 1;
  bool skip_failed = false;
};

int cmd_build_table(const BuildTableArgs& args) {
  TableBuildSpec spec;
  if (args.pmax > 0 || args.nodes > 0) {
    if (!(args.pmax > 0) || args.nodes < 2)
      throw std::invalid_argument("build-table: need --pmax > 0 and --nodes >= 2");
    spec.dimension = args.dim > 0 ? args.dim : 1;
    spec.degree = args.degree;
    spec.pmax.assign(spec.dimension, args.pmax);
    spec.count.assign(spec.dimension, args.nodes);
    spec.refine_nodes.assign(spec.dimension, parse_double_list(args.lowpe));
  } else {
    spec = default_table_spec(args.dim > 0 ? args.dim : 2, args.degree);
  }
  spec.method = StabilizationMethod::by_name(args.kind);
  spec.reference_formula = args.reference;
  spec.training_cells = args.train_n;
  spec.fine_factor = args.fine_factor;
  spec.jobs = args.jobs;
  spec.skip_failed = args.skip_failed;

  std::vector<TableBuildLogEntry> log;
  const PhiTable table = build_table(spec, &log);

  std::ostringstream body;
  save_table(body, table);
  atomic_write_file(args.out, body.str());

  std::ostringstream trace;
  trace << "node,peclet1,peclet2,tau,J,phi,iterations,boundary_hit,failed\n";
  for (const TableBuildLogEntry& entry : log) {
    std::string node;
    for (size_t i = 0; i < entry.node_index.size(); ++i)
      node += (i ? ";" : "") + std::to_string(entry.node_index[i]);
    trace << node << ',' << detail::format_double(entry.peclet.size() > 0 ? entry.peclet[0] : 0)
          << ',' << detail::format_double(entry.peclet.size() > 1 ? entry.peclet[1] : 0) << ','
          << detail::format_double(entry.tau) << ',' << detail::format_double(entry.J) << ','
          << detail::format_double(entry.phi) << ',' << entry.iterations << ','
          << (entry.boundary_hit ? 1 : 0) << ',' << (entry.failed ? 1 : 0) << '\n';
  }
  atomic_write_file(args.out + ".log.csv", trace.str());

  std::ostringstream iterates;
  iterates << "node,iterate,tau,J,Jp,Jpp\n";
  for (const TableBuildLogEntry& entry : log) {
    std::string node;
    for (size_t i = 0; i < entry.node_index.size(); ++i)
      node += (i ? ";" : "") + std::to_string(entry.node_index[i]);
    for (size_t it = 0; it < entry.trace.size(); ++it) {
      iterates << node << ',' << it << ',' << detail::format_double(entry.trace[it][0]) << ','
               << detail::format_double(entry.trace[it][1]) << ','
               << detail::format_double(entry.trace[it][2]) << ','
               << detail::format_double(entry.trace[it][3]) << '\n';
    }
  }
  atomic_write_file(args.out + ".trace.csv", iterates.str());

  std::cout << "wrote " << args.out << " (" << table.node_count() << " nodes, dim "
            << table.dimension << ", degree " << table.degree << ", kind " << table.kind << ")\n";
  return 0;
}

// ---------------------------------------------------------------------- //

struct SolveArgs {
  std::string config;
  std::string formula;  // overrides config
  std::string table;    // overrides config
  std::string out_solution;
  std::string out_errors;
};

int cmd_solve(const SolveArgs& args) {
  RunConfig config = RunConfig::from_file(args.config);

  const std::string catalog = config.take_or("problem.catalog", "test1");
  const int degree = config.take_int("problem.degree", 1);
  const int nx = config.take_int("problem.nx", 40);

  std::shared_ptr<const Mesh> mesh;
  ProblemSpec problem;
  if (catalog == "test1") {
    const int angle = config.take_int("problem.angle_index", 0);
    const double k = config.take_double("problem.k", 1600.0);
    const double mu = config.take_double("problem.mu", 1.0);
    mesh = std::make_shared<Mesh>(build_structured(Box{}, nx, nx));
    problem = make_test1_problem(angle, k, mu);
  } else if (catalog == "test2") {
    const double mu = config.take_double("problem.mu", 1e-4);
    Box box;
    box.hi = Point(1.0, 0.5);
    mesh = std::make_shared<Mesh>(build_structured(box, nx, nx / 2));
    problem = make_test2_problem(mu);
  } else if (catalog == "constant") {
    const double mu = config.take_double("problem.mu", 1.0);
    const Point a(config.take_double("problem.ax", 1.0), config.take_double("problem.ay", 0.0));
    mesh = std::make_shared<Mesh>(build_structured(Box{}, nx, nx));
    problem.velocity = constant_velocity(a);
    problem.diffusion = constant_field(mu);
    problem.source = constant_field(config.take_double("problem.f", 1.0));
  } else if (catalog == "imported") {
    const std::string mesh_path = config.take_or("problem.mesh", "");
    const std::string velocity_path = config.take_or("problem.velocity", "");
    if (mesh_path.empty() || velocity_path.empty())
      throw std::invalid_argument("imported catalog needs problem.mesh and problem.velocity");
    auto imported = std::make_shared<Mesh>(load_mesh_file(mesh_path));
    const NodalVelocity velocity = load_velocity_file(velocity_path);
    if (velocity.values.rows() != imported->num_nodes())
      throw std::invalid_argument("velocity/mesh node count mismatch");
    auto p1 = std::make_shared<FiniteElementSpace>(build_space(imported, 1));
    std::vector<std::shared_ptr<FieldEvaluator>> comps;
    for (int c = 0; c < imported->dimension; ++c) {
      DiscreteFunction fc;
      fc.space = p1;
      fc.values = velocity.values.col(c);
      comps.push_back(std::make_shared<FieldEvaluator>(std::move(fc)));
    }
    const int dim = imported->dimension;
    problem.velocity = [comps, dim](const Point& p) {
      Point v = Point::Zero();
      for (int c = 0; c < dim; ++c) v[c] = (*comps[c])(p);
      return v;
    };
    problem.diffusion = constant_field(config.take_double("problem.mu", 1e-4));
    const std::string source = config.take_or("problem.f", "zero");
    if (source == "one")
      problem.source = constant_field(1.0);
    else if (source == "zero")
      problem.source = constant_field(0.0);
    else if (source == "test1")
      problem.source = [](const Point& p) {
        return std::sin(M_PI * p.x()) * std::cos(M_PI * p.y());
      };
    else
      throw std::invalid_argument("unknown problem.f `" + source + "`");
    mesh = imported;
  } else {
    throw std::invalid_argument("unknown problem.catalog `" + catalog + "`");
  }

  const StabilizationMethod method =
      StabilizationMethod::by_name(config.take_or("stabilization.kind", "tbt"));
  const std::string formula_name =
      !args.formula.empty() ? args.formula : config.take_or("stabilization.formula", "codina");
  const std::string table_path =
      !args.table.empty() ? args.table : config.take_or("stabilization.table", "");
  std::shared_ptr<PhiTable> table;
  if (formula_name == "ls" || formula_name == "lsflow") {
    if (table_path.empty())
      throw std::invalid_argument("formula `" + formula_name +
                                  "` needs a table: pass --table or set stabilization.table");
    table = load_table_file(table_path);
    check_table_kind(*table, method);
  }
  const TauFormula formula = TauFormula::by_name(formula_name, table);

  const bool want_reference = config.take_bool("reference.enabled", true);
  const int fine_factor = config.take_int("reference.fine_factor", 6);
  const TauFormula reference_formula =
      TauFormula::by_name(config.take_or("reference.formula", "codina"));
  config.finish();

  auto space = std::make_shared<FiniteElementSpace>(build_space(mesh, degree));
  TauLookupStats stats;
  const TauField tau = make_tau_field(*space, problem, formula, &stats);
  SolverReport report;
  const DiscreteFunction u = solve_stabilized(space, problem, method, tau, &report);

  if (!args.out_solution.empty()) {
    std::ostringstream body;
    body << "dof,x,y,value\n";
    for (int i = 0; i < space->num_dofs(); ++i) {
      const Point p = space->dof_point(i);
      body << i << ',' << detail::format_double(p.x()) << ',' << detail::format_double(p.y())
           << ',' << detail::format_double(u.values[i]) << '\n';
    }
    atomic_write_file(args.out_solution, body.str());
  }

  if (want_reference && !args.out_errors.empty()) {
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
    const TauField fine_tau = make_tau_field(*fine_space, problem, reference_formula);
    const DiscreteFunction reference = solve_stabilized(fine_space, problem, method, fine_tau);
    const ErrorReport errors = error_norms(u, reference);
    const std::vector<BenchRow> rows{
        {formula.name(), degree, "solve", catalog, "", errors.l2, errors.linf}};
    std::ostringstream body;
    write_bench_csv(body, rows);
    atomic_write_file(args.out_errors, body.str());
  }

  std::cout << "solved " << catalog << " (" << space->num_dofs() << " dofs, formula "
            << formula.name() << "), residual " << report.relative_residual;
  if (stats.sign_flips.load() > 0 || stats.clamps.load() > 0)
    std::cout << ", table lookups: " << stats.sign_flips.load() << " sign-flipped, "
              << stats.clamps.load() << " clamped";
  std::cout << "\n";
  return 0;
}

// ---------------------------------------------------------------------- //

struct BenchArgs {
  std::string suite;
  std::string scale = "desk";
  int degree = 1;
  std::string kind = "tbt";
  std::string table;
  std::string mesh;
  std::string velocity;
  std::string out_dir = ".";
  int jobs = 1;
};

void check_table_kind(const PhiTable& table, const StabilizationMethod& method) {
  if (table.kind != method.name())
    throw std::invalid_argument("table was calibrated for kind `" + table.kind +
                                "` but the run uses `" + method.name() + "`");
}

std::vector<TauFormula> bench_formulas(const std::string& table_path,
                                       const StabilizationMethod& method, bool flow_variant) {
  using K = TauFormula::Kind;
  std::vector<TauFormula> formulas = {
      TauFormula::analytic(K::one_d),          TauFormula::analytic(K::codina),
      TauFormula::analytic(K::codina_colomes), TauFormula::analytic(K::hauke),
      TauFormula::analytic(K::franca_valentin)};
  if (!table_path.empty()) {
    auto table = load_table_file(table_path);
    check_table_kind(*table, method);
    formulas.push_back(TauFormula::least_squares(table, LsVariant::isotropic));
    if (flow_variant) formulas.push_back(TauFormula::least_squares(table, LsVariant::flow));
  }
  return formulas;
}

void write_rows(const std::string& dir, const std::string& name,
                const std::vector<BenchRow>& rows) {
  std::ostringstream body;
  write_bench_csv(body, rows);
  atomic_write_file((std::filesystem::path(dir) / name).string(), body.str());
}

void print_means(const std::vector<BenchRow>& rows, const std::vector<TauFormula>& formulas) {
  for (const TauFormula& formula : formulas) {
    const BenchRow* mean = find_mean_row(rows, formula.name());
    if (mean)
      std::cout << "  " << formula.name() << ": mean L2 = " << mean->l2
                << ", mean Linf = " << mean->linf << "\n";
  }
}

int cmd_bench(const BenchArgs& args) {
  const bool paper = args.scale == "paper";
  if (!paper && args.scale != "desk")
    throw std::invalid_argument("bench: --scale must be desk or paper");

  if (args.suite == "convergence") {
    const std::vector<int> meshes = paper ? std::vector<int>{8, 16, 32, 64, 128}
                                          : std::vector<int>{8, 16, 32, 64};
    const ConvergenceResult result = convergence_study(args.degree, meshes);
    std::ostringstream body;
    body << "h,l2,interp_l2\n";
    for (size_t i = 0; i < result.h.size(); ++i)
      body << detail::format_double(result.h[i]) << ',' << detail::format_double(result.l2[i])
           << ',' << detail::format_double(result.interp_l2[i]) << '\n';
    atomic_write_file((std::filesystem::path(args.out_dir) / "convergence.csv").string(),
                      body.str());
    std::cout << "convergence P" << args.degree << ": slope = " << result.slope
              << ", interpolation slope = " << result.interp_slope << "\n";
    return 0;
  }

  if (args.suite == "test1") {
    Test1Spec spec;
    spec.degree = args.degree;
    spec.method = StabilizationMethod::by_name(args.kind);
    spec.jobs = args.jobs;
    if (paper) {
      spec.nx = args.degree == 1 ? 120 : (args.degree == 2 ? 60 : 40);
      spec.fine_factor = args.degree == 2 ? 6 : 10;
    } else {
      spec.nx = 40;
      spec.fine_factor = 6;
      spec.magnitudes = {1600, 6400, 25600};
    }
    const auto formulas = bench_formulas(args.table, spec.method, true);
    const std::vector<BenchRow> rows = run_test1(spec, formulas);
    write_rows(args.out_dir, "test1.csv", rows);
    std::cout << "test1 (" << args.scale << ", P" << args.degree << "):\n";
    print_means(rows, formulas);
    return 0;
  }

  if (args.suite == "test2") {
    Test2Spec spec;
    spec.degree = args.degree;
    spec.method = StabilizationMethod::by_name(args.kind);
    spec.jobs = args.jobs;
    if (paper) {
      spec.nx = 96;
      spec.fine_factor = args.degree == 1 ? 12 : (args.degree == 2 ? 6 : 4);
    } else {
      spec.nx = 32;
      spec.fine_factor = 6;
      spec.mu_values = {1e-4, 4e-4, 1.6e-3};
    }
    const auto formulas = bench_formulas(args.table, spec.method, true);
    const std::vector<BenchRow> rows = run_test2(spec, formulas);
    write_rows(args.out_dir, "test2.csv", rows);
    std::cout << "test2 (" << args.scale << ", P" << args.degree << "):\n";
    {
      Box box;
      box.hi = Point(1.0, 0.5);
      auto mesh = std::make_shared<Mesh>(build_structured(box, spec.nx, spec.nx / 2));
      const FiniteElementSpace space = build_space(mesh, spec.degree);
      const auto lo = peclet_range(space, make_test2_problem(spec.mu_values.back()));
      const auto hi = peclet_range(space, make_test2_problem(spec.mu_values.front()));
      std::cout << "  Pe_h range (degree-scaled h): [" << lo.first << ", " << hi.second
                << "]; raw h: [" << lo.first * spec.degree << ", "
                << hi.second * spec.degree << "]\n";
    }
    print_means(rows, formulas);
    return 0;
  }

  if (args.suite == "unstructured") {
    if (args.mesh.empty() || args.velocity.empty())
      throw std::invalid_argument("bench unstructured: needs --mesh and --velocity");
    const Mesh mesh = load_mesh_file(args.mesh);
    const NodalVelocity velocity = load_velocity_file(args.velocity);
    UnstructuredSpec spec;
    spec.degree = args.degree;
    spec.method = StabilizationMethod::by_name(args.kind);
    spec.jobs = args.jobs;
    if (!paper) spec.mu_values = {5e-5, 1e-4, 5e-4};
    const auto formulas = bench_formulas(args.table, spec.method, true);
    const std::vector<BenchRow> rows = run_unstructured(mesh, velocity, spec, formulas);
    write_rows(args.out_dir, "unstructured.csv", rows);
    std::cout << "unstructured (" << args.scale << ", P" << args.degree << "):\n";
    print_means(rows, formulas);
    return 0;
  }

  throw std::invalid_argument("unknown bench suite `" + args.suite + "`");
}

int cmd_table_info(const std::string& path) {
  const std::shared_ptr<PhiTable> table = load_table_file(path);
  std::cout << "stabtable: dim " << table->dimension << ", degree " << table->degree << ", kind "
            << table->kind << "\n";
  for (int i = 0; i < table->dimension; ++i) {
    std::cout << "  axis " << i << ": pmax " << table->pmax[i] << ", main count "
              << table->main_count[i] << ", total nodes " << table->axis_size(i);
    if (!table->refine_nodes[i].empty()) {
      std::cout << ", refinement at";
      for (double r : table->refine_nodes[i]) std::cout << ' ' << r;
    }
    std::cout << "\n";
  }
  std::cout << "  " << table->node_count() << " values, phi range ["
            << table->values.minCoeff() << ", " << table->values.maxCoeff() << "]\n";
  for (const auto& [key, value] : table->metadata)
    std::cout << "  # " << key << ' ' << value << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stabilized advection-diffusion solver with least-squares "
               "calibrated coefficients"};
  app.require_subcommand(1);

  BuildTableArgs build_args;
  CLI::App* build = app.add_subcommand("build-table", "calibrate phi on a Peclet grid (offline)");
  build->add_option("--dim", build_args.dim, "table dimension (1 or 2)");
  build->add_option("--degree", build_args.degree, "polynomial degree (1-3)");
  build->add_option("--pmax", build_args.pmax, "Peclet box limit per axis");
  build->add_option("--nodes", build_args.nodes, "main grid cell count per axis");
  build->add_option("--kind", build_args.kind, "stabilization kind: tbt|supg|gls|adjoint");
  build->add_option("--lowpe", build_args.lowpe, "comma list of low-Peclet refinement nodes");
  build->add_option("--reference", build_args.reference, "reference formula (default 1d/codina)");
  build->add_option("--train-n", build_args.train_n, "training cells per side");
  build->add_option("--fine-factor", build_args.fine_factor, "reference refinement factor");
  build->add_option("--jobs", build_args.jobs, "parallel calibration workers");
  build->add_flag("--skip-failed", build_args.skip_failed, "fill failed nodes from neighbors");
  build->add_option("--out", build_args.out, "output table path")->required();

  SolveArgs solve_args;
  CLI::App* solve = app.add_subcommand("solve", "single stabilized solve from a config file");
  solve->add_option("--config", solve_args.config, "config file")->required();
  solve->add_option("--formula", solve_args.formula, "tau formula override");
  solve->add_option("--table", solve_args.table, "phi table for ls/lsflow");
  solve->add_option("--out-solution", solve_args.out_solution, "solution CSV path");
  solve->add_option("--out-errors", solve_args.out_errors, "error CSV path");

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "benchmark suites");
  bench->add_option("--suite", bench_args.suite, "test1|test2|unstructured|convergence")
      ->required();
  bench->add_option("--scale", bench_args.scale, "desk|paper");
  bench->add_option("--degree", bench_args.degree, "polynomial degree");
  bench->add_option("--kind", bench_args.kind, "stabilization kind");
  bench->add_option("--table", bench_args.table, "phi table for the ls formulas");
  bench->add_option("--mesh", bench_args.mesh, "imported mesh (unstructured suite)");
  bench->add_option("--velocity", bench_args.velocity, "nodal velocity file");
  bench->add_option("--out-dir", bench_args.out_dir, "output directory");
  bench->add_option("--jobs", bench_args.jobs, "parallel sweep workers");

  std::string info_table;
  CLI::App* info = app.add_subcommand("table-info", "inspect a phi table");
  info->add_option("--table", info_table, "table path")->required();

  try {
    app.parse(argc, argv);
    if (build->parsed()) return cmd_build_table(build_args);
    if (solve->parsed()) return cmd_solve(solve_args);
    if (bench->parsed()) return cmd_bench(bench_args);
    if (info->parsed()) return cmd_table_info(info_table);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const TableParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const MeshParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
