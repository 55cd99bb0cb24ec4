#include "sfh/cli.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "sfh/estimator.hpp"
#include "sfh/experiments.hpp"
#include "sfh/quadrature.hpp"
#include "sfh/sphere_geom.hpp"
#include "sfh/testbed.hpp"

namespace sfh {
namespace {

struct Options {
  std::string design;
  std::string rule;
  std::string data;
  std::string model;
  std::string points;
  std::string out;
  std::string filter = "plateau";
  std::string sampling = "rotated";
  std::string reference = "wendland";
  std::string convention = "euclidean";
  std::vector<std::string> formats{"csv"};
  std::vector<int> degrees;
  std::vector<int> machines;
  std::vector<double> sigmas;
  std::optional<int> t;
  std::optional<int> replicates;
  std::optional<std::size_t> total_points;
  std::uint64_t seed = ExperimentConfig{}.base_seed;
  std::size_t count = 1000;
  std::size_t points_per_machine = 0;
  int kappa = 5;
  int eval_points = 10000;
  int workers = 1;
  int replicate = 0;
  int solve_degree = 0;
  bool full = false;
  bool fixed_total = false;
  bool timings = false;
  bool density = false;
};

/// Carries a category for the machine-readable error line.
struct CliError : std::runtime_error {
  CliError(std::string cat, const std::string& what) : std::runtime_error(what), category(std::move(cat)) {}
  std::string category;
};

ArgumentConvention convention_from(const std::string& s) {
  if (s == "euclidean" || s == "euclidean_distance") return ArgumentConvention::euclidean_distance;
  if (s == "inner" || s == "inner_product") return ArgumentConvention::inner_product;
  throw CliError("usage", "unknown convention '" + s + "'");
}

std::ostream& open_out(const std::string& path, std::ofstream& file, std::ostream& fallback) {
  if (path.empty() || path == "-") return fallback;
  file.open(path);
  if (!file) throw CliError("io", "cannot write " + path);
  return file;
}

int single_degree(const Options& o) {
  if (o.degrees.size() != 1) throw CliError("usage", "--n takes exactly one degree here");
  return o.degrees.front();
}

ExperimentConfig make_config(const Options& o, ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  // Scaled defaults, or the full-size configuration with --full.
  switch (kind) {
    case ExperimentKind::degree:
      c.degrees = o.full ? std::vector<int>{5, 10, 15, 20, 25} : std::vector<int>{5, 10, 15};
      c.machines = {o.full ? 100 : 20};
      c.sigmas = {0.0};
      break;
    case ExperimentKind::sigma:
      c.degrees = {o.full ? 25 : 15};
      c.machines = {o.full ? 100 : 20};
      c.sigmas = o.full ? std::vector<double>{1e-4, 1e-3, 1e-2, 1e-1} : std::vector<double>{1e-3, 1e-2, 1e-1};
      break;
    case ExperimentKind::machines:
      c.degrees = {o.full ? 25 : 15};
      c.machines = o.full ? std::vector<int>{10, 20, 50, 100, 200, 500} : std::vector<int>{5, 10, 20, 40, 80};
      c.sigmas = {0.0, 0.1};
      break;
  }
  c.design_strength = o.full ? 75 : 45;
  if (!o.degrees.empty()) c.degrees = o.degrees;
  if (!o.machines.empty()) c.machines = o.machines;
  if (!o.sigmas.empty()) c.sigmas = o.sigmas;
  if (o.t) c.design_strength = *o.t;
  if (o.replicates) c.replicates = *o.replicates;
  if (o.total_points) c.total_points = *o.total_points;
  c.design = o.design;
  c.base_seed = o.seed;
  c.eval_points = o.eval_points;
  c.filter = FilterSpec{filter_kind_from_string(o.filter), o.kappa};
  c.sampling = sampling_mode_from_string(o.sampling);
  c.fixed_total = o.fixed_total;
  c.points_per_machine = o.points_per_machine;
  c.solve_degree = o.solve_degree;
  c.convention = convention_from(o.convention);
  c.workers = o.workers;
  c.record_timing = o.timings;
  c.validate();
  return c;
}

NoisyDataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError("io", "cannot open " + path);
  std::vector<std::array<double, 4>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::array<double, 4> r{};
    std::string extra;
    if (!(ls >> r[0] >> r[1] >> r[2] >> r[3]) || (ls >> extra)) {
      throw CliError("parse", path + ":" + std::to_string(lineno) + ": expected 4 numbers (x y z value)");
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw CliError("parse", path + ": no data rows");
  Eigen::Matrix3Xd pts(3, static_cast<Eigen::Index>(rows.size()));
  Eigen::VectorXd vals(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    pts.col(static_cast<Eigen::Index>(i)) << rows[i][0], rows[i][1], rows[i][2];
    vals(static_cast<Eigen::Index>(i)) = rows[i][3];
  }
  return NoisyDataset(PointSet(std::move(pts)), std::move(vals));
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

int cmd_points(const Options& o, const std::string& mode, std::ostream& out) {
  PointSet p;
  if (mode == "spiral") {
    p = spiral_points(o.count);
  } else if (mode == "random") {
    p = o.density ? random_density_points(o.count, [](const UnitPoint& x) { return 1.0 + 0.5 * x.z(); }, 1.5, o.seed)
                  : random_uniform_points(o.count, o.seed);
  } else {
    throw CliError("usage", "points mode must be spiral or random");
  }
  std::ofstream file;
  write_points(p, open_out(o.out, file, out));
  return 0;
}

int cmd_quadrature(const Options& o, const std::string& mode, std::ostream& out) {
  if (mode == "check") {
    if (!o.t) throw CliError("usage", "quadrature check needs --t");
    QuadratureRule rule = !o.rule.empty() ? read_rule(o.rule, *o.t, RuleProvenance::solved_random)
                          : !o.design.empty() ? load_design(o.design, *o.t)
                                              : load_design(bundled_design(*o.t), *o.t);
    const double residual = exactness_residual(rule, *o.t);
    const bool pass = passes_exactness(rule, *o.t);
    char buf[128];
    std::snprintf(buf, sizeof buf, "nodes=%zu degree=%d residual=%.3e %s", rule.size(), *o.t, residual,
                  pass ? "pass" : "fail");
    out << buf << '\n';
    return pass ? 0 : 1;
  }
  if (mode == "solve") {
    if (o.points.empty()) throw CliError("usage", "quadrature solve needs --points");
    const QuadratureRule rule = threshold_weights(solve_weights(read_points(o.points), o.t ? *o.t : single_degree(o)));
    std::ofstream file;
    write_rule(rule, open_out(o.out, file, out));
    return 0;
  }
  throw CliError("usage", "quadrature mode must be check or solve");
}

int cmd_fit(const Options& o, std::ostream& out, std::ostream& err) {
  const int n = single_degree(o);
  const FilterSpec filter{filter_kind_from_string(o.filter), o.kappa};
  HarmonicExpansion e;
  if (!o.data.empty()) {
    const NoisyDataset data = read_dataset(o.data);
    QuadratureRule rule = !o.rule.empty() ? read_rule(o.rule, o.t.value_or(3 * n - 1), RuleProvenance::solved_random)
                          : !o.design.empty() ? load_design(o.design, o.t.value_or(3 * n - 1))
                                              : throw CliError("usage", "fit --data needs --rule or --design");
    if (rule.provenance() == RuleProvenance::solved_random) rule = threshold_weights(rule);
    const LocalEstimator local = fit_local(data, rule, n, filter);
    print_warnings(local.warnings(), err);
    e = local.expansion();
  } else {
    Options one = o;
    if (one.machines.size() > 1 || one.sigmas.size() > 1) throw CliError("usage", "fit takes one --machines and --sigma");
    ExperimentConfig c = make_config(one, ExperimentKind::degree);
    c.degrees = {n};
    const int m = o.machines.empty() ? c.machines.front() : o.machines.front();
    const double sigma = o.sigmas.empty() ? 0.0 : o.sigmas.front();
    e = fit_replicate(c, n, m, sigma, sigma > 0.0 ? o.replicate : 0);
  }
  std::ofstream file;
  write_expansion(e, open_out(o.out, file, out));
  return 0;
}

int cmd_eval(const Options& o, std::ostream& out) {
  if (o.model.empty()) throw CliError("usage", "eval needs --model");
  std::ifstream in(o.model);
  if (!in) throw CliError("io", "cannot open " + o.model);
  const HarmonicExpansion e = read_expansion(in);
  std::ofstream file;
  std::ostream& dst = open_out(o.out, file, out);
  dst << std::setprecision(17);
  if (!o.points.empty()) {
    const PointSet p = read_points(o.points);
    const Eigen::VectorXd v = e.evaluate(p);
    for (Eigen::Index i = 0; i < v.size(); ++i) dst << v(i) << '\n';
    return 0;
  }
  if (o.reference != "wendland") throw CliError("usage", "eval without --points needs --reference wendland");
  ExperimentConfig c;
  c.eval_points = o.eval_points;
  const QuadratureRule grid = evaluation_rule(c);
  const WendlandTarget target{WendlandTarget::octahedral_centers(), convention_from(o.convention)};
  Eigen::VectorXd ref(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t k = 0; k < grid.size(); ++k) ref(static_cast<Eigen::Index>(k)) = target(grid.nodes()[k]);
  dst << "l2_error " << l2_error(e.evaluate(grid.nodes()), ref, grid) << '\n';
  return 0;
}

int cmd_experiment(const Options& o, const std::string& mode, std::ostream& out, std::ostream& err) {
  const ExperimentKind kind = experiment_kind_from_string(mode);
  const ExperimentConfig c = make_config(o, kind);
  const SweepResult r = run_experiment(c);
  print_warnings(r.warnings, err);
  const std::string x_label = kind == ExperimentKind::degree ? "n" : kind == ExperimentKind::sigma ? "sigma" : "m";
  std::vector<std::vector<ResultRow>> series;
  for (const auto& row : r.rows) {
    if (series.empty() || series.back().front().series != row.series) series.emplace_back();
    series.back().push_back(row);
  }
  if (series.empty()) series.emplace_back();
  for (const auto& rows : series) {
    const bool tagged = series.size() > 1;
    char tag[64] = "";
    if (tagged) std::snprintf(tag, sizeof tag, "_sigma%g", rows.front().series);
    if (o.out.empty() || o.out == "-") {
      if (tagged) out << "# sigma=" << rows.front().series << '\n';
      write_csv(rows, out);
    } else {
      std::filesystem::path path(o.out);
      path.replace_filename(path.stem().string() + tag + path.extension().string());
      for (const auto& f : emit_outputs(rows, path, o.formats, x_label)) err << "wrote " << f.string() << '\n';
    }
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Filtered hyperinterpolation on the sphere for noisy data, local and distributed"};
  app.name("sfh");
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Flat key=value file mirroring the flags; flags override it");

  Options o;
  app.add_option("--design", o.design, "Design file (3 columns)");
  app.add_option("--rule", o.rule, "Rule file (4 columns: x y z w)");
  app.add_option("--data", o.data, "Data file (4 columns: x y z value)");
  app.add_option("--model", o.model, "Expansion file written by fit");
  app.add_option("--points", o.points, "Point file");
  app.add_option("--out", o.out, "Output path ('-' for stdout)");
  app.add_option("--t", o.t, "Design strength / exactness degree");
  app.add_option("--n", o.degrees, "Degree(s)")->delimiter(',');
  app.add_option("--machines", o.machines, "Machine count(s)")->delimiter(',');
  app.add_option("--sigma", o.sigmas, "Noise level(s)")->delimiter(',');
  app.add_option("--replicates", o.replicates, "Replicates per noisy cell")->check(CLI::PositiveNumber);
  app.add_option("--replicate", o.replicate, "Replicate index for fit")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", o.seed, "Base seed");
  app.add_option("--filter", o.filter, "plateau or needlet")->check(CLI::IsMember({"plateau", "needlet"}));
  app.add_option("--kappa", o.kappa, "Filter smoothness")->check(CLI::PositiveNumber);
  app.add_option("--eval-points", o.eval_points, "Spiral evaluation grid size")->check(CLI::PositiveNumber);
  app.add_option("--format", o.formats, "csv,svg")->delimiter(',')->check(CLI::IsMember({"csv", "svg"}));
  app.add_option("--count", o.count, "Number of points")->check(CLI::PositiveNumber);
  app.add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--sampling", o.sampling, "rotated, uniform or density");
  app.add_option("--total-points", o.total_points, "Data size for --fixed-total");
  app.add_option("--points-per-machine", o.points_per_machine, "Random sampling size per machine (0: auto)");
  app.add_option("--solve-degree", o.solve_degree, "Exactness degree of solved weights (0: 3n-1)");
  app.add_option("--reference", o.reference, "wendland or none")->check(CLI::IsMember({"wendland", "none"}));
  app.add_option("--convention", o.convention, "euclidean or inner");
  app.add_flag("--full", o.full, "Full-size configuration (t = 75, m = 100, n up to 25)");
  app.add_flag("--fixed-total", o.fixed_total, "Split one fixed uniform data set over the machines");
  app.add_flag("--timings", o.timings, "Record wall-clock seconds in the CSV");
  app.add_flag("--density", o.density, "points random: sample density 1 + z/2");

  std::string mode;
  auto* points = app.add_subcommand("points", "Write spiral or random points");
  points->add_option("mode", mode, "spiral or random")->required();
  auto* quad = app.add_subcommand("quadrature", "Check a rule's exactness or solve weights");
  quad->add_option("mode", mode, "check or solve")->required();
  auto* fit = app.add_subcommand("fit", "Fit an estimator and write its expansion");
  auto* eval = app.add_subcommand("eval", "Evaluate an expansion or its L2 error");
  auto* exp = app.add_subcommand("experiment", "Run a sweep");
  exp->add_option("mode", mode, "degree, sigma or machines")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error usage: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*points) return cmd_points(o, mode, out);
    if (*quad) return cmd_quadrature(o, mode, out);
    if (*fit) return cmd_fit(o, out, err);
    if (*eval) return cmd_eval(o, out);
    if (*exp) return cmd_experiment(o, mode, out, err);
  } catch (const CliError& e) {
    err << "error " << e.category << ": " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    err << "error parse: " << e.what() << '\n';
    return 3;
  } catch (const InfeasibleError& e) {
    err << "error infeasible: " << e.what() << '\n';
    return 4;
  } catch (const ConditioningError& e) {
    err << "error conditioning: " << e.what() << '\n';
    return 4;
  } catch (const std::invalid_argument& e) {
    err << "error invalid: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error runtime: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace sfh
