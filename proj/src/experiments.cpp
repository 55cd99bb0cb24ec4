#include "sfh/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "sfh/parallel.hpp"

namespace sfh {

namespace {

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

QuadratureRule zero_rule(const PointSet& points, int degree) {
  return QuadratureRule(points, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(points.size())), degree,
                        RuleProvenance::solved_random)
      .with_threshold_checked();
}

// Solved, thresholded weights; an unsolvable shard contributes the zero
// estimator, as on the failure event of the random-sampling analysis.
QuadratureRule solved_rule(const PointSet& points, int degree) {
  try {
    return threshold_weights(solve_weights(points, degree));
  } catch (const InfeasibleError&) {
    return zero_rule(points, degree);
  } catch (const ConditioningError&) {
    return zero_rule(points, degree);
  } catch (const std::invalid_argument&) {
    return zero_rule(points, degree);
  }
}

NoiseModel noise_for(double sigma, std::uint64_t seed) {
  return NoiseModel{sigma > 0.0 ? NoiseKind::gaussian : NoiseKind::none, sigma, seed};
}

int solve_degree_for(const ExperimentConfig& c, int n) { return c.solve_degree > 0 ? c.solve_degree : 3 * n - 1; }

std::size_t points_per_machine_for(const ExperimentConfig& c, int n) {
  if (c.points_per_machine > 0) return c.points_per_machine;
  const auto k = static_cast<std::size_t>(harmonic_count(solve_degree_for(c, n)));
  return 2 * k;
}

}  // namespace

ExperimentKind experiment_kind_from_string(const std::string& s) {
  if (s == "degree") return ExperimentKind::degree;
  if (s == "sigma") return ExperimentKind::sigma;
  if (s == "machines") return ExperimentKind::machines;
  throw std::invalid_argument("unknown experiment '" + s + "' (expected degree|sigma|machines)");
}

SamplingMode sampling_mode_from_string(const std::string& s) {
  if (s == "rotated" || s == "rotated_designs") return SamplingMode::rotated_designs;
  if (s == "uniform" || s == "random_uniform") return SamplingMode::random_uniform;
  if (s == "density" || s == "random_density") return SamplingMode::random_density;
  throw std::invalid_argument("unknown sampling mode '" + s + "' (expected rotated|uniform|density)");
}

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::degree: return "degree";
    case ExperimentKind::sigma: return "sigma";
    case ExperimentKind::machines: return "machines";
  }
  return "unknown";
}

std::string to_string(SamplingMode m) {
  switch (m) {
    case SamplingMode::rotated_designs: return "rotated";
    case SamplingMode::random_uniform: return "uniform";
    case SamplingMode::random_density: return "density";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (degrees.empty() || machines.empty() || sigmas.empty()) {
    throw std::invalid_argument("degree, machine and sigma lists must be non-empty");
  }
  for (int n : degrees) {
    if (n < 1) throw std::invalid_argument("degrees must be >= 1");
  }
  for (int m : machines) {
    if (m < 1) throw std::invalid_argument("machine counts must be >= 1");
  }
  for (double s : sigmas) {
    if (!(s >= 0.0)) throw std::invalid_argument("sigma values must be >= 0");
  }
  if (eval_points < 1) throw std::invalid_argument("eval_points must be >= 1");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
}

std::vector<std::pair<int, std::filesystem::path>> bundled_designs() {
  std::vector<std::pair<int, std::filesystem::path>> out;
  const std::filesystem::path dir = SFH_DESIGN_DIR;
  if (!std::filesystem::is_directory(dir)) return out;
  const std::regex pattern(R"([a-z]+(\d+)_(\d+)\.txt)");
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) out.emplace_back(std::stoi(m[1].str()), entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::filesystem::path bundled_design(int t) {
  for (const auto& [strength, path] : bundled_designs()) {
    if (strength >= t && path.filename().string().starts_with("sym")) return path;
  }
  throw std::runtime_error("no bundled design of strength >= " + std::to_string(t) + " in " SFH_DESIGN_DIR);
}

std::size_t MachineData::total_points() const {
  std::size_t total = 0;
  for (const auto& d : datasets) total += d.size();
  return total;
}

std::size_t MachineData::min_shard() const {
  std::size_t smallest = datasets.empty() ? 0 : datasets.front().size();
  for (const auto& d : datasets) smallest = std::min(smallest, d.size());
  return smallest;
}

MachineData build_machines(const ExperimentConfig& config, int n, int m, double sigma, int replicate) {
  const WendlandTarget target{WendlandTarget::octahedral_centers(), config.convention};
  const auto r = static_cast<std::uint64_t>(replicate);
  MachineData out;

  if (config.fixed_total) {
    const PointSet all = random_uniform_points(config.total_points, derive_seed(config.base_seed, {r}));
    const NoisyDataset data = sample_noisy(all, target, noise_for(sigma, derive_seed(config.base_seed, {r, 0xDA7A})), 0);
    out.datasets = partition(data, m, PartitionPolicy::block);
    for (const auto& shard : out.datasets) out.rules.push_back(solved_rule(shard.points(), solve_degree_for(config, n)));
    return out;
  }

  if (config.sampling == SamplingMode::rotated_designs) {
    const auto path = config.design.empty() ? bundled_design(config.design_strength) : config.design;
    const QuadratureRule design = load_design(path, config.design_strength);
    const NoisyDataset base(design.nodes(), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(design.size())));
    for (const auto& shard : partition(base, m, PartitionPolicy::rotated_designs)) {
      const auto j = static_cast<std::uint64_t>(*shard.machine_id());
      out.datasets.push_back(sample_noisy(shard.points(), target, noise_for(sigma, derive_seed(config.base_seed, {r, j})), 0));
      out.rules.emplace_back(shard.points(), design.weights(), design.claimed_degree(), RuleProvenance::design_file);
    }
    return out;
  }

  const std::size_t count = points_per_machine_for(config, n);
  for (int j = 0; j < m; ++j) {
    const auto ju = static_cast<std::uint64_t>(j);
    const std::uint64_t site_seed = derive_seed(config.base_seed, {r, ju, 1});
    // Density 1 + x_3 / 2 relative to the uniform measure: bounded in [1/2, 3/2].
    const PointSet pts = config.sampling == SamplingMode::random_uniform
                             ? random_uniform_points(count, site_seed)
                             : random_density_points(count, [](const UnitPoint& x) { return 1.0 + 0.5 * x.z(); }, 1.5,
                                                     site_seed);
    out.datasets.push_back(sample_noisy(pts, target, noise_for(sigma, derive_seed(config.base_seed, {r, ju})), 0));
    out.rules.push_back(solved_rule(pts, solve_degree_for(config, n)));
  }
  return out;
}

HarmonicExpansion fit_replicate(const ExperimentConfig& config, int n, int m, double sigma, int replicate) {
  const MachineData md = build_machines(config, n, m, sigma, replicate);
  return fit_distributed(md.datasets, md.rules, n, config.filter, config.workers).pooled();
}

QuadratureRule evaluation_rule(const ExperimentConfig& config) {
  return equal_weight_rule(spiral_points(static_cast<std::size_t>(config.eval_points)), 0);
}

namespace {

struct EvalGrid {
  QuadratureRule rule;
  Eigen::VectorXd reference;
};

EvalGrid make_grid(const ExperimentConfig& config) {
  EvalGrid g{evaluation_rule(config), {}};
  const WendlandTarget target{WendlandTarget::octahedral_centers(), config.convention};
  g.reference.resize(static_cast<Eigen::Index>(g.rule.size()));
  for (std::size_t k = 0; k < g.rule.size(); ++k) g.reference(static_cast<Eigen::Index>(k)) = target(g.rule.nodes()[k]);
  return g;
}

ResultRow run_cell(const ExperimentConfig& config, const EvalGrid& grid, int n, int m, double sigma, double x,
                   double series) {
  const auto start = std::chrono::steady_clock::now();
  const int reps = sigma > 0.0 ? config.replicates : 1;
  const int L = 2 * n - 1;
  Eigen::MatrixXd coeffs(harmonic_count(L), reps);
  std::vector<std::size_t> min_shard(static_cast<std::size_t>(reps));
  std::vector<std::size_t> total(static_cast<std::size_t>(reps));
  const int inner = reps == 1 ? config.workers : 1;
  parallel_for(static_cast<std::size_t>(reps), reps == 1 ? 1 : config.workers, [&](std::size_t r) {
    const MachineData md = build_machines(config, n, m, sigma, static_cast<int>(r));
    min_shard[r] = md.min_shard();
    total[r] = md.total_points();
    coeffs.col(static_cast<Eigen::Index>(r)) =
        fit_distributed(md.datasets, md.rules, n, config.filter, inner).pooled().coefficients();
  });

  Eigen::MatrixXd values(static_cast<Eigen::Index>(grid.rule.size()), reps);
  Eigen::VectorXd row(harmonic_count(L));
  for (std::size_t k = 0; k < grid.rule.size(); ++k) {
    real_harmonics_d2(L, Vec3(grid.rule.nodes().col(k)), row);
    values.row(static_cast<Eigen::Index>(k)).noalias() = row.transpose() * coeffs;
  }
  Eigen::VectorXd errors(reps);
  for (int r = 0; r < reps; ++r) errors(r) = l2_error(values.col(r), grid.reference, grid.rule);

  ResultRow out;
  out.x = x;
  out.series = series;
  out.replicates = reps;
  out.mean_error = errors.mean();
  out.std_error = reps > 1 ? std::sqrt((errors.array() - out.mean_error).square().sum() / (reps - 1) / reps) : 0.0;
  out.within_theory = within_theory(min_shard.front(), total.front(), config.smoothness);
  if (config.record_timing) {
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return out;
}

void check_design_strength(const ExperimentConfig& config, int n, SweepResult& result) {
  if (config.fixed_total || config.sampling != SamplingMode::rotated_designs) {
    const auto moments = static_cast<std::size_t>(harmonic_count(solve_degree_for(config, n)));
    for (int m : config.machines) {
      const std::size_t shard =
          config.fixed_total ? config.total_points / static_cast<std::size_t>(m) : points_per_machine_for(config, n);
      if (shard <= moments) {
        result.warnings.push_back("shards of " + std::to_string(shard) + " points cannot be solved at degree " +
                                  std::to_string(solve_degree_for(config, n)) + " for n = " + std::to_string(n) +
                                  ", m = " + std::to_string(m) + "; their weights are zero");
      }
    }
    return;
  }
  if (config.design_strength < 3 * n - 1) {
    result.warnings.push_back("design strength " + std::to_string(config.design_strength) + " is below 3n-1 = " +
                              std::to_string(3 * n - 1) + " for n = " + std::to_string(n));
  }
}

void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return a.series != b.series ? a.series < b.series : a.x < b.x;
  });
}

}  // namespace

SweepResult run_degree_sweep(const ExperimentConfig& config) {
  config.validate();
  SweepResult result;
  const EvalGrid grid = make_grid(config);
  for (int n : config.degrees) check_design_strength(config, n, result);
  for (double sigma : config.sigmas) {
    for (int n : config.degrees) {
      result.rows.push_back(run_cell(config, grid, n, config.machines.front(), sigma, n, sigma));
    }
  }
  sort_rows(result.rows);
  return result;
}

SweepResult run_sigma_sweep(const ExperimentConfig& config) {
  config.validate();
  SweepResult result;
  const EvalGrid grid = make_grid(config);
  const int n = config.degrees.front();
  check_design_strength(config, n, result);
  for (double sigma : config.sigmas) {
    result.rows.push_back(run_cell(config, grid, n, config.machines.front(), sigma, sigma, 0.0));
  }
  sort_rows(result.rows);
  return result;
}

SweepResult run_machines_sweep(const ExperimentConfig& config) {
  config.validate();
  SweepResult result;
  const EvalGrid grid = make_grid(config);
  const int n = config.degrees.front();
  check_design_strength(config, n, result);
  for (double sigma : config.sigmas) {
    for (int m : config.machines) result.rows.push_back(run_cell(config, grid, n, m, sigma, m, sigma));
  }
  sort_rows(result.rows);
  return result;
}

SweepResult run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::degree: return run_degree_sweep(config);
    case ExperimentKind::sigma: return run_sigma_sweep(config);
    case ExperimentKind::machines: return run_machines_sweep(config);
  }
  throw std::invalid_argument("unknown experiment kind");
}

LogLogFit fit_loglog_slope(const std::vector<ResultRow>& rows, double x_min, double x_max) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (const auto& row : rows) {
    if (!(row.x > 0.0) || row.x < x_min || row.x > x_max) continue;
    if (!(row.mean_error > 0.0)) throw std::invalid_argument("fit_loglog_slope: nonpositive error in range");
    lx.push_back(std::log(row.x));
    ly.push_back(std::log(row.mean_error));
  }
  if (lx.size() < 2) throw std::invalid_argument("fit_loglog_slope: fewer than two usable rows");
  const auto k = static_cast<Eigen::Index>(lx.size());
  Eigen::MatrixXd A(k, 2);
  Eigen::VectorXd b(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    A(i, 0) = lx[static_cast<std::size_t>(i)];
    A(i, 1) = 1.0;
    b(i) = ly[static_cast<std::size_t>(i)];
  }
  if (A.col(0).maxCoeff() == A.col(0).minCoeff()) throw std::invalid_argument("fit_loglog_slope: x values coincide");
  const Eigen::Vector2d coef = A.colPivHouseholderQr().solve(b);
  LogLogFit fit;
  fit.slope = coef(0);
  fit.prefactor = std::exp(coef(1));
  fit.residual = std::sqrt((A * coef - b).squaredNorm() / static_cast<double>(k));
  fit.used = lx.size();
  return fit;
}

void write_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << "x,mean_error,std_error,replicates,within_theory,seconds\n";
  for (const auto& r : rows) {
    out << fmt_num(r.x) << ',' << fmt_num(r.mean_error) << ',' << fmt_num(r.std_error) << ',' << r.replicates << ','
        << (r.within_theory ? 1 : 0) << ',' << fmt_num(r.seconds) << '\n';
  }
}

void write_svg(const std::vector<ResultRow>& rows, const std::string& x_label, std::ostream& out) {
  constexpr double W = 640, H = 420, left = 70, right = 20, top = 20, bottom = 50;
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) {
    if (r.x > 0.0 && r.mean_error > 0.0) pts.emplace_back(std::log10(r.x), std::log10(r.mean_error));
  }
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - left - right << "\" height=\""
      << H - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">log10 " << x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << (top + H - bottom) / 2 << "\" font-size=\"13\" transform=\"rotate(-90 16 "
      << (top + H - bottom) / 2 << ")\" text-anchor=\"middle\">log10 L2 error</text>\n";
  if (!pts.empty()) {
    double x0 = pts.front().first, x1 = x0, y0 = pts.front().second, y1 = y0;
    for (const auto& [x, y] : pts) {
      x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
    if (x1 - x0 < 1e-9) x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 < 1e-9) y0 -= 0.5, y1 += 0.5;
    auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * (W - left - right); };
    auto sy = [&](double y) { return top + (y1 - y) / (y1 - y0) * (H - top - bottom); };
    char buf[200];
    for (const auto& [x, y] : pts) {
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3.5\" fill=\"steelblue\"/>\n", sx(x), sy(y));
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\">%.3g</text>\n", sx(x0), H - bottom + 16,
                  x0);
    out << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"end\">%.3g</text>\n",
                  sx(x1), H - bottom + 16, x1);
    out << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"end\">%.3g</text>\n",
                  left - 6, sy(y1) + 4, y1);
    out << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"end\">%.3g</text>\n",
                  left - 6, sy(y0) + 4, y0);
    out << buf;
    if (pts.size() >= 2 && x1 - x0 > 1e-9) {
      const LogLogFit fit = fit_loglog_slope(rows, 0.0, std::numeric_limits<double>::infinity());
      const double a = std::log10(fit.prefactor);
      std::snprintf(buf, sizeof buf,
                    "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"crimson\" stroke-dasharray=\"5,3\"/>\n",
                    sx(x0), sy(a + fit.slope * x0), sx(x1), sy(a + fit.slope * x1));
      out << buf;
      std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"13\" fill=\"crimson\">slope %.3f</text>\n",
                    left + 10, top + 18, fit.slope);
      out << buf;
    }
  }
  out << "</svg>\n";
}

std::vector<std::filesystem::path> emit_outputs(const std::vector<ResultRow>& rows, const std::filesystem::path& path,
                                                const std::vector<std::string>& formats, const std::string& x_label) {
  std::vector<std::filesystem::path> written;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  for (const auto& f : formats) {
    if (f != "csv" && f != "svg") throw std::invalid_argument("unknown output format '" + f + "'");
    auto target = path;
    target.replace_extension(f);
    std::ofstream out(target, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + target.string());
    if (f == "csv") {
      write_csv(rows, out);
    } else {
      write_svg(rows, x_label, out);
    }
    if (!out) throw std::runtime_error("write failed for " + target.string());
    written.push_back(target);
  }
  return written;
}

}  // namespace sfh
