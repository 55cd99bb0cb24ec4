#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sfh/estimator.hpp"
#include "sfh/harmonic_basis.hpp"
#include "sfh/quadrature.hpp"
#include "sfh/testbed.hpp"

namespace sfh {

enum class ExperimentKind { degree, sigma, machines };
enum class SamplingMode { rotated_designs, random_uniform, random_density };

ExperimentKind experiment_kind_from_string(const std::string& s);
SamplingMode sampling_mode_from_string(const std::string& s);
std::string to_string(ExperimentKind k);
std::string to_string(SamplingMode m);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::degree;
  std::vector<int> degrees{5, 10, 15};
  std::vector<int> machines{20};
  std::vector<double> sigmas{0.0};
  /// Design file; when empty, the smallest bundled design of strength >= t.
  std::filesystem::path design;
  int design_strength = 45;
  int replicates = 10;
  std::uint64_t base_seed = 20240601;
  int eval_points = 10000;
  FilterSpec filter;
  SamplingMode sampling = SamplingMode::rotated_designs;
  /// Split one fixed data set of `total_points` uniform points over the machines.
  bool fixed_total = false;
  std::size_t total_points = 40000;
  /// Points per machine in the random sampling modes; 0 means twice the
  /// number of moments, 2 (solve degree + 1)^2.
  std::size_t points_per_machine = 0;
  /// Exactness degree for solved weights; 0 means 3n - 1.
  int solve_degree = 0;
  /// Smoothness r used by the within-theory flag.
  double smoothness = 4.5;
  ArgumentConvention convention = ArgumentConvention::euclidean_distance;
  int workers = 1;
  bool record_timing = false;

  void validate() const;
};

struct ResultRow {
  double x = 0.0;
  double mean_error = 0.0;
  double std_error = 0.0;
  int replicates = 0;
  bool within_theory = false;
  double seconds = 0.0;
  /// sigma for degree and machines sweeps, 0 for sigma sweeps.
  double series = 0.0;
};

struct SweepResult {
  std::vector<ResultRow> rows;
  std::vector<std::string> warnings;
};

/// Smallest bundled symmetric design with strength >= t.
std::filesystem::path bundled_design(int t);
/// Every bundled design file as (claimed strength, path), sorted.
std::vector<std::pair<int, std::filesystem::path>> bundled_designs();

/// Per-machine data and rules for one replicate of an experiment cell.
struct MachineData {
  std::vector<NoisyDataset> datasets;
  std::vector<QuadratureRule> rules;
  std::size_t total_points() const;
  std::size_t min_shard() const;
};

/// Builds the machines of one cell. Noise for machine j of replicate r is
/// drawn from derive_seed(base_seed, {r, j}); sampling locations in the
/// random modes from derive_seed(base_seed, {r, j, 1}) (or {r} for the
/// fixed-total data set).
MachineData build_machines(const ExperimentConfig& config, int n, int m, double sigma, int replicate);

/// Single replicate of a cell: the pooled distributed fit.
HarmonicExpansion fit_replicate(const ExperimentConfig& config, int n, int m, double sigma, int replicate);

/// Spiral evaluation rule with config.eval_points nodes and equal weights.
QuadratureRule evaluation_rule(const ExperimentConfig& config);

SweepResult run_degree_sweep(const ExperimentConfig& config);
SweepResult run_sigma_sweep(const ExperimentConfig& config);
SweepResult run_machines_sweep(const ExperimentConfig& config);
SweepResult run_experiment(const ExperimentConfig& config);

struct LogLogFit {
  double slope = 0.0;
  double prefactor = 0.0;
  double residual = 0.0;  // RMS of log-residuals
  std::size_t used = 0;
};

/// OLS of log y on log x over rows with x in [x_min, x_max] and x > 0.
/// Throws if fewer than two rows qualify or a qualifying row has y <= 0.
LogLogFit fit_loglog_slope(const std::vector<ResultRow>& rows, double x_min, double x_max);

void write_csv(const std::vector<ResultRow>& rows, std::ostream& out);
void write_svg(const std::vector<ResultRow>& rows, const std::string& x_label, std::ostream& out);

/// Writes <path>.csv and/or <path>.svg (extension of `path` replaced).
/// `formats` holds "csv" and/or "svg". Returns the written files.
std::vector<std::filesystem::path> emit_outputs(const std::vector<ResultRow>& rows, const std::filesystem::path& path,
                                                const std::vector<std::string>& formats,
                                                const std::string& x_label = "x");

}  // namespace sfh
