#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sfh/harmonic_basis.hpp"
#include "sfh/quadrature.hpp"
#include "sfh/sphere_geom.hpp"

namespace sfh {

/// Sampling points with one observation each.
class NoisyDataset {
 public:
  NoisyDataset(PointSet points, Eigen::VectorXd values, std::optional<int> machine_id = std::nullopt);

  const PointSet& points() const noexcept { return points_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  std::optional<int> machine_id() const noexcept { return machine_id_; }
  std::size_t size() const noexcept { return points_.size(); }

 private:
  PointSet points_;
  Eigen::VectorXd values_;
  std::optional<int> machine_id_;
};

/// Degree-(2n - 1) expansion sum_{l,k} g_{l,k} Y_{l,k}. The common currency
/// for pooled, serialized and loaded estimators.
class HarmonicExpansion {
 public:
  HarmonicExpansion() = default;
  HarmonicExpansion(int n, FilterSpec filter, Eigen::VectorXd coefficients);

  int n() const noexcept { return n_; }
  int max_degree() const noexcept { return 2 * n_ - 1; }
  const FilterSpec& filter() const noexcept { return filter_; }
  const Eigen::VectorXd& coefficients() const noexcept { return coeffs_; }

  double operator()(const UnitPoint& x) const;
  Eigen::VectorXd evaluate(const PointSet& points) const;

 private:
  int n_ = 1;
  FilterSpec filter_;
  Eigen::VectorXd coeffs_ = Eigen::VectorXd::Zero(4);
};

/// Text format:
///   sfh-expansion 1
///   degree <n>
///   filter <plateau|needlet> <kappa>
///   coefficients <(2n)^2>
///   <one coefficient per line, 17 significant digits>
void write_expansion(const HarmonicExpansion& e, std::ostream& out);
HarmonicExpansion read_expansion(std::istream& in);

enum class EvalPath { kernel_sum, harmonic_synthesis, automatic };

/// Filtered hyperinterpolant of one machine's data, held in both the
/// kernel-sum form sum_i c_i K_n(x_i . x) with c_i = w_i y_i and the
/// harmonic form with g_{l,k} = eta(l/n) sum_i c_i Y_{l,k}(x_i).
class LocalEstimator {
 public:
  int n() const noexcept { return kernel_.n(); }
  const FilteredKernel& kernel() const noexcept { return kernel_; }
  const PointSet& nodes() const noexcept { return nodes_; }
  const Eigen::VectorXd& combined_coefficients() const noexcept { return combined_; }
  const HarmonicExpansion& expansion() const noexcept { return expansion_; }
  const Eigen::VectorXd& harmonic_coefficients() const noexcept { return expansion_.coefficients(); }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  friend LocalEstimator fit_local(const NoisyDataset&, const QuadratureRule&, int, FilterSpec);
  LocalEstimator(FilteredKernel kernel, PointSet nodes, Eigen::VectorXd combined, HarmonicExpansion expansion,
                 std::vector<std::string> warnings);

  FilteredKernel kernel_;
  PointSet nodes_;
  Eigen::VectorXd combined_;
  HarmonicExpansion expansion_;
  std::vector<std::string> warnings_;
};

/// Fits the filtered hyperinterpolant. The rule's nodes must match the data
/// points by index. A design or equal-weight rule whose claimed degree is
/// below 3n - 1, and a solved rule that has not been through
/// threshold_weights, are accepted with a recorded warning.
LocalEstimator fit_local(const NoisyDataset& data, const QuadratureRule& rule, int n, FilterSpec filter = {});

/// `automatic` uses harmonic synthesis when the node count exceeds (2n)^2.
double eval_local(const LocalEstimator& est, const UnitPoint& x, EvalPath path = EvalPath::automatic);

enum class PartitionPolicy { block, round_robin, rotated_designs };

/// block / round_robin: disjoint cover of the data by m shards (block gives
/// the first |D| mod m shards one extra point).
/// rotated_designs: shard j = 1..m holds the data nodes rotated about the
/// third axis by j pi / m, carrying the original values; experiment drivers
/// resample values on the rotated nodes.
std::vector<NoisyDataset> partition(const NoisyDataset& data, int m, PartitionPolicy policy);

class DistributedEstimator {
 public:
  const std::vector<LocalEstimator>& locals() const noexcept { return locals_; }
  const Eigen::VectorXd& mix_weights() const noexcept { return mix_; }
  /// sum_j mix_j g^{(j)}, accumulated in machine order.
  const HarmonicExpansion& pooled() const noexcept { return pooled_; }

 private:
  friend DistributedEstimator fit_distributed(const std::vector<NoisyDataset>&, const std::vector<QuadratureRule>&,
                                              int, FilterSpec, int);
  DistributedEstimator(std::vector<LocalEstimator> locals, Eigen::VectorXd mix);

  std::vector<LocalEstimator> locals_;
  Eigen::VectorXd mix_;
  HarmonicExpansion pooled_;
};

/// Local fits run on up to `parallelism` threads; mix weights |D_j| / |D|.
/// A failing machine is reported as "machine <j>: <reason>".
DistributedEstimator fit_distributed(const std::vector<NoisyDataset>& datasets, const std::vector<QuadratureRule>& rules,
                                     int n, FilterSpec filter = {}, int parallelism = 1);

/// sum_j mix_j f_j(x), evaluated through the pooled expansion.
double eval_distributed(const DistributedEstimator& est, const UnitPoint& x);

/// round(beta * total^{1 / (2 r + d)}), at least 1.
int theory_degree(std::size_t total, double r, int d = 2, double beta = 1.0);

/// min_j |D_j| >= |D|^{d / (2 r + d)}.
bool within_theory(std::size_t min_shard, std::size_t total, double r, int d = 2);

}  // namespace sfh
