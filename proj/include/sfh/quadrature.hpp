#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "sfh/sphere_geom.hpp"

namespace sfh {

enum class RuleProvenance { design_file, equal_weight, solved_random };

std::string to_string(RuleProvenance p);

/// Nodes paired by index with Lebesgue-normalized weights (sum ~ 4 pi when
/// exact for constants). `claimed_degree` is recorded, not trusted.
class QuadratureRule {
 public:
  QuadratureRule(PointSet nodes, Eigen::VectorXd weights, int claimed_degree, RuleProvenance provenance);

  const PointSet& nodes() const noexcept { return nodes_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  int claimed_degree() const noexcept { return claimed_degree_; }
  RuleProvenance provenance() const noexcept { return provenance_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// True once threshold_weights has been applied.
  bool threshold_checked() const noexcept { return threshold_checked_; }
  QuadratureRule with_threshold_checked() const;

 private:
  PointSet nodes_;
  Eigen::VectorXd weights_;
  int claimed_degree_;
  RuleProvenance provenance_;
  bool threshold_checked_ = false;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// solve_weights could not reach the moment tolerance with nonnegative weights.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The harmonic moment matrix is numerically rank deficient.
class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integrals of Y_{l,k} for l <= n: sqrt(4 pi) for the constant, 0 otherwise.
Eigen::VectorXd moment_vector(int n);

/// Reads whitespace-separated 3-column point files. Blank lines and lines
/// starting with '#' are skipped; anything else must hold exactly three
/// numbers. Errors name the offending line.
PointSet read_points(const std::filesystem::path& path);
PointSet read_points(std::istream& in, const std::string& source = "<stream>");
void write_points(const PointSet& points, std::ostream& out);

/// Loads an equal-weight design (weights 4 pi / N, provenance design_file).
QuadratureRule load_design(const std::filesystem::path& path, int t);

/// 4-column rule files: x y z w.
QuadratureRule read_rule(const std::filesystem::path& path, int claimed_degree, RuleProvenance provenance);
void write_rule(const QuadratureRule& rule, std::ostream& out);

QuadratureRule equal_weight_rule(const PointSet& points, int claimed_degree);

/// max_{l <= L, k} |sum_i w_i Y_{l,k}(x_i) - moment(l,k)|.
double exactness_residual(const QuadratureRule& rule, int L);

/// exactness_residual(rule, L) <= 1e-9 * sum |w_i|.
bool passes_exactness(const QuadratureRule& rule, int L);

/// sum_i (w_i / (4 pi))^2.
double weight_size(const Eigen::VectorXd& weights);

/// Nonnegative weights exact to degree n that stay closest to the uniform
/// weights 4 pi / N:
///   minimize |w - 4 pi / N|^2  s.t.  sum_i w_i Y_{l,k}(x_i) = moment(l,k), w >= 0.
/// The equality-constrained problem is solved on a free set by a pivoted QR
/// of the transposed moment matrix; bound constraints are handled by a
/// primal active-set loop. Requires N > (n + 1)^2.
QuadratureRule solve_weights(const PointSet& points, int n);

/// Zeroes every weight when sum (w_i / 4 pi)^2 > 2 / N; otherwise returns the
/// rule unchanged. Idempotent. Only valid for solved_random rules.
QuadratureRule threshold_weights(const QuadratureRule& rule);

}  // namespace sfh
