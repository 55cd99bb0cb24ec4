#include "sfh/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "sfh/parallel.hpp"

namespace sfh {

NoisyDataset::NoisyDataset(PointSet points, Eigen::VectorXd values, std::optional<int> machine_id)
    : points_(std::move(points)), values_(std::move(values)), machine_id_(machine_id) {
  if (points_.empty()) throw std::invalid_argument("NoisyDataset: need at least one point");
  if (static_cast<std::size_t>(values_.size()) != points_.size()) {
    throw std::invalid_argument("NoisyDataset: value count does not match point count");
  }
}

HarmonicExpansion::HarmonicExpansion(int n, FilterSpec filter, Eigen::VectorXd coefficients)
    : n_(n), filter_(filter), coeffs_(std::move(coefficients)) {
  if (n_ < 1) throw std::invalid_argument("HarmonicExpansion: n must be >= 1");
  if (coeffs_.size() != harmonic_count(2 * n_ - 1)) {
    throw std::invalid_argument("HarmonicExpansion: expected (2n)^2 coefficients");
  }
}

double HarmonicExpansion::operator()(const UnitPoint& x) const {
  Eigen::VectorXd row(coeffs_.size());
  real_harmonics_d2(max_degree(), x.coords(), row);
  return row.dot(coeffs_);
}

Eigen::VectorXd HarmonicExpansion::evaluate(const PointSet& points) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(points.size()));
  Eigen::VectorXd row(coeffs_.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    real_harmonics_d2(max_degree(), Vec3(points.col(i)), row);
    out(static_cast<Eigen::Index>(i)) = row.dot(coeffs_);
  }
  return out;
}

void write_expansion(const HarmonicExpansion& e, std::ostream& out) {
  out << "sfh-expansion 1\n";
  out << "degree " << e.n() << "\n";
  out << "filter " << to_string(e.filter().kind) << ' ' << e.filter().kappa << "\n";
  out << "coefficients " << e.coefficients().size() << "\n";
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < e.coefficients().size(); ++i) out << e.coefficients()(i) << "\n";
}

HarmonicExpansion read_expansion(std::istream& in) {
  auto expect = [&](const std::string& key) {
    std::string word;
    if (!(in >> word) || word != key) throw ParseError("expansion: expected '" + key + "'");
  };
  int version = 0;
  expect("sfh-expansion");
  if (!(in >> version) || version != 1) throw ParseError("expansion: unsupported version");
  int n = 0;
  expect("degree");
  if (!(in >> n) || n < 1) throw ParseError("expansion: bad degree");
  FilterSpec filter;
  std::string kind;
  expect("filter");
  if (!(in >> kind >> filter.kappa)) throw ParseError("expansion: bad filter line");
  try {
    filter.kind = filter_kind_from_string(kind);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("expansion: ") + e.what());
  }
  Eigen::Index count = 0;
  expect("coefficients");
  if (!(in >> count) || count != harmonic_count(2 * n - 1)) throw ParseError("expansion: bad coefficient count");
  Eigen::VectorXd c(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    if (!(in >> c(i))) throw ParseError("expansion: truncated coefficient list");
  }
  return HarmonicExpansion(n, filter, std::move(c));
}

LocalEstimator::LocalEstimator(FilteredKernel kernel, PointSet nodes, Eigen::VectorXd combined,
                               HarmonicExpansion expansion, std::vector<std::string> warnings)
    : kernel_(std::move(kernel)),
      nodes_(std::move(nodes)),
      combined_(std::move(combined)),
      expansion_(std::move(expansion)),
      warnings_(std::move(warnings)) {}

LocalEstimator fit_local(const NoisyDataset& data, const QuadratureRule& rule, int n, FilterSpec filter) {
  if (n < 1) throw std::invalid_argument("fit_local: n must be >= 1");
  if (data.size() != rule.size()) {
    throw std::invalid_argument("fit_local: dataset has " + std::to_string(data.size()) + " points but the rule has " +
                                std::to_string(rule.size()) + " nodes");
  }
  if ((data.points().coords() - rule.nodes().coords()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("fit_local: rule nodes do not match the data points by index");
  }

  std::vector<std::string> warnings;
  if (rule.provenance() == RuleProvenance::solved_random) {
    if (!rule.threshold_checked()) warnings.push_back("solved rule has not been passed through threshold_weights");
  } else if (rule.claimed_degree() < 3 * n - 1) {
    warnings.push_back("rule degree " + std::to_string(rule.claimed_degree()) + " is below 3n-1 = " +
                       std::to_string(3 * n - 1));
  }

  FilteredKernel kernel(n, 2, filter);
  Eigen::VectorXd combined = rule.weights().cwiseProduct(data.values());

  const int L = 2 * n - 1;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(harmonic_count(L));
  Eigen::VectorXd row(harmonic_count(L));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double c = combined(static_cast<Eigen::Index>(i));
    if (c == 0.0) continue;
    real_harmonics_d2(L, Vec3(data.points().col(i)), row);
    acc.noalias() += c * row;
  }
  for (int l = 0; l <= L; ++l) {
    acc.segment(harmonic_index(l, 1), 2 * l + 1) *= kernel.filter_weights()(l);
  }
  return LocalEstimator(std::move(kernel), data.points(), std::move(combined), HarmonicExpansion(n, filter, acc),
                        std::move(warnings));
}

double eval_local(const LocalEstimator& est, const UnitPoint& x, EvalPath path) {
  if (path == EvalPath::automatic) {
    path = static_cast<Eigen::Index>(est.size()) > harmonic_count(2 * est.n() - 1) ? EvalPath::harmonic_synthesis
                                                                                   : EvalPath::kernel_sum;
  }
  if (path == EvalPath::harmonic_synthesis) return est.expansion()(x);
  double sum = 0.0;
  const auto& c = est.combined_coefficients();
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double ci = c(static_cast<Eigen::Index>(i));
    if (ci == 0.0) continue;
    sum += ci * est.kernel()(std::clamp(x.coords().dot(est.nodes().col(i)), -1.0, 1.0));
  }
  return sum;
}

std::vector<NoisyDataset> partition(const NoisyDataset& data, int m, PartitionPolicy policy) {
  if (m < 1) throw std::invalid_argument("partition: m must be >= 1");
  const std::size_t total = data.size();
  std::vector<NoisyDataset> out;
  out.reserve(static_cast<std::size_t>(m));

  if (policy == PartitionPolicy::rotated_designs) {
    for (int j = 1; j <= m; ++j) {
      const Rotation r = rotation_about_axis3(j * std::numbers::pi / m);
      out.emplace_back(rotate(data.points(), r), data.values(), j - 1);
    }
    return out;
  }

  if (static_cast<std::size_t>(m) > total) {
    throw std::invalid_argument("partition: " + std::to_string(m) + " machines for " + std::to_string(total) +
                                " points");
  }
  const auto mm = static_cast<std::size_t>(m);
  for (std::size_t j = 0; j < mm; ++j) {
    std::vector<std::size_t> idx;
    if (policy == PartitionPolicy::block) {
      const std::size_t base = total / mm;
      const std::size_t extra = total % mm;
      const std::size_t first = j * base + std::min(j, extra);
      const std::size_t count = base + (j < extra ? 1 : 0);
      for (std::size_t i = first; i < first + count; ++i) idx.push_back(i);
    } else {
      for (std::size_t i = j; i < total; i += mm) idx.push_back(i);
    }
    Eigen::Matrix3Xd pts(3, static_cast<Eigen::Index>(idx.size()));
    Eigen::VectorXd vals(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      pts.col(static_cast<Eigen::Index>(k)) = data.points().col(idx[k]);
      vals(static_cast<Eigen::Index>(k)) = data.values()(static_cast<Eigen::Index>(idx[k]));
    }
    out.emplace_back(PointSet(std::move(pts)), std::move(vals), static_cast<int>(j));
  }
  return out;
}

DistributedEstimator::DistributedEstimator(std::vector<LocalEstimator> locals, Eigen::VectorXd mix)
    : locals_(std::move(locals)), mix_(std::move(mix)) {
  const auto& first = locals_.front().expansion();
  Eigen::VectorXd pooled = Eigen::VectorXd::Zero(first.coefficients().size());
  for (std::size_t j = 0; j < locals_.size(); ++j) {
    pooled.noalias() += mix_(static_cast<Eigen::Index>(j)) * locals_[j].harmonic_coefficients();
  }
  pooled_ = HarmonicExpansion(first.n(), first.filter(), std::move(pooled));
}

DistributedEstimator fit_distributed(const std::vector<NoisyDataset>& datasets, const std::vector<QuadratureRule>& rules,
                                     int n, FilterSpec filter, int parallelism) {
  if (datasets.empty()) throw std::invalid_argument("fit_distributed: need at least one machine");
  if (datasets.size() != rules.size()) {
    throw std::invalid_argument("fit_distributed: " + std::to_string(datasets.size()) + " datasets but " +
                                std::to_string(rules.size()) + " rules");
  }
  std::vector<std::optional<LocalEstimator>> fitted(datasets.size());
  parallel_for(datasets.size(), parallelism, [&](std::size_t j) {
    try {
      fitted[j].emplace(fit_local(datasets[j], rules[j], n, filter));
    } catch (const std::exception& e) {
      throw std::runtime_error("machine " + std::to_string(j) + ": " + e.what());
    }
  });

  std::size_t total = 0;
  for (const auto& d : datasets) total += d.size();
  Eigen::VectorXd mix(static_cast<Eigen::Index>(datasets.size()));
  std::vector<LocalEstimator> locals;
  locals.reserve(datasets.size());
  for (std::size_t j = 0; j < datasets.size(); ++j) {
    mix(static_cast<Eigen::Index>(j)) = static_cast<double>(datasets[j].size()) / static_cast<double>(total);
    locals.push_back(std::move(*fitted[j]));
  }
  return DistributedEstimator(std::move(locals), std::move(mix));
}

double eval_distributed(const DistributedEstimator& est, const UnitPoint& x) { return est.pooled()(x); }

int theory_degree(std::size_t total, double r, int d, double beta) {
  if (total == 0) throw std::invalid_argument("theory_degree: empty data");
  const double n = beta * std::pow(static_cast<double>(total), 1.0 / (2.0 * r + d));
  return std::max(1, static_cast<int>(std::lround(n)));
}

bool within_theory(std::size_t min_shard, std::size_t total, double r, int d) {
  return static_cast<double>(min_shard) >= std::pow(static_cast<double>(total), d / (2.0 * r + d));
}

}  // namespace sfh
