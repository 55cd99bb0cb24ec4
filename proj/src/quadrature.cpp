#include "sfh/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <vector>

#include <Eigen/QR>

#include "sfh/harmonic_basis.hpp"

namespace sfh {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

std::vector<std::vector<double>> read_columns(std::istream& in, const std::string& source, std::size_t columns) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::vector<double> row;
    std::string token;
    while (fields >> token) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size() || !std::isfinite(v)) {
        throw ParseError(source + ":" + std::to_string(lineno) + ": not a number: '" + token + "'");
      }
      row.push_back(v);
    }
    if (row.size() != columns) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(columns) +
                       " fields, found " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

}  // namespace

std::string to_string(RuleProvenance p) {
  switch (p) {
    case RuleProvenance::design_file: return "design_file";
    case RuleProvenance::equal_weight: return "equal_weight";
    case RuleProvenance::solved_random: return "solved_random";
  }
  return "unknown";
}

QuadratureRule::QuadratureRule(PointSet nodes, Eigen::VectorXd weights, int claimed_degree,
                               RuleProvenance provenance)
    : nodes_(std::move(nodes)), weights_(std::move(weights)), claimed_degree_(claimed_degree), provenance_(provenance) {
  if (static_cast<std::size_t>(weights_.size()) != nodes_.size()) {
    throw std::invalid_argument("QuadratureRule: weight count does not match node count");
  }
  if (provenance_ != RuleProvenance::equal_weight && weights_.size() > 0 && weights_.minCoeff() < 0.0) {
    throw std::invalid_argument("QuadratureRule: negative weight in a " + to_string(provenance_) + " rule");
  }
}

QuadratureRule QuadratureRule::with_threshold_checked() const {
  QuadratureRule copy = *this;
  copy.threshold_checked_ = true;
  return copy;
}

Eigen::VectorXd moment_vector(int n) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(harmonic_count(n));
  b(0) = std::sqrt(kFourPi);
  return b;
}

PointSet read_points(std::istream& in, const std::string& source) {
  const auto rows = read_columns(in, source, 3);
  Eigen::Matrix3Xd pts(3, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    pts.col(static_cast<Eigen::Index>(i)) << rows[i][0], rows[i][1], rows[i][2];
  }
  try {
    return PointSet(std::move(pts));
  } catch (const std::invalid_argument& e) {
    throw ParseError(source + ": " + e.what());
  }
}

PointSet read_points(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_points(in, path.string());
}

void write_points(const PointSet& points, std::ostream& out) {
  out << std::setprecision(17);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto p = points.col(i);
    out << p(0) << ' ' << p(1) << ' ' << p(2) << '\n';
  }
}

QuadratureRule load_design(const std::filesystem::path& path, int t) {
  PointSet nodes = read_points(path);
  if (nodes.empty()) throw ParseError(path.string() + ": design file holds no nodes");
  const auto n = static_cast<Eigen::Index>(nodes.size());
  return QuadratureRule(std::move(nodes), Eigen::VectorXd::Constant(n, kFourPi / static_cast<double>(n)), t,
                        RuleProvenance::design_file);
}

QuadratureRule read_rule(const std::filesystem::path& path, int claimed_degree, RuleProvenance provenance) {
  auto in = open_or_throw(path);
  const auto rows = read_columns(in, path.string(), 4);
  if (rows.empty()) throw ParseError(path.string() + ": rule file holds no nodes");
  Eigen::Matrix3Xd pts(3, static_cast<Eigen::Index>(rows.size()));
  Eigen::VectorXd w(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    pts.col(static_cast<Eigen::Index>(i)) << rows[i][0], rows[i][1], rows[i][2];
    w(static_cast<Eigen::Index>(i)) = rows[i][3];
  }
  return QuadratureRule(PointSet(std::move(pts)), std::move(w), claimed_degree, provenance);
}

void write_rule(const QuadratureRule& rule, std::ostream& out) {
  out << std::setprecision(17);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const auto p = rule.nodes().col(i);
    out << p(0) << ' ' << p(1) << ' ' << p(2) << ' ' << rule.weights()(static_cast<Eigen::Index>(i)) << '\n';
  }
}

QuadratureRule equal_weight_rule(const PointSet& points, int claimed_degree) {
  if (points.empty()) throw std::invalid_argument("equal_weight_rule: need at least one point");
  const auto n = static_cast<Eigen::Index>(points.size());
  return QuadratureRule(points, Eigen::VectorXd::Constant(n, kFourPi / static_cast<double>(n)), claimed_degree,
                        RuleProvenance::equal_weight);
}

double exactness_residual(const QuadratureRule& rule, int L) {
  if (L < 0) throw std::invalid_argument("exactness_residual: L must be >= 0");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(harmonic_count(L));
  Eigen::VectorXd row(harmonic_count(L));
  for (std::size_t i = 0; i < rule.size(); ++i) {
    real_harmonics_d2(L, Vec3(rule.nodes().col(i)), row);
    acc.noalias() += rule.weights()(static_cast<Eigen::Index>(i)) * row;
  }
  return (acc - moment_vector(L)).cwiseAbs().maxCoeff();
}

bool passes_exactness(const QuadratureRule& rule, int L) {
  return exactness_residual(rule, L) <= 1e-9 * rule.weights().cwiseAbs().sum();
}

double weight_size(const Eigen::VectorXd& weights) { return (weights / kFourPi).squaredNorm(); }

QuadratureRule solve_weights(const PointSet& points, int n) {
  if (n < 0) throw std::invalid_argument("solve_weights: n must be >= 0");
  const auto N = static_cast<Eigen::Index>(points.size());
  const Eigen::Index K = harmonic_count(n);
  if (N <= K) {
    throw std::invalid_argument("solve_weights: need more than (n+1)^2 = " + std::to_string(K) + " points, got " +
                                std::to_string(N));
  }
  const Eigen::MatrixXd A = harmonic_matrix(n, points);
  const Eigen::VectorXd b = moment_vector(n);
  const double uniform = kFourPi / static_cast<double>(N);

  std::vector<bool> active(static_cast<std::size_t>(N), false);
  Eigen::VectorXd w(N);
  Eigen::VectorXd nu(K);

  // Minimum-change solution on the free set: w_F = u + A_F^T nu.
  auto solve_free = [&]() {
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < N; ++i) {
      if (!active[static_cast<std::size_t>(i)]) free.push_back(i);
    }
    if (static_cast<Eigen::Index>(free.size()) < K) {
      throw InfeasibleError("solve_weights: active set left fewer free nodes than moments");
    }
    Eigen::MatrixXd AFt(static_cast<Eigen::Index>(free.size()), K);
    for (std::size_t j = 0; j < free.size(); ++j) AFt.row(static_cast<Eigen::Index>(j)) = A.col(free[j]).transpose();
    const Eigen::VectorXd r = b - AFt.transpose() * Eigen::VectorXd::Constant(AFt.rows(), uniform);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(AFt);
    qr.setThreshold(1e-10);
    if (qr.rank() < K) {
      throw ConditioningError("solve_weights: moment matrix rank " + std::to_string(qr.rank()) + " < " +
                              std::to_string(K) + " (points too clustered or too few)");
    }
    const auto R = qr.matrixR().topLeftCorner(K, K).template triangularView<Eigen::Upper>();
    // A_F = P R^T Q^T, so A_F (Q y) = r gives R^T y = P^T r.
    const Eigen::VectorXd y = R.transpose().solve(qr.colsPermutation().transpose() * r);
    Eigen::VectorXd padded = Eigen::VectorXd::Zero(AFt.rows());
    padded.head(K) = y;
    const Eigen::VectorXd delta = qr.householderQ() * padded;
    nu = qr.colsPermutation() * R.solve(y);

    w.setZero();
    for (std::size_t j = 0; j < free.size(); ++j) w(free[j]) = uniform + delta(static_cast<Eigen::Index>(j));
  };

  const double tiny = 1e-14 * uniform;
  bool converged = false;
  for (Eigen::Index iter = 0; iter < 4 * N + 10; ++iter) {
    solve_free();
    bool added = false;
    for (Eigen::Index i = 0; i < N; ++i) {
      if (!active[static_cast<std::size_t>(i)] && w(i) < -tiny) {
        active[static_cast<std::size_t>(i)] = true;
        added = true;
      }
    }
    if (added) continue;
    // KKT multipliers of the bound constraints: mu_i = -(u + (A^T nu)_i).
    Eigen::Index release = -1;
    double worst = -tiny;
    for (Eigen::Index i = 0; i < N; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      const double mu = -(uniform + A.col(i).dot(nu));
      if (mu < worst) {
        worst = mu;
        release = i;
      }
    }
    if (release < 0) {
      converged = true;
      break;
    }
    active[static_cast<std::size_t>(release)] = false;
  }
  if (!converged) throw InfeasibleError("solve_weights: active-set iteration did not converge");

  w = w.cwiseMax(0.0);
  const double residual = (A * w - b).cwiseAbs().maxCoeff();
  if (residual > 1e-8 * kFourPi) {
    throw InfeasibleError("solve_weights: moment residual " + std::to_string(residual) + " above tolerance");
  }
  return QuadratureRule(points, std::move(w), n, RuleProvenance::solved_random);
}

QuadratureRule threshold_weights(const QuadratureRule& rule) {
  if (rule.provenance() != RuleProvenance::solved_random) {
    throw std::invalid_argument("threshold_weights: rule must come from solve_weights");
  }
  const double bound = 2.0 / static_cast<double>(rule.size());
  if (weight_size(rule.weights()) <= bound) return rule.with_threshold_checked();
  return QuadratureRule(rule.nodes(), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rule.size())),
                        rule.claimed_degree(), rule.provenance())
      .with_threshold_checked();
}

}  // namespace sfh
