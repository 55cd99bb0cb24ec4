#include "sfh/testbed.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sfh/estimator.hpp"
#include "sfh/harmonic_basis.hpp"
#include "sfh/parallel.hpp"

namespace sfh {

std::vector<UnitPoint> WendlandTarget::octahedral_centers() {
  return {UnitPoint(1, 0, 0), UnitPoint(-1, 0, 0), UnitPoint(0, 1, 0),
          UnitPoint(0, -1, 0), UnitPoint(0, 0, 1), UnitPoint(0, 0, -1)};
}

double WendlandTarget::operator()(const UnitPoint& x) const {
  double sum = 0.0;
  for (const auto& z : centers) {
    const double t = std::clamp(x.dot(z), -1.0, 1.0);
    if (convention == ArgumentConvention::euclidean_distance) {
      sum += wendland_normalized(std::sqrt(std::max(0.0, 2.0 - 2.0 * t)));
    } else {
      sum += wendland_normalized(std::max(t, 0.0));
    }
  }
  return sum;
}

double target_eval(const WendlandTarget& target, const UnitPoint& x) { return target(x); }

NoisyDataset sample_noisy(const PointSet& points, const SphereFunction& target, const NoiseModel& noise,
                          std::uint64_t seed) {
  if (noise.scale < 0.0) throw std::invalid_argument("sample_noisy: noise scale must be nonnegative");
  Eigen::VectorXd y(static_cast<Eigen::Index>(points.size()));
  std::mt19937_64 gen(derive_seed(noise.seed, {seed}));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    double eps = 0.0;
    switch (noise.kind) {
      case NoiseKind::none: break;
      case NoiseKind::gaussian: eps = noise.scale * normal(gen); break;
      case NoiseKind::uniform_bounded: eps = noise.scale * unif(gen); break;
    }
    y(static_cast<Eigen::Index>(i)) = target(points[i]) + eps;
  }
  return NoisyDataset(points, std::move(y));
}

double l2_error(const Eigen::VectorXd& approx_values, const Eigen::VectorXd& reference_values,
                const QuadratureRule& eval_rule) {
  if (approx_values.size() != reference_values.size() ||
      static_cast<std::size_t>(approx_values.size()) != eval_rule.size()) {
    throw std::invalid_argument("l2_error: value counts do not match the evaluation rule");
  }
  return std::sqrt(eval_rule.weights().dot((approx_values - reference_values).array().square().matrix()));
}

double l2_error(const SphereFunction& approx, const SphereFunction& reference, const QuadratureRule& eval_rule) {
  Eigen::VectorXd a(static_cast<Eigen::Index>(eval_rule.size()));
  Eigen::VectorXd r(a.size());
  for (std::size_t k = 0; k < eval_rule.size(); ++k) {
    const UnitPoint y = eval_rule.nodes()[k];
    a(static_cast<Eigen::Index>(k)) = approx(y);
    r(static_cast<Eigen::Index>(k)) = reference(y);
  }
  return l2_error(a, r, eval_rule);
}

Eigen::VectorXd FourierDiagnostics::degree_energy() const {
  Eigen::VectorXd e(max_degree + 1);
  for (int l = 0; l <= max_degree; ++l) e(l) = coefficients.segment(harmonic_index(l, 1), 2 * l + 1).squaredNorm();
  return e;
}

FourierDiagnostics fourier_coefficients(const SphereFunction& f, int L, const QuadratureRule& rule) {
  if (L < 0) throw std::invalid_argument("fourier_coefficients: L must be >= 0");
  FourierDiagnostics diag{L, Eigen::VectorXd::Zero(harmonic_count(L))};
  Eigen::VectorXd row(harmonic_count(L));
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const UnitPoint y = rule.nodes()[k];
    real_harmonics_d2(L, y.coords(), row);
    diag.coefficients.noalias() += (rule.weights()(static_cast<Eigen::Index>(k)) * f(y)) * row;
  }
  return diag;
}

double sobolev_norm(const FourierDiagnostics& diag, double r) {
  if (r < 0.0) throw std::invalid_argument("sobolev_norm: r must be nonnegative");
  const Eigen::VectorXd energy = diag.degree_energy();
  double sum = 0.0;
  for (int l = 0; l <= diag.max_degree; ++l) sum += std::pow(1.0 + l * (l + 1.0), r) * energy(l);
  return std::sqrt(sum);
}

}  // namespace sfh
