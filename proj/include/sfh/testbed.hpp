#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "sfh/quadrature.hpp"
#include "sfh/sphere_geom.hpp"

namespace sfh {

class NoisyDataset;

/// Wendland-Wu profile (1 - u)_+^8 (32 u^3 + 25 u^2 + 8 u + 1).
template <typename Scalar>
Scalar wendland_raw(Scalar u) {
  if (u < Scalar(0)) throw std::domain_error("wendland_raw: u must be nonnegative");
  if (u >= Scalar(1)) return Scalar(0);
  const Scalar v = Scalar(1) - u;
  const Scalar v2 = v * v;
  const Scalar v4 = v2 * v2;
  return v4 * v4 * (((Scalar(32) * u + Scalar(25)) * u + Scalar(8)) * u + Scalar(1));
}

/// wendland_raw(8 u / (15 sqrt(pi))).
template <typename Scalar>
Scalar wendland_normalized(Scalar u) {
  if (u < Scalar(0)) throw std::domain_error("wendland_normalized: u must be nonnegative");
  return wendland_raw(Scalar(8) * u / (Scalar(15) * Scalar(std::sqrt(std::numbers::pi))));
}

enum class ArgumentConvention { euclidean_distance, inner_product };

/// Sum of normalized Wendland bumps centred at +-e1, +-e2, +-e3.
///  euclidean_distance: sum_i phi~(|x - z_i|), |x - z| = sqrt(2 - 2 x.z)
///  inner_product:      sum_i phi~(max(x.z_i, 0))
struct WendlandTarget {
  std::vector<UnitPoint> centers = octahedral_centers();
  ArgumentConvention convention = ArgumentConvention::euclidean_distance;

  double operator()(const UnitPoint& x) const;

  static std::vector<UnitPoint> octahedral_centers();
};

double target_eval(const WendlandTarget& target, const UnitPoint& x);

enum class NoiseKind { none, gaussian, uniform_bounded };

/// `scale` is sigma for gaussian noise and the bound M for uniform_bounded.
struct NoiseModel {
  NoiseKind kind = NoiseKind::none;
  double scale = 0.0;
  std::uint64_t seed = 0;
};

using SphereFunction = std::function<double(const UnitPoint&)>;

/// y_i = f(x_i) + eps_i, eps drawn from a stream seeded by
/// derive_seed(noise.seed, {seed}).
NoisyDataset sample_noisy(const PointSet& points, const SphereFunction& target, const NoiseModel& noise,
                          std::uint64_t seed);

/// sqrt(sum_k v_k (approx(y_k) - reference(y_k))^2) over the rule.
double l2_error(const SphereFunction& approx, const SphereFunction& reference, const QuadratureRule& eval_rule);
double l2_error(const Eigen::VectorXd& approx_values, const Eigen::VectorXd& reference_values,
                const QuadratureRule& eval_rule);

struct FourierDiagnostics {
  int max_degree = 0;
  Eigen::VectorXd coefficients;  // harmonic_index layout

  /// sum_k f_{l,k}^2 for each degree l.
  Eigen::VectorXd degree_energy() const;
};

/// f_{l,k} ~ sum_j v_j f(y_j) Y_{l,k}(y_j).
FourierDiagnostics fourier_coefficients(const SphereFunction& f, int L, const QuadratureRule& rule);

/// sqrt(sum (b_l^r f_{l,k})^2), b_l^r = (1 + l (l + 1))^{r/2}.
double sobolev_norm(const FourierDiagnostics& diag, double r);

}  // namespace sfh
