#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "sfh/sphere_geom.hpp"

namespace sfh {

/// dim H^d_l = (2l + d - 1)/(l + d - 1) * binom(l + d - 1, l), and 1 for l = 0.
std::int64_t harmonic_dimension(int d, int l);

/// Surface area |S^d| = 2 pi^{(d+1)/2} / Gamma((d+1)/2).
double sphere_area(int d);

/// Normalized Gegenbauer polynomials P_0..P_L of S^d at t, with P_l(1) = 1
/// (Legendre for d = 2). With lambda = (d - 1)/2:
///   (l + 2 lambda) P_{l+1} = 2 (l + lambda) t P_l - l P_{l-1}.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> gegenbauer_values(int d, int L, Scalar t) {
  using std::abs;
  if (d < 2) throw std::invalid_argument("gegenbauer_values: d must be >= 2");
  if (L < 0) throw std::invalid_argument("gegenbauer_values: L must be >= 0");
  if (!(abs(t) <= Scalar(1) + Scalar(1e-12))) {
    throw std::domain_error("gegenbauer_values: |t| > 1");
  }
  const Scalar two_lambda = Scalar(d - 1);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> p(L + 1);
  p(0) = Scalar(1);
  if (L >= 1) p(1) = t;
  for (int l = 1; l < L; ++l) {
    const Scalar ls = Scalar(l);
    p(l + 1) = ((Scalar(2) * ls + two_lambda) * t * p(l) - ls * p(l - 1)) / (ls + two_lambda);
  }
  return p;
}

/// Polynomial smoothstep of order 2 kappa + 1 on [0, 1]: 0 -> 0, 1 -> 1,
/// first kappa derivatives vanish at both ends, S(1 - x) = 1 - S(x).
template <typename Scalar>
Scalar smoothstep(int kappa, Scalar x) {
  if (x <= Scalar(0)) return Scalar(0);
  if (x >= Scalar(1)) return Scalar(1);
  if (x > Scalar(0.5)) return Scalar(1) - smoothstep(kappa, Scalar(1) - x);
  // x^{k+1} sum_{j=0}^{k} binom(k + j, j) binom(2k + 1, k - j) (-x)^j
  Scalar sum(0);
  Scalar xp(1);
  for (int j = 0; j <= kappa; ++j) {
    double c1 = 1.0;
    for (int i = 1; i <= j; ++i) c1 = c1 * (kappa + i) / i;
    double c2 = 1.0;
    for (int i = 1; i <= kappa - j; ++i) c2 = c2 * (2 * kappa + 2 - i) / i;
    sum += Scalar(c1 * c2) * xp;
    xp *= -x;
  }
  Scalar lead(1);
  for (int i = 0; i <= kappa; ++i) lead *= x;
  return lead * sum;
}

enum class FilterKind { plateau, needlet };

struct FilterSpec {
  FilterKind kind = FilterKind::plateau;
  int kappa = 5;
};

std::string to_string(FilterKind kind);
FilterKind filter_kind_from_string(const std::string& s);

/// Filter eta(t), t >= 0.
///  plateau: 1 on [0, 1], 1 - S(t - 1) on [1, 2], 0 beyond.
///  needlet: sin(pi/2 S(2t - 1)) on [1/2, 1], cos(pi/2 S(t - 1)) on [1, 2],
///           0 elsewhere, so eta(t)^2 + eta(2t)^2 = 1 on [1/2, 1].
template <typename Scalar>
Scalar filter_value(const FilterSpec& spec, Scalar t) {
  using std::cos;
  using std::sin;
  if (spec.kappa < 1) throw std::invalid_argument("filter_value: kappa must be >= 1");
  if (t < Scalar(0)) throw std::domain_error("filter_value: t must be nonnegative");
  const Scalar half_pi = Scalar(std::numbers::pi / 2.0);
  switch (spec.kind) {
    case FilterKind::plateau:
      if (t <= Scalar(1)) return Scalar(1);
      if (t >= Scalar(2)) return Scalar(0);
      return Scalar(1) - smoothstep(spec.kappa, t - Scalar(1));
    case FilterKind::needlet:
      if (t <= Scalar(0.5) || t >= Scalar(2)) return Scalar(0);
      if (t <= Scalar(1)) return sin(half_pi * smoothstep(spec.kappa, Scalar(2) * t - Scalar(1)));
      return cos(half_pi * smoothstep(spec.kappa, t - Scalar(1)));
  }
  return Scalar(0);
}

/// Zonal kernel K_n(t) = sum_{l < 2n} eta(l/n) Z_{d,l}/|S^d| P_l(t).
/// The coefficient table is built once; evaluation uses Clenshaw summation.
class FilteredKernel {
 public:
  FilteredKernel(int n, int d, FilterSpec filter);

  int n() const noexcept { return n_; }
  int d() const noexcept { return d_; }
  int max_degree() const noexcept { return 2 * n_ - 1; }
  const FilterSpec& filter() const noexcept { return filter_; }
  /// Per-degree coefficients for l = 0 .. 2n - 1.
  const Eigen::VectorXd& coefficients() const noexcept { return coeffs_; }
  /// eta(l / n) for l = 0 .. 2n - 1.
  const Eigen::VectorXd& filter_weights() const noexcept { return eta_; }

  double operator()(double t) const;

 private:
  int n_;
  int d_;
  FilterSpec filter_;
  Eigen::VectorXd coeffs_;
  Eigen::VectorXd eta_;
};

double kernel_value(const FilteredKernel& kernel, double t);

/// sum_l eta(l/n)^2 Z_{2,l} / (4 pi) = int |K_n(x . y)|^2 dw(y). d = 2 only.
double kernel_l2_parseval(const FilteredKernel& kernel);

// Real spherical harmonics on S^2 --------------------------------------------

/// Number of harmonics of degree <= L on S^2.
constexpr Eigen::Index harmonic_count(int L) { return static_cast<Eigen::Index>(L + 1) * (L + 1); }

/// Flat position of Y_{l,k}, k = 1 .. 2l + 1. Within a degree, k = l + 1 is
/// the zonal harmonic, k = l + 1 + m the cos(m phi) one and k = l + 1 - m
/// the sin(m phi) one.
constexpr Eigen::Index harmonic_index(int l, int k) { return static_cast<Eigen::Index>(l) * l + (k - 1); }

/// All Y_{l,k}(x), l <= L, orthonormal in L2(S^2, Lebesgue). `out` must have
/// harmonic_count(L) entries.
void real_harmonics_d2(int L, const Vec3& x, Eigen::Ref<Eigen::VectorXd> out);
Eigen::VectorXd real_harmonics_d2(int L, const UnitPoint& x);

/// Columns are real_harmonics_d2(L, points[i]).
Eigen::MatrixXd harmonic_matrix(int L, const PointSet& points);

}  // namespace sfh
