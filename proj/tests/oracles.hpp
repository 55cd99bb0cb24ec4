#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's evaluation paths.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace oracle {

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double step = p1 / dp;
      t -= step;
      if (std::abs(step) < 1e-16) break;
    }
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (t * p1 - p0) / (t * t - 1.0);
    x[static_cast<std::size_t>(i)] = t;
    w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  return {x, w};
}

/// Legendre P_l(t) via the textbook recurrence.
inline double legendre(int l, double t) {
  if (l == 0) return 1.0;
  double p0 = 1.0, p1 = t;
  for (int k = 2; k <= l; ++k) {
    const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

/// Normalized Gegenbauer polynomial for d = 3: U_l(cos th) / (l + 1).
inline double chebyshev_u_normalized(int l, double t) {
  const double th = std::acos(t);
  if (std::abs(std::sin(th)) < 1e-12) return t > 0 ? 1.0 : (l % 2 == 0 ? 1.0 : -1.0);
  return std::sin((l + 1) * th) / ((l + 1) * std::sin(th));
}

/// Term-by-term kernel sum from a coefficient table, for d = 2 and d = 3.
inline double naive_kernel(const Eigen::VectorXd& coeffs, int d, double t) {
  double s = 0.0;
  for (Eigen::Index l = 0; l < coeffs.size(); ++l) {
    const double p = d == 2 ? legendre(static_cast<int>(l), t) : chebyshev_u_normalized(static_cast<int>(l), t);
    s += coeffs(l) * p;
  }
  return s;
}

/// Random polynomial in (x, y, z) of total degree <= n; its restriction to
/// the sphere lies in the space of spherical polynomials of degree <= n.
class MonomialPolynomial {
 public:
  MonomialPolynomial(int degree, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int a = 0; a <= degree; ++a)
      for (int b = 0; a + b <= degree; ++b)
        for (int c = 0; a + b + c <= degree; ++c) terms_.push_back({a, b, c, u(gen)});
  }
  double operator()(const Eigen::Vector3d& p) const {
    double s = 0.0;
    for (const auto& t : terms_) s += t.coef * std::pow(p.x(), t.a) * std::pow(p.y(), t.b) * std::pow(p.z(), t.c);
    return s;
  }

 private:
  struct Term {
    int a, b, c;
    double coef;
  };
  std::vector<Term> terms_;
};

/// Gauss-Legendre in z times the trapezoid rule in phi; exact for spherical
/// polynomials up to `degree`. Weights sum to 4 pi.
inline std::pair<Eigen::Matrix3Xd, Eigen::VectorXd> product_rule(int degree) {
  const int nt = degree / 2 + 1;
  const int np = degree + 1;
  const auto [x, w] = gauss_legendre(nt);
  Eigen::Matrix3Xd pts(3, nt * np);
  Eigen::VectorXd wts(nt * np);
  int c = 0;
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < np; ++j) {
      const double z = x[static_cast<std::size_t>(i)];
      const double r = std::sqrt(1.0 - z * z);
      const double phi = 2.0 * std::numbers::pi * j / np;
      pts.col(c) = Eigen::Vector3d(r * std::cos(phi), r * std::sin(phi), z);
      wts(c) = w[static_cast<std::size_t>(i)] * 2.0 * std::numbers::pi / np;
      ++c;
    }
  return {pts, wts};
}

inline Eigen::Vector3d random_unit(std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector3d v(n(gen), n(gen), n(gen));
  return v.normalized();
}

}  // namespace oracle
