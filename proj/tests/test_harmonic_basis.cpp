#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "oracles.hpp"
#include "sfh/harmonic_basis.hpp"
#include "sfh/quadrature.hpp"

using namespace sfh;
constexpr double pi = std::numbers::pi;

namespace {

// Finite-difference weights for the k-th derivative at 0 on the given
// stencil offsets (Fornberg's algorithm).
std::vector<long double> fd_weights(int k, const std::vector<long double>& x) {
  const int n = static_cast<int>(x.size()) - 1;
  std::vector<std::vector<long double>> c(static_cast<std::size_t>(n + 1),
                                          std::vector<long double>(static_cast<std::size_t>(k + 1), 0.0L));
  long double c1 = 1.0L, c4 = x[0];
  c[0][0] = 1.0L;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, k);
    long double c2 = 1.0L;
    const long double c5 = c4;
    c4 = x[i];
    for (int j = 0; j < i; ++j) {
      const long double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int s = mn; s >= 1; --s) c[i][s] = c1 * (s * c[i - 1][s - 1] - c5 * c[i - 1][s]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int s = mn; s >= 1; --s) c[j][s] = (c4 * c[j][s] - s * c[j][s - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<long double> w;
  for (int i = 0; i <= n; ++i) w.push_back(c[i][k]);
  return w;
}

// One-sided k-th derivative at t0, using only points on one side.
long double one_sided(const FilterSpec& spec, long double t0, int k, int side, long double h) {
  const int points = k + 4;  // fourth-order accurate
  std::vector<long double> x;
  for (int i = 0; i < points; ++i) x.push_back(side * i * h);
  const auto w = fd_weights(k, x);
  long double s = 0.0L;
  for (int i = 0; i < points; ++i) {
    // nudge off the junction itself so each side sees only its own branch
    const long double t = i == 0 ? t0 + side * 1e-15L : t0 + x[i];
    s += w[i] * filter_value<long double>(spec, t);
  }
  return s;
}

// Largest |k-th derivative| over [a, b], by central differences on a grid.
long double derivative_scale(const FilterSpec& spec, long double a, long double b, int k) {
  long double m = 1.0L;
  const long double h = 1e-3L;
  std::vector<long double> x;
  for (int i = -(k + 2) / 2 - 1; i <= (k + 2) / 2 + 1; ++i) x.push_back(i * h);
  const auto w = fd_weights(k, x);
  for (int g = 1; g < 400; ++g) {
    const long double t = a + (b - a) * g / 400.0L;
    if (t + x.front() <= a || t + x.back() >= b) continue;
    long double s = 0.0L;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * filter_value<long double>(spec, t + x[i]);
    m = std::max(m, std::abs(s));
  }
  return m;
}

QuadratureRule product_rule(int degree) {
  auto [pts, wts] = oracle::product_rule(degree);
  return QuadratureRule(PointSet(pts), wts, degree, RuleProvenance::equal_weight);
}

}  // namespace

TEST_CASE("harmonic dimension") {
  CHECK(harmonic_dimension(2, 0) == 1);
  CHECK(harmonic_dimension(2, 3) == 7);
  CHECK(harmonic_dimension(3, 2) == 9);
  for (int l = 0; l < 50; ++l) {
    CHECK(harmonic_dimension(2, l) == 2 * l + 1);
    CHECK(harmonic_dimension(3, l) == (l + 1) * (l + 1));
  }
  CHECK(sphere_area(2) == doctest::Approx(4 * pi).epsilon(1e-15));
  CHECK(sphere_area(3) == doctest::Approx(2 * pi * pi).epsilon(1e-15));
}

TEST_CASE("gegenbauer values") {
  for (int d = 2; d <= 5; ++d) {
    const Eigen::VectorXd one = gegenbauer_values<double>(d, 30, 1.0);
    CHECK((one.array() - 1.0).abs().maxCoeff() <= 1e-13);
  }
  const Eigen::VectorXd p = gegenbauer_values<double>(2, 2, 0.5);
  REQUIRE(p.size() == 3);
  CHECK(p(0) == 1.0);
  CHECK(p(1) == 0.5);
  CHECK(p(2) == doctest::Approx(-0.125).epsilon(1e-15));
  CHECK_THROWS_AS(gegenbauer_values<double>(2, 3, 1.0 + 1e-9), std::domain_error);
  CHECK_NOTHROW(gegenbauer_values<double>(2, 3, 1.0 + 1e-13));

  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double t = u(gen);
    const Eigen::VectorXd g2 = gegenbauer_values<double>(2, 40, t);
    const Eigen::VectorXd g3 = gegenbauer_values<double>(3, 40, t);
    for (int l = 0; l <= 40; ++l) {
      CHECK(g2(l) == doctest::Approx(oracle::legendre(l, t)).epsilon(1e-12).scale(1.0));
      CHECK(g3(l) == doctest::Approx(oracle::chebyshev_u_normalized(l, t)).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("Legendre orthogonality under 200-point Gauss quadrature") {
  const auto [x, w] = oracle::gauss_legendre(200);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(21, 21);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Eigen::VectorXd p = gegenbauer_values<double>(2, 20, x[i]);
    gram += w[i] * p * p.transpose();
  }
  for (int l = 0; l <= 20; ++l)
    for (int k = 0; k <= 20; ++k) {
      if (l == k)
        CHECK(gram(l, k) == doctest::Approx(2.0 / (2 * l + 1)).epsilon(1e-12));
      else
        CHECK(std::abs(gram(l, k)) <= 1e-12);
    }
}

TEST_CASE("filter values") {
  const FilterSpec plateau{FilterKind::plateau, 5};
  const FilterSpec needlet{FilterKind::needlet, 5};
  CHECK(filter_value(plateau, 0.75) == 1.0);
  CHECK(filter_value(plateau, 0.0) == 1.0);
  CHECK(filter_value(plateau, 1.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(filter_value(plateau, 2.0) == 0.0);
  CHECK(filter_value(plateau, 7.0) == 0.0);
  CHECK(filter_value(needlet, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(filter_value(needlet, 0.25) == 0.0);
  CHECK(filter_value(needlet, 0.0) == 0.0);
  CHECK(filter_value(needlet, 2.5) == 0.0);
  CHECK_THROWS(filter_value(plateau, -0.1));
  CHECK_THROWS(filter_value(FilterSpec{FilterKind::plateau, 0}, 1.0));
  CHECK(filter_kind_from_string("needlet") == FilterKind::needlet);
  CHECK(filter_kind_from_string(to_string(FilterKind::plateau)) == FilterKind::plateau);
  CHECK_THROWS(filter_kind_from_string("gauss"));

  // point symmetry about (3/2, 1/2) and monotonicity on [1, 2]
  double prev = 1.0;
  for (int i = 0; i <= 200; ++i) {
    const double t = 1.0 + i / 200.0;
    CHECK(filter_value(plateau, t) + filter_value(plateau, 3.0 - t) == doctest::Approx(1.0).epsilon(1e-14));
    const double v = filter_value(plateau, t);
    CHECK(v <= prev + 1e-15);
    CHECK(v >= 0.0);
    prev = v;
  }
}

TEST_CASE("needlet partition identity") {
  for (int kappa : {1, 3, 5, 8}) {
    const FilterSpec needlet{FilterKind::needlet, kappa};
    for (int i = 0; i < 200; ++i) {
      const double t = 0.5 + 0.5 * i / 199.0;
      const double a = filter_value(needlet, t), b = filter_value(needlet, 2.0 * t);
      CHECK(std::abs(a * a + b * b - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("filter smoothness across junctions") {
  const long double h = 1e-3L;
  struct Case {
    FilterSpec spec;
    std::vector<long double> junctions;
  };
  const std::vector<Case> cases = {{{FilterKind::plateau, 5}, {1.0L, 2.0L}},
                                   {{FilterKind::needlet, 5}, {0.5L, 1.0L, 2.0L}},
                                   {{FilterKind::plateau, 3}, {1.0L, 2.0L}},
                                   {{FilterKind::needlet, 3}, {0.5L, 1.0L, 2.0L}}};
  for (const auto& c : cases) {
    const long double lo = c.spec.kind == FilterKind::plateau ? 1.0L : 0.5L;
    for (int k = 1; k <= c.spec.kappa; ++k) {
      const long double scale = derivative_scale(c.spec, lo, 2.0L, k);
      for (long double t0 : c.junctions) {
        const long double left = one_sided(c.spec, t0, k, -1, h);
        const long double right = one_sided(c.spec, t0, k, +1, h);
        INFO("kind=" << to_string(c.spec.kind) << " kappa=" << c.spec.kappa << " k=" << k << " t=" << double(t0)
                     << " left=" << double(left) << " right=" << double(right) << " scale=" << double(scale));
        CHECK(std::abs(left - right) <= 1e-4L * scale);
      }
    }
  }
}

TEST_CASE("kernel coefficients and values") {
  const FilteredKernel k1(1, 2, {});
  CHECK(k1(1.0) == doctest::Approx(1.0 / pi).epsilon(1e-15));
  CHECK(kernel_value(k1, 1.0) == k1(1.0));
  CHECK(k1.max_degree() == 1);
  CHECK(k1.coefficients().size() == 2);

  const FilteredKernel nd(4, 2, {FilterKind::needlet, 5});
  CHECK(nd.coefficients()(1) == 0.0);

  for (int n : {1, 3, 7, 20})
    for (auto kind : {FilterKind::plateau, FilterKind::needlet}) {
      const FilterSpec spec{kind, 5};
      for (int l = 2 * n; l < 4 * n + 3; ++l) CHECK(filter_value(spec, double(l) / n) == 0.0);
      const FilteredKernel k(n, 2, spec);
      CHECK(k.coefficients().size() == 2 * n);
    }

  CHECK_THROWS(FilteredKernel(0, 2, {}));
  CHECK_THROWS_AS(k1(1.5), std::domain_error);
}

TEST_CASE("Clenshaw matches naive summation") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int d : {2, 3})
    for (int n : {1, 5, 17, 45, 75})
      for (auto kind : {FilterKind::plateau, FilterKind::needlet}) {
        const FilteredKernel k(n, d, {kind, 5});
        double worst = 0.0;
        const double scale = k.coefficients().cwiseAbs().sum();
        for (int i = 0; i < 100; ++i) {
          const double t = u(gen);
          const double a = k(t), b = oracle::naive_kernel(k.coefficients(), d, t);
          worst = std::max(worst, std::abs(a - b) / std::max(std::abs(b), 1e-3 * scale));
        }
        INFO("d=" << d << " n=" << n << " kind=" << to_string(kind));
        CHECK(worst <= 1e-10);
        CHECK(k(0.3) == k(0.3));
      }
}

TEST_CASE("kernel L2 norm") {
  const FilteredKernel k1(1, 2, {});
  CHECK(kernel_l2_parseval(k1) == doctest::Approx(1.0 / pi).epsilon(1e-15));
  CHECK_THROWS(kernel_l2_parseval(FilteredKernel(3, 3, {})));

  Eigen::MatrixXd a(4, 2);
  Eigen::VectorXd b(4);
  int row = 0;
  for (int n : {4, 8, 16, 32}) {
    const double v = kernel_l2_parseval(FilteredKernel(n, 2, {}));
    CHECK(v >= 0.0);
    a(row, 0) = 1.0;
    a(row, 1) = std::log(double(n));
    b(row) = std::log(v);
    ++row;
  }
  const Eigen::Vector2d fit = a.colPivHouseholderQr().solve(b);
  CHECK(fit(1) >= 1.8);
  CHECK(fit(1) <= 2.2);
}

TEST_CASE("Parseval against quadrature of the squared kernel") {
  const UnitPoint x(0.2, -0.5, 0.7);
  for (int n = 1; n <= 12; ++n)
    for (auto kind : {FilterKind::plateau, FilterKind::needlet}) {
      const FilteredKernel k(n, 2, {kind, 5});
      const QuadratureRule q = product_rule(4 * n - 2);
      double s = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) {
        const double v = k(std::clamp(x.dot(q.nodes()[i]), -1.0, 1.0));
        s += q.weights()(static_cast<Eigen::Index>(i)) * v * v;
      }
      INFO("n=" << n);
      CHECK(s == doctest::Approx(kernel_l2_parseval(k)).epsilon(1e-8));
    }
}

TEST_CASE("real harmonics") {
  std::mt19937_64 gen(9);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd y = real_harmonics_d2(5, UnitPoint(oracle::random_unit(gen)));
    CHECK(y.size() == 36);
    CHECK(y(0) == doctest::Approx(1.0 / std::sqrt(4 * pi)).epsilon(1e-15));
  }
  CHECK(harmonic_count(3) == 16);
  CHECK(harmonic_index(2, 3) == 6);

  // zonal harmonic of degree l at the pole is sqrt((2l+1)/(4pi))
  const Eigen::VectorXd pole = real_harmonics_d2(10, UnitPoint(0, 0, 1));
  for (int l = 0; l <= 10; ++l)
    CHECK(pole(harmonic_index(l, l + 1)) == doctest::Approx(std::sqrt((2 * l + 1) / (4 * pi))).epsilon(1e-14));
  // degree-one harmonics are proportional to the coordinates
  const UnitPoint q(0.36, -0.48, 0.8);
  const Eigen::VectorXd y1 = real_harmonics_d2(1, q);
  const double c = std::sqrt(3.0 / (4 * pi));
  CHECK(y1(harmonic_index(1, 2)) == doctest::Approx(c * q.z()).epsilon(1e-14));
  CHECK(y1(harmonic_index(1, 3)) == doctest::Approx(c * q.x()).epsilon(1e-14));
  CHECK(y1(harmonic_index(1, 1)) == doctest::Approx(c * q.y()).epsilon(1e-14));
}

TEST_CASE("addition theorem") {
  std::mt19937_64 gen(10);
  const int L = 20;
  for (int i = 0; i < 50; ++i) {
    const UnitPoint x(oracle::random_unit(gen)), y(oracle::random_unit(gen));
    const Eigen::VectorXd yx = real_harmonics_d2(L, x), yy = real_harmonics_d2(L, y);
    const double t = x.dot(y);
    for (int l = 0; l <= L; ++l) {
      const double lhs = yx.segment(l * l, 2 * l + 1).dot(yy.segment(l * l, 2 * l + 1));
      const double rhs = (2 * l + 1) / (4 * pi) * oracle::legendre(l, t);
      CHECK(std::abs(lhs - rhs) <= 1e-10);
    }
  }
  // also at the poles, where the azimuth is degenerate
  const Eigen::VectorXd n = real_harmonics_d2(L, UnitPoint(0, 0, 1)), s = real_harmonics_d2(L, UnitPoint(0, 0, -1));
  for (int l = 0; l <= L; ++l) {
    const double lhs = n.segment(l * l, 2 * l + 1).dot(s.segment(l * l, 2 * l + 1));
    CHECK(std::abs(lhs - (2 * l + 1) / (4 * pi) * (l % 2 ? -1.0 : 1.0)) <= 1e-10);
  }
}

TEST_CASE("discrete orthonormality under a design") {
  const QuadratureRule design = load_design(std::string(SFH_DESIGN_DIR) + "/sym045_01038.txt", 45);
  const int L = 22;
  const Eigen::MatrixXd y = harmonic_matrix(L, design.nodes());
  CHECK(y.rows() == harmonic_count(L));
  CHECK(y.cols() == 1038);
  const Eigen::MatrixXd gram = y * design.weights().asDiagonal() * y.transpose();
  CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <= 1e-9);

  const QuadratureRule prod = product_rule(2 * 40);
  const Eigen::MatrixXd y2 = harmonic_matrix(40, prod.nodes());
  const Eigen::MatrixXd gram2 = y2 * prod.weights().asDiagonal() * y2.transpose();
  CHECK((gram2 - Eigen::MatrixXd::Identity(gram2.rows(), gram2.cols())).cwiseAbs().maxCoeff() <= 1e-12);
}
