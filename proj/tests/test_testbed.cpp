#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "doctest.h"
#include "oracles.hpp"
#include "sfh/experiments.hpp"
#include "sfh/harmonic_basis.hpp"
#include "sfh/testbed.hpp"

using namespace sfh;
constexpr double pi = std::numbers::pi;

namespace {

QuadratureRule product_rule(int degree) {
  auto [pts, wts] = oracle::product_rule(degree);
  return QuadratureRule(PointSet(pts), wts, degree, RuleProvenance::equal_weight);
}

}  // namespace

TEST_CASE("Wendland profile") {
  CHECK(wendland_raw(0.0) == 1.0);
  CHECK(wendland_raw(1.0) == 0.0);
  CHECK(wendland_raw(3.0) == 0.0);
  CHECK(wendland_raw(0.5) == doctest::Approx(15.25 / 256).epsilon(1e-15));
  CHECK(wendland_raw(0.5) == doctest::Approx(0.0595703125).epsilon(1e-15));
  CHECK_THROWS_AS(wendland_raw(-0.1), std::domain_error);

  CHECK(wendland_normalized(0.0) == 1.0);
  CHECK(wendland_normalized(15 * std::sqrt(pi) / 8) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  CHECK(wendland_normalized(2.0) == wendland_raw(16 / (15 * std::sqrt(pi))));
  CHECK(wendland_normalized(2.0) > 0.0);
  CHECK(16 / (15 * std::sqrt(pi)) == doctest::Approx(0.6018).epsilon(1e-4));
  CHECK_THROWS(wendland_normalized(-1.0));

  // golden values from an independent high-precision evaluation
  CHECK(wendland_normalized(2.0) == doctest::Approx(0.0138071387850159279).epsilon(1e-14));
  CHECK(wendland_normalized(std::sqrt(2.0)) == doctest::Approx(0.135172121799741821).epsilon(1e-14));
  CHECK(wendland_normalized(1.0) == doctest::Approx(0.373298519903263036).epsilon(1e-14));
}

TEST_CASE("Wendland profile shape") {
  double prev = 1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double u = i / 1000.0;
    const double v = wendland_raw(u);
    CHECK(v >= 0.0);
    CHECK(v <= prev);
    prev = v;
  }
  // value, first and second derivative vanish at u = 1 from the left
  for (long double h : {1e-2L, 1e-3L}) {
    const long double f0 = wendland_raw<long double>(1.0L - h);
    const long double f1 = wendland_raw<long double>(1.0L - 2 * h);
    const long double d1 = -f0 / h;
    const long double d2 = (f1 - 2 * f0) / (h * h);
    CHECK(std::abs(f0) <= 66 * std::pow(h, 8));
    CHECK(std::abs(d1) <= 66 * std::pow(h, 7));
    CHECK(std::abs(d2) <= 66 * 256 * std::pow(h, 6));
  }
}

TEST_CASE("Wendland target values") {
  const WendlandTarget f;
  const UnitPoint e1(1, 0, 0);
  const double want = wendland_normalized(0.0) + wendland_normalized(2.0) + 4 * wendland_normalized(std::sqrt(2.0));
  CHECK(f(e1) == doctest::Approx(want).epsilon(1e-14));
  CHECK(target_eval(f, e1) == doctest::Approx(1.55449562598398321).epsilon(1e-14));

  const WendlandTarget g{WendlandTarget::octahedral_centers(), ArgumentConvention::inner_product};
  CHECK(g(e1) == doctest::Approx(5.37329851990326304).epsilon(1e-14));
  CHECK(std::abs(f(e1) - g(e1)) > 1.0);
  CHECK(f.centers.size() == 6);
}

TEST_CASE("Wendland target symmetry and bounds") {
  const WendlandTarget f;
  std::mt19937_64 gen(5);
  std::array<int, 3> perm = {0, 1, 2};
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d x = oracle::random_unit(gen);
    const double v = f(UnitPoint(x));
    CHECK(v > 0.0);
    CHECK(v <= 6.0);
    std::next_permutation(perm.begin(), perm.end());
    Eigen::Vector3d y(x(perm[0]), x(perm[1]), x(perm[2]));
    y(i % 3) = -y(i % 3);
    CHECK(f(UnitPoint(y)) == doctest::Approx(v).epsilon(1e-14));
  }
}

TEST_CASE("noise models") {
  const PointSet p = random_uniform_points(100000, 3);
  const WendlandTarget f;
  const NoisyDataset clean = sample_noisy(p, f, {}, 0);
  for (std::size_t i = 0; i < 100; ++i) CHECK(clean.values()(static_cast<Eigen::Index>(i)) == f(p[i]));

  const NoisyDataset g = sample_noisy(p, f, {NoiseKind::gaussian, 0.1, 42}, 0);
  const Eigen::ArrayXd eps = (g.values() - clean.values()).array();
  const double mean = eps.mean();
  const double sd = std::sqrt((eps - mean).square().sum() / double(eps.size() - 1));
  CHECK(std::abs(mean) <= 3 * 0.1 / std::sqrt(1e5));
  CHECK(sd == doctest::Approx(0.1).epsilon(0.02));

  const NoisyDataset u = sample_noisy(p, f, {NoiseKind::uniform_bounded, 0.5, 42}, 0);
  CHECK((u.values() - clean.values()).cwiseAbs().maxCoeff() <= 0.5);

  // reproducible streams, independent across machine offsets
  CHECK(sample_noisy(p, f, {NoiseKind::gaussian, 0.1, 42}, 0).values() == g.values());
  const NoisyDataset g1 = sample_noisy(p, f, {NoiseKind::gaussian, 0.1, 42}, 1);
  const Eigen::ArrayXd eps1 = (g1.values() - clean.values()).array();
  const double corr = ((eps - mean) * (eps1 - eps1.mean())).sum() /
                      std::sqrt((eps - mean).square().sum() * (eps1 - eps1.mean()).square().sum());
  CHECK(std::abs(corr) <= 0.02);
  CHECK_THROWS(sample_noisy(p, f, {NoiseKind::gaussian, -1.0, 1}, 0));
}

TEST_CASE("l2 error") {
  const QuadratureRule q = equal_weight_rule(spiral_points(10000), 0);
  const WendlandTarget f;
  CHECK(l2_error(f, f, q) == 0.0);
  CHECK(l2_error([&](const UnitPoint& x) { return f(x) + 1.0; }, f, q) ==
        doctest::Approx(std::sqrt(4 * pi)).epsilon(1e-12));

  // rotation invariance
  std::mt19937_64 gen(2);
  const Rotation r(Eigen::AngleAxisd(0.4, oracle::random_unit(gen)).toRotationMatrix());
  const QuadratureRule d = load_design(bundled_design(21), 21);
  const QuadratureRule dr(rotate(d.nodes(), r), d.weights(), 21, RuleProvenance::design_file);
  const SphereFunction a = [](const UnitPoint& x) { return x.x() * x.x() * x.z() + 0.2; };
  const SphereFunction b = [](const UnitPoint& x) { return x.y(); };
  const Mat3 rt = r.matrix().transpose();
  const SphereFunction ar = [&](const UnitPoint& x) { return a(UnitPoint(rt * x.coords())); };
  const SphereFunction br = [&](const UnitPoint& x) { return b(UnitPoint(rt * x.coords())); };
  CHECK(l2_error(ar, br, dr) == doctest::Approx(l2_error(a, b, d)).epsilon(1e-10));

  // spiral grid and a high-strength design agree for a smooth integrand
  const QuadratureRule d45 = load_design(bundled_design(45), 45);
  const SphereFunction smooth = [](const UnitPoint& x) { return std::exp(x.x()) * std::cos(2 * x.y()); };
  const SphereFunction zero = [](const UnitPoint&) { return 0.0; };
  CHECK(l2_error(smooth, zero, q) == doctest::Approx(l2_error(smooth, zero, d45)).epsilon(0.01));
  CHECK(l2_error(f, zero, q) == doctest::Approx(l2_error(f, zero, d45)).epsilon(0.01));

  CHECK_THROWS(l2_error(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3), q));
}

TEST_CASE("Fourier coefficients") {
  const QuadratureRule q = product_rule(80);
  const FourierDiagnostics one = fourier_coefficients([](const UnitPoint&) { return 1.0; }, 10, q);
  CHECK(one.coefficients.size() == 121);
  CHECK(one.coefficients(0) == doctest::Approx(std::sqrt(4 * pi)).epsilon(1e-13));
  CHECK(one.coefficients.tail(120).cwiseAbs().maxCoeff() <= 1e-10);
  for (double r : {0.0, 1.0, 4.5}) CHECK(sobolev_norm(one, r) == doctest::Approx(std::sqrt(4 * pi)).epsilon(1e-12));

  const Eigen::Index i32 = harmonic_index(3, 2);
  const SphereFunction y32 = [&](const UnitPoint& x) { return real_harmonics_d2(3, x)(i32); };
  const FourierDiagnostics d = fourier_coefficients(y32, 10, q);
  for (Eigen::Index i = 0; i < d.coefficients.size(); ++i) {
    if (i == i32)
      CHECK(d.coefficients(i) == doctest::Approx(1.0).epsilon(1e-9));
    else
      CHECK(std::abs(d.coefficients(i)) <= 1e-9);
  }

  const Eigen::Index i21 = harmonic_index(2, 1);
  const SphereFunction y21 = [&](const UnitPoint& x) { return real_harmonics_d2(2, x)(i21); };
  CHECK(sobolev_norm(fourier_coefficients(y21, 6, q), 1.0) == doctest::Approx(std::sqrt(7.0)).epsilon(1e-9));
}

TEST_CASE("Fourier decay of the target") {
  const QuadratureRule q = product_rule(240);
  const FourierDiagnostics d = fourier_coefficients(WendlandTarget{}, 30, q);
  const Eigen::VectorXd energy = d.degree_energy();
  REQUIRE(energy.size() == 31);
  const double head = energy.head(26).sum(), tail = energy.tail(5).sum();
  INFO("head " << head << " tail " << tail);
  CHECK(tail * 1e3 <= head);
  // Parseval against the squared-norm integral
  const double norm2 = std::pow(l2_error(WendlandTarget{}, [](const UnitPoint&) { return 0.0; }, q), 2);
  CHECK(energy.sum() == doctest::Approx(norm2).epsilon(1e-6));

  double prev = 0.0;
  for (double r : {0.0, 1.0, 2.0, 4.5}) {
    const double s = sobolev_norm(d, r);
    CHECK(s >= prev);
    prev = s;
  }
}
