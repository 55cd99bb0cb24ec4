// Generates symmetric (antipodal) spherical t-designs for odd t.
//
// A symmetric set {+x_i, -x_i} integrates every odd-degree harmonic exactly,
// so only the even degrees 2, 4, ..., t - 1 remain:
//   r_{l,k}(X) = sum_i Y_{l,k}(x_i) = 0.
// With M = ceil((t^2 + t + 4) / 4) antipodal pairs the system is square
// modulo the 3 rotational degrees of freedom. It is solved by damped
// Gauss-Newton (Levenberg-Marquardt, minimum-norm steps) over tangent-plane
// displacements, starting from the upper half of a spiral.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "CLI11.hpp"
#include "sfh/harmonic_basis.hpp"
#include "sfh/quadrature.hpp"
#include "sfh/sphere_geom.hpp"

namespace {

using sfh::Vec3;

struct System {
  int t;
  int L;  // t - 1
  std::vector<Eigen::Index> rows;  // flat harmonic indices of even degrees 2..t-1
};

System make_system(int t) {
  System s{t, t - 1, {}};
  for (int l = 2; l <= s.L; l += 2) {
    for (int k = 1; k <= 2 * l + 1; ++k) s.rows.push_back(sfh::harmonic_index(l, k));
  }
  return s;
}

Eigen::VectorXd residual(const System& s, const Eigen::Matrix3Xd& x) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(sfh::harmonic_count(s.L));
  Eigen::VectorXd y(sfh::harmonic_count(s.L));
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    sfh::real_harmonics_d2(s.L, Vec3(x.col(i)), y);
    acc += y;
  }
  Eigen::VectorXd r(static_cast<Eigen::Index>(s.rows.size()));
  for (std::size_t j = 0; j < s.rows.size(); ++j) r(static_cast<Eigen::Index>(j)) = acc(s.rows[j]);
  return r;
}

void tangent_basis(const Vec3& x, Vec3& e1, Vec3& e2) {
  Eigen::Index axis = 0;
  x.cwiseAbs().minCoeff(&axis);
  e1 = x.cross(Vec3::Unit(axis)).normalized();
  e2 = x.cross(e1);
}

Eigen::MatrixXd jacobian(const System& s, const Eigen::Matrix3Xd& x) {
  const double h = 1e-6;
  Eigen::MatrixXd J(static_cast<Eigen::Index>(s.rows.size()), 2 * x.cols());
  Eigen::VectorXd yp(sfh::harmonic_count(s.L));
  Eigen::VectorXd ym(sfh::harmonic_count(s.L));
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    Vec3 e[2];
    tangent_basis(x.col(i), e[0], e[1]);
    for (int a = 0; a < 2; ++a) {
      sfh::real_harmonics_d2(s.L, (Vec3(x.col(i)) + h * e[a]).normalized(), yp);
      sfh::real_harmonics_d2(s.L, (Vec3(x.col(i)) - h * e[a]).normalized(), ym);
      for (std::size_t j = 0; j < s.rows.size(); ++j) {
        J(static_cast<Eigen::Index>(j), 2 * i + a) = (yp(s.rows[j]) - ym(s.rows[j])) / (2.0 * h);
      }
    }
  }
  return J;
}

Eigen::Matrix3Xd displace(const Eigen::Matrix3Xd& x, const Eigen::VectorXd& delta) {
  Eigen::Matrix3Xd out(3, x.cols());
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    Vec3 e1, e2;
    tangent_basis(x.col(i), e1, e2);
    out.col(i) = (Vec3(x.col(i)) + delta(2 * i) * e1 + delta(2 * i + 1) * e2).normalized();
  }
  return out;
}

bool solve(const System& s, Eigen::Matrix3Xd& x, int max_iter, bool verbose) {
  Eigen::VectorXd r = residual(s, x);
  double lambda = 1e-2;
  for (int it = 0; it < max_iter; ++it) {
    const double rmax = r.cwiseAbs().maxCoeff();
    if (verbose) std::fprintf(stderr, "  t=%d iter %3d  |r|_inf = %.3e  lambda = %.1e\n", s.t, it, rmax, lambda);
    if (rmax < 1e-12) return true;
    const Eigen::MatrixXd J = jacobian(s, x);
    Eigen::MatrixXd JJt = Eigen::MatrixXd::Zero(J.rows(), J.rows());
    JJt.selfadjointView<Eigen::Lower>().rankUpdate(J);
    const double scale = JJt.diagonal().mean();
    bool accepted = false;
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      Eigen::MatrixXd M = JJt;
      M.diagonal().array() += lambda * scale;
      const Eigen::VectorXd y = M.selfadjointView<Eigen::Lower>().ldlt().solve(r);
      const Eigen::Matrix3Xd trial = displace(x, -J.transpose() * y);
      const Eigen::VectorXd r_trial = residual(s, trial);
      if (r_trial.norm() < r.norm()) {
        x = trial;
        r = r_trial;
        lambda = std::max(lambda / 5.0, 1e-15);
        accepted = true;
      } else {
        lambda *= 4.0;
      }
    }
    if (!accepted) return false;
  }
  return r.cwiseAbs().maxCoeff() < 1e-12;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate symmetric spherical t-designs (odd t)"};
  std::vector<int> strengths;
  std::string out_dir = "data/designs";
  int max_iter = 200;
  int extra_pairs = 0;
  bool verbose = false;
  app.add_option("--t", strengths, "design strengths (odd)")->required();
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_option("--max-iter", max_iter, "Gauss-Newton iteration cap");
  app.add_option("--extra-pairs", extra_pairs, "antipodal pairs beyond the square count");
  app.add_flag("-v,--verbose", verbose, "print the iteration history");
  CLI11_PARSE(app, argc, argv);

  std::filesystem::create_directories(out_dir);
  int failures = 0;
  for (int t : strengths) {
    if (t < 1 || t % 2 == 0) {
      std::cerr << "skipping t=" << t << ": only odd strengths are supported\n";
      ++failures;
      continue;
    }
    const System s = make_system(t);
    bool done = false;
    for (int extra = extra_pairs; extra < extra_pairs + 8 && !done; ++extra) {
      const int pairs = (t * t + t + 4 + 3) / 4 + extra;
      const sfh::PointSet spiral = sfh::spiral_points(static_cast<std::size_t>(2 * pairs));
      Eigen::Matrix3Xd x = spiral.coords().leftCols(pairs);
      if (!solve(s, x, max_iter, verbose)) {
        std::cerr << "t=" << t << ": no convergence with " << 2 * pairs << " nodes, adding a pair\n";
        continue;
      }
      Eigen::Matrix3Xd full(3, 2 * pairs);
      full.leftCols(pairs) = x;
      full.rightCols(pairs) = -x;
      const sfh::PointSet nodes(full);
      const auto rule = sfh::equal_weight_rule(nodes, t);
      const double res = sfh::exactness_residual(rule, t);
      char name[64];
      std::snprintf(name, sizeof name, "sym%03d_%05d.txt", t, 2 * pairs);
      const auto path = std::filesystem::path(out_dir) / name;
      std::ofstream out(path);
      out << "# symmetric spherical " << t << "-design, " << 2 * pairs << " nodes, equal weights\n";
      char line[96];
      std::snprintf(line, sizeof line, "# max moment residual through degree %d: %.3e\n", t, res);
      out << line;
      sfh::write_points(nodes, out);
      std::cout << path.string() << "  residual " << res << "\n";
      done = true;
    }
    if (!done) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
