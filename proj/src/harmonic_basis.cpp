#include "sfh/harmonic_basis.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace sfh {

std::int64_t harmonic_dimension(int d, int l) {
  if (d < 2 || l < 0) throw std::invalid_argument("harmonic_dimension: need d >= 2, l >= 0");
  if (l == 0) return 1;
  // binom(l + d - 1, l) built incrementally; every partial product is integral.
  std::int64_t binom = 1;
  for (int i = 1; i <= l; ++i) binom = binom * (d - 1 + i) / i;
  return binom * (2 * l + d - 1) / (l + d - 1);
}

double sphere_area(int d) {
  if (d < 1) throw std::invalid_argument("sphere_area: d must be >= 1");
  const double h = 0.5 * (d + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

std::string to_string(FilterKind kind) {
  return kind == FilterKind::plateau ? "plateau" : "needlet";
}

FilterKind filter_kind_from_string(const std::string& s) {
  if (s == "plateau") return FilterKind::plateau;
  if (s == "needlet") return FilterKind::needlet;
  throw std::invalid_argument("unknown filter kind '" + s + "' (expected plateau|needlet)");
}

FilteredKernel::FilteredKernel(int n, int d, FilterSpec filter)
    : n_(n), d_(d), filter_(filter), coeffs_(2 * std::max(n, 1)), eta_(2 * std::max(n, 1)) {
  if (n < 1) throw std::invalid_argument("FilteredKernel: n must be >= 1");
  if (d < 2) throw std::invalid_argument("FilteredKernel: d must be >= 2");
  const double area = sphere_area(d);
  for (int l = 0; l < 2 * n; ++l) {
    eta_(l) = filter_value(filter_, static_cast<double>(l) / n);
    coeffs_(l) = eta_(l) * static_cast<double>(harmonic_dimension(d, l)) / area;
  }
}

double FilteredKernel::operator()(double t) const {
  if (!(std::abs(t) <= 1.0 + 1e-12)) throw std::domain_error("kernel_value: |t| > 1");
  const double two_lambda = d_ - 1;
  const int top = static_cast<int>(coeffs_.size()) - 1;
  // P_{l+1} = alpha_l P_l + beta_l P_{l-1}
  auto alpha = [&](int l) { return (2.0 * l + two_lambda) * t / (l + two_lambda); };
  auto beta = [&](int l) { return -static_cast<double>(l) / (l + two_lambda); };
  double b1 = 0.0;
  double b2 = 0.0;
  for (int k = top; k >= 1; --k) {
    const double b0 = coeffs_(k) + alpha(k) * b1 + beta(k + 1) * b2;
    b2 = b1;
    b1 = b0;
  }
  return coeffs_(0) + t * b1 + beta(1) * b2;
}

double kernel_value(const FilteredKernel& kernel, double t) { return kernel(t); }

double kernel_l2_parseval(const FilteredKernel& kernel) {
  if (kernel.d() != 2) throw std::invalid_argument("kernel_l2_parseval: only d = 2 is supported");
  double sum = 0.0;
  const auto& eta = kernel.filter_weights();
  for (Eigen::Index l = 0; l < eta.size(); ++l) sum += eta(l) * eta(l) * (2.0 * l + 1.0);
  return sum / (4.0 * std::numbers::pi);
}

namespace {

// Recurrence coefficients a_{l,m}, b_{l,m} stored at harmonic_index(l, l + 1 + m),
// grown on demand per thread.
struct RecurrenceTable {
  int L = -1;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> diag;  // sqrt((2m + 1) / (2m)) for m >= 1

  void ensure(int want) {
    if (want <= L) return;
    L = want;
    const auto size = static_cast<std::size_t>(harmonic_count(L));
    a.assign(size, 0.0);
    b.assign(size, 0.0);
    diag.assign(static_cast<std::size_t>(L) + 1, 1.0);
    for (int m = 0; m <= L; ++m) {
      if (m > 0) diag[static_cast<std::size_t>(m)] = std::sqrt((2.0 * m + 1.0) / (2.0 * m));
      for (int l = m + 2; l <= L; ++l) {
        const double ll = l;
        const double mm = m;
        const auto i = static_cast<std::size_t>(harmonic_index(l, l + 1 + m));
        a[i] = std::sqrt((4.0 * ll * ll - 1.0) / (ll * ll - mm * mm));
        b[i] = std::sqrt(((ll - 1.0) * (ll - 1.0) - mm * mm) / (4.0 * (ll - 1.0) * (ll - 1.0) - 1.0));
      }
    }
  }
};

}  // namespace

void real_harmonics_d2(int L, const Vec3& x, Eigen::Ref<Eigen::VectorXd> out) {
  if (L < 0) throw std::invalid_argument("real_harmonics_d2: L must be >= 0");
  if (out.size() != harmonic_count(L)) throw std::invalid_argument("real_harmonics_d2: output size mismatch");
  thread_local RecurrenceTable table;
  table.ensure(L);
  const double z = x.z();
  // Q_l^m = Pbar_l^m / sin^m(theta); the sin^m factor is carried by
  // Re/Im (x + i y)^m, which keeps the recurrence free of pole divisions.
  double qmm = 0.5 / std::sqrt(std::numbers::pi);
  double cm = 1.0;  // Re (x + iy)^m
  double sm = 0.0;  // Im (x + iy)^m
  for (int m = 0; m <= L; ++m) {
    if (m > 0) {
      qmm *= table.diag[static_cast<std::size_t>(m)];
      const double c = cm * x.x() - sm * x.y();
      sm = cm * x.y() + sm * x.x();
      cm = c;
    }
    const double fc = m == 0 ? 1.0 : std::numbers::sqrt2 * cm;
    const double fs = std::numbers::sqrt2 * sm;
    double q_prev = 0.0;
    double q = qmm;
    for (int l = m; l <= L; ++l) {
      const Eigen::Index pos = harmonic_index(l, l + 1 + m);
      if (l == m + 1) {
        q_prev = q;
        q = std::sqrt(2.0 * m + 3.0) * z * q_prev;
      } else if (l > m + 1) {
        const double next = table.a[static_cast<std::size_t>(pos)] * (z * q - table.b[static_cast<std::size_t>(pos)] * q_prev);
        q_prev = q;
        q = next;
      }
      out(pos) = q * fc;
      if (m > 0) out(harmonic_index(l, l + 1 - m)) = q * fs;
    }
  }
}

Eigen::VectorXd real_harmonics_d2(int L, const UnitPoint& x) {
  Eigen::VectorXd out(harmonic_count(L));
  real_harmonics_d2(L, x.coords(), out);
  return out;
}

Eigen::MatrixXd harmonic_matrix(int L, const PointSet& points) {
  Eigen::MatrixXd y(harmonic_count(L), static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    real_harmonics_d2(L, Vec3(points.col(i)), y.col(static_cast<Eigen::Index>(i)));
  }
  return y;
}

}  // namespace sfh
