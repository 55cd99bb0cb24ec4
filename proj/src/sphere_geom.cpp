#include "sfh/sphere_geom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace sfh {

namespace {

// Uniform cubic grid over [-1, 1]^3 for nearest-neighbour queries by chordal
// distance. Queries scan Chebyshev rings of cells around the query cell and
// stop once no unvisited cell can hold a closer point.
class NeighbourGrid {
 public:
  explicit NeighbourGrid(const Eigen::Matrix3Xd& pts) : pts_(pts) {
    const double n = static_cast<double>(std::max<Eigen::Index>(pts.cols(), 1));
    cell_ = std::max(2.0 * std::sqrt(4.0 * std::numbers::pi / n), 1e-3);
    cells_ = std::max(1, static_cast<int>(std::ceil(2.0 / cell_)));
    cell_ = 2.0 / cells_;
    buckets_.assign(static_cast<std::size_t>(cells_) * cells_ * cells_, {});
    for (Eigen::Index i = 0; i < pts.cols(); ++i) {
      const auto c = cell_of(pts.col(i));
      buckets_[flat(c[0], c[1], c[2])].push_back(i);
    }
  }

  // Index and chordal distance of the nearest point to q, ignoring `skip`.
  std::pair<Eigen::Index, double> nearest(const Vec3& q, Eigen::Index skip = -1) const {
    const auto c = cell_of(q);
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index best_i = -1;
    for (int ring = 0; ring <= cells_; ++ring) {
      for (int i = c[0] - ring; i <= c[0] + ring; ++i) {
        for (int j = c[1] - ring; j <= c[1] + ring; ++j) {
          for (int k = c[2] - ring; k <= c[2] + ring; ++k) {
            if (std::max({std::abs(i - c[0]), std::abs(j - c[1]), std::abs(k - c[2])}) != ring) continue;
            if (i < 0 || j < 0 || k < 0 || i >= cells_ || j >= cells_ || k >= cells_) continue;
            for (Eigen::Index p : buckets_[flat(i, j, k)]) {
              if (p == skip) continue;
              const double dist = (pts_.col(p) - q).norm();
              if (dist < best) {
                best = dist;
                best_i = p;
              }
            }
          }
        }
      }
      if (best_i >= 0 && best <= ring * cell_) break;
    }
    return {best_i, best};
  }

 private:
  std::array<int, 3> cell_of(const Vec3& v) const {
    std::array<int, 3> c{};
    for (int a = 0; a < 3; ++a) {
      c[a] = std::clamp(static_cast<int>(std::floor((v[a] + 1.0) / cell_)), 0, cells_ - 1);
    }
    return c;
  }
  std::size_t flat(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * cells_ + j) * cells_ + k;
  }

  const Eigen::Matrix3Xd& pts_;
  double cell_ = 1.0;
  int cells_ = 1;
  std::vector<std::vector<Eigen::Index>> buckets_;
};

double chord_to_geodesic(double chord) {
  return 2.0 * std::asin(std::clamp(0.5 * chord, 0.0, 1.0));
}

}  // namespace

UnitPoint::UnitPoint(const Vec3& v) {
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::invalid_argument("UnitPoint: vector must be finite and nonzero");
  }
  coords_ = v / norm;
}

PointSet::PointSet(Eigen::Matrix3Xd coords) : coords_(std::move(coords)) {
  for (Eigen::Index i = 0; i < coords_.cols(); ++i) {
    coords_.col(i) = UnitPoint(Vec3(coords_.col(i))).coords();
  }
}

PointSet::PointSet(const std::vector<UnitPoint>& points) : coords_(3, static_cast<Eigen::Index>(points.size())) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    coords_.col(static_cast<Eigen::Index>(i)) = points[i].coords();
  }
}

PointSet PointSet::slice(std::size_t first, std::size_t count) const {
  if (first + count > size()) throw std::out_of_range("PointSet::slice out of range");
  PointSet out;
  out.coords_ = coords_.middleCols(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count));
  return out;
}

Rotation::Rotation(const Mat3& m) : matrix_(m) {
  const double orth = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (orth > 1e-12 || std::abs(m.determinant() - 1.0) > 1e-12) {
    throw std::invalid_argument("Rotation: matrix is not a proper rotation");
  }
}

double geodesic_distance(const UnitPoint& x, const UnitPoint& y) {
  return std::acos(std::clamp(x.dot(y), -1.0, 1.0));
}

MeshStats mesh_stats(const PointSet& points, const PointSet& probe) {
  if (points.size() < 2) throw std::invalid_argument("mesh_stats: need at least two points");
  const NeighbourGrid grid(points.coords());

  double min_chord = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [j, chord] = grid.nearest(points.col(i), static_cast<Eigen::Index>(i));
    min_chord = std::min(min_chord, chord);
  }
  if (!(min_chord > 0.0)) throw std::invalid_argument("mesh_stats: coincident points (separation 0)");

  double max_chord = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    max_chord = std::max(max_chord, grid.nearest(probe.col(i)).second);
  }

  MeshStats s;
  s.separation_radius = 0.5 * chord_to_geodesic(min_chord);
  s.mesh_norm = chord_to_geodesic(max_chord);
  s.mesh_ratio = s.mesh_norm / s.separation_radius;
  return s;
}

MeshStats mesh_stats(const PointSet& points) {
  return mesh_stats(points, spiral_points(std::max<std::size_t>(20 * points.size(), 10000)));
}

PointSet spiral_points(std::size_t count) {
  if (count == 0) throw std::invalid_argument("spiral_points: count must be >= 1");
  const double n = static_cast<double>(count);
  Eigen::Matrix3Xd pts(3, static_cast<Eigen::Index>(count));
  double phi = 0.0;
  for (std::size_t k = 1; k <= count; ++k) {
    const double z = 1.0 - (2.0 * static_cast<double>(k) - 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    if (k > 1) {
      phi = std::fmod(phi + 3.6 / (std::sqrt(n) * r), 2.0 * std::numbers::pi);
    }
    pts.col(static_cast<Eigen::Index>(k - 1)) << r * std::cos(phi), r * std::sin(phi), z;
  }
  return PointSet(std::move(pts));
}

PointSet random_uniform_points(std::size_t count, std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("random_uniform_points: count must be >= 1");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Matrix3Xd pts(3, static_cast<Eigen::Index>(count));
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    Vec3 v;
    do {
      v << normal(gen), normal(gen), normal(gen);
    } while (v.squaredNorm() < 1e-300);
    pts.col(i) = v.normalized();
  }
  return PointSet(std::move(pts));
}

DensitySample random_density_sample(std::size_t count, const DensityFn& density, double density_max,
                                    std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("random_density_points: count must be >= 1");
  if (!(density_max > 0.0)) throw std::invalid_argument("random_density_points: density_max must be positive");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  DensitySample out;
  std::vector<UnitPoint> accepted;
  accepted.reserve(count);
  while (accepted.size() < count) {
    Vec3 v;
    do {
      v << normal(gen), normal(gen), normal(gen);
    } while (v.squaredNorm() < 1e-300);
    const UnitPoint x(v);
    const double u = unif(gen);
    const double rho = density(x);
    ++out.proposals;
    if (rho < 0.0 || rho > density_max) {
      throw std::invalid_argument("random_density_points: density value " + std::to_string(rho) +
                                  " outside [0, density_max]");
    }
    if (u * density_max < rho) accepted.push_back(x);
  }
  out.points = PointSet(accepted);
  return out;
}

PointSet random_density_points(std::size_t count, const DensityFn& density, double density_max,
                               std::uint64_t seed) {
  return random_density_sample(count, density, density_max, seed).points;
}

Rotation rotation_about_axis3(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Mat3 m;
  m << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return Rotation(m);
}

PointSet rotate(const PointSet& points, const Rotation& r) {
  return PointSet(Eigen::Matrix3Xd(r.matrix() * points.coords()));
}

}  // namespace sfh
