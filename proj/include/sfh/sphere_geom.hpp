#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace sfh {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// A point on the unit sphere S^2. The coordinates are renormalized on
/// construction; a zero or non-finite vector is rejected.
class UnitPoint {
 public:
  UnitPoint() : coords_(0.0, 0.0, 1.0) {}
  explicit UnitPoint(const Vec3& v);
  UnitPoint(double x, double y, double z) : UnitPoint(Vec3(x, y, z)) {}

  const Vec3& coords() const noexcept { return coords_; }
  double x() const noexcept { return coords_.x(); }
  double y() const noexcept { return coords_.y(); }
  double z() const noexcept { return coords_.z(); }
  double dot(const UnitPoint& o) const noexcept { return coords_.dot(o.coords_); }

 private:
  Vec3 coords_;
};

/// Ordered, non-empty collection of unit points stored column-wise.
/// Index identity is significant: weights and observations pair by index.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(Eigen::Matrix3Xd coords);
  explicit PointSet(const std::vector<UnitPoint>& points);

  std::size_t size() const noexcept { return static_cast<std::size_t>(coords_.cols()); }
  bool empty() const noexcept { return coords_.cols() == 0; }

  UnitPoint operator[](std::size_t i) const { return UnitPoint(coords_.col(static_cast<Eigen::Index>(i))); }
  auto col(std::size_t i) const { return coords_.col(static_cast<Eigen::Index>(i)); }
  const Eigen::Matrix3Xd& coords() const noexcept { return coords_; }

  /// Points [first, first + count).
  PointSet slice(std::size_t first, std::size_t count) const;

 private:
  Eigen::Matrix3Xd coords_;
};

struct MeshStats {
  double mesh_norm = 0.0;          // radians, probe-grid lower bound
  double separation_radius = 0.0;  // radians, exact
  double mesh_ratio = 0.0;
};

/// Proper rotation of R^3 (orthogonal, det = +1 within 1e-12).
class Rotation {
 public:
  Rotation() : matrix_(Mat3::Identity()) {}
  explicit Rotation(const Mat3& m);

  const Mat3& matrix() const noexcept { return matrix_; }
  UnitPoint apply(const UnitPoint& x) const { return UnitPoint(matrix_ * x.coords()); }

 private:
  Mat3 matrix_;
};

/// arccos of the clamped inner product; in [0, pi].
double geodesic_distance(const UnitPoint& x, const UnitPoint& y);

/// Exact separation radius and probe-based mesh norm. Throws
/// std::invalid_argument for fewer than two points or coincident points.
MeshStats mesh_stats(const PointSet& points, const PointSet& probe);

/// Same as above with the default probe: spiral_points(max(20 N, 10000)).
MeshStats mesh_stats(const PointSet& points);

/// Generalized spiral points. Heights z_k = 1 - (2k - 1)/N, k = 1..N, and
/// azimuths from the Rakhmanov-Saff-Zhou recurrence
///   phi_k = phi_{k-1} + 3.6 / sqrt(N (1 - z_k^2)),  phi_1 = 0  (mod 2 pi).
PointSet spiral_points(std::size_t count);

/// i.i.d. uniform points: normalized standard Gaussian triples from a
/// mt19937_64 stream seeded with `seed`.
PointSet random_uniform_points(std::size_t count, std::uint64_t seed);

using DensityFn = std::function<double(const UnitPoint&)>;

struct DensitySample {
  PointSet points;
  std::size_t proposals = 0;
  double acceptance_rate() const {
    return proposals == 0 ? 0.0 : static_cast<double>(points.size()) / static_cast<double>(proposals);
  }
};

/// Rejection sampling against the uniform proposal. `density` is relative to
/// the uniform measure and must be bounded below by a positive constant for
/// the random-sampling theory to apply (not checked). Throws if a probed value
/// is negative or exceeds `density_max`.
DensitySample random_density_sample(std::size_t count, const DensityFn& density, double density_max,
                                    std::uint64_t seed);
PointSet random_density_points(std::size_t count, const DensityFn& density, double density_max,
                               std::uint64_t seed);

/// Rotation by `theta` about the third coordinate axis.
Rotation rotation_about_axis3(double theta);

PointSet rotate(const PointSet& points, const Rotation& r);

}  // namespace sfh
