#pragma once

// Cluster layout, antenna placement and user placement. Lengths are in units
// of the cell radius; cell 0 (the target cell) is centered at the origin.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "dasqos/error.hpp"

namespace dasqos {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Normalize into [0, 2pi).
inline double wrap_angle(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

class ClusterLayout {
public:
  /// Explicit centers; the first must be the origin.
  ClusterLayout(std::vector<Point2> centers, double spacing)
      : centers_(std::move(centers)), spacing_(spacing) {
    if (centers_.empty()) throw ValidationError("cluster layout: need at least one cell");
    if (centers_.front().x != 0.0 || centers_.front().y != 0.0)
      throw ValidationError("cluster layout: cell 0 must be centered at the origin");
  }

  int size() const { return static_cast<int>(centers_.size()); }
  const std::vector<Point2>& centers() const { return centers_; }
  const Point2& center(int i) const { return centers_.at(i); }
  double spacing() const { return spacing_; }

private:
  std::vector<Point2> centers_;
  double spacing_;
};

/// Target cell plus its six first-tier neighbors at distance `spacing`,
/// neighbor k at angle k*pi/3. F = 1 yields the lone target cell.
inline ClusterLayout hex_cluster(int cluster_size, double spacing) {
  if (!(spacing > 0.0)) throw ValidationError("hex cluster: spacing must be positive");
  if (cluster_size == 1) return ClusterLayout({{0.0, 0.0}}, spacing);
  if (cluster_size != 7)
    throw ValidationError("hex cluster: only F = 1 or F = 7 are generated; supply explicit "
                          "centers for other cluster sizes");
  std::vector<Point2> c{{0.0, 0.0}};
  for (int k = 0; k < 6; ++k) {
    const double a = k * std::numbers::pi / 3.0;
    c.push_back({spacing * std::cos(a), spacing * std::sin(a)});
  }
  return ClusterLayout(std::move(c), spacing);
}

struct PolarPosition {
  double radius = 0.0;
  double angle = 0.0;
};

/// M antennas of common height, stored by increasing polar angle.
class AntennaVector {
public:
  AntennaVector(std::vector<PolarPosition> positions, double height)
      : positions_(std::move(positions)), height_(height) {
    if (positions_.empty()) throw ValidationError("antenna vector: need at least one antenna");
    if (!(height > 0.0)) throw ValidationError("antenna vector: height must be positive");
    for (auto& p : positions_) {
      if (!(p.radius >= 0.0 && p.radius <= 1.0))
        throw ValidationError("antenna vector: radius must be in [0, 1]");
      p.angle = wrap_angle(p.angle);
    }
    std::sort(positions_.begin(), positions_.end(),
              [](const PolarPosition& a, const PolarPosition& b) { return a.angle < b.angle; });
    for (std::size_t m = 1; m < positions_.size(); ++m)
      if (!(positions_[m].angle > positions_[m - 1].angle))
        throw ValidationError("antenna vector: polar angles must be distinct");
  }

  int size() const { return static_cast<int>(positions_.size()); }
  double height() const { return height_; }
  const std::vector<PolarPosition>& positions() const { return positions_; }
  const PolarPosition& operator[](int m) const { return positions_.at(m); }

  Point2 ground(int m) const {
    const auto& p = positions_.at(m);
    return {p.radius * std::cos(p.angle), p.radius * std::sin(p.angle)};
  }

private:
  std::vector<PolarPosition> positions_;
  double height_;
};

/// Evenly spaced antennas on a circle: angle_m = rotation + 2 pi m / M.
inline AntennaVector symmetric_circle(int count, double radius, double rotation, double height) {
  if (count < 1) throw ValidationError("symmetric circle: need at least one antenna");
  std::vector<PolarPosition> p;
  p.reserve(count);
  for (int m = 0; m < count; ++m) p.push_back({radius, rotation + kTwoPi * m / count});
  return AntennaVector(std::move(p), height);
}

/// One co-channel user per cell, in polar coordinates about its home cell center.
class UserVector {
public:
  UserVector(const ClusterLayout& layout, std::vector<PolarPosition> local)
      : local_(std::move(local)) {
    if (static_cast<int>(local_.size()) != layout.size())
      throw ValidationError("user vector: one user per cell required");
    xy_.reserve(local_.size());
    for (std::size_t i = 0; i < local_.size(); ++i) {
      const auto& u = local_[i];
      if (!(u.radius >= 0.0 && u.radius <= 1.0))
        throw ValidationError("user vector: radius must be in [0, 1]");
      const auto& c = layout.center(static_cast<int>(i));
      xy_.push_back({c.x + u.radius * std::cos(u.angle), c.y + u.radius * std::sin(u.angle)});
    }
  }

  int size() const { return static_cast<int>(local_.size()); }
  const std::vector<PolarPosition>& local() const { return local_; }
  /// Position relative to the target cell center.
  const Point2& position(int i) const { return xy_.at(i); }
  const std::vector<Point2>& positions() const { return xy_; }

private:
  std::vector<PolarPosition> local_;
  std::vector<Point2> xy_;
};

/// Distance from a ground point to an elevated antenna at polar (radius, angle).
inline double antenna_distance(const Point2& user, const PolarPosition& antenna, double height) {
  const double dx = user.x - antenna.radius * std::cos(antenna.angle);
  const double dy = user.y - antenna.radius * std::sin(antenna.angle);
  return std::sqrt(dx * dx + dy * dy + height * height);
}

inline double antenna_user_distance(const AntennaVector& antennas, const UserVector& users, int m,
                                    int i) {
  return antenna_distance(users.position(i), antennas[m], antennas.height());
}

/// Uniform position in the unit disk: radius has density 2r, angle is uniform.
template <class Urbg>
PolarPosition sample_in_unit_disk(Urbg& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = std::sqrt(u(rng));
  const double a = kTwoPi * u(rng);
  return {r, a};
}

template <class Urbg>
UserVector sample_user_vector(const ClusterLayout& layout, Urbg& rng) {
  std::vector<PolarPosition> local;
  local.reserve(layout.size());
  for (int i = 0; i < layout.size(); ++i) local.push_back(sample_in_unit_disk(rng));
  return UserVector(layout, std::move(local));
}

}  // namespace dasqos
