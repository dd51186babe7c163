#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace isacsim {

/// Speed of light in m/s.
inline constexpr double kSpeedOfLight = 299792458.0;

/// 2-D coordinate in meters.
struct Position {
  double x = 0.0;
  double y = 0.0;

  Position() = default;
  Position(double x_, double y_) : x(x_), y(y_) {}

  Position operator+(const Position& o) const { return {x + o.x, y + o.y}; }
  Position operator-(const Position& o) const { return {x - o.x, y - o.y}; }
  double norm() const { return std::hypot(x, y); }
};

inline double distance(const Position& a, const Position& b) {
  return (a - b).norm();
}

/// Axis-aligned rectangle, lower-left corner plus extents.
struct Rect {
  double x_min = 0.0;
  double y_min = 0.0;
  double width = 0.0;
  double height = 0.0;

  bool contains(const Position& p) const {
    return p.x >= x_min && p.x <= x_min + width && p.y >= y_min &&
           p.y <= y_min + height;
  }
  Position clamp(const Position& p) const;
  Position center() const { return {x_min + width / 2, y_min + height / 2}; }
};

/// Uniform linear array with half-wavelength element spacing.
struct ArrayGeometry {
  int num_antennas = 1;  // M

  explicit ArrayGeometry(int m);
};

/// Uniform 2-D position grid over a rectangle; points are cell centers.
struct GridSpec {
  Rect area;
  double resolution = 1.0;  // cell edge in meters

  GridSpec() = default;
  GridSpec(Rect a, double res);

  int cells_x() const;
  int cells_y() const;
  int num_points() const { return cells_x() * cells_y(); }  // Q
};

/// Angle of arrival at `anchor` of a wave from `point`, measured
/// anticlockwise from the x-axis. Range (-pi/2, 3*pi/2].
/// Throws std::domain_error if the points coincide.
double aoa(const Position& anchor, const Position& point);

/// Round-trip propagation delay between `bs` and `point`, in seconds.
double radar_delay(const Position& bs, const Position& point);

/// Excess one-way delay of the path bs -> scatterer -> user relative to the
/// direct bs -> user path. Non-negative by the triangle inequality.
double comm_relative_delay(const Position& bs, const Position& scatterer,
                           const Position& user);

/// Array response a(theta); m-th entry exp(j*m*pi*sin(theta))/sqrt(M).
/// Unit Euclidean norm for every theta.
Eigen::VectorXcd steering(double theta, const ArrayGeometry& geom);

/// d a(theta) / d theta; entries j*m*pi*cos(theta) * a_m(theta).
Eigen::VectorXcd steering_derivative(double theta, const ArrayGeometry& geom);

/// Cell-center lattice in row-major order (y outer, x inner).
/// Throws std::invalid_argument if the resolution does not divide both
/// area dimensions.
std::vector<Position> uniform_grid(const GridSpec& spec);

/// Gradient of aoa(anchor, .) with respect to the point coordinates.
Position aoa_gradient(const Position& anchor, const Position& point);

/// Gradient of radar_delay(bs, .) with respect to the point coordinates.
Position radar_delay_gradient(const Position& bs, const Position& point);

/// Gradients of comm_relative_delay with respect to the scatterer and the
/// user coordinates.
struct CommDelayGradient {
  Position d_scatterer;
  Position d_user;
};
CommDelayGradient comm_relative_delay_gradient(const Position& bs,
                                               const Position& scatterer,
                                               const Position& user);

}  // namespace isacsim
