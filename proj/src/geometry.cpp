#include "isacsim/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace isacsim {

namespace {
constexpr double kPi = std::numbers::pi;
}

Position Rect::clamp(const Position& p) const {
  Position q = p;
  q.x = std::min(std::max(q.x, x_min), x_min + width);
  q.y = std::min(std::max(q.y, y_min), y_min + height);
  return q;
}

ArrayGeometry::ArrayGeometry(int m) : num_antennas(m) {
  if (m < 1) throw std::invalid_argument("array needs at least one antenna");
}

GridSpec::GridSpec(Rect a, double res) : area(a), resolution(res) {
  if (res <= 0) throw std::invalid_argument("grid resolution must be positive");
  // quotients must be integral; uniform_grid re-checks with a tolerance
  (void)cells_x();
  (void)cells_y();
}

namespace {
int integral_quotient(double extent, double res, const char* axis) {
  const double q = extent / res;
  const int n = static_cast<int>(std::lround(q));
  if (n < 1 || std::abs(q - n) > 1e-9 * std::max(1.0, q)) {
    throw std::invalid_argument(std::string("grid resolution does not divide area ") + axis);
  }
  return n;
}
}  // namespace

int GridSpec::cells_x() const {
  return integral_quotient(area.width, resolution, "width");
}

int GridSpec::cells_y() const {
  return integral_quotient(area.height, resolution, "height");
}

double aoa(const Position& anchor, const Position& point) {
  const double dx = point.x - anchor.x;
  const double dy = point.y - anchor.y;
  if (dx == 0.0 && dy == 0.0) {
    throw std::domain_error("aoa undefined for coincident points");
  }
  // atan2 agrees with arctan(dy/dx) + pi*1(dx<0) up to a 2*pi shift in the
  // third quadrant; fold into (-pi/2, 3*pi/2].
  double theta = std::atan2(dy, dx);
  if (theta <= -kPi / 2) theta += 2 * kPi;
  return theta;
}

double radar_delay(const Position& bs, const Position& point) {
  return 2.0 * distance(bs, point) / kSpeedOfLight;
}

double comm_relative_delay(const Position& bs, const Position& scatterer,
                           const Position& user) {
  return (distance(bs, scatterer) + distance(user, scatterer) -
          distance(bs, user)) /
         kSpeedOfLight;
}

Eigen::VectorXcd steering(double theta, const ArrayGeometry& geom) {
  const int m = geom.num_antennas;
  Eigen::VectorXcd a(m);
  const double phase_step = kPi * std::sin(theta);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (int i = 0; i < m; ++i) {
    a(i) = std::polar(scale, i * phase_step);
  }
  return a;
}

Eigen::VectorXcd steering_derivative(double theta, const ArrayGeometry& geom) {
  const int m = geom.num_antennas;
  Eigen::VectorXcd d = steering(theta, geom);
  const std::complex<double> j(0.0, 1.0);
  const double c = kPi * std::cos(theta);
  for (int i = 0; i < m; ++i) d(i) *= j * (i * c);
  return d;
}

std::vector<Position> uniform_grid(const GridSpec& spec) {
  const int nx = spec.cells_x();
  const int ny = spec.cells_y();
  const double d = spec.resolution;
  std::vector<Position> pts;
  pts.reserve(static_cast<size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      pts.emplace_back(spec.area.x_min + (i + 0.5) * d,
                       spec.area.y_min + (j + 0.5) * d);
    }
  }
  return pts;
}

Position aoa_gradient(const Position& anchor, const Position& point) {
  const double dx = point.x - anchor.x;
  const double dy = point.y - anchor.y;
  const double r2 = dx * dx + dy * dy;
  if (r2 < 1e-18) return {0.0, 0.0};
  return {-dy / r2, dx / r2};
}

Position radar_delay_gradient(const Position& bs, const Position& point) {
  const double dx = point.x - bs.x;
  const double dy = point.y - bs.y;
  const double r = std::hypot(dx, dy);
  if (r < 1e-9) return {0.0, 0.0};
  return {2.0 * dx / (r * kSpeedOfLight), 2.0 * dy / (r * kSpeedOfLight)};
}

CommDelayGradient comm_relative_delay_gradient(const Position& bs,
                                               const Position& scatterer,
                                               const Position& user) {
  CommDelayGradient g;
  const Position sb = scatterer - bs;
  const Position su = scatterer - user;
  const Position ub = user - bs;
  const double nsb = sb.norm();
  const double nsu = su.norm();
  const double nub = ub.norm();
  const double c = kSpeedOfLight;
  Position unit_sb = nsb > 1e-9 ? Position{sb.x / nsb, sb.y / nsb} : Position{0, 0};
  Position unit_su = nsu > 1e-9 ? Position{su.x / nsu, su.y / nsu} : Position{0, 0};
  Position unit_ub = nub > 1e-9 ? Position{ub.x / nub, ub.y / nub} : Position{0, 0};
  g.d_scatterer = {(unit_sb.x + unit_su.x) / c, (unit_sb.y + unit_su.y) / c};
  g.d_user = {(-unit_su.x - unit_ub.x) / c, (-unit_su.y - unit_ub.y) / c};
  return g;
}

}  // namespace isacsim
