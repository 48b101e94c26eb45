#include "sparc/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <string>

namespace sparc::geo {

namespace {

struct SinCos {
  double s;
  double c;
};

// Multiples of 45 degrees come out exact (up to the rounding of sqrt(1/2)),
// which keeps quarter turns free of drift.
SinCos sincos_deg(double deg) {
  const double k = deg / 45.0;
  if (k == std::floor(k)) {
    const double h = std::sqrt(0.5);
    switch (static_cast<int>(k) % 8) {
      case 0: return {0.0, 1.0};
      case 1: return {h, h};
      case 2: return {1.0, 0.0};
      case 3: return {h, -h};
      case 4: return {0.0, -1.0};
      case 5: return {-h, -h};
      case 6: return {-1.0, 0.0};
      case 7: return {-h, h};
    }
  }
  const double rad = deg * std::numbers::pi / 180.0;
  return {std::sin(rad), std::cos(rad)};
}

double normalize_deg(double deg) {
  double a = std::fmod(deg, 360.0);
  if (a < 0.0) a += 360.0;
  if (a >= 360.0) a -= 360.0;
  return a == 0.0 ? 0.0 : a;  // folds -0
}

}  // namespace

Vec3 normalized(Vec3 a) {
  const double n = norm(a);
  if (n == 0.0) return a;
  return (1.0 / n) * a;
}

bool is_finite(Vec3 a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

Quat operator*(Quat a, Quat b) {
  return {a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
          a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z};
}

Quat conjugate(Quat q) { return {-q.x, -q.y, -q.z, q.w}; }

Quat normalized(Quat q) {
  const double n = std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z + q.w * q.w);
  if (n == 0.0) return Quat{};
  return {q.x / n, q.y / n, q.z / n, q.w / n};
}

Vec3 rotate(Quat q, Vec3 v) {
  const Vec3 u{q.x, q.y, q.z};
  const Vec3 t = 2.0 * cross(u, v);
  return v + q.w * t + cross(u, t);
}

Quat quat_from_axis_angle(Vec3 axis, double angle_rad) {
  const Vec3 a = normalized(axis);
  const double s = std::sin(angle_rad / 2.0);
  return {a.x * s, a.y * s, a.z * s, std::cos(angle_rad / 2.0)};
}

Quat quat_yaw_deg(double angle_deg) {
  const SinCos half = sincos_deg(normalize_deg(angle_deg) / 2.0);
  return {0.0, half.s, 0.0, half.c};
}

std::array<std::array<double, 3>, 3> to_matrix(Quat q) {
  const double xx = q.x * q.x, yy = q.y * q.y, zz = q.z * q.z;
  const double xy = q.x * q.y, xz = q.x * q.z, yz = q.y * q.z;
  const double wx = q.w * q.x, wy = q.w * q.y, wz = q.w * q.z;
  return {{{1 - 2 * (yy + zz), 2 * (xy - wz), 2 * (xz + wy)},
           {2 * (xy + wz), 1 - 2 * (xx + zz), 2 * (yz - wx)},
           {2 * (xz - wy), 2 * (yz + wx), 1 - 2 * (xx + yy)}}};
}

Quat quat_from_matrix(const std::array<std::array<double, 3>, 3>& m) {
  const double trace = m[0][0] + m[1][1] + m[2][2];
  Quat q;
  if (trace > 0.0) {
    const double s = std::sqrt(trace + 1.0) * 2.0;
    q = {(m[2][1] - m[1][2]) / s, (m[0][2] - m[2][0]) / s, (m[1][0] - m[0][1]) / s, 0.25 * s};
  } else if (m[0][0] > m[1][1] && m[0][0] > m[2][2]) {
    const double s = std::sqrt(1.0 + m[0][0] - m[1][1] - m[2][2]) * 2.0;
    q = {0.25 * s, (m[0][1] + m[1][0]) / s, (m[0][2] + m[2][0]) / s, (m[2][1] - m[1][2]) / s};
  } else if (m[1][1] > m[2][2]) {
    const double s = std::sqrt(1.0 + m[1][1] - m[0][0] - m[2][2]) * 2.0;
    q = {(m[0][1] + m[1][0]) / s, 0.25 * s, (m[1][2] + m[2][1]) / s, (m[0][2] - m[2][0]) / s};
  } else {
    const double s = std::sqrt(1.0 + m[2][2] - m[0][0] - m[1][1]) * 2.0;
    q = {(m[0][2] + m[2][0]) / s, (m[1][2] + m[2][1]) / s, 0.25 * s, (m[1][0] - m[0][1]) / s};
  }
  if (q.w < 0.0) q = {-q.x, -q.y, -q.z, -q.w};
  return normalized(q);
}

double yaw_deg(Quat q) {
  const Vec3 f = rotate(q, kForward);
  if (f.x == 0.0 && f.z == 0.0) return 0.0;
  return normalize_deg(std::atan2(-f.x, -f.z) * 180.0 / std::numbers::pi);
}

RotationY::RotationY(double angle_deg) : angle_deg_(normalize_deg(angle_deg)) {}

Vec3 RotationY::apply(Vec3 v) const {
  const SinCos sc = sincos_deg(angle_deg_);
  return {v.x * sc.c + v.z * sc.s, v.y, -v.x * sc.s + v.z * sc.c};
}

Vec3 RotationY::apply_about(Vec3 v, Vec3 pivot) const {
  if (angle_deg_ == 0.0) return v;
  const Vec3 r = apply({v.x - pivot.x, 0.0, v.z - pivot.z});
  return {pivot.x + r.x, v.y, pivot.z + r.z};
}

Quat RotationY::as_quat() const { return quat_yaw_deg(angle_deg_); }

double shortest_difference_deg(double a, double b) {
  double d = normalize_deg(b - a);
  if (d > 180.0) d -= 360.0;
  return d;
}

SeatIndex::SeatIndex(int index) : index_(index) {
  if (index < 0 || index >= kSeatCount) {
    throw std::out_of_range("seat index " + std::to_string(index) + " outside [0, 8)");
  }
}

void TableFrame::validate() const {
  const auto& b = workspace_bounds;
  if (!(b.min.x <= center.x && center.x <= b.max.x && b.min.z <= center.z && center.z <= b.max.z)) {
    throw std::invalid_argument("workspace bounds do not contain the table center");
  }
  const double half = 0.5 * std::max(b.max.x - b.min.x, b.max.z - b.min.z);
  if (!(seat_radius > half)) {
    throw std::invalid_argument("seat radius must exceed the workspace half-extent");
  }
  if (std::abs(norm(assembler_dir) - 1.0) > 1e-9 || assembler_dir.y != 0.0) {
    throw std::invalid_argument("assembler direction must be a horizontal unit vector");
  }
}

Ray Ray::toward(Vec3 origin, Vec3 target) { return along(origin, target - origin); }

Ray Ray::along(Vec3 origin, Vec3 dir) {
  const double n = norm(dir);
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("ray direction must be non-zero");
  return {origin, (1.0 / n) * dir};
}

RotationY seat_angle(SeatIndex seat) { return RotationY(seat.value() * kSeatStepDeg); }

Vec3 seat_direction(SeatIndex seat, const TableFrame& frame) {
  return seat_angle(seat).apply(frame.assembler_dir);
}

RotationY display_rotation(SeatIndex seat, Condition condition) {
  return condition == Condition::Sparc ? seat_angle(seat) : RotationY{};
}

DisplayTransform display_transform(SeatIndex seat, Condition condition, const TableFrame& frame) {
  return {display_rotation(seat, condition), frame.center};
}

Vec3 to_canonical(Vec3 p, SeatIndex seat, Condition condition, const TableFrame& frame) {
  return display_transform(seat, condition, frame).inverse().apply(p);
}

Vec3 from_canonical(Vec3 q, SeatIndex seat, Condition condition, const TableFrame& frame) {
  return display_transform(seat, condition, frame).apply(q);
}

Vec3 to_canonical_dir(Vec3 d, SeatIndex seat, Condition condition) {
  return display_rotation(seat, condition).inverse().apply(d);
}

Vec3 from_canonical_dir(Vec3 d, SeatIndex seat, Condition condition) {
  return display_rotation(seat, condition).apply(d);
}

Quat to_canonical(Quat q, SeatIndex seat, Condition condition) {
  if (condition == Condition::Veridical) return q;
  return display_rotation(seat, condition).inverse().as_quat() * q;
}

Quat from_canonical(Quat q, SeatIndex seat, Condition condition) {
  if (condition == Condition::Veridical) return q;
  return display_rotation(seat, condition).as_quat() * q;
}

Vec3 map_reference(Vec3 p, SeatIndex ru_seat, SeatIndex lu_seat, Condition condition,
                   const TableFrame& frame) {
  return from_canonical(to_canonical(p, ru_seat, condition, frame), lu_seat, condition, frame);
}

SplineArm arm_spline(Vec3 shoulder, Vec3 hand, int sample_count) {
  if (sample_count < 2) throw std::invalid_argument("spline needs at least two samples");
  if (shoulder == hand) throw DegenerateArm();

  const Vec3 d = hand - shoulder;
  const double lift = kSplineLift * norm(d);
  const Vec3 p0 = shoulder;
  const Vec3 p1 = shoulder + 0.25 * d + lift * kUp;
  const Vec3 p2 = shoulder + 0.75 * d + lift * kUp;
  const Vec3 p3 = hand;

  SplineArm arm{shoulder, hand, {}};
  arm.samples.reserve(static_cast<std::size_t>(sample_count));
  for (int i = 0; i < sample_count; ++i) {
    const double t = static_cast<double>(i) / (sample_count - 1);
    const double u = 1.0 - t;
    arm.samples.push_back(u * u * u * p0 + 3.0 * u * u * t * p1 + 3.0 * u * t * t * p2 +
                          t * t * t * p3);
  }
  arm.samples.front() = shoulder;
  arm.samples.back() = hand;
  return arm;
}

std::optional<double> ray_sphere(const Ray& ray, Vec3 center, double radius) {
  const Vec3 oc = ray.origin - center;
  const double b = dot(oc, ray.dir);
  const double c = dot(oc, oc) - radius * radius;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  const double near = -b - root;
  if (near >= 0.0) return near;
  const double far = -b + root;
  if (far >= 0.0) return far;
  return std::nullopt;
}

std::optional<double> ray_box(const Ray& ray, const Box& box) {
  double t_enter = 0.0;
  double t_exit = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    const double o = ray.origin[axis];
    const double d = ray.dir[axis];
    const double lo = box.min[axis];
    const double hi = box.max[axis];
    if (d == 0.0) {
      if (o < lo || o > hi) return std::nullopt;
      continue;
    }
    double t0 = (lo - o) / d;
    double t1 = (hi - o) / d;
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
    if (t_enter > t_exit) return std::nullopt;
  }
  return t_enter;
}

bool point_in_box(Vec3 p, const Box& box) {
  return box.min.x <= p.x && p.x <= box.max.x && box.min.y <= p.y && p.y <= box.max.y &&
         box.min.z <= p.z && p.z <= box.max.z;
}

}  // namespace sparc::geo
