#pragma once

// Frame conventions for the shared-perspective table.
//
// Coordinates are meters, right-handed, y up. Seat angles grow
// counterclockwise when the table is viewed from above. Every client owns a
// "displayed" frame: under the Sparc condition it is the canonical workspace
// rotated about the table center by the client's seat angle; under the
// Veridical condition it is the canonical frame itself.

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace sparc {

enum class Condition { Veridical, Sparc };

enum class Handedness { Left, Right };

namespace geo {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return s * a; }
  friend constexpr bool operator==(Vec3 a, Vec3 b) = default;

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline double distance(Vec3 a, Vec3 b) { return norm(a - b); }
Vec3 normalized(Vec3 a);
bool is_finite(Vec3 a);

inline constexpr Vec3 kUp{0.0, 1.0, 0.0};

/// Unit quaternion stored [x, y, z, w].
struct Quat {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double w = 1.0;

  friend constexpr bool operator==(Quat a, Quat b) = default;
};

Quat operator*(Quat a, Quat b);
Quat conjugate(Quat q);
Quat normalized(Quat q);
Vec3 rotate(Quat q, Vec3 v);
Quat quat_from_axis_angle(Vec3 axis, double angle_rad);
Quat quat_yaw_deg(double angle_deg);
/// Row-major rotation matrix of a unit quaternion.
std::array<std::array<double, 3>, 3> to_matrix(Quat q);
Quat quat_from_matrix(const std::array<std::array<double, 3>, 3>& m);
/// Heading of the quaternion's forward axis (-z) projected on the table, degrees.
double yaw_deg(Quat q);

/// Local forward axis of heads and hands.
inline constexpr Vec3 kForward{0.0, 0.0, -1.0};
inline constexpr Vec3 kRight{1.0, 0.0, 0.0};

struct Pose {
  Vec3 p;
  Quat q;

  friend constexpr bool operator==(const Pose&, const Pose&) = default;
};

/// Rotation about the vertical axis, normalized to [0, 360).
class RotationY {
 public:
  constexpr RotationY() = default;
  explicit RotationY(double angle_deg);

  double angle_deg() const { return angle_deg_; }
  RotationY inverse() const { return RotationY(-angle_deg_); }
  RotationY operator+(RotationY o) const { return RotationY(angle_deg_ + o.angle_deg_); }
  RotationY operator-(RotationY o) const { return RotationY(angle_deg_ - o.angle_deg_); }

  /// Rotates a direction about the y axis.
  Vec3 apply(Vec3 v) const;
  /// Rotates a point about the vertical line through `pivot`.
  Vec3 apply_about(Vec3 v, Vec3 pivot) const;
  Quat as_quat() const;

  friend bool operator==(RotationY, RotationY) = default;

 private:
  double angle_deg_ = 0.0;
};

/// Signed shortest difference b - a in degrees, in (-180, 180].
double shortest_difference_deg(double a, double b);

inline constexpr int kSeatCount = 8;
inline constexpr double kSeatStepDeg = 45.0;

class SeatIndex {
 public:
  /// Throws std::out_of_range outside [0, 8).
  explicit SeatIndex(int index);
  int value() const { return index_; }
  friend constexpr auto operator<=>(SeatIndex, SeatIndex) = default;

 private:
  int index_;
};

struct Box {
  Vec3 min;
  Vec3 max;

  Vec3 center() const { return 0.5 * (min + max); }
  friend constexpr bool operator==(const Box&, const Box&) = default;
};

struct TableFrame {
  Vec3 center{0.0, 0.75, 0.0};
  Box workspace_bounds{{-0.6, 0.75, -0.6}, {0.6, 1.35, 0.6}};
  double seat_radius = 1.0;
  Vec3 assembler_dir{1.0, 0.0, 0.0};

  /// Throws std::invalid_argument when the frame invariants do not hold.
  void validate() const;
  friend constexpr bool operator==(const TableFrame&, const TableFrame&) = default;
};

struct Ray {
  Vec3 origin;
  Vec3 dir;

  /// Builds a ray with a normalized direction; throws on a zero direction.
  static Ray toward(Vec3 origin, Vec3 target);
  static Ray along(Vec3 origin, Vec3 dir);
  Vec3 at(double t) const { return origin + t * dir; }
};

struct SplineArm {
  Vec3 shoulder;
  Vec3 hand;
  std::vector<Vec3> samples;
};

class DegenerateArm : public std::domain_error {
 public:
  DegenerateArm() : std::domain_error("shoulder and hand coincide") {}
};

inline constexpr int kDefaultSplineSamples = 16;
inline constexpr double kSplineLift = 0.1;

RotationY seat_angle(SeatIndex seat);

/// Unit horizontal vector from the table center toward `seat`, in room coordinates.
Vec3 seat_direction(SeatIndex seat, const TableFrame& frame);

/// Rotation taking canonical coordinates into the seat's displayed frame.
RotationY display_rotation(SeatIndex seat, Condition condition);

/// Rigid transform (rotation about the vertical line through the table center).
struct DisplayTransform {
  RotationY rotation;
  Vec3 pivot;

  Vec3 apply(Vec3 p) const { return rotation.apply_about(p, pivot); }
  Vec3 apply_dir(Vec3 d) const { return rotation.apply(d); }
  Quat apply(Quat q) const { return rotation.as_quat() * q; }
  DisplayTransform inverse() const { return {rotation.inverse(), pivot}; }
};

DisplayTransform display_transform(SeatIndex seat, Condition condition, const TableFrame& frame);

Vec3 to_canonical(Vec3 p, SeatIndex seat, Condition condition, const TableFrame& frame);
Vec3 from_canonical(Vec3 q, SeatIndex seat, Condition condition, const TableFrame& frame);
Vec3 to_canonical_dir(Vec3 d, SeatIndex seat, Condition condition);
Vec3 from_canonical_dir(Vec3 d, SeatIndex seat, Condition condition);
Quat to_canonical(Quat q, SeatIndex seat, Condition condition);
Quat from_canonical(Quat q, SeatIndex seat, Condition condition);

/// Moves a point referenced in the remote user's displayed frame into the
/// local user's displayed frame so that it designates the same canonical spot.
Vec3 map_reference(Vec3 p, SeatIndex ru_seat, SeatIndex lu_seat, Condition condition,
                   const TableFrame& frame);

constexpr Handedness mirror_arm(Handedness hand) {
  return hand == Handedness::Left ? Handedness::Right : Handedness::Left;
}

/// Cubic Bezier from shoulder to hand, lifted by kSplineLift * length at the
/// interior control points. Throws DegenerateArm when shoulder == hand.
SplineArm arm_spline(Vec3 shoulder, Vec3 hand, int sample_count = kDefaultSplineSamples);

std::optional<double> ray_sphere(const Ray& ray, Vec3 center, double radius);
/// Slab test. An origin inside the (inclusive) box yields t = 0.
std::optional<double> ray_box(const Ray& ray, const Box& box);
bool point_in_box(Vec3 p, const Box& box);

}  // namespace geo
}  // namespace sparc
