#pragma once

// Authoritative collaboration state machine.
//
// Every mutation is expressed as an EventRecord and applied through a single
// reducer, so the event log alone reproduces the final state. Commands
// validate, compute their outcome, then append the resulting records.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sparc/geometry.hpp"
#include "sparc/json.hpp"
#include "sparc/puzzle.hpp"

namespace sparc::session {

using ClientId = std::string;

struct Role {
  enum class Kind { Assembler, Instructor };
  Kind kind = Kind::Instructor;
  int number = 1;

  static Role assembler() { return {Kind::Assembler, 0}; }
  static Role instructor(int n) { return {Kind::Instructor, n}; }
  bool is_assembler() const { return kind == Kind::Assembler; }
  /// "assembler" or "instructor<n>".
  std::string to_string() const;
  /// Throws std::invalid_argument for anything else.
  static Role parse(std::string_view text);
  friend bool operator==(const Role&, const Role&) = default;
};

enum class Phase { Lobby, Running, Finished };

std::string_view to_string(Phase phase);
std::string_view to_string(Condition condition);
std::string_view to_string(Handedness hand);
Condition parse_condition(std::string_view text);
Handedness parse_hand(std::string_view text);

struct HandState {
  geo::Pose pose;
  bool ray_active = false;
  geo::Vec3 ray_dir{0.0, 0.0, -1.0};
  std::optional<std::string> grabbed_piece;

  friend bool operator==(const HandState&, const HandState&) = default;
};

struct AvatarState {
  geo::Pose head;
  HandState left;
  HandState right;
  std::int64_t last_update_tick = -1;

  const HandState& hand(Handedness h) const { return h == Handedness::Left ? left : right; }
  HandState& hand(Handedness h) { return h == Handedness::Left ? left : right; }
  friend bool operator==(const AvatarState&, const AvatarState&) = default;
};

struct HandDistortion {
  bool active = false;
  /// Canonical coordinates; meaningful only when active.
  geo::Vec3 reference_point;

  friend bool operator==(const HandDistortion&, const HandDistortion&) = default;
};

struct DistortionState {
  HandDistortion left;
  HandDistortion right;

  const HandDistortion& hand(Handedness h) const { return h == Handedness::Left ? left : right; }
  HandDistortion& hand(Handedness h) { return h == Handedness::Left ? left : right; }
  bool any_active() const { return left.active || right.active; }
  friend bool operator==(const DistortionState&, const DistortionState&) = default;
};

struct SeatAssignment {
  ClientId client;
  geo::SeatIndex seat{0};
  Role role;
  Condition condition = Condition::Sparc;
  double angle_deg = 0.0;

  friend bool operator==(const SeatAssignment&, const SeatAssignment&) = default;
};

enum class PieceStatus { Table, Held, Placed };

std::string_view to_string(PieceStatus status);
PieceStatus parse_piece_status(std::string_view text);

struct PieceState {
  std::string id;
  PieceStatus status = PieceStatus::Table;
  geo::Pose pose;
  ClientId holder;

  friend bool operator==(const PieceState&, const PieceState&) = default;
};

inline constexpr double kHeadRadius = 0.12;
inline constexpr double kShoulderLateral = 0.18;
inline constexpr double kShoulderDrop = -0.25;
inline constexpr double kHeadHeight = 0.45;  // above the table plane
inline constexpr int kTickHz = 30;

/// Everything needed to open a session; recorded as the first log entry.
struct SessionConfig {
  Condition condition = Condition::Sparc;
  geo::TableFrame frame;
  puzzle::GridSpec grid;
  puzzle::PieceSet pieces;
  puzzle::SolutionSequence solution;

  /// Grid centered on the frame and the first tiling from the solver.
  static SessionConfig make(Condition condition, puzzle::PieceSet pieces, geo::TableFrame frame = {});
  friend bool operator==(const SessionConfig&, const SessionConfig&) = default;
};

struct SessionState {
  SessionConfig config;
  std::map<int, SeatAssignment> seats;
  std::map<ClientId, AvatarState> avatars;
  std::map<ClientId, DistortionState> distortion;
  puzzle::CubeGrid grid{4};
  std::vector<PieceState> pieces;
  int cursor = 0;
  std::int64_t clock_ms = 0;
  std::int64_t tick = 0;
  std::int64_t start_ms = -1;
  std::int64_t end_ms = -1;
  std::map<std::string, std::int64_t> errors_per_piece;
  std::int64_t attempts = 0;
  std::map<std::pair<ClientId, ClientId>, std::int64_t> eye_contact_ms;
  Phase phase = Phase::Lobby;

  const SeatAssignment* seat_of(std::string_view client) const;
  const PieceState* piece(std::string_view id) const;
  PieceState* piece(std::string_view id);
  /// Placement the instructors are currently shown, if any.
  const puzzle::Placement* target() const;
  friend bool operator==(const SessionState&, const SessionState&) = default;
};

enum class EventKind {
  Open,
  Join,
  Start,
  Pose,
  TriggerOn,
  TriggerOff,
  Grab,
  Release,
  EyeContactSample,
  Finish,
};

std::string_view to_string(EventKind kind);
/// Throws std::invalid_argument for unknown names.
EventKind parse_event_kind(std::string_view text);

struct EventRecord {
  std::int64_t tick = 0;
  std::int64_t clock_ms = 0;
  EventKind kind = EventKind::Open;
  json::Value payload;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

enum class ErrorCode {
  SeatTaken,
  NoFreeSeat,
  AssemblerSeat,
  DuplicateAssembler,
  DuplicateInstructor,
  DuplicateClient,
  SessionRunning,
  NotReady,
  NotRunning,
  UnknownClient,
  NotAssembler,
  UnknownPiece,
  PieceHeld,
  PieceLocked,
  AlreadyHolding,
  NotHolding,
  InvalidPose,
  BadLog,
};

std::string_view to_string(ErrorCode code);

class SessionError : public std::runtime_error {
 public:
  SessionError(ErrorCode code, const std::string& what);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct MetricsReport {
  bool partial = true;
  double total_time_s = 0.0;
  std::map<std::string, std::int64_t> errors_per_piece;
  std::int64_t total_errors = 0;
  std::int64_t attempts = 0;
  std::int64_t total_moves = 0;
  int correct_placements = 0;
  std::map<ClientId, double> eye_contact_s;

  json::Value to_json() const;
  /// Throws json::DecodeError on schema violations.
  static MetricsReport from_json(const json::Value& v);
  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

MetricsReport metrics_of(const SessionState& state);

/// Per-hand trigger: hand inside the workspace, or an active ray whose first
/// hit on a piece or the cube frame lies inside the workspace. Returns the
/// canonical reference point when triggered. `hand` is canonical.
std::optional<geo::Vec3> distortion_reference(const HandState& hand, const geo::TableFrame& frame,
                                              const puzzle::GridSpec& grid,
                                              const puzzle::PieceSet& pieces,
                                              const std::vector<PieceState>& piece_states);
bool distortion_trigger(const HandState& hand, Condition condition, const geo::TableFrame& frame,
                        const puzzle::GridSpec& grid, const puzzle::PieceSet& pieces,
                        const std::vector<PieceState>& piece_states);

/// Shoulder of `arm` for an avatar whose head pose is `head`.
geo::Vec3 shoulder_anchor(const geo::Pose& head, Handedness arm);

/// Default head pose at a seat, looking down at the table center.
geo::Pose seat_head_pose(geo::SeatIndex seat, const geo::TableFrame& frame);

/// Resting hand position beside the seat, outside the workspace, in room
/// coordinates (the seat's own displayed frame).
geo::Vec3 rest_hand_position(geo::SeatIndex seat, Handedness hand, const geo::TableFrame& frame);

struct RenderedHand {
  Handedness source = Handedness::Right;
  /// Arm that carries this hand in the local view.
  Handedness arm = Handedness::Right;
  geo::Pose pose;
  bool distorted = false;
  std::optional<geo::SplineArm> spline;
};

struct RenderedAvatar {
  ClientId client;
  geo::SeatIndex seat{0};
  geo::Pose head;
  RenderedHand left;
  RenderedHand right;
};

using RenderModel = std::vector<RenderedAvatar>;

/// Canonical data about one remote avatar, as found in a snapshot.
struct AvatarView {
  ClientId client;
  geo::SeatIndex seat{0};
  Role role;
  AvatarState avatar;
  DistortionState distortion;
};

/// How the local user `lu` (seated at `lu_seat`) should draw every other avatar.
RenderModel render_model(const std::vector<AvatarView>& avatars, const ClientId& lu, geo::SeatIndex lu_seat,
                         Condition condition, const geo::TableFrame& frame);

class Session {
 public:
  using Sink = std::function<void(const EventRecord&)>;

  explicit Session(SessionConfig config);

  /// Rebuilds a session from a log whose first record is Open.
  static Session replay(const std::vector<EventRecord>& log);

  void set_sink(Sink sink) { sink_ = std::move(sink); }

  /// Advances the session clock; time never moves backwards.
  void set_clock(std::int64_t now_ms, std::int64_t tick);

  SeatAssignment join(const ClientId& client, geo::SeatIndex seat, Role role);
  void start(std::int64_t now_ms);
  /// `displayed` is in the client's own displayed frame. Stale ticks are ignored.
  void update_pose(const ClientId& client, const AvatarState& displayed, std::int64_t tick);
  void grab(const ClientId& client, const std::string& piece_id, Handedness hand);
  puzzle::ReleaseOutcome release(const ClientId& client, const geo::Pose& displayed);
  void sample_eye_contact(std::int64_t dt_ms);

  RenderModel render_model_for(const ClientId& lu) const;
  std::vector<AvatarView> avatar_views() const;
  MetricsReport metrics() const { return metrics_of(state_); }

  const SessionState& state() const { return state_; }
  const std::vector<EventRecord>& log() const { return log_; }

  /// Reducer shared by live commands and replay.
  void apply(const EventRecord& record);

 private:
  void emit(EventKind kind, json::Value payload);
  const SeatAssignment& require_seat(const ClientId& client) const;

  SessionState state_;
  std::vector<EventRecord> log_;
  Sink sink_;
};

// Serialization of records and poses shared with the wire layer.
json::Value to_json(geo::Vec3 v);
json::Value to_json(geo::Quat q);
geo::Vec3 vec3_from_json(const json::Value& v);
geo::Quat quat_from_json(const json::Value& v);
geo::Vec3 quantize(geo::Vec3 v);
geo::Quat quantize(geo::Quat q);
geo::Pose quantize(const geo::Pose& p);

json::Value frame_to_json(const geo::TableFrame& frame);
geo::TableFrame frame_from_json(const json::Value& v);
json::Value grid_to_json(const puzzle::GridSpec& grid);
puzzle::GridSpec grid_from_json(const json::Value& v);
json::Value pose_to_json(const geo::Pose& pose);
geo::Pose pose_from_json(const json::Value& v);
json::Value config_to_json(const SessionConfig& config);
SessionConfig config_from_json(const json::Value& v);

}  // namespace sparc::session
