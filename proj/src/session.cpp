#include "sparc/session.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace sparc::session {

using json::Fields;
using json::ObjectBuilder;
using json::Value;

std::string Role::to_string() const {
  return is_assembler() ? "assembler" : "instructor" + std::to_string(number);
}

Role Role::parse(std::string_view text) {
  if (text == "assembler") return assembler();
  constexpr std::string_view prefix = "instructor";
  if (text.starts_with(prefix) && text.size() > prefix.size()) {
    const std::string_view digits = text.substr(prefix.size());
    int n = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && n >= 1 && digits[0] != '0') {
      return instructor(n);
    }
  }
  throw std::invalid_argument("unknown role '" + std::string(text) + "'");
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::Lobby: return "lobby";
    case Phase::Running: return "running";
    case Phase::Finished: return "finished";
  }
  return "?";
}

std::string_view to_string(Condition condition) {
  return condition == Condition::Sparc ? "sparc" : "veridical";
}

std::string_view to_string(Handedness hand) { return hand == Handedness::Left ? "left" : "right"; }

Condition parse_condition(std::string_view text) {
  if (text == "sparc") return Condition::Sparc;
  if (text == "veridical") return Condition::Veridical;
  throw std::invalid_argument("unknown condition '" + std::string(text) + "'");
}

Handedness parse_hand(std::string_view text) {
  if (text == "left") return Handedness::Left;
  if (text == "right") return Handedness::Right;
  throw std::invalid_argument("unknown hand '" + std::string(text) + "'");
}

std::string_view to_string(PieceStatus status) {
  switch (status) {
    case PieceStatus::Table: return "table";
    case PieceStatus::Held: return "held";
    case PieceStatus::Placed: return "placed";
  }
  return "?";
}

PieceStatus parse_piece_status(std::string_view text) {
  if (text == "table") return PieceStatus::Table;
  if (text == "held") return PieceStatus::Held;
  if (text == "placed") return PieceStatus::Placed;
  throw std::invalid_argument("unknown piece status '" + std::string(text) + "'");
}

namespace {

constexpr std::pair<EventKind, std::string_view> kEventNames[] = {
    {EventKind::Open, "open"},
    {EventKind::Join, "join"},
    {EventKind::Start, "start"},
    {EventKind::Pose, "pose"},
    {EventKind::TriggerOn, "trigger_on"},
    {EventKind::TriggerOff, "trigger_off"},
    {EventKind::Grab, "grab"},
    {EventKind::Release, "release"},
    {EventKind::EyeContactSample, "eye_contact_sample"},
    {EventKind::Finish, "finish"},
};

constexpr std::pair<ErrorCode, std::string_view> kErrorNames[] = {
    {ErrorCode::SeatTaken, "SeatTaken"},
    {ErrorCode::NoFreeSeat, "NoFreeSeat"},
    {ErrorCode::AssemblerSeat, "AssemblerSeat"},
    {ErrorCode::DuplicateAssembler, "DuplicateAssembler"},
    {ErrorCode::DuplicateInstructor, "DuplicateInstructor"},
    {ErrorCode::DuplicateClient, "DuplicateClient"},
    {ErrorCode::SessionRunning, "SessionRunning"},
    {ErrorCode::NotReady, "NotReady"},
    {ErrorCode::NotRunning, "NotRunning"},
    {ErrorCode::UnknownClient, "UnknownClient"},
    {ErrorCode::NotAssembler, "NotAssembler"},
    {ErrorCode::UnknownPiece, "UnknownPiece"},
    {ErrorCode::PieceHeld, "PieceHeld"},
    {ErrorCode::PieceLocked, "PieceLocked"},
    {ErrorCode::AlreadyHolding, "AlreadyHolding"},
    {ErrorCode::NotHolding, "NotHolding"},
    {ErrorCode::InvalidPose, "InvalidPose"},
    {ErrorCode::BadLog, "BadLog"},
};

}  // namespace

std::string_view to_string(EventKind kind) {
  for (const auto& [k, name] : kEventNames)
    if (k == kind) return name;
  return "?";
}

EventKind parse_event_kind(std::string_view text) {
  for (const auto& [k, name] : kEventNames)
    if (name == text) return k;
  throw std::invalid_argument("unknown event kind '" + std::string(text) + "'");
}

std::string_view to_string(ErrorCode code) {
  for (const auto& [c, name] : kErrorNames)
    if (c == code) return name;
  return "?";
}

SessionError::SessionError(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

// ---------------------------------------------------------------------------
// JSON helpers

Value to_json(geo::Vec3 v) { return Value(json::Array{Value(v.x), Value(v.y), Value(v.z)}); }

Value to_json(geo::Quat q) { return Value(json::Array{Value(q.x), Value(q.y), Value(q.z), Value(q.w)}); }

namespace {

const json::Array& fixed_array(const Value& v, std::size_t n) {
  const json::Array& a = v.as_array();
  if (a.size() != n) throw json::DecodeError(v.offset(), "expected " + std::to_string(n) + " numbers");
  return a;
}

Value pose_json(const geo::Pose& p) { return ObjectBuilder().add("p", to_json(p.p)).add("q", to_json(p.q)).build(); }

geo::Pose pose_from(const Value& v) {
  Fields f(v);
  geo::Pose out{vec3_from_json(f.req("p")), quat_from_json(f.req("q"))};
  f.done();
  return out;
}

Value hand_json(const HandState& h) {
  return ObjectBuilder()
      .add("p", to_json(h.pose.p))
      .add("q", to_json(h.pose.q))
      .add("ray", h.ray_active)
      .add("rayDir", to_json(h.ray_dir))
      .add("grab", h.grabbed_piece ? Value(*h.grabbed_piece) : Value(nullptr))
      .build();
}

HandState hand_from(const Value& v) {
  Fields f(v);
  HandState h;
  h.pose = {vec3_from_json(f.req("p")), quat_from_json(f.req("q"))};
  h.ray_active = f.req("ray").as_bool();
  h.ray_dir = vec3_from_json(f.req("rayDir"));
  const Value& g = f.req("grab");
  if (!g.is_null()) h.grabbed_piece = g.as_string();
  f.done();
  return h;
}

Value distortion_json(const HandDistortion& d) {
  ObjectBuilder b;
  b.add("active", d.active);
  if (d.active) b.add("ref", to_json(d.reference_point));
  return std::move(b).build();
}

HandDistortion distortion_from(const Value& v) {
  Fields f(v);
  HandDistortion d;
  d.active = f.req("active").as_bool();
  if (d.active) d.reference_point = vec3_from_json(f.req("ref"));
  f.done();
  return d;
}

Value box_json(const geo::Box& b) { return ObjectBuilder().add("min", to_json(b.min)).add("max", to_json(b.max)).build(); }

puzzle::Placement placement_from(const Value& v) {
  const json::Array& a = fixed_array(v, 5);
  return {a[0].as_string(), puzzle::Orientation(static_cast<int>(a[1].as_int())),
          {static_cast<int>(a[2].as_int()), static_cast<int>(a[3].as_int()), static_cast<int>(a[4].as_int())}};
}

Value placement_json(const puzzle::Placement& p) {
  return Value(json::Array{Value(p.piece_id), Value(p.orientation.index()), Value(p.offset.x), Value(p.offset.y),
                           Value(p.offset.z)});
}

double q6(double v) { return json::quantize(v); }

geo::TableFrame quantize(const geo::TableFrame& f) {
  return {session::quantize(f.center), {session::quantize(f.workspace_bounds.min), session::quantize(f.workspace_bounds.max)},
          q6(f.seat_radius), session::quantize(f.assembler_dir)};
}

puzzle::GridSpec quantize(const puzzle::GridSpec& g) { return {g.dim, q6(g.cell_size), session::quantize(g.origin)}; }

}  // namespace

geo::Vec3 vec3_from_json(const Value& v) {
  const json::Array& a = fixed_array(v, 3);
  return {a[0].as_number(), a[1].as_number(), a[2].as_number()};
}

geo::Quat quat_from_json(const Value& v) {
  const json::Array& a = fixed_array(v, 4);
  return {a[0].as_number(), a[1].as_number(), a[2].as_number(), a[3].as_number()};
}

geo::Vec3 quantize(geo::Vec3 v) { return {q6(v.x), q6(v.y), q6(v.z)}; }

geo::Quat quantize(geo::Quat q) { return {q6(q.x), q6(q.y), q6(q.z), q6(q.w)}; }

geo::Pose quantize(const geo::Pose& p) { return {quantize(p.p), quantize(geo::normalized(p.q))}; }

Value frame_to_json(const geo::TableFrame& f) {
  return ObjectBuilder()
      .add("center", to_json(f.center))
      .add("workspace", box_json(f.workspace_bounds))
      .add("seatRadius", f.seat_radius)
      .add("assemblerDir", to_json(f.assembler_dir))
      .build();
}

geo::TableFrame frame_from_json(const Value& v) {
  Fields f(v);
  geo::TableFrame frame;
  frame.center = vec3_from_json(f.req("center"));
  Fields bf(f.req("workspace"));
  frame.workspace_bounds = {vec3_from_json(bf.req("min")), vec3_from_json(bf.req("max"))};
  bf.done();
  frame.seat_radius = f.req("seatRadius").as_number();
  frame.assembler_dir = vec3_from_json(f.req("assemblerDir"));
  f.done();
  try {
    frame.validate();
  } catch (const std::invalid_argument& e) {
    throw json::DecodeError(v.offset(), e.what());
  }
  return frame;
}

Value grid_to_json(const puzzle::GridSpec& g) {
  return ObjectBuilder().add("dim", g.dim).add("cellSize", g.cell_size).add("origin", to_json(g.origin)).build();
}

puzzle::GridSpec grid_from_json(const Value& v) {
  Fields f(v);
  puzzle::GridSpec g;
  const Value& dim = f.req("dim");
  g.dim = static_cast<int>(dim.as_int());
  if (g.dim < 1 || g.dim > 4) throw json::DecodeError(dim.offset(), "grid dim must be 1..4");
  const Value& cs = f.req("cellSize");
  g.cell_size = cs.as_number();
  if (!(g.cell_size > 0.0)) throw json::DecodeError(cs.offset(), "cell size must be positive");
  g.origin = vec3_from_json(f.req("origin"));
  f.done();
  return g;
}

Value pose_to_json(const geo::Pose& p) { return pose_json(p); }

geo::Pose pose_from_json(const Value& v) { return pose_from(v); }

Value config_to_json(const SessionConfig& c) {
  json::Array solution;
  for (const auto& p : c.solution.placements) solution.push_back(placement_json(p));
  return ObjectBuilder()
      .add("condition", to_string(c.condition))
      .add("frame", frame_to_json(c.frame))
      .add("grid", grid_to_json(c.grid))
      .add("pieces", puzzle::serialize(c.pieces))
      .add("solution", Value(std::move(solution)))
      .build();
}

SessionConfig config_from_json(const Value& v) {
  Fields f(v);
  SessionConfig c;
  const Value& cond = f.req("condition");
  try {
    c.condition = parse_condition(cond.as_string());
  } catch (const std::invalid_argument& e) {
    throw json::DecodeError(cond.offset(), e.what());
  }
  c.frame = frame_from_json(f.req("frame"));
  c.grid = grid_from_json(f.req("grid"));
  const Value& pieces = f.req("pieces");
  try {
    c.pieces = puzzle::load_piece_set(pieces.as_string(), c.grid);
  } catch (const std::runtime_error& e) {
    throw json::DecodeError(pieces.offset(), std::string("bad piece set: ") + e.what());
  }
  for (const Value& p : f.req("solution").as_array()) c.solution.placements.push_back(placement_from(p));
  f.done();
  return c;
}

// ---------------------------------------------------------------------------
// Geometry helpers tied to avatars

geo::Pose seat_head_pose(geo::SeatIndex seat, const geo::TableFrame& frame) {
  const geo::Vec3 dir = geo::seat_direction(seat, frame);
  const geo::Vec3 p = frame.center + frame.seat_radius * dir + geo::Vec3{0.0, kHeadHeight, 0.0};
  const double yaw = geo::RotationY(90.0 + geo::seat_angle(seat).angle_deg()).angle_deg();
  const double pitch = -std::atan2(kHeadHeight, frame.seat_radius);
  return quantize(geo::Pose{p, geo::quat_yaw_deg(yaw) * geo::quat_from_axis_angle(geo::kRight, pitch)});
}

geo::Vec3 rest_hand_position(geo::SeatIndex seat, Handedness hand, const geo::TableFrame& frame) {
  constexpr double kInset = 0.08;
  constexpr double kLateral = 0.2;
  constexpr double kLift = 0.1;
  const geo::Vec3 dir = geo::seat_direction(seat, frame);
  const geo::Vec3 right = geo::RotationY(90.0 + geo::seat_angle(seat).angle_deg()).apply(geo::kRight);
  const double side = hand == Handedness::Right ? 1.0 : -1.0;
  return quantize(frame.center + (frame.seat_radius - kInset) * dir + side * kLateral * right +
                  geo::Vec3{0.0, kLift, 0.0});
}

geo::Vec3 shoulder_anchor(const geo::Pose& head, Handedness arm) {
  const double side = arm == Handedness::Right ? 1.0 : -1.0;
  const geo::Vec3 local{side * kShoulderLateral, kShoulderDrop, 0.0};
  return head.p + geo::RotationY(geo::yaw_deg(head.q)).apply(local);
}

std::optional<geo::Vec3> distortion_reference(const HandState& hand, const geo::TableFrame& frame,
                                              const puzzle::GridSpec& grid, const puzzle::PieceSet& pieces,
                                              const std::vector<PieceState>& piece_states) {
  if (geo::point_in_box(hand.pose.p, frame.workspace_bounds)) return hand.pose.p;
  if (!hand.ray_active || geo::norm(hand.ray_dir) == 0.0) return std::nullopt;

  const geo::Ray ray = geo::Ray::along(hand.pose.p, hand.ray_dir);
  std::optional<double> best;
  auto consider = [&](const geo::Box& box) {
    if (auto t = geo::ray_box(ray, box)) {
      if (geo::point_in_box(ray.at(*t), frame.workspace_bounds) && (!best || *t < *best)) best = t;
    }
  };
  consider(grid.cube_box());
  for (const PieceState& ps : piece_states) {
    if (ps.status == PieceStatus::Held) continue;
    const puzzle::PieceShape* shape = pieces.find(ps.id);
    if (!shape) continue;
    const puzzle::Placement at = puzzle::placement_at(*shape, ps.pose, grid);
    for (const puzzle::Cell& c : at.cells(*shape)) consider(grid.cell_box(c));
  }
  if (!best) return std::nullopt;
  return ray.at(*best);
}

bool distortion_trigger(const HandState& hand, Condition condition, const geo::TableFrame& frame,
                        const puzzle::GridSpec& grid, const puzzle::PieceSet& pieces,
                        const std::vector<PieceState>& piece_states) {
  if (condition != Condition::Sparc) return false;
  return distortion_reference(hand, frame, grid, pieces, piece_states).has_value();
}

RenderModel render_model(const std::vector<AvatarView>& avatars, const ClientId& lu, geo::SeatIndex lu_seat,
                         Condition condition, const geo::TableFrame& frame) {
  RenderModel out;
  for (const AvatarView& view : avatars) {
    if (view.client == lu) continue;
    RenderedAvatar r{view.client, view.seat, view.avatar.head, {}, {}};
    const bool mirrored = condition == Condition::Sparc && view.distortion.any_active();
    for (Handedness h : {Handedness::Left, Handedness::Right}) {
      const HandState& hand = view.avatar.hand(h);
      RenderedHand& rh = h == Handedness::Left ? r.left : r.right;
      rh.source = h;
      rh.arm = mirrored ? geo::mirror_arm(h) : h;
      if (condition == Condition::Veridical) {
        rh.pose = hand.pose;
        continue;
      }
      const HandDistortion& d = view.distortion.hand(h);
      if (d.active) {
        rh.distorted = true;
        rh.pose = {geo::from_canonical(d.reference_point, lu_seat, condition, frame),
                   geo::from_canonical(hand.pose.q, lu_seat, condition)};
        try {
          rh.spline = geo::arm_spline(shoulder_anchor(view.avatar.head, rh.arm), rh.pose.p);
        } catch (const geo::DegenerateArm&) {
          rh.spline.reset();
        }
      } else {
        rh.pose = {geo::from_canonical(hand.pose.p, view.seat, condition, frame),
                   geo::from_canonical(hand.pose.q, view.seat, condition)};
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

Value MetricsReport::to_json() const {
  json::Object errs;
  for (const auto& [id, n] : errors_per_piece) errs.push_back({id, Value(n), 0});
  json::Object eye;
  for (const auto& [id, s] : eye_contact_s) eye.push_back({id, Value(s), 0});
  return ObjectBuilder()
      .add("partial", partial)
      .add("total_time_s", total_time_s)
      .add("errors_per_piece", Value(std::move(errs)))
      .add("total_errors", total_errors)
      .add("attempts", attempts)
      .add("total_moves", total_moves)
      .add("correct_placements", correct_placements)
      .add("eye_contact_s", Value(std::move(eye)))
      .build();
}

MetricsReport MetricsReport::from_json(const Value& v) {
  Fields f(v);
  MetricsReport r;
  r.partial = f.req("partial").as_bool();
  r.total_time_s = f.req("total_time_s").as_number();
  for (const auto& m : f.req("errors_per_piece").as_object()) r.errors_per_piece[m.key] = m.value.as_int();
  r.total_errors = f.req("total_errors").as_int();
  r.attempts = f.req("attempts").as_int();
  r.total_moves = f.req("total_moves").as_int();
  r.correct_placements = static_cast<int>(f.req("correct_placements").as_int());
  for (const auto& m : f.req("eye_contact_s").as_object()) r.eye_contact_s[m.key] = m.value.as_number();
  f.done();
  return r;
}

MetricsReport metrics_of(const SessionState& state) {
  MetricsReport r;
  r.partial = state.phase != Phase::Finished;
  if (state.start_ms >= 0) {
    const std::int64_t end = state.end_ms >= 0 ? state.end_ms : state.clock_ms;
    r.total_time_s = json::quantize(static_cast<double>(end - state.start_ms) / 1000.0);
  }
  r.errors_per_piece = state.errors_per_piece;
  for (const auto& [id, n] : state.errors_per_piece) r.total_errors += n;
  r.attempts = state.attempts;
  r.total_moves = r.total_errors + r.attempts;
  r.correct_placements = state.cursor;
  for (const auto& [seat, a] : state.seats) r.eye_contact_s[a.client] = 0.0;
  std::map<ClientId, std::int64_t> ms;
  for (const auto& [pair, v] : state.eye_contact_ms) ms[pair.first] += v;
  for (const auto& [client, v] : ms) r.eye_contact_s[client] = json::quantize(static_cast<double>(v) / 1000.0);
  return r;
}

// ---------------------------------------------------------------------------
// SessionState

const SeatAssignment* SessionState::seat_of(std::string_view client) const {
  for (const auto& [i, a] : seats)
    if (a.client == client) return &a;
  return nullptr;
}

const PieceState* SessionState::piece(std::string_view id) const {
  for (const auto& p : pieces)
    if (p.id == id) return &p;
  return nullptr;
}

PieceState* SessionState::piece(std::string_view id) {
  for (auto& p : pieces)
    if (p.id == id) return &p;
  return nullptr;
}

const puzzle::Placement* SessionState::target() const {
  if (phase != Phase::Running) return nullptr;
  const auto& seq = config.solution.placements;
  if (cursor < 0 || cursor >= static_cast<int>(seq.size())) return nullptr;
  return &seq[static_cast<std::size_t>(cursor)];
}

SessionConfig SessionConfig::make(Condition condition, puzzle::PieceSet pieces, geo::TableFrame frame) {
  frame.validate();
  SessionConfig c;
  c.condition = condition;
  c.frame = frame;
  c.grid = puzzle::GridSpec::centered_on(frame.center, pieces.dim());
  c.pieces = std::move(pieces);
  c.solution = puzzle::solve(c.pieces, c.grid.dim, 1).front();
  return c;
}

// ---------------------------------------------------------------------------
// Session

Session::Session(SessionConfig config) {
  config.frame = quantize(config.frame);
  config.grid = quantize(config.grid);
  if (config.pieces.dim() != config.grid.dim) throw std::invalid_argument("piece set does not fill the grid");
  puzzle::check_partition(config.solution, config.pieces, config.grid.dim);

  state_.grid = puzzle::CubeGrid(config.grid.dim);
  for (const auto& shape : config.pieces.pieces) {
    const auto it = config.pieces.table_home.find(shape.id);
    const puzzle::TablePose home = it != config.pieces.table_home.end() ? it->second : puzzle::TablePose{};
    state_.pieces.push_back(
        {shape.id, PieceStatus::Table, quantize(geo::Pose{home.position, puzzle::Orientation(home.orientation).as_quat()}), {}});
    state_.errors_per_piece[shape.id] = 0;
  }
  Value payload = config_to_json(config);
  state_.config = std::move(config);
  log_.push_back({0, 0, EventKind::Open, std::move(payload)});
}

Session Session::replay(const std::vector<EventRecord>& log) {
  if (log.empty() || log.front().kind != EventKind::Open) {
    throw SessionError(ErrorCode::BadLog, "log must begin with an open record");
  }
  Session s(config_from_json(log.front().payload));
  if (s.log_.front().payload != log.front().payload) {
    throw SessionError(ErrorCode::BadLog, "open record is not in canonical form");
  }
  for (std::size_t i = 1; i < log.size(); ++i) {
    if (log[i].kind == EventKind::Open) throw SessionError(ErrorCode::BadLog, "second open record");
    if (log[i].tick < s.state_.tick || log[i].clock_ms < s.state_.clock_ms) {
      throw SessionError(ErrorCode::BadLog, "record " + std::to_string(i) + " goes back in time");
    }
    s.apply(log[i]);
    s.log_.push_back(log[i]);
  }
  return s;
}

void Session::set_clock(std::int64_t now_ms, std::int64_t tick) {
  state_.clock_ms = std::max(state_.clock_ms, now_ms);
  state_.tick = std::max(state_.tick, tick);
}

void Session::emit(EventKind kind, Value payload) {
  EventRecord record{state_.tick, state_.clock_ms, kind, std::move(payload)};
  apply(record);
  log_.push_back(record);
  if (sink_) sink_(log_.back());
}

const SeatAssignment& Session::require_seat(const ClientId& client) const {
  const SeatAssignment* a = state_.seat_of(client);
  if (!a) throw SessionError(ErrorCode::UnknownClient, "client '" + client + "' is not seated");
  return *a;
}

SeatAssignment Session::join(const ClientId& client, geo::SeatIndex seat, Role role) {
  if (state_.phase != Phase::Lobby) throw SessionError(ErrorCode::SessionRunning, "session already started");
  if (client.empty()) throw SessionError(ErrorCode::UnknownClient, "empty client name");
  if (state_.seat_of(client)) throw SessionError(ErrorCode::DuplicateClient, "client '" + client + "' already seated");
  if (static_cast<int>(state_.seats.size()) >= geo::kSeatCount) {
    throw SessionError(ErrorCode::NoFreeSeat, "all eight seats are occupied");
  }
  if (state_.seats.contains(seat.value())) {
    throw SessionError(ErrorCode::SeatTaken, "seat " + std::to_string(seat.value()) + " is taken");
  }
  if (role.is_assembler() != (seat.value() == 0)) {
    throw SessionError(ErrorCode::AssemblerSeat, "seat 0 is reserved for the assembler");
  }
  for (const auto& [i, a] : state_.seats) {
    if (role.is_assembler() && a.role.is_assembler()) {
      throw SessionError(ErrorCode::DuplicateAssembler, "session already has an assembler");
    }
    if (!role.is_assembler() && a.role == role) {
      throw SessionError(ErrorCode::DuplicateInstructor, role.to_string() + " is already taken");
    }
  }
  if (!role.is_assembler() && role.number < 1) throw std::invalid_argument("instructor numbers start at 1");

  emit(EventKind::Join,
       ObjectBuilder().add("client", client).add("seat", seat.value()).add("role", role.to_string()).build());
  return state_.seats.at(seat.value());
}

void Session::start(std::int64_t now_ms) {
  set_clock(now_ms, state_.tick);
  if (state_.phase != Phase::Lobby) throw SessionError(ErrorCode::NotReady, "session is not in the lobby");
  bool assembler = false;
  bool instructor = false;
  for (const auto& [i, a] : state_.seats) {
    assembler = assembler || a.role.is_assembler();
    instructor = instructor || !a.role.is_assembler();
  }
  if (!assembler || !instructor) {
    throw SessionError(ErrorCode::NotReady, "need one assembler and at least one instructor");
  }
  emit(EventKind::Start, ObjectBuilder().add("start_ms", state_.clock_ms).build());
}

void Session::update_pose(const ClientId& client, const AvatarState& displayed, std::int64_t tick) {
  const SeatAssignment& seat = require_seat(client);
  const AvatarState& current = state_.avatars.at(client);
  if (tick < current.last_update_tick) return;

  auto finite_pose = [](const geo::Pose& p) {
    return geo::is_finite(p.p) && std::isfinite(p.q.x) && std::isfinite(p.q.y) && std::isfinite(p.q.z) &&
           std::isfinite(p.q.w) && (p.q.x != 0.0 || p.q.y != 0.0 || p.q.z != 0.0 || p.q.w != 0.0);
  };
  for (const geo::Pose* p : {&displayed.head, &displayed.left.pose, &displayed.right.pose}) {
    if (!finite_pose(*p)) throw SessionError(ErrorCode::InvalidPose, "pose is not finite");
  }

  const Condition cond = state_.config.condition;
  const geo::TableFrame& frame = state_.config.frame;
  AvatarState canonical;
  canonical.head = quantize(displayed.head);
  canonical.last_update_tick = tick;
  DistortionState dist;
  for (Handedness h : {Handedness::Left, Handedness::Right}) {
    const HandState& in = displayed.hand(h);
    HandState& out = canonical.hand(h);
    out.pose = quantize(geo::Pose{geo::to_canonical(in.pose.p, seat.seat, cond, frame),
                                  geo::to_canonical(geo::normalized(in.pose.q), seat.seat, cond)});
    const geo::Vec3 dir = geo::normalized(geo::to_canonical_dir(in.ray_dir, seat.seat, cond));
    if (in.ray_active && !(geo::is_finite(dir) && geo::norm(dir) > 0.0)) {
      throw SessionError(ErrorCode::InvalidPose, "active ray needs a direction");
    }
    out.ray_active = in.ray_active;
    out.ray_dir = geo::is_finite(dir) ? quantize(dir) : geo::Vec3{0.0, 0.0, -1.0};
    out.grabbed_piece = current.hand(h).grabbed_piece;
    if (cond == Condition::Sparc) {
      if (auto ref = distortion_reference(out, frame, state_.config.grid, state_.config.pieces, state_.pieces)) {
        dist.hand(h) = {true, quantize(*ref)};
      }
    }
  }

  const DistortionState before = state_.distortion.at(client);
  emit(EventKind::Pose, ObjectBuilder()
                            .add("client", client)
                            .add("tick", tick)
                            .add("head", pose_json(canonical.head))
                            .add("left", hand_json(canonical.left))
                            .add("right", hand_json(canonical.right))
                            .add("dist", ObjectBuilder()
                                             .add("left", distortion_json(dist.left))
                                             .add("right", distortion_json(dist.right))
                                             .build())
                            .build());
  for (Handedness h : {Handedness::Left, Handedness::Right}) {
    const bool was = before.hand(h).active;
    const bool now = dist.hand(h).active;
    if (!was && now) {
      emit(EventKind::TriggerOn, ObjectBuilder()
                                     .add("client", client)
                                     .add("hand", to_string(h))
                                     .add("ref", to_json(dist.hand(h).reference_point))
                                     .build());
    } else if (was && !now) {
      emit(EventKind::TriggerOff, ObjectBuilder().add("client", client).add("hand", to_string(h)).build());
    }
  }
}

void Session::grab(const ClientId& client, const std::string& piece_id, Handedness hand) {
  const SeatAssignment& seat = require_seat(client);
  if (state_.phase != Phase::Running) throw SessionError(ErrorCode::NotRunning, "session is not running");
  if (!seat.role.is_assembler()) throw SessionError(ErrorCode::NotAssembler, "only the assembler manipulates pieces");
  const PieceState* piece = state_.piece(piece_id);
  if (!piece) throw SessionError(ErrorCode::UnknownPiece, "no piece '" + piece_id + "'");
  if (piece->status == PieceStatus::Placed) throw SessionError(ErrorCode::PieceLocked, "piece is already placed");
  if (piece->status == PieceStatus::Held) throw SessionError(ErrorCode::PieceHeld, "piece is already held");
  for (const auto& p : state_.pieces) {
    if (p.status == PieceStatus::Held && p.holder == client) {
      throw SessionError(ErrorCode::AlreadyHolding, "release '" + p.id + "' first");
    }
  }
  emit(EventKind::Grab,
       ObjectBuilder().add("client", client).add("piece", piece_id).add("hand", to_string(hand)).build());
}

puzzle::ReleaseOutcome Session::release(const ClientId& client, const geo::Pose& displayed) {
  const SeatAssignment& seat = require_seat(client);
  if (state_.phase != Phase::Running) throw SessionError(ErrorCode::NotRunning, "session is not running");
  const PieceState* held = nullptr;
  for (const auto& p : state_.pieces) {
    if (p.status == PieceStatus::Held && p.holder == client) held = &p;
  }
  if (!held) throw SessionError(ErrorCode::NotHolding, "client holds no piece");
  if (!geo::is_finite(displayed.p)) throw SessionError(ErrorCode::InvalidPose, "release pose is not finite");

  const Condition cond = state_.config.condition;
  const geo::Pose canonical{geo::to_canonical(displayed.p, seat.seat, cond, state_.config.frame),
                            geo::to_canonical(geo::normalized(displayed.q), seat.seat, cond)};
  const puzzle::PieceShape& shape = state_.config.pieces.shape(held->id);
  const puzzle::SnappedPose snapped = puzzle::snap_pose(shape, canonical, state_.config.grid);
  const puzzle::Placement* target = state_.target();
  const puzzle::ReleaseOutcome outcome =
      target ? puzzle::classify_release(snapped, state_.grid, *target, state_.config.pieces)
             : (snapped.in_cube ? puzzle::ReleaseOutcome::WrongInCube : puzzle::ReleaseOutcome::OutsideCube);

  geo::Pose rest = snapped.pose;
  if (outcome == puzzle::ReleaseOutcome::WrongInCube) {
    const puzzle::TablePose& home = state_.config.pieces.table_home.at(held->id);
    rest = {home.position, puzzle::Orientation(home.orientation).as_quat()};
  }
  const std::string piece_id = held->id;
  emit(EventKind::Release, ObjectBuilder()
                               .add("client", client)
                               .add("piece", piece_id)
                               .add("outcome", puzzle::to_string(outcome))
                               .add("placement", placement_json(snapped.placement))
                               .add("pose", pose_json(quantize(rest)))
                               .build());
  if (state_.cursor == static_cast<int>(state_.config.solution.placements.size())) {
    emit(EventKind::Finish, ObjectBuilder().add("end_ms", state_.clock_ms).build());
  }
  return outcome;
}

void Session::sample_eye_contact(std::int64_t dt_ms) {
  if (state_.phase != Phase::Running || dt_ms <= 0) return;
  json::Array pairs;
  for (const auto& [a, av] : state_.avatars) {
    const geo::Vec3 forward = geo::rotate(av.head.q, geo::kForward);
    if (!(geo::norm(forward) > 0.0)) continue;
    const geo::Ray gaze = geo::Ray::along(av.head.p, forward);
    for (const auto& [b, bv] : state_.avatars) {
      if (a == b) continue;
      if (geo::ray_sphere(gaze, bv.head.p, kHeadRadius)) pairs.push_back(Value(json::Array{Value(a), Value(b)}));
    }
  }
  if (pairs.empty()) return;
  emit(EventKind::EyeContactSample, ObjectBuilder().add("dt", dt_ms).add("pairs", Value(std::move(pairs))).build());
}

std::vector<AvatarView> Session::avatar_views() const {
  std::vector<AvatarView> out;
  for (const auto& [i, a] : state_.seats) {
    out.push_back({a.client, a.seat, a.role, state_.avatars.at(a.client), state_.distortion.at(a.client)});
  }
  return out;
}

RenderModel Session::render_model_for(const ClientId& lu) const {
  const SeatAssignment& seat = require_seat(lu);
  return render_model(avatar_views(), lu, seat.seat, state_.config.condition, state_.config.frame);
}

void Session::apply(const EventRecord& record) {
  state_.clock_ms = record.clock_ms;
  state_.tick = record.tick;
  Fields f(record.payload);
  auto client_of = [&]() -> ClientId {
    ClientId c = f.req("client").as_string();
    if (!state_.seat_of(c)) throw SessionError(ErrorCode::BadLog, "record names unseated client '" + c + "'");
    return c;
  };
  auto hand_of = [&]() {
    const Value& v = f.req("hand");
    try {
      return parse_hand(v.as_string());
    } catch (const std::invalid_argument& e) {
      throw json::DecodeError(v.offset(), e.what());
    }
  };

  switch (record.kind) {
    case EventKind::Open:
      throw SessionError(ErrorCode::BadLog, "open record can only come first");

    case EventKind::Join: {
      const ClientId client = f.req("client").as_string();
      const geo::SeatIndex seat(static_cast<int>(f.req("seat").as_int()));
      const Value& rv = f.req("role");
      Role role;
      try {
        role = Role::parse(rv.as_string());
      } catch (const std::invalid_argument& e) {
        throw json::DecodeError(rv.offset(), e.what());
      }
      state_.seats[seat.value()] = {client, seat, role, state_.config.condition, geo::seat_angle(seat).angle_deg()};
      AvatarState avatar;
      avatar.head = seat_head_pose(seat, state_.config.frame);
      for (Handedness h : {Handedness::Left, Handedness::Right}) {
        const geo::Vec3 rest = rest_hand_position(seat, h, state_.config.frame);
        avatar.hand(h).pose = quantize(geo::Pose{
            geo::to_canonical(rest, seat, state_.config.condition, state_.config.frame),
            geo::to_canonical(avatar.head.q, seat, state_.config.condition)});
      }
      state_.avatars[client] = avatar;
      state_.distortion[client] = {};
      break;
    }

    case EventKind::Start:
      state_.start_ms = f.req("start_ms").as_int();
      state_.phase = Phase::Running;
      break;

    case EventKind::Pose: {
      const ClientId client = client_of();
      AvatarState& avatar = state_.avatars[client];
      avatar.last_update_tick = f.req("tick").as_int();
      avatar.head = pose_from(f.req("head"));
      avatar.left = hand_from(f.req("left"));
      avatar.right = hand_from(f.req("right"));
      Fields df(f.req("dist"));
      DistortionState& d = state_.distortion[client];
      d.left = distortion_from(df.req("left"));
      d.right = distortion_from(df.req("right"));
      df.done();
      break;
    }

    case EventKind::TriggerOn: {
      const ClientId client = client_of();
      const Handedness h = hand_of();
      state_.distortion[client].hand(h) = {true, vec3_from_json(f.req("ref"))};
      break;
    }

    case EventKind::TriggerOff: {
      const ClientId client = client_of();
      const Handedness h = hand_of();
      state_.distortion[client].hand(h) = {};
      break;
    }

    case EventKind::Grab: {
      const ClientId client = client_of();
      const std::string id = f.req("piece").as_string();
      const Handedness h = hand_of();
      PieceState* piece = state_.piece(id);
      if (!piece) throw SessionError(ErrorCode::BadLog, "grab of unknown piece '" + id + "'");
      piece->status = PieceStatus::Held;
      piece->holder = client;
      state_.avatars[client].hand(h).grabbed_piece = id;
      break;
    }

    case EventKind::Release: {
      const ClientId client = client_of();
      const std::string id = f.req("piece").as_string();
      const Value& ov = f.req("outcome");
      const std::string& outcome = ov.as_string();
      const puzzle::Placement placement = placement_from(f.req("placement"));
      const geo::Pose pose = pose_from(f.req("pose"));
      PieceState* piece = state_.piece(id);
      if (!piece) throw SessionError(ErrorCode::BadLog, "release of unknown piece '" + id + "'");
      piece->holder.clear();
      piece->pose = pose;
      piece->status = PieceStatus::Table;
      for (Handedness h : {Handedness::Left, Handedness::Right}) {
        auto& g = state_.avatars[client].hand(h).grabbed_piece;
        if (g == id) g.reset();
      }
      if (outcome == puzzle::to_string(puzzle::ReleaseOutcome::Correct)) {
        state_.grid.place(id, placement.cells(state_.config.pieces.shape(id)));
        piece->status = PieceStatus::Placed;
        ++state_.cursor;
      } else if (outcome == puzzle::to_string(puzzle::ReleaseOutcome::WrongInCube)) {
        ++state_.errors_per_piece[id];
      } else if (outcome == puzzle::to_string(puzzle::ReleaseOutcome::OutsideCube)) {
        ++state_.attempts;
      } else {
        throw json::DecodeError(ov.offset(), "unknown release outcome '" + outcome + "'");
      }
      break;
    }

    case EventKind::EyeContactSample: {
      const std::int64_t dt = f.req("dt").as_int();
      for (const Value& pair : f.req("pairs").as_array()) {
        const json::Array& ab = fixed_array(pair, 2);
        state_.eye_contact_ms[{ab[0].as_string(), ab[1].as_string()}] += dt;
      }
      break;
    }

    case EventKind::Finish:
      state_.end_ms = f.req("end_ms").as_int();
      state_.phase = Phase::Finished;
      break;
  }
  f.done();
}

}  // namespace sparc::session
