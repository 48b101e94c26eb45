#include "sparc/wire.hpp"

#include <charconv>

namespace sparc::wire {

using json::Fields;
using json::ObjectBuilder;
using json::Value;
using session::quat_from_json;
using session::to_json;
using session::vec3_from_json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

template <class F>
auto rethrow_at(const Value& v, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw DecodeError(v.offset(), e.what());
  } catch (const std::out_of_range& e) {
    throw DecodeError(v.offset(), e.what());
  }
}

session::Role role_from(const Value& v) {
  return rethrow_at(v, [&] { return session::Role::parse(v.as_string()); });
}

Handedness hand_from(const Value& v) {
  return rethrow_at(v, [&] { return session::parse_hand(v.as_string()); });
}

int seat_from(const Value& v) {
  const std::int64_t s = v.as_int();
  if (s < 0 || s >= geo::kSeatCount) throw DecodeError(v.offset(), "seat must be 0..7");
  return static_cast<int>(s);
}

Value hand_json(const session::HandState& h, const session::HandDistortion* d) {
  ObjectBuilder b;
  b.add("p", to_json(h.pose.p))
      .add("q", to_json(h.pose.q))
      .add("ray", h.ray_active)
      .add("rayDir", to_json(h.ray_dir))
      .add("grab", h.grabbed_piece ? Value(*h.grabbed_piece) : Value(nullptr));
  if (d) {
    b.add("active", d->active);
    if (d->active) b.add("ref", to_json(d->reference_point));
  }
  return b.build();
}

session::HandState hand_state_from(Fields& f) {
  session::HandState h;
  h.pose = {vec3_from_json(f.req("p")), quat_from_json(f.req("q"))};
  h.ray_active = f.req("ray").as_bool();
  h.ray_dir = vec3_from_json(f.req("rayDir"));
  const Value& g = f.req("grab");
  if (!g.is_null()) h.grabbed_piece = g.as_string();
  return h;
}

session::HandState plain_hand_from(const Value& v) {
  Fields f(v);
  session::HandState h = hand_state_from(f);
  f.done();
  return h;
}

std::pair<session::HandState, session::HandDistortion> snapshot_hand_from(const Value& v) {
  Fields f(v);
  session::HandState h = hand_state_from(f);
  session::HandDistortion d;
  d.active = f.req("active").as_bool();
  if (d.active) d.reference_point = vec3_from_json(f.req("ref"));
  f.done();
  return {h, d};
}

Value cell_json(const puzzle::Cell& c) { return Value(json::Array{Value(c.x), Value(c.y), Value(c.z)}); }

puzzle::Cell cell_from(const Value& v) {
  const json::Array& a = v.as_array();
  if (a.size() != 3) throw DecodeError(v.offset(), "expected 3 integers");
  return {static_cast<int>(a[0].as_int()), static_cast<int>(a[1].as_int()), static_cast<int>(a[2].as_int())};
}

Value piece_json(const session::PieceState& p) {
  return ObjectBuilder()
      .add("id", p.id)
      .add("status", session::to_string(p.status))
      .add("p", to_json(p.pose.p))
      .add("q", to_json(p.pose.q))
      .add("holder", p.holder.empty() ? Value(nullptr) : Value(p.holder))
      .build();
}

session::PieceState piece_from(const Value& v) {
  Fields f(v);
  session::PieceState p;
  p.id = f.req("id").as_string();
  const Value& status = f.req("status");
  p.status = rethrow_at(status, [&] { return session::parse_piece_status(status.as_string()); });
  p.pose = {vec3_from_json(f.req("p")), quat_from_json(f.req("q"))};
  const Value& holder = f.req("holder");
  if (!holder.is_null()) p.holder = holder.as_string();
  f.done();
  return p;
}

Value avatar_json(const SnapshotAvatar& a) {
  return ObjectBuilder()
      .add("client", a.client)
      .add("seat", a.seat)
      .add("role", a.role.to_string())
      .add("tick", a.tick)
      .add("head", session::pose_to_json(a.head))
      .add("left", hand_json(a.left, &a.distortion.left))
      .add("right", hand_json(a.right, &a.distortion.right))
      .build();
}

SnapshotAvatar avatar_from(const Value& v) {
  Fields f(v);
  SnapshotAvatar a;
  a.client = f.req("client").as_string();
  a.seat = seat_from(f.req("seat"));
  a.role = role_from(f.req("role"));
  a.tick = f.req("tick").as_int();
  a.head = session::pose_from_json(f.req("head"));
  std::tie(a.left, a.distortion.left) = snapshot_hand_from(f.req("left"));
  std::tie(a.right, a.distortion.right) = snapshot_hand_from(f.req("right"));
  f.done();
  return a;
}

Value target_json(const Target& t) {
  json::Array cells;
  for (const auto& c : t.cells) cells.push_back(cell_json(c));
  return ObjectBuilder()
      .add("piece", t.placement.piece_id)
      .add("orient", t.placement.orientation.index())
      .add("offset", cell_json(t.placement.offset))
      .add("cells", Value(std::move(cells)))
      .build();
}

Target target_from(const Value& v) {
  Fields f(v);
  Target t;
  t.placement.piece_id = f.req("piece").as_string();
  const Value& o = f.req("orient");
  const std::int64_t orient = o.as_int();
  if (orient < 0 || orient >= puzzle::kOrientationCount) throw DecodeError(o.offset(), "orientation must be 0..23");
  t.placement.orientation = puzzle::Orientation(static_cast<int>(orient));
  t.placement.offset = cell_from(f.req("offset"));
  std::vector<puzzle::Cell> cells;
  for (const Value& c : f.req("cells").as_array()) cells.push_back(cell_from(c));
  t.cells = puzzle::make_cell_set(std::move(cells));
  f.done();
  return t;
}

Value event_json(const session::EventRecord& r) {
  return ObjectBuilder()
      .add("tick", r.tick)
      .add("clock_ms", r.clock_ms)
      .add("kind", session::to_string(r.kind))
      .add("payload", r.payload)
      .build();
}

session::EventRecord event_from(const Value& v) {
  Fields f(v);
  session::EventRecord r;
  r.tick = f.req("tick").as_int();
  r.clock_ms = f.req("clock_ms").as_int();
  const Value& kind = f.req("kind");
  r.kind = rethrow_at(kind, [&] { return session::parse_event_kind(kind.as_string()); });
  const Value& payload = f.req("payload");
  payload.as_object();
  r.payload = payload;
  f.done();
  return r;
}

std::uint64_t u64_from(const Value& v) {
  const std::string& s = v.as_string();
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || (s.size() > 1 && s[0] == '0')) {
    throw DecodeError(v.offset(), "expected an unsigned decimal string");
  }
  return out;
}

Body body_from(const Value& t, const Value& v) {
  const std::string& type = t.as_string();
  Fields f(v);
  Body body;
  if (type == "hello") {
    Hello h;
    h.name = f.req("name").as_string();
    h.seat = seat_from(f.req("seat"));
    h.role = role_from(f.req("role"));
    body = h;
  } else if (type == "welcome") {
    Welcome w;
    w.seat = seat_from(f.req("seat"));
    w.role = role_from(f.req("role"));
    const Value& c = f.req("condition");
    w.condition = rethrow_at(c, [&] { return session::parse_condition(c.as_string()); });
    w.angle_deg = f.req("angle_deg").as_number();
    w.piece_set = f.req("piece_set").as_string();
    Fields tf(f.req("table"));
    const Value& frame = tf.req("frame");
    w.table = session::frame_from_json(frame);
    w.grid = session::grid_from_json(tf.req("grid"));
    tf.done();
    body = w;
  } else if (type == "start") {
    body = Start{};
  } else if (type == "pose") {
    PoseMsg p;
    p.head = session::pose_from_json(f.req("head"));
    p.left = plain_hand_from(f.req("left"));
    p.right = plain_hand_from(f.req("right"));
    p.tick = f.req("tick").as_int();
    body = p;
  } else if (type == "grab") {
    Grab g;
    g.piece = f.req("piece").as_string();
    g.hand = hand_from(f.req("hand"));
    body = g;
  } else if (type == "release") {
    body = Release{{vec3_from_json(f.req("p")), quat_from_json(f.req("q"))}};
  } else if (type == "snapshot") {
    Snapshot s;
    s.clock_ms = f.req("clock_ms").as_int();
    const Value& phase = f.req("phase");
    const std::string& ph = phase.as_string();
    if (ph == "lobby") {
      s.phase = session::Phase::Lobby;
    } else if (ph == "running") {
      s.phase = session::Phase::Running;
    } else if (ph == "finished") {
      s.phase = session::Phase::Finished;
    } else {
      throw DecodeError(phase.offset(), "unknown phase '" + ph + "'");
    }
    for (const Value& p : f.req("pieces").as_array()) s.pieces.push_back(piece_from(p));
    for (const Value& a : f.req("avatars").as_array()) s.avatars.push_back(avatar_from(a));
    if (const Value* t = f.opt("target")) s.target = target_from(*t);
    body = std::move(s);
  } else if (type == "event") {
    body = Event{event_from(v)};
    return body;
  } else if (type == "error") {
    Error e;
    e.code = f.req("code").as_string();
    e.msg = f.req("msg").as_string();
    body = e;
  } else if (type == "bye") {
    body = Bye{};
  } else if (type == "report") {
    Report r;
    r.metrics = session::MetricsReport::from_json(f.req("metrics"));
    r.log = f.req("log").as_string();
    r.seed = u64_from(f.req("seed"));
    const Value& c = f.req("condition");
    r.condition = rethrow_at(c, [&] { return session::parse_condition(c.as_string()); });
    body = r;
  } else {
    throw DecodeError(t.offset(), "unknown message type '" + type + "'");
  }
  f.done();
  return body;
}

}  // namespace

std::string_view type_of(const Body& body) {
  return std::visit(overloaded{
                        [](const Hello&) { return "hello"; },
                        [](const Welcome&) { return "welcome"; },
                        [](const Start&) { return "start"; },
                        [](const PoseMsg&) { return "pose"; },
                        [](const Grab&) { return "grab"; },
                        [](const Release&) { return "release"; },
                        [](const Snapshot&) { return "snapshot"; },
                        [](const Event&) { return "event"; },
                        [](const Error&) { return "error"; },
                        [](const Bye&) { return "bye"; },
                        [](const Report&) { return "report"; },
                    },
                    body);
}

Value body_to_json(const Body& body) {
  return std::visit(
      overloaded{
          [](const Hello& h) {
            return ObjectBuilder().add("name", h.name).add("seat", h.seat).add("role", h.role.to_string()).build();
          },
          [](const Welcome& w) {
            return ObjectBuilder()
                .add("seat", w.seat)
                .add("role", w.role.to_string())
                .add("condition", session::to_string(w.condition))
                .add("angle_deg", w.angle_deg)
                .add("piece_set", w.piece_set)
                .add("table", ObjectBuilder()
                                  .add("frame", session::frame_to_json(w.table))
                                  .add("grid", session::grid_to_json(w.grid))
                                  .build())
                .build();
          },
          [](const Start&) { return Value(json::Object{}); },
          [](const PoseMsg& p) {
            return ObjectBuilder()
                .add("head", session::pose_to_json(p.head))
                .add("left", hand_json(p.left, nullptr))
                .add("right", hand_json(p.right, nullptr))
                .add("tick", p.tick)
                .build();
          },
          [](const Grab& g) { return ObjectBuilder().add("piece", g.piece).add("hand", session::to_string(g.hand)).build(); },
          [](const Release& r) { return ObjectBuilder().add("p", to_json(r.pose.p)).add("q", to_json(r.pose.q)).build(); },
          [](const Snapshot& s) {
            json::Array pieces;
            for (const auto& p : s.pieces) pieces.push_back(piece_json(p));
            json::Array avatars;
            for (const auto& a : s.avatars) avatars.push_back(avatar_json(a));
            ObjectBuilder b;
            b.add("clock_ms", s.clock_ms)
                .add("phase", session::to_string(s.phase))
                .add("pieces", Value(std::move(pieces)))
                .add("avatars", Value(std::move(avatars)));
            if (s.target) b.add("target", target_json(*s.target));
            return b.build();
          },
          [](const Event& e) { return event_json(e.record); },
          [](const Error& e) { return ObjectBuilder().add("code", e.code).add("msg", e.msg).build(); },
          [](const Bye&) { return Value(json::Object{}); },
          [](const Report& r) {
            return ObjectBuilder()
                .add("metrics", r.metrics.to_json())
                .add("log", r.log)
                .add("seed", std::to_string(r.seed))
                .add("condition", session::to_string(r.condition))
                .build();
          },
      },
      body);
}

std::string encode(const Envelope& e) {
  return json::dump(ObjectBuilder()
                        .add("t", type_of(e.body))
                        .add("seq", e.seq)
                        .add("ts", e.ts)
                        .add("body", body_to_json(e.body))
                        .build());
}

Envelope decode(std::string_view text) {
  const Value doc = json::parse(text);
  Fields f(doc);
  const Value& t = f.req("t");
  Envelope e;
  e.seq = f.req("seq").as_int();
  e.ts = f.req("ts").as_int();
  const Value& body = f.req("body");
  body.as_object();
  e.body = body_from(t, body);
  f.done();
  return e;
}

session::AvatarState avatar_of(const PoseMsg& pose) {
  session::AvatarState a;
  a.head = pose.head;
  a.left = pose.left;
  a.right = pose.right;
  a.last_update_tick = pose.tick;
  return a;
}

PoseMsg pose_msg(const session::AvatarState& avatar, std::int64_t tick) {
  return {avatar.head, avatar.left, avatar.right, tick};
}

std::string puzzle_state_text(const Snapshot& s) {
  json::Array pieces;
  for (const auto& p : s.pieces) pieces.push_back(piece_json(p));
  return json::dump(
      ObjectBuilder().add("phase", session::to_string(s.phase)).add("pieces", Value(std::move(pieces))).build());
}

std::vector<session::AvatarView> avatar_views(const Snapshot& s) {
  std::vector<session::AvatarView> out;
  for (const auto& a : s.avatars) {
    session::AvatarState state;
    state.head = a.head;
    state.left = a.left;
    state.right = a.right;
    state.last_update_tick = a.tick;
    out.push_back({a.client, geo::SeatIndex(a.seat), a.role, state, a.distortion});
  }
  return out;
}

std::string log_line(const session::EventRecord& record, std::int64_t index) {
  return encode({index, record.clock_ms, Event{record}});
}

}  // namespace sparc::wire
