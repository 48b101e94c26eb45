#include "sparc/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sparc::net {

void TransportConfig::validate() const {
  if (latency_ms < 0) throw std::invalid_argument("latency must be >= 0");
  if (jitter_ms < 0) throw std::invalid_argument("jitter must be >= 0");
  if (!(drop_rate >= 0.0 && drop_rate <= 1.0)) throw std::invalid_argument("drop rate must be in [0, 1]");
}

SimNetwork::SimNetwork(TransportConfig config) : config_(config), rng_(config.seed) { config_.validate(); }

void SimNetwork::send(std::int64_t now_ms, int from, int to, std::string text, Lane lane) {
  const std::uint64_t span = static_cast<std::uint64_t>(config_.jitter_ms) + 1;
  const auto jitter = static_cast<std::int64_t>(rng_() % span);
  const std::uint64_t index = next_index_++;
  if (lane == Lane::Unreliable) {
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    if (u < config_.drop_rate) {
      ++dropped_;
      return;
    }
  }
  std::int64_t deliver = now_ms + config_.latency_ms + jitter;
  if (lane == Lane::Reliable) {
    std::int64_t& last = last_reliable_[{from, to}];
    deliver = std::max(deliver, last);
    last = deliver;
  }
  pending_.emplace(std::pair{deliver, index}, SimMessage{now_ms, deliver, index, from, to, lane, std::move(text)});
}

std::vector<SimMessage> SimNetwork::deliver_due(std::int64_t now_ms) {
  std::vector<SimMessage> out;
  while (!pending_.empty() && pending_.begin()->first.first <= now_ms) {
    out.push_back(std::move(pending_.begin()->second));
    pending_.erase(pending_.begin());
  }
  return out;
}

std::optional<std::int64_t> SimNetwork::next_delivery() const {
  if (pending_.empty()) return std::nullopt;
  return pending_.begin()->first.first;
}

bool SimNetwork::idle_toward(int to) const {
  return std::none_of(pending_.begin(), pending_.end(), [&](const auto& kv) { return kv.second.to == to; });
}

// ---------------------------------------------------------------------------
// Script parsing

ScriptError::ScriptError(int line, const std::string& reason, const std::string& source)
    : std::runtime_error((source.empty() ? "" : source + ":") + "line " + std::to_string(line) + ": " + reason),
      line_(line),
      reason_(reason) {}

namespace {

class Tokens {
 public:
  Tokens(std::vector<std::string> words, int line) : words_(std::move(words)), line_(line) {}

  bool empty() const { return pos_ >= words_.size(); }
  const std::string& peek() const {
    if (empty()) throw ScriptError(line_, "unexpected end of line");
    return words_[pos_];
  }
  std::string word() {
    const std::string& w = peek();
    ++pos_;
    return w;
  }
  double number() {
    const std::string w = word();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || ptr != w.data() + w.size() || !std::isfinite(v)) {
      throw ScriptError(line_, "expected a number, got '" + w + "'");
    }
    return v;
  }
  std::int64_t integer() {
    const std::string w = word();
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || ptr != w.data() + w.size()) {
      throw ScriptError(line_, "expected an integer, got '" + w + "'");
    }
    return v;
  }
  Handedness hand() {
    const std::string w = word();
    if (w == "left") return Handedness::Left;
    if (w == "right") return Handedness::Right;
    throw ScriptError(line_, "expected left or right, got '" + w + "'");
  }
  geo::Vec3 vec3() {
    const double x = number();
    const double y = number();
    const double z = number();
    return {x, y, z};
  }
  void end() const {
    if (!empty()) throw ScriptError(line_, "unexpected '" + words_[pos_] + "'");
  }
  int line() const { return line_; }

 private:
  std::vector<std::string> words_;
  std::size_t pos_ = 0;
  int line_;
};

std::vector<std::string> split(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

int seat_arg(Tokens& t) {
  const std::int64_t s = t.integer();
  if (s < 0 || s >= geo::kSeatCount) throw ScriptError(t.line(), "seat must be 0..7");
  return static_cast<int>(s);
}

// Shared by point and ray: coordinates or "piece <id>".
void parse_target(Tokens& t, BotAction& a) {
  if (t.peek() == "piece") {
    t.word();
    a.piece = t.word();
  } else {
    a.point = t.vec3();
  }
}

BotAction parse_action(Tokens& t) {
  BotAction a;
  a.line = t.line();
  const std::string verb = t.word();
  if (verb == "start") {
    a.kind = ActionKind::Start;
  } else if (verb == "bye") {
    a.kind = ActionKind::Bye;
  } else if (verb == "idle") {
    a.kind = ActionKind::Idle;
  } else if (verb == "point") {
    a.kind = ActionKind::Point;
    a.hand = t.hand();
    parse_target(t, a);
  } else if (verb == "ray") {
    a.kind = ActionKind::Ray;
    a.hand = t.hand();
    if (t.peek() == "off") {
      t.word();
      a.kind = ActionKind::RayOff;
    } else {
      parse_target(t, a);
    }
  } else if (verb == "rest") {
    a.kind = ActionKind::Rest;
    a.hand = t.hand();
  } else if (verb == "gaze") {
    a.kind = ActionKind::Gaze;
    if (t.peek() == "seat") {
      t.word();
      a.seat = seat_arg(t);
    } else {
      a.point = t.vec3();
    }
  } else if (verb == "grab") {
    a.kind = ActionKind::Grab;
    a.hand = t.hand();
    a.piece = t.word();
  } else if (verb == "release") {
    a.kind = ActionKind::Release;
    const std::int64_t o = t.integer();
    if (o < 0 || o >= puzzle::kOrientationCount) throw ScriptError(t.line(), "orientation must be 0..23");
    a.orientation = static_cast<int>(o);
    const std::int64_t x = t.integer();
    const std::int64_t y = t.integer();
    const std::int64_t z = t.integer();
    a.offset = {static_cast<int>(x), static_cast<int>(y), static_cast<int>(z)};
  } else if (verb == "rotate") {
    a.kind = ActionKind::Rotate;
    a.hand = t.hand();
    const double x = t.number();
    const double y = t.number();
    const double z = t.number();
    const double w = t.number();
    if (x == 0.0 && y == 0.0 && z == 0.0 && w == 0.0) throw ScriptError(t.line(), "zero quaternion");
    a.rotation = geo::normalized(geo::Quat{x, y, z, w});
  } else {
    throw ScriptError(t.line(), "unknown action '" + verb + "'");
  }
  t.end();
  return a;
}

}  // namespace

BotScript parse_bot_script(std::string_view text) {
  BotScript script;
  bool header = false;
  std::int64_t last_ms = 0;
  std::istringstream in{std::string(text)};
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::vector<std::string> words = split(line);
    if (words.empty()) continue;
    Tokens t(std::move(words), line_no);
    const std::string head = t.word();
    if (!header) {
      if (head != "bot") throw ScriptError(line_no, "script must start with 'bot <name> <seat> <role>'");
      script.name = t.word();
      script.seat = seat_arg(t);
      const std::string role = t.word();
      try {
        script.role = session::Role::parse(role);
      } catch (const std::invalid_argument& e) {
        throw ScriptError(line_no, e.what());
      }
      t.end();
      header = true;
      continue;
    }
    if (head != "at") throw ScriptError(line_no, "expected 'at <ms> <action>'");
    const std::int64_t ms = t.integer();
    if (ms < 0) throw ScriptError(line_no, "time must be >= 0");
    if (ms < last_ms) throw ScriptError(line_no, "time goes backwards");
    last_ms = ms;
    BotAction a = parse_action(t);
    a.at_ms = ms;
    script.actions.push_back(std::move(a));
  }
  if (!header) throw ScriptError(line_no, "missing 'bot' header");
  return script;
}

BotScript load_bot_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read bot script '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_bot_script(text.str());
  } catch (const ScriptError& e) {
    throw ScriptError(e.line(), e.reason(), path);
  }
}

std::vector<BotScript> load_bot_scripts(const std::string& dir) {
  std::vector<std::string> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".bot") paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw std::runtime_error("no .bot scripts in '" + dir + "'");
  std::vector<BotScript> out;
  for (const auto& p : paths) out.push_back(load_bot_script(p));
  return out;
}

// ---------------------------------------------------------------------------
// Bot client

namespace {

geo::Quat look_rotation(geo::Vec3 dir) {
  const geo::Vec3 d = geo::normalized(dir);
  const double yaw = std::atan2(-d.x, -d.z);
  const double pitch = std::asin(std::clamp(d.y, -1.0, 1.0));
  return geo::quat_from_axis_angle(geo::kUp, yaw) * geo::quat_from_axis_angle(geo::kRight, pitch);
}

}  // namespace

BotClient::BotClient(BotScript script) : script_(std::move(script)) {}

Outgoing BotClient::emit(wire::Body body, std::int64_t now) {
  const Lane lane = lane_of(body);
  return {wire::encode({seq_++, now, std::move(body)}), lane};
}

void BotClient::receive(std::string_view text) {
  wire::Envelope env;
  try {
    env = wire::decode(text);
  } catch (const wire::DecodeError& e) {
    errors_.push_back({"DecodeError", e.what()});
    return;
  }
  if (auto* w = std::get_if<wire::Welcome>(&env.body)) {
    const geo::SeatIndex seat(w->seat);
    welcome_ = *w;
    pieces_ = puzzle::load_piece_set(w->piece_set, w->grid);
    head_ = session::seat_head_pose(seat, w->table);
    const geo::Quat hand_q = geo::to_canonical(head_.q, seat, w->condition);
    for (Handedness h : {Handedness::Left, Handedness::Right}) {
      HandMotion& m = h == Handedness::Left ? left_ : right_;
      const geo::Vec3 rest =
          geo::to_canonical(session::rest_hand_position(seat, h, w->table), seat, w->condition, w->table);
      m = {rest, rest, 0, hand_q, false, std::nullopt};
    }
  } else if (auto* s = std::get_if<wire::Snapshot>(&env.body)) {
    snapshot_ = std::move(*s);
  } else if (auto* e = std::get_if<wire::Error>(&env.body)) {
    errors_.push_back(*e);
    if (!welcome_ && !finished_) {
      abort_reason_ = "join rejected: " + e->code + ": " + e->msg;
      finished_ = true;
    }
  } else if (auto* ev = std::get_if<wire::Event>(&env.body)) {
    events_.push_back(ev->record);
  }
}

geo::Vec3 BotClient::hand_position(Handedness h, std::int64_t now) const {
  const HandMotion& m = h == Handedness::Left ? left_ : right_;
  const double u = std::clamp(static_cast<double>(now - m.start_ms) / static_cast<double>(kHandMoveMs), 0.0, 1.0);
  if (u >= 1.0) return m.to;
  return m.from + u * (m.to - m.from);
}

void BotClient::move_hand(Handedness h, geo::Vec3 target, std::int64_t now) {
  HandMotion& m = h == Handedness::Left ? left_ : right_;
  m.from = hand_position(h, now);
  m.to = target;
  m.start_ms = now;
}

std::optional<geo::Vec3> BotClient::piece_position(const std::string& id) const {
  const puzzle::PieceShape* shape = pieces_ ? pieces_->find(id) : nullptr;
  if (!shape) return std::nullopt;
  geo::Pose pose;
  bool found = false;
  if (snapshot_) {
    for (const auto& p : snapshot_->pieces) {
      if (p.id == id) {
        pose = p.pose;
        found = true;
      }
    }
  }
  if (!found) {
    const puzzle::TablePose& home = pieces_->table_home.at(id);
    pose = {home.position, puzzle::Orientation(home.orientation).as_quat()};
  }
  const puzzle::Placement at = puzzle::placement_at(*shape, pose, welcome_->grid);
  return welcome_->grid.cell_center(at.cells(*shape).front());
}

wire::PoseMsg BotClient::pose_at(std::int64_t now) {
  const geo::SeatIndex seat(welcome_->seat);
  const Condition cond = welcome_->condition;
  const geo::TableFrame& frame = welcome_->table;
  wire::PoseMsg msg;
  msg.head = head_;
  msg.tick = pose_tick_++;
  for (Handedness h : {Handedness::Left, Handedness::Right}) {
    const HandMotion& m = h == Handedness::Left ? left_ : right_;
    session::HandState& out = h == Handedness::Left ? msg.left : msg.right;
    const geo::Vec3 p = hand_position(h, now);
    out.pose = session::quantize(
        geo::Pose{geo::from_canonical(p, seat, cond, frame), geo::from_canonical(m.q, seat, cond)});
    out.ray_active = m.ray;
    geo::Vec3 dir{0.0, 0.0, -1.0};
    if (m.ray && m.ray_target && geo::norm(*m.ray_target - p) > 0.0) dir = geo::normalized(*m.ray_target - p);
    out.ray_dir = session::quantize(geo::from_canonical_dir(dir, seat, cond));
    if (holding_ && holding_hand_ == h) out.grabbed_piece = holding_;
  }
  return msg;
}

void BotClient::abort(const BotAction& a, const std::string& why, std::int64_t now, std::vector<Outgoing>& out) {
  abort_reason_ = "line " + std::to_string(a.line) + ": " + why;
  out.push_back(emit(wire::Error{"ScriptError", abort_reason_}, now));
  out.push_back(emit(wire::Bye{}, now));
  finished_ = true;
}

void BotClient::run(const BotAction& a, std::int64_t now, std::vector<Outgoing>& out) {
  const geo::SeatIndex seat(welcome_->seat);
  const geo::TableFrame& frame = welcome_->table;
  HandMotion& m = a.hand == Handedness::Left ? left_ : right_;

  std::optional<geo::Vec3> target = a.point;
  if (a.piece && a.kind != ActionKind::Grab) {
    target = piece_position(*a.piece);
    if (!target) return abort(a, "unknown piece '" + *a.piece + "'", now, out);
  }

  switch (a.kind) {
    case ActionKind::Start:
      out.push_back(emit(wire::Start{}, now));
      break;
    case ActionKind::Bye:
      out.push_back(emit(wire::Bye{}, now));
      finished_ = true;
      break;
    case ActionKind::Idle:
      break;
    case ActionKind::Point:
      move_hand(a.hand, *target, now);
      break;
    case ActionKind::Ray:
      m.ray = true;
      m.ray_target = target;
      break;
    case ActionKind::RayOff:
      m.ray = false;
      m.ray_target.reset();
      break;
    case ActionKind::Rest:
      move_hand(a.hand,
                geo::to_canonical(session::rest_hand_position(seat, a.hand, frame), seat, welcome_->condition, frame),
                now);
      break;
    case ActionKind::Gaze: {
      const geo::Vec3 at = a.seat ? session::seat_head_pose(geo::SeatIndex(*a.seat), frame).p : *a.point;
      if (geo::norm(at - head_.p) > 0.0) head_.q = session::quantize(look_rotation(at - head_.p));
      break;
    }
    case ActionKind::Grab:
      if (!pieces_->find(*a.piece)) return abort(a, "unknown piece '" + *a.piece + "'", now, out);
      out.push_back(emit(wire::Grab{*a.piece, a.hand}, now));
      holding_ = a.piece;
      holding_hand_ = a.hand;
      break;
    case ActionKind::Release: {
      if (!holding_) return abort(a, "release without a grabbed piece", now, out);
      const geo::Pose canonical =
          puzzle::pose_of(puzzle::Placement{*holding_, puzzle::Orientation(a.orientation), a.offset}, welcome_->grid);
      const geo::Pose displayed{geo::from_canonical(canonical.p, seat, welcome_->condition, frame),
                                geo::from_canonical(canonical.q, seat, welcome_->condition)};
      move_hand(holding_hand_, canonical.p, now - kHandMoveMs);
      out.push_back(emit(wire::Release{session::quantize(displayed)}, now));
      holding_.reset();
      break;
    }
    case ActionKind::Rotate:
      m.q = a.rotation;
      break;
  }
}

std::vector<Outgoing> BotClient::poll(std::int64_t now) {
  std::vector<Outgoing> out;
  if (finished_) return out;
  if (!hello_sent_) {
    out.push_back(emit(wire::Hello{script_.name, script_.seat, script_.role}, now));
    hello_sent_ = true;
  }
  if (!welcome_) return out;
  while (!finished_ && next_ < script_.actions.size() && script_.actions[next_].at_ms <= now) {
    run(script_.actions[next_++], now, out);
  }
  if (finished_) return out;
  if (now >= next_pose_ms_) {
    out.push_back(emit(pose_at(now), now));
    next_pose_ms_ = now + 1000 / kPoseHz;
  }
  if (next_ == script_.actions.size()) finished_ = true;
  return out;
}

session::RenderModel BotClient::render_model() const {
  if (!welcome_ || !snapshot_) return {};
  return session::render_model(wire::avatar_views(*snapshot_), script_.name, geo::SeatIndex(welcome_->seat),
                               welcome_->condition, welcome_->table);
}

// ---------------------------------------------------------------------------
// Harness

SimWorld::SimWorld(session::SessionConfig config, std::vector<BotScript> scripts, SimOptions options)
    : options_(options),
      net_(options.transport),
      server_(std::move(config), [this](ConnId conn, const std::string& text, Lane lane) {
        net_.send(now_, 0, endpoint_of_conn_.at(conn), text, lane);
      }) {
  server_.set_log_sink([this](const std::string& line) { log_lines_.push_back(line); });
  for (std::size_t i = 0; i < scripts.size(); ++i) {
    bots_.emplace_back(std::move(scripts[i]));
    const ConnId conn = server_.connect();
    conn_of_bot_.push_back(conn);
    endpoint_of_conn_[conn] = static_cast<int>(i) + 1;
  }
}

bool SimWorld::step() {
  if (stage_ == Stage::Done) return false;
  ++now_;

  for (SimMessage& msg : net_.deliver_due(now_)) {
    if (msg.to == 0) {
      server_.receive(conn_of_bot_.at(static_cast<std::size_t>(msg.from - 1)), std::move(msg.text));
    } else {
      bots_.at(static_cast<std::size_t>(msg.to - 1)).receive(msg.text);
    }
  }

  if (stage_ == Stage::Scripted) {
    for (std::size_t i = 0; i < bots_.size(); ++i) {
      for (Outgoing& o : bots_[i].poll(now_)) net_.send(now_, static_cast<int>(i) + 1, 0, std::move(o.text), o.lane);
    }
    if (std::all_of(bots_.begin(), bots_.end(), [](const BotClient& b) { return b.finished(); })) {
      stage_ = Stage::Draining;
    }
  }

  if (now_ == tick_time_ms(server_.ticks()) && stage_ != Stage::Flushing) {
    if (stage_ == Stage::Draining && net_.idle_toward(0)) stage_ = Stage::FinalTick;
    server_.tick(now_);
    if (stage_ == Stage::FinalTick) stage_ = Stage::Flushing;
  }

  if (stage_ == Stage::Flushing && net_.idle()) stage_ = Stage::Done;
  if (now_ >= options_.max_ms && stage_ != Stage::Done) {
    timed_out_ = true;
    stage_ = Stage::Done;
  }
  return stage_ != Stage::Done;
}

SimResult SimWorld::run() {
  while (step()) {
  }
  return result();
}

bool SimWorld::snapshots_agree() const {
  std::optional<std::string> first;
  for (const BotClient& b : bots_) {
    if (b.aborted()) continue;
    if (!b.last_snapshot()) return false;
    const std::string state = wire::puzzle_state_text(*b.last_snapshot());
    if (!first) {
      first = state;
    } else if (*first != state) {
      return false;
    }
  }
  return first.has_value();
}

SimResult SimWorld::result() const {
  SimResult r;
  r.log_lines = log_lines_;
  r.metrics = server_.session().metrics();
  r.diagnostics = server_.diagnostics();
  for (const BotClient& b : bots_) {
    if (b.aborted()) r.bot_errors.push_back(b.script().name + ": " + b.abort_reason());
  }
  r.converged = stage_ == Stage::Done && !timed_out_ && snapshots_agree();
  r.timed_out = timed_out_;
  r.end_ms = now_;
  r.sent = net_.sent();
  r.dropped = net_.dropped();
  return r;
}

// ---------------------------------------------------------------------------
// Script generation

namespace {

constexpr std::int64_t kFirstStepMs = 300;
constexpr std::int64_t kStepMs = 650;

std::string num(double v) {
  std::string s;
  json::write_number(s, json::quantize(v));
  return s;
}

std::string vec(geo::Vec3 v) { return num(v.x) + " " + num(v.y) + " " + num(v.z); }

std::vector<int> instructor_seats(int n) {
  if (n == 1) return {4};
  if (n == 2) return {2, 6};
  std::vector<int> out;
  for (int i = 1; i <= n; ++i) out.push_back(i);
  return out;
}

// Any in-grid placement of the piece that differs from `target`.
puzzle::Placement wrong_placement(const puzzle::Placement& target, const puzzle::PieceShape& shape,
                                  const puzzle::GridSpec& grid) {
  const puzzle::CellSet want = target.cells(shape);
  for (int o = 0; o < puzzle::kOrientationCount; ++o) {
    for (int z = -3; z < grid.dim; ++z) {
      for (int y = -3; y < grid.dim; ++y) {
        for (int x = -3; x < grid.dim; ++x) {
          const puzzle::Placement p{target.piece_id, puzzle::Orientation(o), {x, y, z}};
          const puzzle::CellSet cells = p.cells(shape);
          if (cells != want && std::all_of(cells.begin(), cells.end(), [&](auto c) { return grid.contains(c); })) {
            return p;
          }
        }
      }
    }
  }
  throw std::logic_error("piece has no alternative placement in the cube");
}

}  // namespace

std::vector<std::pair<std::string, std::string>> generate_scripts(const session::SessionConfig& config,
                                                                  int instructors, bool wrong_first) {
  if (instructors < 1 || instructors > geo::kSeatCount - 1) throw std::invalid_argument("instructors must be 1..7");
  const std::vector<int> seats = instructor_seats(instructors);
  const auto& steps = config.solution.placements;

  std::ostringstream assembler;
  assembler << "bot assembler 0 assembler\n";
  assembler << "at 200 start\n";
  std::vector<std::ostringstream> inst(static_cast<std::size_t>(instructors));
  for (int k = 0; k < instructors; ++k) {
    inst[static_cast<std::size_t>(k)] << "bot instructor" << k + 1 << " " << seats[static_cast<std::size_t>(k)]
                                      << " instructor" << k + 1 << "\n";
  }

  std::int64_t t = kFirstStepMs;
  int guide = seats.front();
  auto carry = [&](const puzzle::Placement& p, geo::Vec3 spot) {
    const std::string& id = p.piece_id;
    assembler << "at " << t << " point right piece " << id << "\n";
    assembler << "at " << t + 150 << " grab right " << id << "\n";
    assembler << "at " << t + 200 << " point right " << vec(spot) << "\n";
    assembler << "at " << t + 450 << " release " << p.orientation.index() << " " << p.offset.x << " " << p.offset.y
              << " " << p.offset.z << "\n";
    assembler << "at " << t + 460 << " gaze seat " << guide << "\n";
    assembler << "at " << t + 500 << " rest right\n";
    assembler << "at " << t + 560 << " gaze " << vec(config.grid.cube_box().center()) << "\n";
  };

  for (std::size_t i = 0; i < steps.size(); ++i) {
    const puzzle::Placement& target = steps[i];
    const puzzle::PieceShape& shape = config.pieces.shape(target.piece_id);
    const geo::Vec3 spot = config.grid.cell_center(target.cells(shape).front());
    if (i == 0 && wrong_first) {
      const puzzle::Placement wrong = wrong_placement(target, shape, config.grid);
      carry(wrong, config.grid.cell_center(wrong.cells(shape).front()));
      t += kStepMs;
    }
    const std::size_t k = i % static_cast<std::size_t>(instructors);
    guide = seats[k];
    std::ostringstream& out = inst[k];
    const int other = instructors > 1 ? seats[(k + 1) % static_cast<std::size_t>(instructors)] : 0;
    out << "at " << t - 150 << " gaze seat 0\n";
    if (i % 2 == 0) {
      out << "at " << t - 100 << " ray right " << vec(spot) << "\n";
    } else {
      out << "at " << t - 100 << " point right " << vec(spot) << "\n";
    }
    out << "at " << t + 50 << " gaze " << vec(spot) << "\n";
    out << "at " << t + 300 << " gaze seat " << other << "\n";
    out << "at " << t + 450 << (i % 2 == 0 ? " ray right off\n" : " rest right\n");
    carry(target, spot);
    t += kStepMs;
  }

  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("assembler.bot", assembler.str());
  for (int k = 0; k < instructors; ++k) {
    files.emplace_back("instructor" + std::to_string(k + 1) + ".bot", inst[static_cast<std::size_t>(k)].str());
  }
  return files;
}

}  // namespace sparc::net
