#include <doctest.h>

#include <cmath>

#include "sparc/session.hpp"
#include "support.hpp"

using namespace sparc;
using namespace sparc::session;
using geo::SeatIndex;
using geo::Vec3;
using test::dist;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const SessionError& e) {
    return e.code();
  }
  FAIL("no SessionError");
  return ErrorCode::BadLog;
}

struct Trio {
  Session s;
  explicit Trio(Condition c = Condition::Sparc, bool started = true) : s(test::bedlam_config(c)) {
    s.join("asm", SeatIndex(0), Role::assembler());
    s.join("i1", SeatIndex(2), Role::instructor(1));
    s.join("i2", SeatIndex(6), Role::instructor(2));
    if (started) s.start(1000);
  }
  Condition cond() const { return s.state().config.condition; }
  const puzzle::Placement& target() const { return *s.state().target(); }
  geo::Pose target_pose() const { return puzzle::pose_of(target(), s.state().config.grid); }
};

AvatarState idle_avatar() {
  AvatarState a;
  a.left.pose.p = {-2.0, 0.0, 0.0};
  a.right.pose.p = {2.0, 0.0, 0.0};
  return a;
}

HandState hand_at(Vec3 p, bool ray, Vec3 dir = {0, -1, 0}) {
  HandState h;
  h.pose.p = p;
  h.ray_active = ray;
  h.ray_dir = geo::normalized(dir);
  return h;
}

std::int64_t eye_ms(const Session& s, const std::string& a, const std::string& b) {
  const auto& m = s.state().eye_contact_ms;
  const auto it = m.find({a, b});
  return it == m.end() ? 0 : it->second;
}

}  // namespace

TEST_SUITE("session") {

TEST_CASE("roles") {
  CHECK(Role::parse("assembler") == Role::assembler());
  CHECK(Role::parse("instructor3") == Role::instructor(3));
  CHECK(Role::instructor(2).to_string() == "instructor2");
  CHECK_THROWS_AS(Role::parse("instructor0"), std::invalid_argument);
  CHECK_THROWS_AS(Role::parse("pilot"), std::invalid_argument);
}

TEST_CASE("eight seats at 45 degree steps, ninth rejected") {
  Session s(test::bedlam_config(Condition::Sparc));
  const SeatAssignment a = s.join("asm", SeatIndex(0), Role::assembler());
  CHECK(a.angle_deg == 0.0);
  CHECK(a.condition == Condition::Sparc);
  for (int i = 1; i < 8; ++i) {
    const SeatAssignment b = s.join("c" + std::to_string(i), SeatIndex(i), Role::instructor(i));
    CHECK(b.seat.value() == i);
    CHECK(b.angle_deg == 45.0 * i);
  }
  CHECK(s.state().seats.size() == 8);
  CHECK(code_of([&] { s.join("extra", SeatIndex(3), Role::instructor(9)); }) == ErrorCode::NoFreeSeat);
}

TEST_CASE("join errors") {
  Session s(test::bedlam_config(Condition::Veridical));
  CHECK(code_of([&] { s.join("x", SeatIndex(0), Role::instructor(1)); }) == ErrorCode::AssemblerSeat);
  CHECK(code_of([&] { s.join("x", SeatIndex(3), Role::assembler()); }) == ErrorCode::AssemblerSeat);
  s.join("asm", SeatIndex(0), Role::assembler());
  CHECK(s.state().seats.at(0).condition == Condition::Veridical);
  CHECK(code_of([&] { s.join("asm", SeatIndex(1), Role::instructor(1)); }) == ErrorCode::DuplicateClient);
  CHECK(code_of([&] { s.join("other", SeatIndex(0), Role::assembler()); }) == ErrorCode::SeatTaken);
  s.join("i1", SeatIndex(4), Role::instructor(1));
  CHECK(code_of([&] { s.join("i1b", SeatIndex(5), Role::instructor(1)); }) == ErrorCode::DuplicateInstructor);
  CHECK(code_of([&] { s.join("i2", SeatIndex(4), Role::instructor(2)); }) == ErrorCode::SeatTaken);
  CHECK(code_of([&] { s.join("", SeatIndex(5), Role::instructor(2)); }) == ErrorCode::UnknownClient);
  s.start(0);
  CHECK(code_of([&] { s.join("late", SeatIndex(5), Role::instructor(2)); }) == ErrorCode::SessionRunning);
}

TEST_CASE("start needs an assembler and an instructor") {
  Session s(test::bedlam_config(Condition::Sparc));
  CHECK(code_of([&] { s.start(0); }) == ErrorCode::NotReady);
  s.join("asm", SeatIndex(0), Role::assembler());
  CHECK(code_of([&] { s.start(0); }) == ErrorCode::NotReady);
  s.join("i1", SeatIndex(1), Role::instructor(1));
  s.start(250);
  CHECK(s.state().phase == Phase::Running);
  CHECK(s.state().start_ms == 250);
  CHECK(code_of([&] { s.start(300); }) == ErrorCode::NotReady);
}

TEST_CASE("pose updates") {
  Trio t;
  AvatarState a = idle_avatar();
  a.head.p = {0.1, 1.2, 0.3};
  t.s.update_pose("i1", a, 5);
  CHECK(t.s.state().avatars.at("i1").head.p == a.head.p);
  CHECK(t.s.state().avatars.at("i1").last_update_tick == 5);

  AvatarState older = a;
  older.head.p = {9, 9, 9};
  const SessionState before = t.s.state();
  t.s.update_pose("i1", older, 4);
  CHECK(t.s.state() == before);

  a.head.p = {0.2, 1.2, 0.3};
  t.s.update_pose("i1", a, 6);
  CHECK(t.s.state().avatars.at("i1").head.p == a.head.p);

  CHECK(code_of([&] { t.s.update_pose("ghost", a, 7); }) == ErrorCode::UnknownClient);
  AvatarState bad = a;
  bad.head.p.x = std::nan("");
  CHECK(code_of([&] { t.s.update_pose("i1", bad, 8); }) == ErrorCode::InvalidPose);
}

TEST_CASE("hands are stored canonical, heads in room coordinates") {
  Trio t;
  AvatarState a = idle_avatar();
  a.head.p = {0.0, 1.2, -1.0};
  a.right.pose.p = {0.3, 0.9, -0.2};
  t.s.update_pose("i1", a, 1);
  const AvatarState& stored = t.s.state().avatars.at("i1");
  CHECK(stored.head.p == a.head.p);
  // Seat 2 displayed (0.3, 0.9, -0.2) is canonical (0.2, 0.9, 0.3).
  CHECK(dist(stored.right.pose.p, {0.2, 0.9, 0.3}) < 1e-9);
}

TEST_CASE("trigger table, each hand on its own") {
  const auto& cfg = test::bedlam_config(Condition::Sparc);
  const Session s(cfg);
  const auto& pieces = s.state().pieces;
  const Vec3 inside{0.1, 1.0, 0.1};
  const Vec3 outside{0.9, 1.1, 0.0};
  const Vec3 at_cube = cfg.grid.cube_box().center() - outside;
  const Vec3 at_ceiling{0.0, 1.0, 0.0};
  struct Row {
    Vec3 p;
    bool ray;
    Vec3 dir;
    bool want;
  };
  const Row rows[] = {
      {inside, false, at_ceiling, true},  {inside, true, at_ceiling, true},
      {inside, true, at_cube, true},      {outside, true, at_cube, true},
      {outside, true, at_ceiling, false}, {outside, false, at_cube, false},
      {outside, false, at_ceiling, false},
  };
  for (const Row& r : rows) {
    const HandState h = hand_at(r.p, r.ray, r.dir);
    CHECK(distortion_trigger(h, Condition::Sparc, cfg.frame, cfg.grid, cfg.pieces, pieces) == r.want);
    CHECK_FALSE(distortion_trigger(h, Condition::Veridical, cfg.frame, cfg.grid, cfg.pieces, pieces));
  }

  // A ray from outside onto a table piece.
  const PieceState& p = pieces.front();
  const Vec3 from = p.pose.p + Vec3{0.0, 0.5, 0.0} + 0.9 * geo::normalized(Vec3{p.pose.p.x, 0.0, p.pose.p.z});
  const auto ref = distortion_reference(hand_at(from, true, p.pose.p - from), cfg.frame, cfg.grid, cfg.pieces, pieces);
  REQUIRE(ref.has_value());
  const auto at = puzzle::placement_at(cfg.pieces.shape(p.id), p.pose, cfg.grid);
  bool on_piece = false;
  for (const auto& c : at.cells(cfg.pieces.shape(p.id))) {
    geo::Box b = cfg.grid.cell_box(c);
    b.min = b.min - Vec3{1e-9, 1e-9, 1e-9};
    b.max = b.max + Vec3{1e-9, 1e-9, 1e-9};
    on_piece = on_piece || geo::point_in_box(*ref, b);
  }
  CHECK(on_piece);

  // A ray that only meets things outside the workspace does not count.
  geo::TableFrame small = cfg.frame;
  small.workspace_bounds = {{-0.05, 0.75, -0.05}, {0.05, 0.8, 0.05}};
  const Vec3 far_hand{0.9, 0.78, 0.9};
  CHECK_FALSE(distortion_reference(hand_at(far_hand, true, p.pose.p - far_hand), small, cfg.grid, cfg.pieces,
                                   {p})
                  .has_value());

  // Session level: left hand in, right hand out.
  Trio t;
  AvatarState a = idle_avatar();
  a.left.pose.p = inside;
  a.right.pose.p = outside;
  t.s.update_pose("i1", a, 1);
  const DistortionState& d = t.s.state().distortion.at("i1");
  CHECK(d.left.active);
  CHECK_FALSE(d.right.active);
  CHECK(t.s.log().back().kind == EventKind::TriggerOn);
  CHECK(t.s.log().back().payload.find("hand")->as_string() == "left");

  a.left.pose.p = outside;
  a.right = hand_at(outside, true, at_cube);
  t.s.update_pose("i1", a, 2);
  CHECK_FALSE(t.s.state().distortion.at("i1").left.active);
  CHECK(t.s.state().distortion.at("i1").right.active);
  const auto& log = t.s.log();
  CHECK(log[log.size() - 2].kind == EventKind::TriggerOff);
  CHECK(log[log.size() - 1].kind == EventKind::TriggerOn);
}

TEST_CASE("veridical never triggers") {
  Trio t(Condition::Veridical);
  AvatarState a = idle_avatar();
  a.left.pose.p = {0.0, 1.0, 0.0};
  t.s.update_pose("i1", a, 1);
  CHECK_FALSE(t.s.state().distortion.at("i1").any_active());
  CHECK(t.s.log().back().kind == EventKind::Pose);
}

TEST_CASE("veridical render model is raw") {
  Trio t(Condition::Veridical);
  AvatarState a = idle_avatar();
  a.head.p = {0.0, 1.2, -1.0};
  a.right.pose.p = {0.1, 1.0, -0.2};
  a.left.pose.p = {-0.6, 0.9, -0.9};
  t.s.update_pose("i1", a, 1);
  for (const char* lu : {"asm", "i2"}) {
    for (const RenderedAvatar& r : t.s.render_model_for(lu)) {
      const AvatarState& st = t.s.state().avatars.at(r.client);
      CHECK(r.head == st.head);
      CHECK(r.left.pose == st.left.pose);
      CHECK(r.right.pose == st.right.pose);
      CHECK(r.left.arm == Handedness::Left);
      CHECK(r.right.arm == Handedness::Right);
      CHECK_FALSE(r.left.spline.has_value());
      CHECK_FALSE(r.right.spline.has_value());
    }
  }
}

TEST_CASE("sparc mirroring and mapped references") {
  Trio t;
  AvatarState a = idle_avatar();
  a.head = seat_head_pose(SeatIndex(2), t.s.state().config.frame);
  a.right.pose.p = {0.05, 0.95, 0.1};
  t.s.update_pose("i1", a, 1);
  const HandDistortion d = t.s.state().distortion.at("i1").right;
  REQUIRE(d.active);
  const Vec3 q = d.reference_point;

  for (const auto& [lu, seat] : {std::pair{"asm", 0}, std::pair{"i2", 6}}) {
    const RenderModel m = t.s.render_model_for(lu);
    const RenderedAvatar* r = nullptr;
    for (const auto& x : m)
      if (x.client == "i1") r = &x;
    REQUIRE(r != nullptr);
    CHECK(r->right.distorted);
    CHECK(r->right.arm == Handedness::Left);
    CHECK(r->left.arm == Handedness::Right);
    CHECK_FALSE(r->left.distorted);
    const Vec3 want = test::oracle::displayed(q, seat, Condition::Sparc, t.s.state().config.frame.center);
    CHECK(dist(r->right.pose.p, want) < 1e-9);
    CHECK(dist(geo::to_canonical(r->right.pose.p, SeatIndex(seat), Condition::Sparc, t.s.state().config.frame), q) <
          1e-9);
    REQUIRE(r->right.spline.has_value());
    CHECK(r->right.spline->hand == r->right.pose.p);
    CHECK(r->right.spline->shoulder == shoulder_anchor(r->head, Handedness::Left));
    CHECK(r->head == t.s.state().avatars.at("i1").head);
  }

  // Left hand active instead: attaches to the right arm.
  a.right.pose.p = {2.0, 0.0, 0.0};
  a.left.pose.p = {-0.05, 0.9, 0.0};
  t.s.update_pose("i1", a, 2);
  for (const auto& r : t.s.render_model_for("asm")) {
    if (r.client != "i1") continue;
    CHECK(r.left.distorted);
    CHECK(r.left.arm == Handedness::Right);
    CHECK_FALSE(r.right.distorted);
  }
}

TEST_CASE("undistorted hands keep their room position under sparc") {
  Trio t;
  AvatarState a = idle_avatar();
  a.right.pose.p = {0.95, 0.9, 0.0};
  t.s.update_pose("i1", a, 1);
  for (const auto& r : t.s.render_model_for("asm")) {
    if (r.client != "i1") continue;
    CHECK(dist(r.right.pose.p, a.right.pose.p) < 1e-9);
    CHECK(r.right.arm == Handedness::Right);
  }
}

TEST_CASE("only the assembler manipulates pieces") {
  Trio t;
  for (const auto& p : t.s.state().config.pieces.pieces) {
    for (const char* who : {"i1", "i2"}) {
      CHECK(code_of([&] { t.s.grab(who, p.id, Handedness::Right); }) == ErrorCode::NotAssembler);
      CHECK(code_of([&] { t.s.release(who, {}); }) == ErrorCode::NotHolding);
    }
  }
  CHECK(t.s.state().cursor == 0);
  CHECK(code_of([&] { t.s.grab("asm", "nope", Handedness::Right); }) == ErrorCode::UnknownPiece);
  CHECK(code_of([&] { t.s.grab("ghost", "A", Handedness::Right); }) == ErrorCode::UnknownClient);
  CHECK(code_of([&] { t.s.release("asm", {}); }) == ErrorCode::NotHolding);

  Trio lobby(Condition::Sparc, false);
  CHECK(code_of([&] { lobby.s.grab("asm", "A", Handedness::Right); }) == ErrorCode::NotRunning);
}

TEST_CASE("grab and release lifecycle") {
  Trio t;
  const std::string id = t.target().piece_id;
  t.s.grab("asm", id, Handedness::Right);
  CHECK(t.s.state().piece(id)->status == PieceStatus::Held);
  CHECK(t.s.state().piece(id)->holder == "asm");
  CHECK(code_of([&] { t.s.grab("asm", id, Handedness::Left); }) == ErrorCode::PieceHeld);
  const std::string other = id == "A" ? "B" : "A";
  CHECK(code_of([&] { t.s.grab("asm", other, Handedness::Left); }) == ErrorCode::AlreadyHolding);

  // Over the table, off the cube.
  geo::Pose away = t.target_pose();
  away.p = away.p + Vec3{0.5, 0.0, 0.0};
  CHECK(t.s.release("asm", away) == puzzle::ReleaseOutcome::OutsideCube);
  CHECK(t.s.state().attempts == 1);
  CHECK(t.s.state().piece(id)->status == PieceStatus::Table);

  // Wrong spot inside the cube: piece goes home.
  const auto& cfg = t.s.state().config;
  const puzzle::PieceShape& shape = cfg.pieces.shape(id);
  std::optional<geo::Pose> wrong;
  for (int k = 0; k < 24 && !wrong; ++k)
    for (int x = 0; x < 4 && !wrong; ++x)
      for (int z = 0; z < 4 && !wrong; ++z) {
        const puzzle::Placement pl{id, puzzle::Orientation(k), {x, 0, z}};
        const auto snapped = puzzle::snap_pose(shape, puzzle::pose_of(pl, cfg.grid), cfg.grid);
        if (snapped.in_cube && snapped.cells != t.target().cells(shape)) wrong = snapped.pose;
      }
  REQUIRE(wrong.has_value());
  t.s.grab("asm", id, Handedness::Right);
  CHECK(t.s.release("asm", *wrong) == puzzle::ReleaseOutcome::WrongInCube);
  CHECK(t.s.state().errors_per_piece.at(id) == 1);
  const puzzle::TablePose home = cfg.pieces.table_home.at(id);
  CHECK(dist(t.s.state().piece(id)->pose.p, home.position) < 1e-6);

  t.s.grab("asm", id, Handedness::Left);
  CHECK(t.s.release("asm", t.target_pose()) == puzzle::ReleaseOutcome::Correct);
  CHECK(t.s.state().cursor == 1);
  CHECK(t.s.state().piece(id)->status == PieceStatus::Placed);
  CHECK(code_of([&] { t.s.grab("asm", id, Handedness::Left); }) == ErrorCode::PieceLocked);

  const MetricsReport m = t.s.metrics();
  CHECK(m.total_errors == 1);
  CHECK(m.attempts == 1);
  CHECK(m.total_moves == 2);
  CHECK(m.correct_placements == 1);
  CHECK(m.partial);
}

TEST_CASE("release under sparc reads the assembler's displayed frame") {
  // The assembler sits at seat 0, so displayed equals canonical there; a
  // release from a rotated frame must be rotated back first.
  Trio t;
  const std::string id = t.target().piece_id;
  t.s.grab("asm", id, Handedness::Right);
  CHECK(t.s.release("asm", t.target_pose()) == puzzle::ReleaseOutcome::Correct);
}

TEST_CASE("flawless run records thirteen placements and replays exactly") {
  Trio t;
  std::int64_t clock = 1000;
  while (t.s.state().phase == Phase::Running) {
    clock += 700;
    t.s.set_clock(clock, clock / 33);
    const std::string id = t.target().piece_id;
    t.s.grab("asm", id, Handedness::Right);
    CHECK(t.s.release("asm", t.target_pose()) == puzzle::ReleaseOutcome::Correct);
  }
  const MetricsReport m = t.s.metrics();
  CHECK_FALSE(m.partial);
  CHECK(m.correct_placements == 13);
  CHECK(m.total_errors == 0);
  CHECK(m.total_moves == 0);
  CHECK(m.total_time_s == doctest::Approx(13 * 0.7));
  CHECK(t.s.state().grid.occupied_count() == 64);
  CHECK(t.s.log().back().kind == EventKind::Finish);

  const Session r = Session::replay(t.s.log());
  CHECK(r.state() == t.s.state());
  CHECK(r.metrics() == m);
  CHECK(json::dump(r.metrics().to_json()) == json::dump(m.to_json()));
}

TEST_CASE("metrics identity holds on every log prefix") {
  Trio t;
  std::mt19937_64 rng(3);
  std::int64_t clock = 1000;
  const auto& cfg = t.s.state().config;
  int guard = 0;
  while (t.s.state().phase == Phase::Running && ++guard < 200) {
    clock += 100 + static_cast<std::int64_t>(rng() % 400);
    t.s.set_clock(clock, clock / 33);
    const std::string id = t.target().piece_id;
    t.s.grab("asm", id, Handedness::Right);
    geo::Pose p = t.target_pose();
    switch (rng() % 4) {
      case 0: p.p = p.p + Vec3{0.4, 0.0, 0.3}; break;
      case 1: p = puzzle::pose_of({id, puzzle::Orientation(static_cast<int>(rng() % 24)), {0, 0, 0}}, cfg.grid); break;
      default: break;
    }
    t.s.release("asm", p);
  }
  REQUIRE(t.s.state().phase == Phase::Finished);
  const auto& log = t.s.log();
  std::int64_t last_moves = 0;
  for (std::size_t n = 1; n <= log.size(); ++n) {
    const std::vector<EventRecord> prefix(log.begin(), log.begin() + static_cast<std::ptrdiff_t>(n));
    const MetricsReport m = Session::replay(prefix).metrics();
    std::int64_t sum = 0;
    for (const auto& [id, e] : m.errors_per_piece) sum += e;
    CHECK(m.total_errors == sum);
    CHECK(m.total_moves == m.total_errors + m.attempts);
    CHECK(m.total_moves >= last_moves);
    last_moves = m.total_moves;
  }
  CHECK(Session::replay(log).metrics() == t.s.metrics());
  CHECK(t.s.metrics().correct_placements == 13);
}

TEST_CASE("replay rejects malformed logs") {
  Trio t;
  CHECK(code_of([&] { Session::replay({}); }) == ErrorCode::BadLog);
  std::vector<EventRecord> log = t.s.log();
  CHECK(code_of([&] { Session::replay({log.begin() + 1, log.end()}); }) == ErrorCode::BadLog);
  std::vector<EventRecord> twice = log;
  twice.push_back(log.front());
  CHECK(code_of([&] { Session::replay(twice); }) == ErrorCode::BadLog);
  std::vector<EventRecord> back = log;
  back.push_back(log.back());
  back.back().clock_ms = log.back().clock_ms - 1;
  CHECK(code_of([&] { Session::replay(back); }) == ErrorCode::BadLog);
}

TEST_CASE("config survives json") {
  const auto& cfg = test::bedlam_config(Condition::Veridical);
  const SessionConfig back = config_from_json(json::parse(json::dump(config_to_json(cfg))));
  CHECK(back == cfg);
}

TEST_CASE("eye contact: mutual and one-sided gaze") {
  Trio t;
  AvatarState a = idle_avatar(), b = idle_avatar();
  a.head = {{0.0, 1.2, 0.0}, {}};
  b.head = {{0.0, 1.2, -1.0}, geo::quat_yaw_deg(180.0)};
  t.s.update_pose("i1", a, 1);
  t.s.update_pose("i2", b, 1);
  t.s.sample_eye_contact(33);
  CHECK(eye_ms(t.s, "i1", "i2") == 33);
  CHECK(eye_ms(t.s, "i2", "i1") == 33);

  b.head.q = geo::quat_yaw_deg(90.0);
  t.s.update_pose("i2", b, 2);
  t.s.sample_eye_contact(34);
  CHECK(eye_ms(t.s, "i1", "i2") == 67);
  CHECK(eye_ms(t.s, "i2", "i1") == 33);
  CHECK(t.s.metrics().eye_contact_s.at("i1") == doctest::Approx(0.067));
  CHECK(t.s.metrics().eye_contact_s.at("asm") == 0.0);
}

TEST_CASE("eye contact: tangency flips within one tick") {
  // Gaze along -z from the origin; the other head 1 m ahead and shifted
  // sideways by L. The offset angle is atan(L / 1); grazing at L = r.
  Trio t;
  AvatarState a = idle_avatar(), b = idle_avatar();
  a.head = {{0.0, 1.2, 0.0}, {}};
  t.s.update_pose("i1", a, 0);
  std::vector<std::pair<double, bool>> samples;
  for (int k = -20; k <= 20; ++k) {
    const double lateral = json::quantize(kHeadRadius + k * 1e-6);
    b.head = {{lateral, 1.2, -1.0}, {}};
    t.s.update_pose("i2", b, k + 100);
    const std::int64_t before = eye_ms(t.s, "i1", "i2");
    t.s.sample_eye_contact(33);
    samples.emplace_back(lateral, eye_ms(t.s, "i1", "i2") > before);
  }
  int flips = 0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].second != samples[i - 1].second) {
      ++flips;
      CHECK(samples[i - 1].second);
      CHECK(samples[i - 1].first <= kHeadRadius);
      CHECK(samples[i].first >= kHeadRadius);
    }
  }
  CHECK(flips == 1);
  CHECK(samples.front().second);
  CHECK_FALSE(samples.back().second);
}

TEST_CASE("eye contact: rotating gaze grazes at asin(r / d)") {
  Trio t;
  AvatarState a = idle_avatar(), b = idle_avatar();
  b.head = {{0.0, 1.2, -1.0}, {}};
  t.s.update_pose("i2", b, 0);
  auto hits_at = [&](double angle, std::int64_t tick) {
    a.head = {{0.0, 1.2, 0.0}, geo::quat_from_axis_angle(geo::kUp, angle)};
    t.s.update_pose("i1", a, tick);
    const std::int64_t before = eye_ms(t.s, "i1", "i2");
    t.s.sample_eye_contact(33);
    return eye_ms(t.s, "i1", "i2") > before;
  };
  CHECK(hits_at(std::atan(0.12), 1));
  CHECK(hits_at(std::asin(0.12) - 2e-5, 2));
  CHECK_FALSE(hits_at(std::asin(0.12) + 2e-5, 3));
  CHECK_FALSE(hits_at(-std::asin(0.12) - 2e-5, 4));
}

TEST_CASE("no eye contact outside the running phase") {
  Trio t(Condition::Sparc, false);
  t.s.sample_eye_contact(33);
  CHECK(t.s.state().eye_contact_ms.empty());
}

TEST_CASE("default heads look at the table, not each other") {
  const geo::TableFrame f;
  for (int s = 0; s < 8; ++s) {
    const geo::Pose h = seat_head_pose(SeatIndex(s), f);
    const Vec3 fwd = geo::normalized(geo::rotate(h.q, geo::kForward));
    const Vec3 to_center = geo::normalized(f.center - h.p);
    CHECK(1.0 - geo::dot(fwd, to_center) < 1e-9);
    CHECK_FALSE(geo::point_in_box(rest_hand_position(SeatIndex(s), Handedness::Left, f), f.workspace_bounds));
    CHECK_FALSE(geo::point_in_box(rest_hand_position(SeatIndex(s), Handedness::Right, f), f.workspace_bounds));
  }
}

}
