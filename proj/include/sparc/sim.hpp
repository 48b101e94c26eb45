#pragma once

// Deterministic in-process network, scripted bot clients and the harness
// that runs them against a Server on a virtual millisecond clock.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sparc/server.hpp"
#include "sparc/session.hpp"
#include "sparc/wire.hpp"

namespace sparc::net {

struct TransportConfig {
  std::int64_t latency_ms = 40;
  std::int64_t jitter_ms = 10;
  double drop_rate = 0.01;  // pose messages only; 1 drops every pose
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument.
  void validate() const;
};

struct SimMessage {
  std::int64_t send_ms = 0;
  std::int64_t deliver_ms = 0;
  std::uint64_t index = 0;
  int from = 0;
  int to = 0;
  Lane lane = Lane::Reliable;
  std::string text;
};

/// Endpoint 0 is the server. Every send draws jitter from the generator;
/// unreliable sends then draw the drop decision. Reliable messages between
/// the same pair never overtake each other.
class SimNetwork {
 public:
  explicit SimNetwork(TransportConfig config);

  void send(std::int64_t now_ms, int from, int to, std::string text, Lane lane);
  /// Messages due at or before `now_ms`, ordered by (delivery time, send index).
  std::vector<SimMessage> deliver_due(std::int64_t now_ms);
  std::optional<std::int64_t> next_delivery() const;
  bool idle() const { return pending_.empty(); }
  bool idle_toward(int to) const;

  std::uint64_t sent() const { return next_index_; }
  std::uint64_t dropped() const { return dropped_; }
  const TransportConfig& config() const { return config_; }

 private:
  TransportConfig config_;
  std::mt19937_64 rng_;
  std::map<std::pair<std::int64_t, std::uint64_t>, SimMessage> pending_;
  std::map<std::pair<int, int>, std::int64_t> last_reliable_;
  std::uint64_t next_index_ = 0;
  std::uint64_t dropped_ = 0;
};

// ---------------------------------------------------------------------------
// Bot scripts

class ScriptError : public std::runtime_error {
 public:
  ScriptError(int line, const std::string& reason, const std::string& source = {});
  int line() const { return line_; }
  const std::string& reason() const { return reason_; }

 private:
  int line_;
  std::string reason_;
};

enum class ActionKind { Start, Bye, Idle, Point, Ray, RayOff, Rest, Gaze, Grab, Release, Rotate };

struct BotAction {
  std::int64_t at_ms = 0;
  int line = 0;
  ActionKind kind = ActionKind::Idle;
  Handedness hand = Handedness::Right;
  /// Point/Ray/Gaze target, canonical for hands and room coordinates for gaze.
  std::optional<geo::Vec3> point;
  std::optional<std::string> piece;
  std::optional<int> seat;
  geo::Quat rotation;
  int orientation = 0;
  puzzle::Cell offset;
};

struct BotScript {
  std::string name;
  int seat = 0;
  session::Role role;
  std::vector<BotAction> actions;
};

/// Throws ScriptError with the 1-based line number.
BotScript parse_bot_script(std::string_view text);
BotScript load_bot_script(const std::string& path);
/// Every *.bot file in `dir`, sorted by file name.
std::vector<BotScript> load_bot_scripts(const std::string& dir);

inline constexpr std::int64_t kHandMoveMs = 300;

struct Outgoing {
  std::string text;
  Lane lane = Lane::Reliable;
};

/// A scripted participant. Driven by poll() and receive() on any clock.
class BotClient {
 public:
  explicit BotClient(BotScript script);

  /// Envelopes to send at `now_ms`, already encoded.
  std::vector<Outgoing> poll(std::int64_t now_ms);
  void receive(std::string_view text);

  bool finished() const { return finished_; }
  bool aborted() const { return !abort_reason_.empty(); }
  const std::string& abort_reason() const { return abort_reason_; }
  const BotScript& script() const { return script_; }
  const std::optional<wire::Welcome>& welcome() const { return welcome_; }
  const std::optional<wire::Snapshot>& last_snapshot() const { return snapshot_; }
  const std::vector<wire::Error>& errors() const { return errors_; }
  const std::vector<session::EventRecord>& events() const { return events_; }
  /// How this bot would draw everyone else, from its latest snapshot.
  session::RenderModel render_model() const;

 private:
  struct HandMotion {
    geo::Vec3 from;
    geo::Vec3 to;
    std::int64_t start_ms = 0;
    geo::Quat q;
    bool ray = false;
    std::optional<geo::Vec3> ray_target;
  };

  void run(const BotAction& a, std::int64_t now, std::vector<Outgoing>& out);
  void abort(const BotAction& a, const std::string& why, std::int64_t now, std::vector<Outgoing>& out);
  void move_hand(Handedness h, geo::Vec3 target, std::int64_t now);
  geo::Vec3 hand_position(Handedness h, std::int64_t now) const;
  std::optional<geo::Vec3> piece_position(const std::string& id) const;
  Outgoing emit(wire::Body body, std::int64_t now);
  wire::PoseMsg pose_at(std::int64_t now);

  BotScript script_;
  std::size_t next_ = 0;
  bool hello_sent_ = false;
  bool finished_ = false;
  std::string abort_reason_;
  std::int64_t seq_ = 0;
  std::int64_t pose_tick_ = 0;
  std::int64_t next_pose_ms_ = 0;

  std::optional<wire::Welcome> welcome_;
  std::optional<puzzle::PieceSet> pieces_;
  std::optional<wire::Snapshot> snapshot_;
  std::vector<wire::Error> errors_;
  std::vector<session::EventRecord> events_;

  geo::Pose head_;
  HandMotion left_;
  HandMotion right_;
  std::optional<std::string> holding_;
  Handedness holding_hand_ = Handedness::Right;
};

// ---------------------------------------------------------------------------
// Harness

struct SimOptions {
  TransportConfig transport;
  std::int64_t max_ms = 30 * 60 * 1000;
};

struct SimResult {
  std::vector<std::string> log_lines;
  session::MetricsReport metrics;
  std::vector<std::string> diagnostics;
  /// Bots with an abort reason, as "name: reason".
  std::vector<std::string> bot_errors;
  bool converged = false;
  bool timed_out = false;
  std::int64_t end_ms = 0;
  std::uint64_t sent = 0;
  std::uint64_t dropped = 0;
};

class SimWorld {
 public:
  SimWorld(session::SessionConfig config, std::vector<BotScript> scripts, SimOptions options = {});

  /// Advances the clock by one millisecond. False once the run is over.
  bool step();
  SimResult run();

  std::int64_t now() const { return now_; }
  const Server& server() const { return server_; }
  const std::vector<BotClient>& bots() const { return bots_; }
  const SimNetwork& network() const { return net_; }
  /// True when every bot's last snapshot carries the same puzzle state.
  bool snapshots_agree() const;
  SimResult result() const;

 private:
  enum class Stage { Scripted, Draining, FinalTick, Flushing, Done };

  SimOptions options_;
  SimNetwork net_;
  Server server_;
  std::vector<BotClient> bots_;
  std::vector<ConnId> conn_of_bot_;
  std::map<ConnId, int> endpoint_of_conn_;
  std::vector<std::string> log_lines_;
  std::int64_t now_ = -1;
  std::int64_t next_tick_ = 0;
  Stage stage_ = Stage::Scripted;
  bool timed_out_ = false;
};

/// Scripts for one assembler and `instructors` instructors that build the
/// configured solution in order. `wrong_first` makes the assembler drop the
/// first piece in a wrong spot once before placing it correctly.
std::vector<std::pair<std::string, std::string>> generate_scripts(const session::SessionConfig& config,
                                                                  int instructors, bool wrong_first = false);

}  // namespace sparc::net
