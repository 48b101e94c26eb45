#pragma once

// Authoritative session loop, independent of the transport.
//
// Transports push raw text into an ordered queue from any thread; tick()
// drains it on the session thread, applies commands, samples eye contact and
// sends one snapshot per joined connection.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sparc/session.hpp"
#include "sparc/wire.hpp"

namespace sparc::net {

using ConnId = std::uint64_t;

enum class Lane { Reliable, Unreliable };

/// Only pose samples travel on the lossy lane.
Lane lane_of(std::string_view type);
Lane lane_of(const wire::Body& body);

inline constexpr int kPoseHz = 20;
inline constexpr int kDefaultPort = 7340;

/// Time of server tick `k` on the millisecond clock.
constexpr std::int64_t tick_time_ms(std::int64_t k) { return k * 1000 / session::kTickHz; }

class Server {
 public:
  using Send = std::function<void(ConnId, const std::string& text, Lane lane)>;
  using LineSink = std::function<void(const std::string& line)>;

  Server(session::SessionConfig config, Send send);

  /// Receives every event log line; lines already produced are flushed first.
  void set_log_sink(LineSink sink);
  void set_diagnostic_sink(LineSink sink) { diag_sink_ = std::move(sink); }

  // Thread-safe.
  ConnId connect();
  void receive(ConnId conn, std::string text);
  void disconnect(ConnId conn);

  void tick(std::int64_t now_ms);

  const session::Session& session() const { return session_; }
  std::int64_t ticks() const { return tick_; }
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }
  std::uint64_t stale_poses() const { return stale_poses_; }
  /// Snapshot as it would be sent to `conn` right now.
  wire::Snapshot snapshot_for(ConnId conn) const;

 private:
  struct Conn {
    std::optional<session::ClientId> client;
    bool instructor = false;
    bool open = true;
    std::int64_t last_command_seq = -1;
    std::int64_t last_pose_seq = -1;
    std::int64_t out_seq = 0;
  };
  struct Inbound {
    enum class Kind { Connect, Message, Disconnect } kind;
    ConnId conn;
    std::string text;
  };

  void handle(ConnId id, Conn& conn, const std::string& text);
  void handle_body(ConnId id, Conn& conn, const wire::Body& body);
  void send(ConnId id, Conn& conn, wire::Body body);
  void reply_error(ConnId id, Conn& conn, std::string code, std::string msg);
  void note(std::string line);
  void flush_records();

  session::Session session_;
  Send send_;
  LineSink log_sink_;
  LineSink diag_sink_;

  std::mutex mu_;
  std::deque<Inbound> queue_;
  ConnId next_conn_ = 1;

  std::map<ConnId, Conn> conns_;
  std::int64_t tick_ = 0;
  std::int64_t now_ms_ = 0;
  std::optional<std::int64_t> last_tick_ms_;
  std::size_t logged_ = 0;
  std::size_t broadcast_ = 0;
  std::vector<std::string> diagnostics_;
  std::uint64_t stale_poses_ = 0;
};

}  // namespace sparc::net
