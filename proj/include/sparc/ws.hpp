#pragma once

// WebSocket transport: one Server per session name under /session/<name>,
// everything driven from a single io thread.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include "sparc/server.hpp"
#include "sparc/session.hpp"
#include "sparc/sim.hpp"

namespace sparc::net {

struct WsOptions {
  std::string address = "0.0.0.0";
  /// 0 picks a free port; see WsServer::port().
  unsigned short port = kDefaultPort;
  /// First session logs here, later ones to "<log_path>.<name>". Empty disables logging.
  std::string log_path;
};

class WsServer {
 public:
  using ConfigFactory = std::function<session::SessionConfig(const std::string& name)>;

  /// Binds immediately; throws std::runtime_error when the port is busy.
  WsServer(WsOptions options, ConfigFactory factory);
  ~WsServer();
  WsServer(const WsServer&) = delete;
  WsServer& operator=(const WsServer&) = delete;

  unsigned short port() const;
  /// Serves until stop(); call from the thread that should own the sessions.
  void run();
  /// Thread-safe. Appends a report line to every session log.
  void stop();
  /// Runs `f` on the io thread and waits for it (use while run() is active).
  void inspect(const std::function<void(const std::map<std::string, const Server*>&)>& f);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Plays `script` against a live server. Returns the bot after its script
/// ends (or after `max_ms` of wall time).
BotClient run_ws_bot(BotScript script, const std::string& host, unsigned short port, const std::string& session,
                     std::int64_t max_ms = 10 * 60 * 1000);

}  // namespace sparc::net
