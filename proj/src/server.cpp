#include "sparc/server.hpp"

#include <utility>

namespace sparc::net {

Lane lane_of(std::string_view type) { return type == "pose" ? Lane::Unreliable : Lane::Reliable; }

Lane lane_of(const wire::Body& body) { return lane_of(wire::type_of(body)); }

Server::Server(session::SessionConfig config, Send send) : session_(std::move(config)), send_(std::move(send)) {}

void Server::set_log_sink(LineSink sink) {
  log_sink_ = std::move(sink);
  logged_ = 0;
  flush_records();
}

ConnId Server::connect() {
  std::lock_guard lock(mu_);
  const ConnId id = next_conn_++;
  queue_.push_back({Inbound::Kind::Connect, id, {}});
  return id;
}

void Server::receive(ConnId conn, std::string text) {
  std::lock_guard lock(mu_);
  queue_.push_back({Inbound::Kind::Message, conn, std::move(text)});
}

void Server::disconnect(ConnId conn) {
  std::lock_guard lock(mu_);
  queue_.push_back({Inbound::Kind::Disconnect, conn, {}});
}

void Server::note(std::string line) {
  if (diag_sink_) diag_sink_(line);
  diagnostics_.push_back(std::move(line));
}

void Server::send(ConnId id, Conn& conn, wire::Body body) {
  if (!conn.open) return;
  const Lane lane = lane_of(body);
  send_(id, wire::encode({conn.out_seq++, now_ms_, std::move(body)}), lane);
}

void Server::reply_error(ConnId id, Conn& conn, std::string code, std::string msg) {
  send(id, conn, wire::Error{std::move(code), std::move(msg)});
}

void Server::flush_records() {
  const auto& log = session_.log();
  if (log_sink_) {
    for (; logged_ < log.size(); ++logged_) log_sink_(wire::log_line(log[logged_], static_cast<std::int64_t>(logged_)));
  }
  for (; broadcast_ < log.size(); ++broadcast_) {
    const session::EventRecord& r = log[broadcast_];
    if (r.kind == session::EventKind::Open || r.kind == session::EventKind::Pose ||
        r.kind == session::EventKind::EyeContactSample) {
      continue;
    }
    for (auto& [id, conn] : conns_) {
      if (conn.client) send(id, conn, wire::Event{r});
    }
  }
}

void Server::tick(std::int64_t now_ms) {
  now_ms_ = now_ms;
  session_.set_clock(now_ms, tick_);

  std::deque<Inbound> batch;
  {
    std::lock_guard lock(mu_);
    batch.swap(queue_);
  }
  for (Inbound& in : batch) {
    switch (in.kind) {
      case Inbound::Kind::Connect:
        conns_[in.conn] = Conn{};
        break;
      case Inbound::Kind::Disconnect:
        if (auto it = conns_.find(in.conn); it != conns_.end()) it->second.open = false;
        break;
      case Inbound::Kind::Message: {
        auto it = conns_.find(in.conn);
        if (it == conns_.end() || !it->second.open) {
          note("message on closed connection " + std::to_string(in.conn) + " ignored");
          break;
        }
        handle(in.conn, it->second, in.text);
        break;
      }
    }
  }

  if (last_tick_ms_ && now_ms > *last_tick_ms_) session_.sample_eye_contact(now_ms - *last_tick_ms_);
  last_tick_ms_ = now_ms;
  flush_records();

  for (auto& [id, conn] : conns_) {
    if (conn.client && conn.open) send(id, conn, snapshot_for(id));
  }
  ++tick_;
}

void Server::handle(ConnId id, Conn& conn, const std::string& text) {
  wire::Envelope env;
  try {
    env = wire::decode(text);
  } catch (const wire::DecodeError& e) {
    reply_error(id, conn, "DecodeError", e.what());
    return;
  }
  if (lane_of(env.body) == Lane::Unreliable) {
    if (env.seq <= conn.last_pose_seq) {
      ++stale_poses_;
      return;
    }
    conn.last_pose_seq = env.seq;
  } else {
    if (env.seq <= conn.last_command_seq) {
      note("connection " + std::to_string(id) + ": discarded " + std::string(wire::type_of(env.body)) +
           " with seq " + std::to_string(env.seq) + " (last " + std::to_string(conn.last_command_seq) + ")");
      return;
    }
    conn.last_command_seq = env.seq;
  }
  try {
    handle_body(id, conn, env.body);
  } catch (const session::SessionError& e) {
    reply_error(id, conn, std::string(session::to_string(e.code())), e.what());
  } catch (const std::out_of_range& e) {
    reply_error(id, conn, "BadRequest", e.what());
  } catch (const std::invalid_argument& e) {
    reply_error(id, conn, "BadRequest", e.what());
  }
}

void Server::handle_body(ConnId id, Conn& conn, const wire::Body& body) {
  auto client = [&]() -> const session::ClientId& {
    if (!conn.client) throw session::SessionError(session::ErrorCode::UnknownClient, "send hello first");
    return *conn.client;
  };

  if (const auto* hello = std::get_if<wire::Hello>(&body)) {
    if (conn.client) throw session::SessionError(session::ErrorCode::DuplicateClient, "already joined");
    const session::SeatAssignment a = session_.join(hello->name, geo::SeatIndex(hello->seat), hello->role);
    conn.client = a.client;
    conn.instructor = !a.role.is_assembler();
    const auto& cfg = session_.state().config;
    send(id, conn,
         wire::Welcome{a.seat.value(), a.role, a.condition, a.angle_deg, puzzle::serialize(cfg.pieces), cfg.frame,
                       cfg.grid});
  } else if (std::holds_alternative<wire::Start>(body)) {
    client();
    session_.start(now_ms_);
  } else if (const auto* pose = std::get_if<wire::PoseMsg>(&body)) {
    session_.update_pose(client(), wire::avatar_of(*pose), pose->tick);
  } else if (const auto* grab = std::get_if<wire::Grab>(&body)) {
    session_.grab(client(), grab->piece, grab->hand);
  } else if (const auto* release = std::get_if<wire::Release>(&body)) {
    session_.release(client(), release->pose);
  } else if (std::holds_alternative<wire::Bye>(body)) {
    conn.open = false;
  } else if (const auto* err = std::get_if<wire::Error>(&body)) {
    note("client " + (conn.client ? *conn.client : std::to_string(id)) + " reported " + err->code + ": " + err->msg);
  } else {
    reply_error(id, conn, "UnexpectedMessage",
                "clients may not send '" + std::string(wire::type_of(body)) + "' envelopes");
  }
}

wire::Snapshot Server::snapshot_for(ConnId id) const {
  const session::SessionState& st = session_.state();
  wire::Snapshot s;
  s.clock_ms = st.clock_ms;
  s.phase = st.phase;
  s.pieces = st.pieces;
  for (const auto& [seat, a] : st.seats) {
    const session::AvatarState& av = st.avatars.at(a.client);
    s.avatars.push_back(
        {a.client, seat, a.role, av.last_update_tick, av.head, av.left, av.right, st.distortion.at(a.client)});
  }
  const auto it = conns_.find(id);
  if (it != conns_.end() && it->second.instructor) {
    if (const puzzle::Placement* t = st.target()) {
      s.target = wire::Target{*t, t->cells(st.config.pieces.shape(t->piece_id))};
    }
  }
  return s;
}

}  // namespace sparc::net
