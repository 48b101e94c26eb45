#include "sparc/ws.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>
#include <csignal>
#include <deque>
#include <fstream>
#include <future>
#include <iostream>

namespace sparc::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
}

bool valid_session_name(std::string_view name) {
  if (name.empty() || name.size() > 64) return false;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                    c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

class WsConn : public std::enable_shared_from_this<WsConn> {
 public:
  using OnText = std::function<void(std::string)>;
  using OnClose = std::function<void()>;

  explicit WsConn(tcp::socket socket) : ws_(std::move(socket)) {}

  websocket::stream<beast::tcp_stream>& ws() { return ws_; }

  void begin(OnText on_text, OnClose on_close) {
    on_text_ = std::move(on_text);
    on_close_ = std::move(on_close);
    ws_.text(true);
    read();
  }

  void send(std::string text) {
    if (closed_) return;
    out_.push_back(std::move(text));
    if (out_.size() == 1) write();
  }

  void close() {
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().close(ec);
  }

 private:
  void read() {
    ws_.async_read(buf_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->finish();
      std::string text = beast::buffers_to_string(self->buf_.data());
      self->buf_.consume(self->buf_.size());
      self->on_text_(std::move(text));
      self->read();
    });
  }

  void write() {
    ws_.async_write(asio::buffer(out_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->finish();
      self->out_.pop_front();
      if (!self->out_.empty()) self->write();
    });
  }

  void finish() {
    if (closed_) return;
    closed_ = true;
    out_.clear();
    if (on_close_) on_close_();
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buf_;
  std::deque<std::string> out_;
  OnText on_text_;
  OnClose on_close_;
  bool closed_ = false;
};

struct Upgrade {
  explicit Upgrade(tcp::socket s) : stream(std::move(s)) {}
  beast::tcp_stream stream;
  beast::flat_buffer buf;
  http::request<http::string_body> req;
  http::response<http::string_body> res;
};

struct Hub {
  std::unique_ptr<Server> server;
  std::map<ConnId, std::shared_ptr<WsConn>> conns;
  std::ofstream log;
  std::string log_path;
};

}  // namespace

struct WsServer::Impl {
  WsOptions opts;
  ConfigFactory factory;
  asio::io_context io;
  tcp::acceptor acceptor{io};
  asio::steady_timer timer{io};
  asio::signal_set signals{io};
  Clock::time_point t0;
  std::int64_t tick_k = 0;
  std::map<std::string, std::unique_ptr<Hub>> hubs;
  bool stopped = false;

  Hub& hub(const std::string& name) {
    auto& slot = hubs[name];
    if (slot) return *slot;
    slot = std::make_unique<Hub>();
    Hub* h = slot.get();
    h->server = std::make_unique<Server>(factory(name), [h](ConnId id, const std::string& text, Lane) {
      if (auto it = h->conns.find(id); it != h->conns.end()) it->second->send(text);
    });
    if (!opts.log_path.empty()) {
      h->log_path = hubs.size() == 1 ? opts.log_path : opts.log_path + "." + name;
      h->log.open(h->log_path, std::ios::trunc);
      if (!h->log) {
        std::cerr << "cannot open log '" << h->log_path << "'\n";
      } else {
        h->server->set_log_sink([h](const std::string& line) { h->log << line << '\n'; });
      }
    }
    return *h;
  }

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      upgrade(std::make_shared<Upgrade>(std::move(socket)));
      accept();
    });
  }

  void reject(const std::shared_ptr<Upgrade>& u, http::status status, std::string why) {
    u->res = http::response<http::string_body>(status, u->req.version());
    u->res.set(http::field::content_type, "text/plain");
    u->res.keep_alive(false);
    u->res.body() = std::move(why) + "\n";
    u->res.prepare_payload();
    http::async_write(u->stream, u->res, [u](beast::error_code, std::size_t) {
      beast::error_code ignored;
      u->stream.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  void upgrade(const std::shared_ptr<Upgrade>& u) {
    http::async_read(u->stream, u->buf, u->req, [this, u](beast::error_code ec, std::size_t) {
      if (ec) return;
      const std::string target(u->req.target());
      constexpr std::string_view prefix = "/session/";
      if (!std::string_view(target).starts_with(prefix)) {
        return reject(u, http::status::not_found, "use /session/<name>");
      }
      const std::string name = target.substr(prefix.size());
      if (!valid_session_name(name)) return reject(u, http::status::not_found, "bad session name");
      if (!websocket::is_upgrade(u->req)) return reject(u, http::status::upgrade_required, "websocket only");

      auto conn = std::make_shared<WsConn>(u->stream.release_socket());
      conn->ws().async_accept(u->req, [this, conn, name](beast::error_code ec) {
        if (ec || stopped) return;
        Hub& h = hub(name);
        const ConnId id = h.server->connect();
        h.conns[id] = conn;
        Hub* hp = &h;
        conn->begin([hp, id](std::string text) { hp->server->receive(id, std::move(text)); },
                    [hp, id] {
                      hp->server->disconnect(id);
                      hp->conns.erase(id);
                    });
      });
    });
  }

  void schedule_tick() {
    timer.expires_at(t0 + std::chrono::milliseconds(tick_time_ms(tick_k)));
    timer.async_wait([this](beast::error_code ec) {
      if (ec || stopped) return;
      const std::int64_t now = elapsed_ms(t0);
      for (auto& [name, h] : hubs) {
        h->server->tick(now);
        if (h->log.is_open()) h->log.flush();
      }
      while (tick_time_ms(tick_k) <= now) ++tick_k;
      schedule_tick();
    });
  }

  void stop_now() {
    if (stopped) return;
    stopped = true;
    beast::error_code ec;
    acceptor.close(ec);
    timer.cancel();
    signals.cancel(ec);
    const std::int64_t now = elapsed_ms(t0);
    for (auto& [name, h] : hubs) {
      if (h->log.is_open()) {
        const session::Session& s = h->server->session();
        wire::Report report{s.metrics(), h->log_path, 0, s.state().config.condition};
        h->log << wire::encode({static_cast<std::int64_t>(s.log().size()), now, report}) << '\n';
        h->log.flush();
      }
      for (auto& [id, conn] : h->conns) conn->close();
    }
    io.stop();
  }
};

WsServer::WsServer(WsOptions options, ConfigFactory factory) : impl_(std::make_unique<Impl>()) {
  impl_->opts = std::move(options);
  impl_->factory = std::move(factory);
  try {
    const tcp::endpoint ep(asio::ip::make_address(impl_->opts.address), impl_->opts.port);
    impl_->acceptor.open(ep.protocol());
    impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
    impl_->acceptor.bind(ep);
    impl_->acceptor.listen();
  } catch (const boost::system::system_error& e) {
    throw std::runtime_error("cannot listen on " + impl_->opts.address + ":" + std::to_string(impl_->opts.port) +
                             ": " + e.code().message());
  }
}

WsServer::~WsServer() = default;

unsigned short WsServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void WsServer::run() {
  impl_->t0 = Clock::now();
  impl_->signals.add(SIGINT);
  impl_->signals.add(SIGTERM);
  impl_->signals.async_wait([this](beast::error_code ec, int) {
    if (!ec) impl_->stop_now();
  });
  impl_->accept();
  impl_->schedule_tick();
  impl_->io.run();
}

void WsServer::stop() {
  asio::post(impl_->io, [this] { impl_->stop_now(); });
}

void WsServer::inspect(const std::function<void(const std::map<std::string, const Server*>&)>& f) {
  std::promise<void> done;
  asio::post(impl_->io, [&] {
    std::map<std::string, const Server*> view;
    for (const auto& [name, h] : impl_->hubs) view[name] = h->server.get();
    try {
      f(view);
      done.set_value();
    } catch (...) {
      done.set_exception(std::current_exception());
    }
  });
  done.get_future().get();
}

BotClient run_ws_bot(BotScript script, const std::string& host, unsigned short port, const std::string& session,
                     std::int64_t max_ms) {
  asio::io_context io;
  tcp::resolver resolver(io);
  websocket::stream<beast::tcp_stream> ws(io);
  beast::get_lowest_layer(ws).connect(resolver.resolve(host, std::to_string(port)));
  ws.handshake(host + ":" + std::to_string(port), "/session/" + session);
  ws.text(true);

  BotClient bot(std::move(script));
  const Clock::time_point t0 = Clock::now();
  std::deque<std::string> out;
  bool writing = false;
  bool closing = false;
  beast::flat_buffer buf;
  asio::steady_timer timer(io);

  std::function<void()> read_loop = [&] {
    ws.async_read(buf, [&](beast::error_code ec, std::size_t) {
      if (ec) {
        closing = true;
        timer.cancel();
        return;
      }
      bot.receive(beast::buffers_to_string(buf.data()));
      buf.consume(buf.size());
      read_loop();
    });
  };
  std::function<void()> write_next = [&] {
    if (out.empty() || closing) {
      writing = false;
      return;
    }
    writing = true;
    ws.async_write(asio::buffer(out.front()), [&](beast::error_code ec, std::size_t) {
      writing = false;
      if (ec) return;
      out.pop_front();
      write_next();
    });
  };
  std::function<void()> poll = [&] {
    if (closing) return;
    const std::int64_t now = elapsed_ms(t0);
    for (Outgoing& o : bot.poll(now)) out.push_back(std::move(o.text));
    if (!writing) write_next();
    if ((bot.finished() && out.empty() && !writing) || now > max_ms) {
      closing = true;
      ws.async_close(websocket::close_code::normal, [](beast::error_code) {});
      return;
    }
    timer.expires_after(std::chrono::milliseconds(5));
    timer.async_wait([&](beast::error_code ec) {
      if (!ec) poll();
    });
  };

  read_loop();
  poll();
  io.run();
  return bot;
}

}  // namespace sparc::net
