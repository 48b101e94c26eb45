#include <doctest.h>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <thread>

#include "sparc/ws.hpp"
#include "support.hpp"

using namespace sparc;
using namespace sparc::net;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = boost::asio::ip::tcp;

namespace {

struct Running {
  WsServer server;
  std::thread thread;
  explicit Running(std::string log = {})
      : server(WsOptions{"127.0.0.1", 0, std::move(log)},
               [](const std::string&) { return test::bedlam_config(Condition::Sparc); }),
        thread([this] { server.run(); }) {}
  ~Running() {
    server.stop();
    thread.join();
  }
};

wire::Envelope read_envelope(websocket::stream<tcp::socket>& ws) {
  beast::flat_buffer buf;
  ws.read(buf);
  return wire::decode(beast::buffers_to_string(buf.data()));
}

}  // namespace

TEST_SUITE("ws") {

TEST_CASE("hello over a socket gets welcome then snapshots") {
  Running r;
  boost::asio::io_context io;
  websocket::stream<tcp::socket> ws(io);
  ws.next_layer().connect({boost::asio::ip::make_address("127.0.0.1"), r.server.port()});
  ws.handshake("127.0.0.1", "/session/main");
  ws.text(true);
  ws.write(boost::asio::buffer(wire::encode({0, 0, wire::Hello{"ana", 0, session::Role::assembler()}})));
  const wire::Envelope w = read_envelope(ws);
  REQUIRE(std::holds_alternative<wire::Welcome>(w.body));
  CHECK(std::get<wire::Welcome>(w.body).seat == 0);
  bool snapshot = false;
  for (int i = 0; i < 5 && !snapshot; ++i) {
    const wire::Envelope e = read_envelope(ws);
    if (const auto* s = std::get_if<wire::Snapshot>(&e.body)) {
      snapshot = true;
      CHECK(s->avatars.size() == 1);
      CHECK(s->phase == session::Phase::Lobby);
    }
  }
  CHECK(snapshot);
  r.server.inspect([](const std::map<std::string, const Server*>& hubs) {
    REQUIRE(hubs.count("main") == 1);
    CHECK(hubs.at("main")->session().state().seats.size() == 1);
  });
  ws.close(websocket::close_code::normal);
}

TEST_CASE("unknown paths get 404") {
  Running r;
  boost::asio::io_context io;
  tcp::socket sock(io);
  sock.connect({boost::asio::ip::make_address("127.0.0.1"), r.server.port()});
  http::request<http::empty_body> req(http::verb::get, "/elsewhere", 11);
  req.set(http::field::host, "127.0.0.1");
  http::write(sock, req);
  beast::flat_buffer buf;
  http::response<http::string_body> res;
  http::read(sock, buf, res);
  CHECK(res.result() == http::status::not_found);
}

TEST_CASE("bots play the trio over websockets") {
  const std::string log = "ws_trio_test.jsonl";
  {
    Running r(log);
    const auto scripts = load_bot_scripts(test::source_path("scripts/trio"));
    std::vector<std::thread> threads;
    std::vector<std::optional<BotClient>> bots(scripts.size());
    for (std::size_t i = 0; i < scripts.size(); ++i) {
      // Let the assembler and earlier seats join first.
      std::this_thread::sleep_for(std::chrono::milliseconds(30));
      threads.emplace_back([&, i] { bots[i] = run_ws_bot(scripts[i], "127.0.0.1", r.server.port(), "trio", 60000); });
    }
    for (auto& t : threads) t.join();
    r.server.inspect([](const std::map<std::string, const Server*>& hubs) {
      const auto& st = hubs.at("trio")->session().state();
      CHECK(st.phase == session::Phase::Finished);
      CHECK(st.cursor == 13);
    });
    for (const auto& b : bots) {
      REQUIRE(b.has_value());
      CHECK_FALSE(b->aborted());
      CHECK(b->welcome().has_value());
    }
  }
  // The log replays to the same report it ends with.
  std::vector<session::EventRecord> records;
  std::optional<wire::Report> report;
  std::istringstream in(test::read_file(log));
  for (std::string line; std::getline(in, line);) {
    const wire::Envelope e = wire::decode(line);
    if (const auto* ev = std::get_if<wire::Event>(&e.body)) records.push_back(ev->record);
    if (const auto* rep = std::get_if<wire::Report>(&e.body)) report = *rep;
  }
  REQUIRE(report.has_value());
  CHECK(session::Session::replay(records).metrics() == report->metrics);
  CHECK(report->metrics.correct_placements == 13);
  std::remove(log.c_str());
}

}
