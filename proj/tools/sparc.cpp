// sparc: serve sessions, run deterministic simulations, replay logs, solve
// piece sets and generate bot scripts.
//
// Exit codes: 0 ok, 1 runtime failure, 2 usage or invalid input.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "sparc/fixtures.hpp"
#include "sparc/puzzle.hpp"
#include "sparc/session.hpp"
#include "sparc/sim.hpp"
#include "sparc/wire.hpp"
#include "sparc/ws.hpp"

namespace {

using namespace sparc;

// Input the user can fix: bad files, bad flag combinations.
struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::map<std::string, Condition> kConditions{{"sparc", Condition::Sparc}, {"veridical", Condition::Veridical}};

puzzle::PieceSet load_pieces(const std::string& path, const geo::TableFrame& frame) {
  try {
    const puzzle::PieceSet probe = puzzle::load_piece_set_file(path);
    return puzzle::load_piece_set_file(path, puzzle::GridSpec::centered_on(frame.center, probe.dim()));
  } catch (const puzzle::ParseError& e) {
    throw InvalidInput(path + ": " + e.what());
  } catch (const puzzle::ValidationError& e) {
    throw InvalidInput(path + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw InvalidInput(e.what());
  }
}

session::SessionConfig make_config(const std::string& pieces_path, Condition condition) {
  const geo::TableFrame frame;
  return session::SessionConfig::make(condition, load_pieces(pieces_path, frame), frame);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------

struct ServeArgs {
  std::string address = "0.0.0.0";
  int port = net::kDefaultPort;
  Condition condition = Condition::Sparc;
  std::string pieces;
  std::string log;
};

int cmd_serve(const ServeArgs& a) {
  const session::SessionConfig config = make_config(a.pieces, a.condition);
  net::WsServer server({a.address, static_cast<unsigned short>(a.port), a.log},
                       [config](const std::string&) { return config; });
  std::cout << json::dump(json::ObjectBuilder().add("listening", static_cast<int>(server.port())).build())
            << std::endl;
  server.run();
  return 0;
}

struct SimulateArgs {
  std::string scripts;
  std::string pieces;
  Condition condition = Condition::Sparc;
  std::uint64_t seed = 1;
  std::int64_t latency = 40;
  std::int64_t jitter = 10;
  double drop = 0.01;
  std::string log;
  std::string fixtures;
  int fixture_count = fixtures::kDefaultVectorCount;
};

int cmd_simulate(const SimulateArgs& a) {
  if (!a.fixtures.empty()) {
    write_file(a.fixtures, fixtures::format(fixtures::mapping_vectors(a.seed, a.fixture_count)));
    std::cerr << "wrote " << a.fixture_count << " vectors to " << a.fixtures << "\n";
    return 0;
  }
  if (a.scripts.empty() || a.pieces.empty()) throw InvalidInput("simulate needs --scripts and --pieces");

  net::SimOptions options;
  options.transport = {a.latency, a.jitter, a.drop, a.seed};
  try {
    options.transport.validate();
  } catch (const std::invalid_argument& e) {
    throw InvalidInput(e.what());
  }
  std::vector<net::BotScript> scripts;
  try {
    scripts = net::load_bot_scripts(a.scripts);
  } catch (const net::ScriptError& e) {
    throw InvalidInput(e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    throw InvalidInput(e.what());
  }

  net::SimWorld world(make_config(a.pieces, a.condition), std::move(scripts), options);
  const net::SimResult r = world.run();

  const wire::Report report{r.metrics, a.log, a.seed, a.condition};
  const std::string trailer = wire::encode({static_cast<std::int64_t>(r.log_lines.size()), r.end_ms, report});
  if (!a.log.empty()) {
    std::string text;
    for (const auto& line : r.log_lines) text += line + "\n";
    write_file(a.log, text + trailer + "\n");
  }
  std::cout << trailer << "\n";

  for (const auto& e : r.bot_errors) std::cerr << "bot " << e << "\n";
  for (const auto& d : r.diagnostics) std::cerr << "server: " << d << "\n";
  std::cerr << "virtual time " << r.end_ms << " ms, " << r.sent << " messages, " << r.dropped << " dropped, "
            << (r.converged ? "snapshots agree" : "snapshots DISAGREE") << "\n";
  if (r.timed_out) {
    std::cerr << "simulation hit the time limit\n";
    return 1;
  }
  return 0;
}

struct ReplayArgs {
  std::string log;
  bool check = false;
};

int cmd_replay(const ReplayArgs& a) {
  std::ifstream in(a.log, std::ios::binary);
  if (!in) throw InvalidInput("cannot read log '" + a.log + "'");
  std::vector<session::EventRecord> records;
  std::optional<wire::Report> embedded;
  std::string line;
  int line_no = 0;
  bool truncated = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const bool last_unterminated = in.eof();
    if (embedded) throw InvalidInput(a.log + ":" + std::to_string(line_no) + ": content after the report");
    wire::Envelope env;
    try {
      env = wire::decode(line);
    } catch (const wire::DecodeError& e) {
      if (last_unterminated) {
        std::cerr << a.log << ":" << line_no << ": ignoring incomplete final line\n";
        truncated = true;
        break;
      }
      throw InvalidInput(a.log + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (auto* ev = std::get_if<wire::Event>(&env.body)) {
      records.push_back(ev->record);
    } else if (auto* rep = std::get_if<wire::Report>(&env.body)) {
      embedded = *rep;
    } else {
      throw InvalidInput(a.log + ":" + std::to_string(line_no) + ": unexpected '" +
                         std::string(wire::type_of(env.body)) + "' envelope");
    }
  }

  session::MetricsReport metrics;
  try {
    metrics = session::Session::replay(records).metrics();
  } catch (const std::exception& e) {
    throw InvalidInput(a.log + ": " + e.what());
  }
  if (truncated) metrics.partial = true;
  wire::Report out{metrics, a.log, embedded ? embedded->seed : 0, Condition::Sparc};
  out.condition = records.empty() ? Condition::Sparc
                                  : session::parse_condition(records.front().payload.find("condition")->as_string());
  std::cout << wire::encode({static_cast<std::int64_t>(records.size()), 0, out}) << "\n";

  if (a.check) {
    if (!embedded) {
      std::cerr << "log has no embedded report\n";
      return 1;
    }
    if (!(embedded->metrics == metrics)) {
      std::cerr << "report mismatch\n  embedded:   " << json::dump(embedded->metrics.to_json())
                << "\n  recomputed: " << json::dump(metrics.to_json()) << "\n";
      return 1;
    }
    std::cerr << "report matches\n";
  }
  return 0;
}

struct SolveArgs {
  std::string pieces;
  std::uint64_t limit = 1;
  bool count = false;
};

json::Value placements_json(const puzzle::SolutionSequence& s) {
  json::Array out;
  for (const auto& p : s.placements) {
    out.push_back(json::Value(json::Array{json::Value(p.piece_id), json::Value(p.orientation.index()),
                                          json::Value(p.offset.x), json::Value(p.offset.y),
                                          json::Value(p.offset.z)}));
  }
  return json::Value(std::move(out));
}

int cmd_solve(const SolveArgs& a) {
  const puzzle::PieceSet pieces = load_pieces(a.pieces, {});
  const int dim = pieces.dim();
  std::uint64_t index = 0;
  try {
    if (a.count) {
      const std::uint64_t total = puzzle::solve(pieces, dim, 0, [&](const puzzle::SolutionSequence&) {
        if (++index % 1000 == 0) std::cout << json::dump(json::ObjectBuilder().add("count", index).build()) << std::endl;
        return true;
      });
      std::cout << json::dump(json::ObjectBuilder().add("count", total).add("done", true).build()) << std::endl;
      if (total == 0) throw puzzle::NoSolution();
      return 0;
    }
    puzzle::solve(pieces, dim, a.limit, [&](const puzzle::SolutionSequence& s) {
      puzzle::check_partition(s, pieces, dim);
      std::cout << json::dump(json::ObjectBuilder().add("solution", ++index).add("placements", placements_json(s)).build())
                << "\n";
      return true;
    });
  } catch (const std::invalid_argument& e) {
    throw InvalidInput(a.pieces + ": " + e.what());
  }
  return 0;
}

struct BotArgs {
  std::string host = "127.0.0.1";
  int port = net::kDefaultPort;
  std::string session = "main";
  std::string script;
};

int cmd_bot(const BotArgs& a) {
  net::BotScript script;
  try {
    script = net::load_bot_script(a.script);
  } catch (const net::ScriptError& e) {
    throw InvalidInput(e.what());
  }
  const net::BotClient bot = net::run_ws_bot(std::move(script), a.host, static_cast<unsigned short>(a.port), a.session);
  for (const auto& e : bot.errors()) std::cerr << "server error " << e.code << ": " << e.msg << "\n";
  json::ObjectBuilder out;
  out.add("bot", bot.script().name).add("finished", bot.finished()).add("events", static_cast<int>(bot.events().size()));
  if (bot.aborted()) out.add("aborted", bot.abort_reason());
  std::cout << json::dump(out.build()) << "\n";
  return bot.aborted() ? 1 : 0;
}

struct ScriptsArgs {
  std::string pieces;
  std::string out;
  int instructors = 2;
  bool wrong_first = false;
};

int cmd_scripts(const ScriptsArgs& a) {
  const session::SessionConfig config = make_config(a.pieces, Condition::Sparc);
  std::filesystem::create_directories(a.out);
  for (const auto& [name, text] : net::generate_scripts(config, a.instructors, a.wrong_first)) {
    write_file((std::filesystem::path(a.out) / name).string(), text);
    std::cout << (std::filesystem::path(a.out) / name).string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shared-perspective collaboration server, simulator and tools"};
  app.require_subcommand(1);

  ServeArgs serve;
  auto* s = app.add_subcommand("serve", "Host sessions over WebSocket at /session/<name>");
  s->add_option("--address", serve.address, "Listen address")->capture_default_str();
  s->add_option("--port", serve.port, "Listen port")->capture_default_str()->check(CLI::Range(0, 65535));
  s->add_option("--condition", serve.condition, "veridical or sparc")->transform(CLI::CheckedTransformer(kConditions));
  s->add_option("--pieces", serve.pieces, "Piece set file")->required();
  s->add_option("--log", serve.log, "Event log file");

  SimulateArgs sim;
  auto* m = app.add_subcommand("simulate", "Run bots against an in-process server on a virtual clock");
  m->add_option("--scripts", sim.scripts, "Directory of .bot scripts");
  m->add_option("--pieces", sim.pieces, "Piece set file");
  m->add_option("--condition", sim.condition, "veridical or sparc")->transform(CLI::CheckedTransformer(kConditions));
  m->add_option("--seed", sim.seed, "Network seed")->capture_default_str();
  m->add_option("--latency", sim.latency, "One-way latency, ms")->capture_default_str();
  m->add_option("--jitter", sim.jitter, "Uniform extra delay 0..jitter, ms")->capture_default_str();
  m->add_option("--drop", sim.drop, "Pose drop probability")->capture_default_str();
  m->add_option("--log", sim.log, "Event log file");
  m->add_option("--emit-fixtures", sim.fixtures, "Write mapping conformance vectors to this file and exit");
  m->add_option("--fixture-count", sim.fixture_count, "Number of conformance vectors")
      ->capture_default_str()
      ->check(CLI::Range(72, 1000000));

  ReplayArgs replay;
  auto* r = app.add_subcommand("replay", "Recompute the metrics report from an event log");
  r->add_option("--log", replay.log, "Event log file")->required();
  r->add_flag("--check", replay.check, "Fail when the embedded report differs");

  SolveArgs solve;
  auto* v = app.add_subcommand("solve", "Find tilings of a piece set");
  v->add_option("--pieces", solve.pieces, "Piece set file")->required();
  v->add_option("--limit", solve.limit, "Solutions to print")->capture_default_str()->check(CLI::Range(1ULL, ~0ULL));
  v->add_flag("--count", solve.count, "Count every tiling, streaming progress");

  BotArgs bot;
  auto* b = app.add_subcommand("bot", "Play one bot script against a running server");
  b->add_option("--host", bot.host)->capture_default_str();
  b->add_option("--port", bot.port)->capture_default_str()->check(CLI::Range(1, 65535));
  b->add_option("--session", bot.session)->capture_default_str();
  b->add_option("--script", bot.script, "Bot script file")->required();

  ScriptsArgs scripts;
  auto* g = app.add_subcommand("scripts", "Generate bot scripts that build the first tiling");
  g->add_option("--pieces", scripts.pieces, "Piece set file")->required();
  g->add_option("--out", scripts.out, "Output directory")->required();
  g->add_option("--instructors", scripts.instructors)->capture_default_str()->check(CLI::Range(1, 7));
  g->add_flag("--wrong-first", scripts.wrong_first, "Misplace the first piece once");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*s) return cmd_serve(serve);
    if (*m) return cmd_simulate(sim);
    if (*r) return cmd_replay(replay);
    if (*v) return cmd_solve(solve);
    if (*b) return cmd_bot(bot);
    if (*g) return cmd_scripts(scripts);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const puzzle::NoSolution& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
