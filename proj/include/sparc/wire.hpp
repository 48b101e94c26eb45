#pragma once

// Text envelopes exchanged between clients and the session server.
//
//   {"t":<type>,"seq":<int>,"ts":<int>,"body":{...}}
//
// Decoding is strict: unknown types and unknown fields are rejected with the
// byte offset of the offending token.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sparc/json.hpp"
#include "sparc/session.hpp"

namespace sparc::wire {

using json::DecodeError;

struct Hello {
  std::string name;
  int seat = 0;
  session::Role role;
  friend bool operator==(const Hello&, const Hello&) = default;
};

struct Welcome {
  int seat = 0;
  session::Role role;
  Condition condition = Condition::Sparc;
  double angle_deg = 0.0;
  std::string piece_set;
  geo::TableFrame table;
  puzzle::GridSpec grid;
  friend bool operator==(const Welcome&, const Welcome&) = default;
};

struct Start {
  friend bool operator==(const Start&, const Start&) = default;
};

/// Avatar sample in the sender's displayed frame.
struct PoseMsg {
  geo::Pose head;
  session::HandState left;
  session::HandState right;
  std::int64_t tick = 0;
  friend bool operator==(const PoseMsg&, const PoseMsg&) = default;
};

struct Grab {
  std::string piece;
  Handedness hand = Handedness::Right;
  friend bool operator==(const Grab&, const Grab&) = default;
};

struct Release {
  geo::Pose pose;
  friend bool operator==(const Release&, const Release&) = default;
};

struct SnapshotAvatar {
  session::ClientId client;
  int seat = 0;
  session::Role role;
  std::int64_t tick = -1;
  geo::Pose head;
  session::HandState left;
  session::HandState right;
  session::DistortionState distortion;
  friend bool operator==(const SnapshotAvatar&, const SnapshotAvatar&) = default;
};

struct Target {
  puzzle::Placement placement;
  puzzle::CellSet cells;
  friend bool operator==(const Target&, const Target&) = default;
};

struct Snapshot {
  std::int64_t clock_ms = 0;
  session::Phase phase = session::Phase::Lobby;
  std::vector<session::PieceState> pieces;
  std::vector<SnapshotAvatar> avatars;
  std::optional<Target> target;
  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

struct Event {
  session::EventRecord record;
  friend bool operator==(const Event&, const Event&) = default;
};

struct Error {
  std::string code;
  std::string msg;
  friend bool operator==(const Error&, const Error&) = default;
};

struct Bye {
  friend bool operator==(const Bye&, const Bye&) = default;
};

/// Trailer of simulation and replay logs.
struct Report {
  session::MetricsReport metrics;
  std::string log;
  std::uint64_t seed = 0;
  Condition condition = Condition::Sparc;
  friend bool operator==(const Report&, const Report&) = default;
};

using Body = std::variant<Hello, Welcome, Start, PoseMsg, Grab, Release, Snapshot, Event, Error, Bye, Report>;

struct Envelope {
  std::int64_t seq = 0;
  std::int64_t ts = 0;
  Body body;
  friend bool operator==(const Envelope&, const Envelope&) = default;
};

std::string_view type_of(const Body& body);

std::string encode(const Envelope& envelope);
/// Throws DecodeError.
Envelope decode(std::string_view text);

json::Value body_to_json(const Body& body);

session::AvatarState avatar_of(const PoseMsg& pose);
PoseMsg pose_msg(const session::AvatarState& avatar, std::int64_t tick);

/// Canonical puzzle state only: phase and pieces, encoded. Used to compare
/// what different clients last saw.
std::string puzzle_state_text(const Snapshot& snapshot);

std::vector<session::AvatarView> avatar_views(const Snapshot& snapshot);

/// Event log line for one record; `index` becomes the envelope seq.
std::string log_line(const session::EventRecord& record, std::int64_t index);

}  // namespace sparc::wire
