#include "sparc/fixtures.hpp"

#include <random>
#include <stdexcept>

#include "sparc/session.hpp"

namespace sparc::fixtures {

using json::ObjectBuilder;
using json::Value;

namespace {

Value vector_json(int id, geo::Vec3 p, int ru, int lu, Condition cond, const geo::TableFrame& frame) {
  const geo::SeatIndex r(ru);
  const geo::SeatIndex l(lu);
  const geo::Vec3 canonical = geo::to_canonical(p, r, cond, frame);
  const geo::Vec3 mapped = geo::map_reference(p, r, l, cond, frame);
  return ObjectBuilder()
      .add("id", id)
      .add("condition", session::to_string(cond))
      .add("ru", ru)
      .add("lu", lu)
      .add("p", session::to_json(p))
      .add("canonical", session::to_json(session::quantize(canonical)))
      .add("mapped", session::to_json(session::quantize(mapped)))
      .build();
}

}  // namespace

Value mapping_vectors(std::uint64_t seed, int count, const geo::TableFrame& frame) {
  constexpr int kFixed = 64 + 8;
  if (count < kFixed) throw std::invalid_argument("need at least " + std::to_string(kFixed) + " vectors");
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53); };
  const geo::Box& ws = frame.workspace_bounds;

  json::Array vectors;
  int id = 0;
  const geo::Vec3 fixed = session::quantize(frame.center + geo::Vec3{0.3, 0.15, -0.2});
  for (int ru = 0; ru < geo::kSeatCount; ++ru) {
    for (int lu = 0; lu < geo::kSeatCount; ++lu) vectors.push_back(vector_json(id++, fixed, ru, lu, Condition::Sparc, frame));
  }
  for (int ru = 0; ru < geo::kSeatCount; ++ru) {
    vectors.push_back(vector_json(id++, fixed, ru, (ru + 2) % geo::kSeatCount, Condition::Veridical, frame));
  }
  while (id < count) {
    const geo::Vec3 p = session::quantize(
        geo::Vec3{uniform(ws.min.x, ws.max.x), uniform(ws.min.y, ws.max.y), uniform(ws.min.z, ws.max.z)});
    const int ru = static_cast<int>(rng() % geo::kSeatCount);
    const int lu = static_cast<int>(rng() % geo::kSeatCount);
    const Condition cond = rng() % 4 == 0 ? Condition::Veridical : Condition::Sparc;
    vectors.push_back(vector_json(id++, p, ru, lu, cond, frame));
  }
  return ObjectBuilder()
      .add("tolerance", kTolerance)
      .add("seed", std::to_string(seed))
      .add("frame", session::frame_to_json(frame))
      .add("vectors", Value(std::move(vectors)))
      .build();
}

std::string format(const Value& doc) {
  std::string out = "{";
  bool first = true;
  for (const json::Member& m : doc.as_object()) {
    if (!first) out += ",";
    first = false;
    out += "\n";
    json::write_string(out, m.key);
    out += ":";
    if (m.key == "vectors") {
      out += "[";
      const json::Array& vs = m.value.as_array();
      for (std::size_t i = 0; i < vs.size(); ++i) {
        out += i == 0 ? "\n" : ",\n";
        json::write(out, vs[i]);
      }
      out += "\n]";
    } else {
      json::write(out, m.value);
    }
  }
  out += "\n}\n";
  return out;
}

}  // namespace sparc::fixtures
