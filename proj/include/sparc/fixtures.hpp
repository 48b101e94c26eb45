#pragma once

// Cross-language conformance vectors for reference mapping.

#include <cstdint>
#include <string>

#include "sparc/geometry.hpp"
#include "sparc/json.hpp"

namespace sparc::fixtures {

inline constexpr int kDefaultVectorCount = 200;
inline constexpr double kTolerance = 1e-6;

/// All 64 seat pairs under Sparc, eight Veridical pairs, then seeded random
/// cases until `count` vectors exist. Each vector holds the remote user's
/// displayed point `p` and the expected canonical and local displayed points.
json::Value mapping_vectors(std::uint64_t seed, int count = kDefaultVectorCount, const geo::TableFrame& frame = {});

/// One vector per line inside a single JSON document.
std::string format(const json::Value& doc);

}  // namespace sparc::fixtures
