#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace ipsim {

// Separation below this is "close" (label 1); exactly 0.5 m is safe.
inline constexpr double kProximityThresholdMeters = 0.5;

inline constexpr double kDefaultSamplePeriodSeconds = 0.1;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

enum class AgentId : std::uint8_t { Human = 1, Robot = 2 };

inline std::string_view to_string(AgentId id) {
    return id == AgentId::Human ? "human" : "robot";
}

// One agent's estimated distances to the three anchors at one instant.
struct DistanceVector {
    AgentId agent = AgentId::Human;
    double timestamp = 0.0;  // seconds since scenario start
    double d1 = 0.0;         // meters to anchor 1
    double d2 = 0.0;         // meters to anchor 2
    double d3 = 0.0;         // meters to anchor 3
};

// A 2-D fix in the anchor frame. Fixes outside the arena are flagged and
// retained; clipping them would bias the deviation statistics.
struct Position {
    double x = 0.0;
    double y = 0.0;
    bool out_of_bounds = false;
};

inline int proximity_label(double separation_m) {
    return separation_m < kProximityThresholdMeters ? 1 : 0;
}

}  // namespace ipsim
