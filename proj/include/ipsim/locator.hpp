#pragma once

#include <iosfwd>
#include <vector>

#include "ipsim/types.hpp"

namespace ipsim {

// The trilateration frame: anchor 1 at the origin, anchor 2 on the x axis,
// anchor 3 on the y axis. Defaults put anchors 2 and 3 on the far corners of
// the 3 m x 3 m arena. x2 > 0 and y3 > 0 keep the three non-collinear.
struct AnchorLayout {
    double a2_x = 3.0;
    double a3_y = 3.0;

    Vec2 anchor(int id) const;  // id in 1..3
};

void validate(const AnchorLayout& layout);
void validate(const DistanceVector& d);

// True iff p lies inside [0, a2_x] x [0, a3_y].
bool in_arena(Vec2 p, const AnchorLayout& layout);

// Closed-form trilateration from circle subtraction with anchors at (0,0),
// (x2,0), (0,y3):
//   x = (x2^2 + d1^2 - d2^2) / (2 x2)
//   y = (y3^2 + d1^2 - d3^2) / (2 y3)
// Total for valid inputs; inconsistent distances just land somewhere with a
// nonzero residual().
Position trilaterate(const DistanceVector& d, const AnchorLayout& layout);

// RMS range residual of a fix: sqrt(mean_i (|p - anchor_i| - d_i)^2).
// Zero exactly when the distances are consistent with p.
double residual(const DistanceVector& d, const AnchorLayout& layout, const Position& p);

struct RangeMeasurement {
    Vec2 anchor;
    double range = 0.0;  // meters
};

struct LsFix {
    Position position;
    bool converged = false;
    int iterations = 0;
    double rms_residual = 0.0;
};

inline constexpr int kLsMaxIterations = 100;
inline constexpr double kLsStepTolerance = 1e-9;  // meters

// Damped (Levenberg-Marquardt) least-squares range solver for >= 3
// non-collinear anchors. Stops when the accepted step norm drops below
// kLsStepTolerance or the iteration budget runs out; in the latter case the
// best iterate is returned with converged == false.
LsFix multilaterate_ls(const std::vector<RangeMeasurement>& measurements, Position initial);

// Convenience overload: initializes from the closed form on the first three
// anchors, which sits inside the basin of attraction for arena geometries.
LsFix multilaterate_ls(const std::vector<RangeMeasurement>& measurements);

// Euclidean human-robot separation.
double separation(const Position& a, const Position& b);

struct PositionRecord {
    double timestamp = 0.0;
    AgentId agent = AgentId::Human;
    Position position;
};

// CSV with header "timestamp,agent_id,x,y,out_of_bounds".
void write_positions_csv(std::ostream& out, const std::vector<PositionRecord>& records);

}  // namespace ipsim
