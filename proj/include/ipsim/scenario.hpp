#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ipsim/locator.hpp"
#include "ipsim/pathloss.hpp"
#include "ipsim/types.hpp"

namespace ipsim {

// One experiment: waypoint paths for both agents, a sampling clock, the
// anchor frame and per-anchor radio parameters. Agents move at constant
// speed along their waypoint polyline (single waypoint = stationary).
struct ScenarioSpec {
    std::string name;
    std::vector<Vec2> human_path;
    std::vector<Vec2> robot_path;
    double duration = 5.0;        // seconds
    double sample_period = kDefaultSamplePeriodSeconds;
    NoiseConfig noise;
    AnchorLayout layout;
    std::array<PathLossParams, 3> params{PathLossParams{1, -45.0, 3.0},
                                         PathLossParams{2, -45.0, 3.0},
                                         PathLossParams{3, -45.0, 3.0}};
};

void validate(const ScenarioSpec& spec);

// The four experiments: one stationary pair (90 s) and three mobile runs
// (5 s each). Mobile runs start from the stationary placements, human at
// (1,0) and robot at (2,2).
//   stationary  human (1,0), robot (2,2), both fixed
//   scenario1   human -> (2,0.5), robot -> (2,1)
//   scenario2   human -> (1,1.5), robot -> (1,2)
//   scenario3   both  -> (2,1), a collision course
std::vector<ScenarioSpec> builtin_scenarios();
ScenarioSpec builtin_scenario(std::string_view name);  // throws on unknown name

// Constant-speed piecewise-linear interpolation along the waypoint list,
// parameterized by arc length. t must lie in [0, duration].
Vec2 true_position(const std::vector<Vec2>& path, double duration, double t);

// Inclusive tick count: floor(duration / period) + 1, with a small epsilon
// so 90 s / 0.1 s lands on 901 rather than falling off a ulp.
std::size_t frame_count(double duration, double period);

struct GroundTruthFrame {
    double timestamp = 0.0;
    Position human_true;
    Position robot_true;
    double true_separation = 0.0;  // recomputed from the true positions
    int true_label = 0;            // 1 iff true_separation < 0.5 m
};

struct EstimatedFrame {
    double timestamp = 0.0;
    Position human_est;
    Position robot_est;
    double sep_est = 0.0;
    int predicted_label = 0;
};

// Per-tick sensor output shared by the direct and the networked pipelines:
// both consume the exact same noise stream, so a loss-free network run is
// bit-identical to the direct one.
struct MeasurementFrame {
    double timestamp = 0.0;
    Position human_true;
    Position robot_true;
    DistanceVector human_meas;
    DistanceVector robot_meas;
};

// Tick loop: true positions -> true anchor distances -> noisy RSSI ->
// estimated distances. One Gaussian draw per agent and anchor per tick
// (human first, anchors 1..3), all from the NoiseConfig seed.
std::vector<MeasurementFrame> simulate_measurements(const ScenarioSpec& spec);

struct ScenarioRun {
    std::vector<GroundTruthFrame> truth;
    std::vector<std::pair<DistanceVector, DistanceVector>> measurements;  // human, robot
    std::vector<EstimatedFrame> estimates;
};

// Full direct pipeline: measurements, trilateration of both agents,
// estimated separation and predicted label per tick. Deterministic given
// its input (all randomness comes from spec.noise.seed).
ScenarioRun run_scenario(const ScenarioSpec& spec);

GroundTruthFrame ground_truth_at(const ScenarioSpec& spec, double t);

// Scenario JSON document (see README for the schema).
ScenarioSpec scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const ScenarioSpec& spec);

}  // namespace ipsim
