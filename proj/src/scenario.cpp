#include "ipsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace ipsim {

void validate(const ScenarioSpec& spec) {
    if (!(spec.duration > 0.0) || !std::isfinite(spec.duration)) {
        throw std::invalid_argument("scenario duration must be > 0");
    }
    if (!(spec.sample_period > 0.0) || !std::isfinite(spec.sample_period)) {
        throw std::invalid_argument("scenario sample_period must be > 0");
    }
    if (frame_count(spec.duration, spec.sample_period) < 2) {
        throw std::invalid_argument("scenario must cover at least 2 samples");
    }
    if (spec.human_path.empty() || spec.robot_path.empty()) {
        throw std::invalid_argument("scenario paths need at least one waypoint");
    }
    validate(spec.layout);
    validate(spec.noise);
    for (int i = 0; i < 3; ++i) {
        validate(spec.params[static_cast<std::size_t>(i)]);
        if (spec.params[static_cast<std::size_t>(i)].ap_id != i + 1) {
            throw std::invalid_argument("scenario params must cover anchors 1, 2, 3 in order");
        }
    }
    for (const auto* path : {&spec.human_path, &spec.robot_path}) {
        for (const Vec2& w : *path) {
            if (!in_arena(w, spec.layout)) {
                throw std::invalid_argument("scenario waypoints must lie inside the arena");
            }
        }
    }
}

std::vector<ScenarioSpec> builtin_scenarios() {
    const Vec2 human_start{1.0, 0.0};
    const Vec2 robot_start{2.0, 2.0};

    ScenarioSpec stationary;
    stationary.name = "stationary";
    stationary.human_path = {human_start};
    stationary.robot_path = {robot_start};
    stationary.duration = 90.0;

    ScenarioSpec s1;
    s1.name = "scenario1";
    s1.human_path = {human_start, {2.0, 0.5}};
    s1.robot_path = {robot_start, {2.0, 1.0}};
    s1.duration = 5.0;

    ScenarioSpec s2;
    s2.name = "scenario2";
    s2.human_path = {human_start, {1.0, 1.5}};
    s2.robot_path = {robot_start, {1.0, 2.0}};
    s2.duration = 5.0;

    ScenarioSpec s3;
    s3.name = "scenario3";
    s3.human_path = {human_start, {2.0, 1.0}};
    s3.robot_path = {robot_start, {2.0, 1.0}};
    s3.duration = 5.0;

    return {stationary, s1, s2, s3};
}

ScenarioSpec builtin_scenario(std::string_view name) {
    for (ScenarioSpec& spec : builtin_scenarios()) {
        if (spec.name == name) return std::move(spec);
    }
    throw std::invalid_argument("unknown scenario '" + std::string(name) +
                                "' (builtin: stationary, scenario1, scenario2, scenario3)");
}

Vec2 true_position(const std::vector<Vec2>& path, double duration, double t) {
    if (path.empty()) {
        throw std::invalid_argument("path needs at least one waypoint");
    }
    const double slack = 1e-9 * std::max(1.0, duration);
    if (t < -slack || t > duration + slack) {
        throw std::out_of_range("time outside [0, duration]");
    }
    if (path.size() == 1) return path.front();

    double total = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i) {
        total += distance(path[i - 1], path[i]);
    }
    if (total == 0.0) return path.front();

    // Arc-length position at constant speed total/duration.
    double target = std::clamp(t / duration, 0.0, 1.0) * total;
    for (std::size_t i = 1; i < path.size(); ++i) {
        const double seg = distance(path[i - 1], path[i]);
        if (target <= seg || i == path.size() - 1) {
            if (seg == 0.0) return path[i];
            const double alpha = std::clamp(target / seg, 0.0, 1.0);
            return path[i - 1] + alpha * (path[i] - path[i - 1]);
        }
        target -= seg;
    }
    return path.back();
}

std::size_t frame_count(double duration, double period) {
    return static_cast<std::size_t>(std::floor(duration / period + 1e-9)) + 1;
}

GroundTruthFrame ground_truth_at(const ScenarioSpec& spec, double t) {
    GroundTruthFrame frame;
    frame.timestamp = t;
    const Vec2 h = true_position(spec.human_path, spec.duration, t);
    const Vec2 r = true_position(spec.robot_path, spec.duration, t);
    frame.human_true = Position{h.x, h.y, !in_arena(h, spec.layout)};
    frame.robot_true = Position{r.x, r.y, !in_arena(r, spec.layout)};
    frame.true_separation = distance(h, r);
    frame.true_label = proximity_label(frame.true_separation);
    return frame;
}

std::vector<MeasurementFrame> simulate_measurements(const ScenarioSpec& spec) {
    validate(spec);
    const std::size_t n = frame_count(spec.duration, spec.sample_period);
    Rng rng(spec.noise.seed);

    std::vector<MeasurementFrame> frames;
    frames.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * spec.sample_period;
        try {
            MeasurementFrame frame;
            frame.timestamp = t;
            const GroundTruthFrame truth = ground_truth_at(spec, t);
            frame.human_true = truth.human_true;
            frame.robot_true = truth.robot_true;

            auto measure = [&](Position true_pos, AgentId agent) {
                DistanceVector dv;
                dv.agent = agent;
                dv.timestamp = t;
                double* out[3] = {&dv.d1, &dv.d2, &dv.d3};
                for (int ap = 1; ap <= 3; ++ap) {
                    const PathLossParams& params = spec.params[static_cast<std::size_t>(ap - 1)];
                    const double d_true = std::max(
                        distance({true_pos.x, true_pos.y}, spec.layout.anchor(ap)),
                        kMinModelDistanceMeters);
                    const double rssi =
                        distance_to_rssi(d_true, params, spec.noise.sigma_db, rng);
                    *out[ap - 1] = rssi_to_distance(rssi, params);
                }
                return dv;
            };

            frame.human_meas = measure(frame.human_true, AgentId::Human);
            frame.robot_meas = measure(frame.robot_true, AgentId::Robot);
            frames.push_back(std::move(frame));
        } catch (const std::exception& e) {
            throw std::runtime_error("scenario '" + spec.name + "' tick " + std::to_string(i) +
                                     ": " + e.what());
        }
    }
    return frames;
}

ScenarioRun run_scenario(const ScenarioSpec& spec) {
    ScenarioRun run;
    const std::vector<MeasurementFrame> frames = simulate_measurements(spec);
    run.truth.reserve(frames.size());
    run.measurements.reserve(frames.size());
    run.estimates.reserve(frames.size());

    for (std::size_t i = 0; i < frames.size(); ++i) {
        const MeasurementFrame& frame = frames[i];
        GroundTruthFrame truth;
        truth.timestamp = frame.timestamp;
        truth.human_true = frame.human_true;
        truth.robot_true = frame.robot_true;
        truth.true_separation = separation(frame.human_true, frame.robot_true);
        truth.true_label = proximity_label(truth.true_separation);
        run.truth.push_back(truth);

        run.measurements.emplace_back(frame.human_meas, frame.robot_meas);

        EstimatedFrame est;
        est.timestamp = frame.timestamp;
        try {
            est.human_est = trilaterate(frame.human_meas, spec.layout);
            est.robot_est = trilaterate(frame.robot_meas, spec.layout);
        } catch (const std::exception& e) {
            throw std::runtime_error("scenario '" + spec.name + "' tick " + std::to_string(i) +
                                     ": " + e.what());
        }
        est.sep_est = separation(est.human_est, est.robot_est);
        est.predicted_label = proximity_label(est.sep_est);
        run.estimates.push_back(est);
    }
    return run;
}

namespace {

using nlohmann::json;

std::vector<Vec2> path_from_json(const json& j, const char* key) {
    std::vector<Vec2> path;
    for (const json& point : j.at(key)) {
        if (!point.is_array() || point.size() != 2) {
            throw std::invalid_argument(std::string(key) + " waypoints must be [x, y] pairs");
        }
        path.push_back({point[0].get<double>(), point[1].get<double>()});
    }
    return path;
}

json path_to_json(const std::vector<Vec2>& path) {
    json j = json::array();
    for (const Vec2& w : path) j.push_back({w.x, w.y});
    return j;
}

}  // namespace

ScenarioSpec scenario_from_json_text(const std::string& text) {
    const json j = json::parse(text);
    ScenarioSpec spec;
    spec.name = j.value("name", std::string("custom"));
    spec.human_path = path_from_json(j, "human_path");
    spec.robot_path = path_from_json(j, "robot_path");
    spec.duration = j.at("duration").get<double>();
    spec.sample_period = j.value("sample_period", kDefaultSamplePeriodSeconds);
    if (j.contains("noise")) {
        spec.noise.sigma_db = j["noise"].value("sigma_db", spec.noise.sigma_db);
        spec.noise.seed = j["noise"].value("seed", spec.noise.seed);
    }
    if (j.contains("layout")) {
        spec.layout.a2_x = j["layout"].value("a2_x", spec.layout.a2_x);
        spec.layout.a3_y = j["layout"].value("a3_y", spec.layout.a3_y);
    }
    if (j.contains("params")) {
        const json& params = j["params"];
        if (!params.is_array() || params.size() != 3) {
            throw std::invalid_argument("scenario params must list exactly 3 access points");
        }
        std::array<PathLossParams, 3> parsed;
        std::array<bool, 3> seen{};
        for (const json& p : params) {
            const int ap_id = p.at("ap_id").get<int>();
            if (ap_id < 1 || ap_id > 3 || seen[static_cast<std::size_t>(ap_id - 1)]) {
                throw std::invalid_argument("scenario params need ap_id 1, 2 and 3 exactly once");
            }
            seen[static_cast<std::size_t>(ap_id - 1)] = true;
            parsed[static_cast<std::size_t>(ap_id - 1)] = PathLossParams{
                ap_id, p.at("a_ref").get<double>(), p.at("n_env").get<double>()};
        }
        spec.params = parsed;
    }
    validate(spec);
    return spec;
}

std::string scenario_to_json_text(const ScenarioSpec& spec) {
    json j;
    j["name"] = spec.name;
    j["human_path"] = path_to_json(spec.human_path);
    j["robot_path"] = path_to_json(spec.robot_path);
    j["duration"] = spec.duration;
    j["sample_period"] = spec.sample_period;
    j["noise"] = {{"sigma_db", spec.noise.sigma_db}, {"seed", spec.noise.seed}};
    j["layout"] = {{"a2_x", spec.layout.a2_x}, {"a3_y", spec.layout.a3_y}};
    json params = json::array();
    for (const PathLossParams& p : spec.params) {
        params.push_back({{"ap_id", p.ap_id}, {"a_ref", p.a_ref}, {"n_env", p.n_env}});
    }
    j["params"] = params;
    return j.dump(2);
}

}  // namespace ipsim
