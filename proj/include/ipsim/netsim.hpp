#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ipsim/locator.hpp"
#include "ipsim/rng.hpp"
#include "ipsim/scenario.hpp"
#include "ipsim/types.hpp"

namespace ipsim {

class FramingError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class CorruptionError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Datagram an agent node sends to the server: which node, a per-node
// monotonically increasing sequence number, the measurement clock and the
// three estimated anchor distances. Sequence gaps model datagram loss; the
// channel never reorders.
struct DistanceReport {
    std::uint8_t node_id = 0;        // 1 = human, 2 = robot
    std::uint32_t seq = 0;
    std::uint64_t timestamp_ms = 0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;
};

bool operator==(const DistanceReport& a, const DistanceReport& b);

// Wire frame: little-endian fields in declaration order (1 + 4 + 8 + 3*8 =
// 37 payload bytes) followed by CRC-16/CCITT-FALSE over the payload, also
// little-endian. 39 bytes total. Distances travel as IEEE-754 doubles so the
// server reproduces the sender's values bit-exactly.
inline constexpr std::size_t kReportFrameSize = 39;
using ReportFrame = std::array<std::uint8_t, kReportFrameSize>;

// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no xorout.
std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data);

ReportFrame encode_report(const DistanceReport& report);

// Throws FramingError on wrong length, CorruptionError on checksum mismatch.
DistanceReport decode_report(std::span<const std::uint8_t> bytes);

enum class NavFlag { Safe, Close };

inline const char* to_string(NavFlag flag) { return flag == NavFlag::Close ? "CLOSE" : "SAFE"; }

// Navigation signal the server emits once it holds fresh data for both
// agents. CLOSE iff the estimated separation is under 0.5 m; exactly 0.5 m
// is safe.
struct NavSignal {
    std::uint64_t timestamp_ms = 0;
    NavFlag flag = NavFlag::Safe;
    double separation_est = 0.0;
};

// JSON line: {"t_ms":...,"flag":"SAFE"|"CLOSE","sep":...}
std::string navsignal_json_line(const NavSignal& signal);

struct ChannelConfig {
    double drop_probability = 0.0;  // [0, 1); 1 would starve the server
    int latency_ticks = 0;
    std::uint64_t seed = 0;
};

void validate(const ChannelConfig& config);

// In-order datagram channel: each frame is dropped with drop_probability,
// surviving frames arrive latency_ticks later. FIFO, so no reordering.
class LossyChannel {
public:
    explicit LossyChannel(const ChannelConfig& config);

    void send(std::uint64_t tick, const ReportFrame& frame);
    std::vector<ReportFrame> deliver(std::uint64_t tick);

    std::uint64_t frames_sent() const { return sent_; }
    std::uint64_t frames_dropped() const { return dropped_; }

private:
    struct InFlight {
        std::uint64_t arrival_tick;
        ReportFrame frame;
    };

    ChannelConfig config_;
    Rng rng_;
    std::deque<InFlight> in_flight_;
    std::uint64_t sent_ = 0;
    std::uint64_t dropped_ = 0;
};

inline constexpr int kDefaultStalenessTicks = 5;

struct ServerConfig {
    AnchorLayout layout;
    int staleness_horizon_ticks = kDefaultStalenessTicks;
};

struct ServerOutput {
    std::optional<Position> human;
    std::optional<Position> robot;
    std::optional<NavSignal> signal;
};

// The central node: per tick it ingests whatever frames arrived, keeps the
// freshest report per node (latest-wins), and emits positions plus a
// NavSignal whenever both cached reports are at most staleness_horizon_ticks
// old. A node silent beyond the horizon suppresses the signal; nothing
// crashes on missing data. Staleness is counted from the tick of receipt.
class ProximityServer {
public:
    explicit ProximityServer(const ServerConfig& config);

    // tick orders the loop, t_ms stamps the emitted signal.
    ServerOutput step(std::uint64_t tick, std::uint64_t t_ms, std::span<const ReportFrame> pending);

    std::uint64_t corrupted_frames() const { return corrupted_; }
    std::uint64_t framing_errors() const { return framing_; }

private:
    struct NodeCache {
        bool valid = false;
        std::uint32_t seq = 0;
        std::uint64_t received_tick = 0;
        DistanceVector vector;
    };

    std::optional<Position> locate(const NodeCache& cache, std::uint64_t tick) const;

    ServerConfig config_;
    NodeCache human_;
    NodeCache robot_;
    std::uint64_t corrupted_ = 0;
    std::uint64_t framing_ = 0;
};

struct NetRunResult {
    std::vector<ServerOutput> outputs;  // one entry per tick
    std::uint64_t reports_sent = 0;
    std::uint64_t reports_dropped = 0;
    std::uint64_t reports_corrupted = 0;

    // Fraction of ticks with an emitted NavSignal.
    double signal_rate() const;
    std::vector<NavSignal> signals() const;
};

// Scenario through the node/channel/server topology. Same measurement
// generation as run_scenario; with drop 0 and latency 0 the emitted
// separations match the direct pipeline bit for bit.
NetRunResult run_scenario_net(const ScenarioSpec& spec, const ChannelConfig& channel,
                              int staleness_horizon_ticks = kDefaultStalenessTicks);

struct NetSettings {
    ChannelConfig channel;
    int staleness_horizon_ticks = kDefaultStalenessTicks;
};

// Optional "channel" block of a scenario JSON document:
//   {"drop_probability":..., "latency_ticks":..., "seed":..., "staleness_horizon":...}
std::optional<NetSettings> net_settings_from_json_text(const std::string& text);

}  // namespace ipsim
