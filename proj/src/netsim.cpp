#include "ipsim/netsim.hpp"

#include <bit>
#include <cmath>

#include "json.hpp"
#include "textio.hpp"

namespace ipsim {

bool operator==(const DistanceReport& a, const DistanceReport& b) {
    return a.node_id == b.node_id && a.seq == b.seq && a.timestamp_ms == b.timestamp_ms &&
           a.d1 == b.d1 && a.d2 == b.d2 && a.d3 == b.d3;
}

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data) {
    std::uint16_t crc = 0xFFFF;
    for (std::uint8_t byte : data) {
        crc ^= static_cast<std::uint16_t>(byte) << 8;
        for (int bit = 0; bit < 8; ++bit) {
            crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021)
                                 : static_cast<std::uint16_t>(crc << 1);
        }
    }
    return crc;
}

namespace {

void put_u32(std::uint8_t* out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

void put_u64(std::uint8_t* out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint32_t get_u32(const std::uint8_t* in) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(const std::uint8_t* in) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
    return v;
}

}  // namespace

ReportFrame encode_report(const DistanceReport& report) {
    ReportFrame frame{};
    frame[0] = report.node_id;
    put_u32(frame.data() + 1, report.seq);
    put_u64(frame.data() + 5, report.timestamp_ms);
    put_u64(frame.data() + 13, std::bit_cast<std::uint64_t>(report.d1));
    put_u64(frame.data() + 21, std::bit_cast<std::uint64_t>(report.d2));
    put_u64(frame.data() + 29, std::bit_cast<std::uint64_t>(report.d3));
    const std::uint16_t crc = crc16_ccitt_false({frame.data(), kReportFrameSize - 2});
    frame[37] = static_cast<std::uint8_t>(crc & 0xFF);
    frame[38] = static_cast<std::uint8_t>(crc >> 8);
    return frame;
}

DistanceReport decode_report(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != kReportFrameSize) {
        throw FramingError("report frame must be " + std::to_string(kReportFrameSize) +
                           " bytes, got " + std::to_string(bytes.size()));
    }
    const std::uint16_t stored = static_cast<std::uint16_t>(
        bytes[37] | (static_cast<std::uint16_t>(bytes[38]) << 8));
    const std::uint16_t computed = crc16_ccitt_false(bytes.subspan(0, kReportFrameSize - 2));
    if (stored != computed) {
        throw CorruptionError("report checksum mismatch");
    }
    DistanceReport report;
    report.node_id = bytes[0];
    report.seq = get_u32(bytes.data() + 1);
    report.timestamp_ms = get_u64(bytes.data() + 5);
    report.d1 = std::bit_cast<double>(get_u64(bytes.data() + 13));
    report.d2 = std::bit_cast<double>(get_u64(bytes.data() + 21));
    report.d3 = std::bit_cast<double>(get_u64(bytes.data() + 29));
    return report;
}

std::string navsignal_json_line(const NavSignal& signal) {
    return std::string("{\"t_ms\":") + std::to_string(signal.timestamp_ms) + ",\"flag\":\"" +
           to_string(signal.flag) + "\",\"sep\":" + textio::format_double(signal.separation_est) +
           "}";
}

void validate(const ChannelConfig& config) {
    if (!(config.drop_probability >= 0.0) || config.drop_probability >= 1.0) {
        throw std::invalid_argument("drop_probability must lie in [0, 1)");
    }
    if (config.latency_ticks < 0) {
        throw std::invalid_argument("latency_ticks must be >= 0");
    }
}

LossyChannel::LossyChannel(const ChannelConfig& config) : config_(config), rng_(config.seed) {
    validate(config);
}

void LossyChannel::send(std::uint64_t tick, const ReportFrame& frame) {
    ++sent_;
    if (config_.drop_probability > 0.0 && rng_.uniform() < config_.drop_probability) {
        ++dropped_;
        return;
    }
    in_flight_.push_back({tick + static_cast<std::uint64_t>(config_.latency_ticks), frame});
}

std::vector<ReportFrame> LossyChannel::deliver(std::uint64_t tick) {
    std::vector<ReportFrame> arrived;
    while (!in_flight_.empty() && in_flight_.front().arrival_tick <= tick) {
        arrived.push_back(in_flight_.front().frame);
        in_flight_.pop_front();
    }
    return arrived;
}

ProximityServer::ProximityServer(const ServerConfig& config) : config_(config) {
    validate(config.layout);
    if (config.staleness_horizon_ticks < 0) {
        throw std::invalid_argument("staleness horizon must be >= 0 ticks");
    }
}

std::optional<Position> ProximityServer::locate(const NodeCache& cache,
                                                std::uint64_t tick) const {
    if (!cache.valid) return std::nullopt;
    if (tick - cache.received_tick > static_cast<std::uint64_t>(config_.staleness_horizon_ticks)) {
        return std::nullopt;
    }
    return trilaterate(cache.vector, config_.layout);
}

ServerOutput ProximityServer::step(std::uint64_t tick, std::uint64_t t_ms,
                                   std::span<const ReportFrame> pending) {
    for (const ReportFrame& frame : pending) {
        DistanceReport report;
        try {
            report = decode_report(frame);
        } catch (const CorruptionError&) {
            ++corrupted_;
            continue;
        } catch (const FramingError&) {
            ++framing_;
            continue;
        }
        NodeCache* cache = nullptr;
        if (report.node_id == static_cast<std::uint8_t>(AgentId::Human)) cache = &human_;
        if (report.node_id == static_cast<std::uint8_t>(AgentId::Robot)) cache = &robot_;
        if (cache == nullptr) continue;  // unknown node, ignore
        if (cache->valid && report.seq <= cache->seq) continue;  // latest wins
        cache->valid = true;
        cache->seq = report.seq;
        cache->received_tick = tick;
        cache->vector = DistanceVector{report.node_id == 1 ? AgentId::Human : AgentId::Robot,
                                       static_cast<double>(report.timestamp_ms) / 1000.0,
                                       report.d1, report.d2, report.d3};
    }

    ServerOutput out;
    out.human = locate(human_, tick);
    out.robot = locate(robot_, tick);
    if (out.human && out.robot) {
        NavSignal signal;
        signal.timestamp_ms = t_ms;
        signal.separation_est = separation(*out.human, *out.robot);
        signal.flag = signal.separation_est < kProximityThresholdMeters ? NavFlag::Close
                                                                        : NavFlag::Safe;
        out.signal = signal;
    }
    return out;
}

double NetRunResult::signal_rate() const {
    if (outputs.empty()) return 0.0;
    std::size_t emitted = 0;
    for (const ServerOutput& o : outputs) {
        if (o.signal) ++emitted;
    }
    return static_cast<double>(emitted) / static_cast<double>(outputs.size());
}

std::vector<NavSignal> NetRunResult::signals() const {
    std::vector<NavSignal> list;
    for (const ServerOutput& o : outputs) {
        if (o.signal) list.push_back(*o.signal);
    }
    return list;
}

NetRunResult run_scenario_net(const ScenarioSpec& spec, const ChannelConfig& channel_config,
                              int staleness_horizon_ticks) {
    const std::vector<MeasurementFrame> frames = simulate_measurements(spec);
    LossyChannel channel(channel_config);
    ProximityServer server(ServerConfig{spec.layout, staleness_horizon_ticks});

    NetRunResult result;
    result.outputs.reserve(frames.size());
    std::uint32_t human_seq = 0;
    std::uint32_t robot_seq = 0;
    for (std::size_t tick = 0; tick < frames.size(); ++tick) {
        const MeasurementFrame& frame = frames[tick];
        const std::uint64_t t_ms =
            static_cast<std::uint64_t>(std::llround(frame.timestamp * 1000.0));

        const DistanceReport human_report{static_cast<std::uint8_t>(AgentId::Human), human_seq++,
                                          t_ms, frame.human_meas.d1, frame.human_meas.d2,
                                          frame.human_meas.d3};
        const DistanceReport robot_report{static_cast<std::uint8_t>(AgentId::Robot), robot_seq++,
                                          t_ms, frame.robot_meas.d1, frame.robot_meas.d2,
                                          frame.robot_meas.d3};
        channel.send(tick, encode_report(human_report));
        channel.send(tick, encode_report(robot_report));

        const std::vector<ReportFrame> pending = channel.deliver(tick);
        result.outputs.push_back(server.step(tick, t_ms, pending));
    }
    result.reports_sent = channel.frames_sent();
    result.reports_dropped = channel.frames_dropped();
    result.reports_corrupted = server.corrupted_frames();
    return result;
}

std::optional<NetSettings> net_settings_from_json_text(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (!j.contains("channel")) return std::nullopt;
    const nlohmann::json& c = j["channel"];
    NetSettings settings;
    settings.channel.drop_probability = c.value("drop_probability", 0.0);
    settings.channel.latency_ticks = c.value("latency_ticks", 0);
    settings.channel.seed = c.value("seed", std::uint64_t{0});
    settings.staleness_horizon_ticks = c.value("staleness_horizon", kDefaultStalenessTicks);
    validate(settings.channel);
    return settings;
}

}  // namespace ipsim
