#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <cstring>

#include "ipsim/netsim.hpp"
#include "ipsim/rng.hpp"

using namespace ipsim;

namespace {

DistanceReport sample_report() {
    return DistanceReport{1, 42, 1300, 1.25, 2.5, 3.1622776601683795};
}

DistanceReport random_report(Rng& rng) {
    DistanceReport r;
    r.node_id = rng.bounded(2) == 0 ? 1 : 2;
    r.seq = static_cast<std::uint32_t>(rng.next_u64());
    r.timestamp_ms = rng.next_u64() >> 20;
    r.d1 = 10.0 * rng.uniform();
    r.d2 = 10.0 * rng.uniform();
    r.d3 = 10.0 * rng.uniform();
    return r;
}

}  // namespace

TEST_CASE("crc16 ccitt-false check value") {
    const char* check = "123456789";
    CHECK(crc16_ccitt_false({reinterpret_cast<const std::uint8_t*>(check), 9}) == 0x29B1);
}

TEST_CASE("frame layout") {
    DistanceReport r;
    r.node_id = 1;
    r.seq = 0;
    r.timestamp_ms = 0;
    r.d1 = r.d2 = r.d3 = 1.0;
    const ReportFrame frame = encode_report(r);
    CHECK(frame.size() == kReportFrameSize);
    CHECK(frame[0] == 0x01);
    CHECK(decode_report(frame) == r);
}

TEST_CASE("round trip over randomized reports") {
    Rng rng(2024);
    for (int i = 0; i < 1000; ++i) {
        const DistanceReport r = random_report(rng);
        CHECK(decode_report(encode_report(r)) == r);
    }
}

TEST_CASE("framing and corruption errors") {
    const ReportFrame frame = encode_report(sample_report());
    CHECK_THROWS_AS(decode_report({frame.data(), kReportFrameSize - 1}), FramingError);
    CHECK_THROWS_AS(decode_report({frame.data(), 0}), FramingError);

    for (std::size_t i : {std::size_t{0}, std::size_t{5}, std::size_t{20}, std::size_t{38}}) {
        ReportFrame corrupted = frame;
        corrupted[i] ^= 0x01;
        CHECK_THROWS_AS(decode_report(corrupted), CorruptionError);
    }
}

TEST_CASE("nav signal JSON line") {
    CHECK(navsignal_json_line({1300, NavFlag::Close, 0.25}) ==
          "{\"t_ms\":1300,\"flag\":\"CLOSE\",\"sep\":0.25}");
    CHECK(navsignal_json_line({0, NavFlag::Safe, 2.5}) ==
          "{\"t_ms\":0,\"flag\":\"SAFE\",\"sep\":2.5}");
}

TEST_CASE("channel configuration validation") {
    CHECK_THROWS_AS(validate(ChannelConfig{1.0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(validate(ChannelConfig{-0.1, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(validate(ChannelConfig{0.5, -1, 0}), std::invalid_argument);
    CHECK_NOTHROW(validate(ChannelConfig{0.0, 0, 0}));
    CHECK_NOTHROW(validate(ChannelConfig{0.99, 3, 0}));
}

TEST_CASE("lossless channel preserves order and latency shifts arrival") {
    LossyChannel channel(ChannelConfig{0.0, 2, 0});
    const ReportFrame a = encode_report(DistanceReport{1, 0, 0, 1, 1, 1});
    const ReportFrame b = encode_report(DistanceReport{2, 0, 0, 2, 2, 2});
    channel.send(0, a);
    channel.send(0, b);
    CHECK(channel.deliver(0).empty());
    CHECK(channel.deliver(1).empty());
    const auto arrived = channel.deliver(2);
    REQUIRE(arrived.size() == 2);
    CHECK(decode_report(arrived[0]).node_id == 1);
    CHECK(decode_report(arrived[1]).node_id == 2);
    CHECK(channel.frames_sent() == 2);
    CHECK(channel.frames_dropped() == 0);
}

TEST_CASE("lossy channel drops deterministically per seed") {
    const ChannelConfig config{0.5, 0, 99};
    LossyChannel a(config), b(config);
    std::uint64_t delivered_a = 0, delivered_b = 0;
    const ReportFrame frame = encode_report(sample_report());
    for (std::uint64_t tick = 0; tick < 200; ++tick) {
        a.send(tick, frame);
        b.send(tick, frame);
        delivered_a += a.deliver(tick).size();
        delivered_b += b.deliver(tick).size();
    }
    CHECK(delivered_a == delivered_b);
    CHECK(a.frames_dropped() == b.frames_dropped());
    CHECK(a.frames_dropped() > 50);  // roughly half of 200
    CHECK(a.frames_dropped() < 150);
}

namespace {

ReportFrame report_at(std::uint8_t node, std::uint32_t seq, std::uint64_t t_ms, Vec2 p,
                      const AnchorLayout& layout) {
    DistanceReport r;
    r.node_id = node;
    r.seq = seq;
    r.timestamp_ms = t_ms;
    r.d1 = distance(p, layout.anchor(1));
    r.d2 = distance(p, layout.anchor(2));
    r.d3 = distance(p, layout.anchor(3));
    return encode_report(r);
}

}  // namespace

TEST_CASE("server reuses cached vectors inside the staleness horizon") {
    const AnchorLayout layout;
    ProximityServer server(ServerConfig{layout, 5});

    const ReportFrame human = report_at(1, 0, 0, {1.0, 0.0}, layout);
    const ReportFrame robot = report_at(2, 0, 0, {2.0, 2.0}, layout);
    const ReportFrame both[] = {human, robot};
    const ServerOutput first = server.step(0, 0, both);
    REQUIRE(first.signal.has_value());
    CHECK(first.signal->flag == NavFlag::Safe);
    CHECK(first.signal->separation_est == doctest::Approx(std::sqrt(5.0)).epsilon(1e-9));

    // Robot goes silent; the cached vector carries ticks 1..5.
    for (std::uint64_t tick = 1; tick <= 5; ++tick) {
        const ReportFrame only_human = report_at(1, static_cast<std::uint32_t>(tick),
                                                 tick * 100, {1.0, 0.0}, layout);
        const ServerOutput out = server.step(tick, tick * 100, {&only_human, 1});
        CHECK(out.signal.has_value());
    }
    // Tick 6: robot data is six ticks old, beyond the horizon.
    const ReportFrame only_human = report_at(1, 6, 600, {1.0, 0.0}, layout);
    const ServerOutput starved = server.step(6, 600, {&only_human, 1});
    CHECK(starved.human.has_value());
    CHECK_FALSE(starved.robot.has_value());
    CHECK_FALSE(starved.signal.has_value());
}

TEST_CASE("server emits CLOSE below the threshold and SAFE at it") {
    const AnchorLayout layout;
    ProximityServer server(ServerConfig{layout, 5});
    const ReportFrame human = report_at(1, 0, 0, {1.0, 1.0}, layout);
    const ReportFrame robot = report_at(2, 0, 0, {1.4, 1.0}, layout);
    const ReportFrame frames[] = {human, robot};
    const ServerOutput out = server.step(0, 0, frames);
    REQUIRE(out.signal.has_value());
    CHECK(out.signal->flag == NavFlag::Close);

    ProximityServer boundary(ServerConfig{layout, 5});
    const ReportFrame r2 = report_at(2, 0, 0, {1.5, 1.0}, layout);
    const ReportFrame frames2[] = {human, r2};
    const ServerOutput out2 = boundary.step(0, 0, frames2);
    REQUIRE(out2.signal.has_value());
    CHECK(out2.signal->separation_est == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(out2.signal->flag == NavFlag::Safe);  // exactly 0.5 m is safe
}

TEST_CASE("latest report wins within a tick") {
    const AnchorLayout layout;
    ProximityServer server(ServerConfig{layout, 5});
    const ReportFrame stale = report_at(2, 3, 300, {2.0, 2.0}, layout);
    const ReportFrame fresh = report_at(2, 4, 400, {1.0, 1.0}, layout);
    const ReportFrame human = report_at(1, 0, 400, {1.0, 0.0}, layout);
    const ReportFrame frames[] = {fresh, stale, human};
    const ServerOutput out = server.step(0, 400, frames);
    REQUIRE(out.robot.has_value());
    CHECK(out.robot->x == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(out.robot->y == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("corrupted frames are counted and skipped") {
    const AnchorLayout layout;
    ProximityServer server(ServerConfig{layout, 5});
    ReportFrame bad = report_at(1, 0, 0, {1.0, 0.0}, layout);
    bad[10] ^= 0xFF;
    const ReportFrame frames[] = {bad};
    const ServerOutput out = server.step(0, 0, frames);
    CHECK_FALSE(out.human.has_value());
    CHECK(server.corrupted_frames() == 1);
}

TEST_CASE("lossless network run equals the direct pipeline bit for bit") {
    ScenarioSpec spec = builtin_scenario("scenario1");
    spec.noise.sigma_db = 2.0;
    spec.noise.seed = 404;
    const ScenarioRun direct = run_scenario(spec);
    const NetRunResult net = run_scenario_net(spec, ChannelConfig{0.0, 0, 1});
    REQUIRE(net.outputs.size() == direct.estimates.size());
    for (std::size_t i = 0; i < net.outputs.size(); ++i) {
        REQUIRE(net.outputs[i].signal.has_value());
        CHECK(net.outputs[i].signal->separation_est == direct.estimates[i].sep_est);
        CHECK(net.outputs[i].human->x == direct.estimates[i].human_est.x);
        CHECK(net.outputs[i].robot->y == direct.estimates[i].robot_est.y);
    }
    CHECK(net.reports_sent == 2 * net.outputs.size());
    CHECK(net.reports_dropped == 0);
}

TEST_CASE("channel latency delays the first signal") {
    ScenarioSpec spec = builtin_scenario("scenario2");
    spec.noise.sigma_db = 0.0;
    const NetRunResult net = run_scenario_net(spec, ChannelConfig{0.0, 2, 0});
    REQUIRE(net.outputs.size() == 51);
    CHECK_FALSE(net.outputs[0].signal.has_value());
    CHECK_FALSE(net.outputs[1].signal.has_value());
    for (std::size_t tick = 2; tick < net.outputs.size(); ++tick) {
        CHECK(net.outputs[tick].signal.has_value());
    }
    // Delivered reports are two ticks stale but still inside the horizon.
    const ScenarioRun direct = run_scenario(spec);
    CHECK(net.outputs[2].signal->separation_est == direct.estimates[0].sep_est);
}

TEST_CASE("lossy run keeps a high signal rate") {
    ScenarioSpec spec = builtin_scenario("stationary");
    spec.noise.sigma_db = 2.0;
    spec.noise.seed = 11;
    const NetRunResult net = run_scenario_net(spec, ChannelConfig{0.2, 0, 7});
    CHECK(net.outputs.size() == 901);
    CHECK(net.signal_rate() >= 0.95);
    CHECK(net.reports_dropped > 0);
}

TEST_CASE("net settings parse from scenario JSON") {
    const std::string text = R"({
        "human_path": [[1,0]], "robot_path": [[2,2]], "duration": 5.0,
        "channel": {"drop_probability": 0.1, "latency_ticks": 2, "staleness_horizon": 7}
    })";
    const auto settings = net_settings_from_json_text(text);
    REQUIRE(settings.has_value());
    CHECK(settings->channel.drop_probability == 0.1);
    CHECK(settings->channel.latency_ticks == 2);
    CHECK(settings->staleness_horizon_ticks == 7);
    CHECK_FALSE(net_settings_from_json_text(
                    R"({"human_path":[[1,0]],"robot_path":[[2,2]],"duration":5.0})")
                    .has_value());
}
