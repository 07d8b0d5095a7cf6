#include <doctest.h>

#include <cmath>
#include <numeric>

#include "xrtrace/error.hpp"
#include "xrtrace/frames.hpp"
#include "xrtrace/random.hpp"
#include "xrtrace/traffic_gen.hpp"

using namespace xrtrace;

namespace {

PacketRecord dl(std::int64_t t, std::uint32_t len) {
    return {t, Direction::DL, Ipv4(10, 0, 0, 1), Ipv4(10, 0, 0, 2), 50001, 50000, len};
}

PacketRecord ul(std::int64_t t) {
    return {t, Direction::UL, Ipv4(10, 0, 0, 2), Ipv4(10, 0, 0, 1), 50000, 50001, 200};
}

Burst burst_at(std::int64_t start, std::int64_t bytes = 2400) { return {start, start + 100, 2, bytes}; }

AnalysisConfig default_config() {
    AnalysisConfig cfg;
    cfg.endpoints = {Ipv4(10, 0, 0, 2), Ipv4(10, 0, 0, 1), {}, {}};
    return cfg;
}

gen::TrafficModel zero_jitter(double mean_size, double duration_s) {
    gen::TrafficModel m;
    m.frame_size = {mean_size, 0.0};
    m.frame_interval_us = {16667.0, 0.0};
    m.eye_interval_us = {6000.0, 0.0};
    m.duration_s = duration_s;
    return m;
}

}  // namespace

TEST_CASE("detect_bursts groups by gap") {
    const Trace t = {dl(0, 1400), dl(100, 1400), dl(200, 1400), dl(8000, 1400)};
    const auto b = detect_bursts(t);
    REQUIRE(b.size() == 2);
    CHECK(b[0].packet_count == 3);
    CHECK(b[0].total_bytes == 4200);
    CHECK(b[0].start_us == 0);
    CHECK(b[0].end_us == 200);
    CHECK(b[1].packet_count == 1);
}

TEST_CASE("detect_bursts threshold is strict") {
    CHECK(detect_bursts(Trace{dl(0, 900)}).empty());
    CHECK(detect_bursts(Trace{dl(0, 1000)}).empty());
    CHECK(detect_bursts(Trace{dl(0, 1001)}).size() == 1);
    CHECK(detect_bursts(Trace{}).empty());
}

TEST_CASE("detect_bursts gap boundary and short packets in between") {
    // a gap of exactly the threshold continues the burst
    CHECK(detect_bursts(Trace{dl(0, 1400), dl(3000, 1400)}).size() == 1);
    CHECK(detect_bursts(Trace{dl(0, 1400), dl(3001, 1400)}).size() == 2);
    // short packets neither extend nor split a burst
    const auto b = detect_bursts(Trace{dl(0, 1400), dl(2000, 64), dl(2900, 1400)});
    REQUIRE(b.size() == 1);
    CHECK(b[0].total_bytes == 2800);
    CHECK_THROWS_AS((void)detect_bursts(Trace{}, BurstParams{1000, 0}), Error);
}

TEST_CASE("generator bursts of 40 packets are recovered exactly") {
    auto m = zero_jitter(2 * 40 * 1200.0, 2.0);
    const auto g = gen::generate_trace(m);
    const auto a = analyze_trace(g.records, default_config());
    REQUIRE_FALSE(a.bursts.empty());
    for (const auto& b : a.bursts) CHECK(b.packet_count == 40);
}

TEST_CASE("pair_eyes") {
    SUBCASE("two bursts inside the window") {
        const std::vector<Burst> b = {burst_at(0), burst_at(4000)};
        const auto r = pair_eyes(b, 8000);
        REQUIRE(r.frames.size() == 1);
        CHECK(r.frames[0].eye_interval_us() == 4000);
        CHECK(r.orphans == 0);
    }
    SUBCASE("trailing orphan") {
        const std::vector<Burst> b = {burst_at(0), burst_at(4000), burst_at(20000, 777)};
        const auto r = pair_eyes(b, 8000);
        CHECK(r.frames.size() == 1);
        CHECK(r.orphans == 1);
        CHECK(r.orphan_bytes == 777);
    }
    SUBCASE("leading orphan shifts the pairing") {
        const std::vector<Burst> b = {burst_at(0), burst_at(16000), burst_at(20000)};
        const auto r = pair_eyes(b, 8000);
        REQUIRE(r.frames.size() == 1);
        CHECK(r.frames[0].frame_start_us() == 16000);
        CHECK(r.orphans == 1);
    }
    SUBCASE("empty") {
        const auto r = pair_eyes(std::vector<Burst>{}, 8000);
        CHECK(r.frames.empty());
        CHECK(r.orphans == 0);
    }
}

TEST_CASE("generator trace with 600 frames pairs cleanly") {
    gen::TrafficModel m;  // default: 10 s at ~16.7 ms
    const auto g = gen::generate_trace(m);
    REQUIRE(g.frames.size() == 600);
    const auto a = analyze_trace(g.records, default_config());
    CHECK(a.pairing.frames.size() == 600);
    CHECK(a.pairing.orphans == 0);
}

TEST_CASE("extract_series") {
    SUBCASE("two frames") {
        const std::vector<FrameRecord> f = {{burst_at(0), burst_at(5000)}, {burst_at(16700), burst_at(22000)}};
        const auto s = extract_series(f);
        REQUIRE(s.frame_intervals_us.size() == 1);
        CHECK(s.frame_intervals_us[0] == 16700.0);
        CHECK(s.sizes == std::vector<double>{4800.0, 4800.0});
        CHECK(s.eye_intervals_us == std::vector<double>{5000.0, 5300.0});
    }
    SUBCASE("one frame") {
        const std::vector<FrameRecord> f = {{burst_at(0), burst_at(5000)}};
        const auto s = extract_series(f);
        CHECK(s.sizes.size() == 1);
        CHECK(s.frame_intervals_us.empty());
    }
    SUBCASE("none") {
        const auto s = extract_series(std::vector<FrameRecord>{});
        CHECK(s.sizes.empty());
        CHECK(s.frame_intervals_us.empty());
    }
}

TEST_CASE("recovered frame interval mean matches the generator") {
    gen::TrafficModel m;
    m.seed = 2024;
    m.duration_s = 10000 * 16667e-6 * 1.02;
    const auto a = analyze_trace(gen::generate_trace(m).records, default_config());
    const auto& iv = a.series.frame_intervals_us;
    REQUIRE(iv.size() >= 9999);
    const auto st = describe(iv);
    CHECK(std::abs(st.mean - 16667.0) < 3.0 * 500.0 / std::sqrt(static_cast<double>(iv.size())));
}

TEST_CASE("ul_cadence_stats") {
    SUBCASE("two clusters") {
        const Trace t = {ul(0), ul(50), ul(17000), ul(17040), ul(17090)};
        const auto s = ul_cadence_stats(t, 1000);
        CHECK(s.clusters == 2);
        CHECK(s.packets == 5);
        CHECK(s.packets_per_cluster.at(2) == 1);
        CHECK(s.packets_per_cluster.at(3) == 1);
        REQUIRE(s.intervals_us.size() == 1);
        CHECK(s.intervals_us[0] == 17000.0);
    }
    SUBCASE("empty") {
        const auto s = ul_cadence_stats(Trace{}, 1000);
        CHECK(s.clusters == 0);
        CHECK(s.packets_per_cluster.empty());
        CHECK(s.intervals_us.empty());
    }
    SUBCASE("generated UL clusters hold 2 or 3 packets") {
        const auto a = analyze_trace(gen::generate_trace(gen::TrafficModel{}).records, default_config());
        REQUIRE_FALSE(a.ul.packets_per_cluster.empty());
        for (const auto& [size, count] : a.ul.packets_per_cluster) {
            CHECK((size == 2 || size == 3));
            CHECK(count > 0);
        }
    }
}

TEST_CASE("byte conservation holds on random traces") {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        Trace t;
        std::int64_t now = 0;
        const int n = rng.uniform_int(0, 400);
        for (int i = 0; i < n; ++i) {
            now += rng.uniform_int(0, 9000);
            const auto len = static_cast<std::uint32_t>(rng.uniform_int(0, 1500));
            t.push_back(rng.uniform() < 0.85 ? dl(now, len) : ul(now));
        }
        const auto a = analyze_trace(t, default_config());
        std::int64_t frames = 0;
        for (const auto& f : a.pairing.frames) frames += f.frame_size_bytes();
        CHECK(frames + a.pairing.orphan_bytes + a.short_dl_bytes == a.total_dl_bytes);

        // bursts partition the long DL packets
        std::size_t long_count = 0;
        for (const auto& r : t)
            if (r.direction == Direction::DL && r.payload_len > 1000) ++long_count;
        std::size_t in_bursts = 0;
        for (std::size_t i = 0; i < a.bursts.size(); ++i) {
            in_bursts += a.bursts[i].packet_count;
            CHECK(a.bursts[i].start_us <= a.bursts[i].end_us);
            if (i > 0) CHECK(a.bursts[i - 1].end_us < a.bursts[i].start_us);
        }
        CHECK(in_bursts == long_count);
        CHECK(a.bursts.size() == 2 * a.pairing.frames.size() + a.pairing.orphans);

        for (const auto& f : a.pairing.frames) {
            CHECK(f.left.start_us <= f.right.start_us);
            CHECK(f.eye_interval_us() <= 10000);
        }
        if (!a.series.sizes.empty()) CHECK(a.series.frame_intervals_us.size() == a.series.sizes.size() - 1);
    }
}

TEST_CASE("zero-jitter generator traces reproduce configured frames exactly") {
    for (double size : {9600.0, 60000.0, 130000.0}) {
        const auto g = gen::generate_trace(zero_jitter(size, 1.0));
        const auto a = analyze_trace(g.records, default_config());
        REQUIRE(a.pairing.frames.size() == g.frames.size());
        for (std::size_t i = 0; i < g.frames.size(); ++i) {
            CHECK(a.pairing.frames[i].frame_size_bytes() == static_cast<std::int64_t>(size));
            CHECK(a.pairing.frames[i].frame_start_us() == g.frames[i].start_us);
        }
        for (std::size_t i = 0; i < a.series.frame_intervals_us.size(); ++i)
            CHECK(a.series.eye_intervals_us[i] < a.series.frame_intervals_us[i]);
    }
}

TEST_CASE("series CSV") {
    const std::vector<FrameRecord> f = {{burst_at(0), burst_at(5000)}, {burst_at(16700), burst_at(22000)}};
    const auto csv = series_to_csv(extract_series(f));
    CHECK(csv.rfind("frame_index,size_bytes,frame_interval_us,eye_interval_us\n", 0) == 0);
    CHECK(csv.find("0,4800,,5000\n") != std::string::npos);
    CHECK(read_series_column(csv, "frame_interval_us") == std::vector<double>{16700.0});
    CHECK(read_series_column(csv, "size_bytes") == std::vector<double>{4800.0, 4800.0});
    CHECK_THROWS_AS((void)read_series_column(csv, "nope"), Error);
}
