#include "xrtrace/traffic_gen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xrtrace/error.hpp"
#include "xrtrace/random.hpp"
#include "xrtrace/text.hpp"

namespace xrtrace::gen {
namespace {

constexpr std::uint32_t kLongPacketFloor = 1000;
constexpr int kMaxResamples = 1000;

// Resamples until the draw lands in [lo, hi); clamps after kMaxResamples.
double truncated_normal(Rng& rng, const NormalParam& param, double lo, double hi) {
    for (int i = 0; i < kMaxResamples; ++i) {
        const double v = rng.normal(param.mean, param.std_dev);
        if (v >= lo && v < hi) return v;
    }
    return std::clamp(param.mean, lo, std::nextafter(hi, lo));
}

void check(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::ConfigError, "traffic model: " + what);
}

}  // namespace

void TrafficModel::validate(std::uint32_t long_packet_threshold) const {
    check(frame_size.mean > 0 && frame_interval_us.mean > 0 && eye_interval_us.mean > 0, "means must be positive");
    check(frame_size.std_dev >= 0 && frame_interval_us.std_dev >= 0 && eye_interval_us.std_dev >= 0,
          "standard deviations must be non-negative");
    check(eye_split_fraction > 0 && eye_split_fraction < 1, "eye_split_fraction must lie in (0, 1)");
    check(payload_size > long_packet_threshold, "payload_size must exceed the long-packet threshold " +
                                                    std::to_string(long_packet_threshold));
    check(payload_size + kLongPacketFloor <= kMaxUdpPayload, "payload_size too large for UDP");
    check(ul_packets_min >= 1 && ul_packets_min <= ul_packets_max, "ul packet range must satisfy 1 <= min <= max");
    check(ul_payload_min <= ul_payload_max && ul_payload_max <= kMaxUdpPayload, "ul payload range invalid");
    check(packet_spacing_us >= 0 && ul_packet_spacing_us >= 0 && ul_offset_us >= 0, "spacings must be non-negative");
    check(dl_sync_payload <= long_packet_threshold, "dl_sync_payload must not exceed the long-packet threshold");
    check(duration_s >= 0 && std::isfinite(duration_s), "duration_s must be non-negative");
    check(device_ip != server_ip, "device_ip and server_ip must differ");
}

std::vector<std::uint32_t> packetize_burst(std::int64_t burst_bytes, std::uint32_t payload_size) {
    if (burst_bytes < 1 || payload_size <= kLongPacketFloor) {
        throw Error(ErrorCode::DomainError, "packetize_burst needs burst_bytes >= 1 and payload_size > 1000");
    }
    const auto full = static_cast<std::size_t>(burst_bytes / payload_size);
    const auto rem = static_cast<std::uint32_t>(burst_bytes % payload_size);
    std::vector<std::uint32_t> out(full, payload_size);
    if (rem == 0) return out;
    if (rem <= kLongPacketFloor && !out.empty()) {
        out.back() += rem;
    } else {
        out.push_back(rem);
    }
    return out;
}

GeneratedTrace generate_trace(const TrafficModel& model) {
    model.validate();
    const auto duration_us = static_cast<std::int64_t>(std::llround(model.duration_s * 1e6));
    if (duration_us <= 0) throw Error(ErrorCode::EmptyTrace, "duration of 0 s holds no frames");

    Rng rng(model.seed);
    GeneratedTrace out;
    const double split = model.eye_split_fraction;
    // Each eye burst must hold at least one full-size packet.
    const double min_size = std::max(2.0 * model.payload_size,
                                     std::ceil(model.payload_size / std::min(split, 1.0 - split)));

    auto emit = [&](std::int64_t ts, bool uplink, std::uint32_t len) {
        PacketRecord r;
        r.timestamp_us = ts;
        r.direction = Direction::Other;
        r.src_ip = uplink ? model.device_ip : model.server_ip;
        r.dst_ip = uplink ? model.server_ip : model.device_ip;
        r.src_port = uplink ? model.device_port : model.server_port;
        r.dst_port = uplink ? model.server_port : model.device_port;
        r.payload_len = len;
        out.records.push_back(r);
    };
    auto emit_burst = [&](std::int64_t start, std::int64_t bytes) {
        std::int64_t ts = start;
        for (auto len : packetize_burst(bytes, model.payload_size)) {
            emit(ts, false, len);
            out.dl_long_bytes += len;
            ts += model.packet_spacing_us;
        }
    };

    std::int64_t start = 0;
    while (start < duration_us) {
        const double interval = truncated_normal(rng, model.frame_interval_us, 1000.0, HUGE_VAL);
        const auto interval_us = static_cast<std::int64_t>(std::llround(interval));
        const double size = truncated_normal(rng, model.frame_size, min_size, HUGE_VAL);
        const double eye = truncated_normal(rng, model.eye_interval_us, 100.0, static_cast<double>(interval_us));

        GeneratedFrame f;
        f.start_us = start;
        f.size_bytes = std::llround(size);
        f.first_burst_bytes = std::llround(static_cast<double>(f.size_bytes) * split);
        f.eye_interval_us = std::min<std::int64_t>(std::llround(eye), interval_us - 1);
        out.frames.push_back(f);

        emit_burst(start, f.first_burst_bytes);
        emit_burst(start + f.eye_interval_us, f.size_bytes - f.first_burst_bytes);

        if (model.dl_sync_packets) {
            emit(start + f.eye_interval_us / 2, false, model.dl_sync_payload);
            out.dl_short_bytes += model.dl_sync_payload;
        }
        const auto ul_count = rng.uniform_int(model.ul_packets_min, model.ul_packets_max);
        for (std::int64_t k = 0; k < ul_count; ++k) {
            const auto len = static_cast<std::uint32_t>(rng.uniform_int(model.ul_payload_min, model.ul_payload_max));
            emit(start + model.ul_offset_us + k * model.ul_packet_spacing_us, true, len);
        }
        start += interval_us;
    }
    std::stable_sort(out.records.begin(), out.records.end(),
                     [](const PacketRecord& a, const PacketRecord& b) { return a.timestamp_us < b.timestamp_us; });
    return out;
}

}  // namespace xrtrace::gen
