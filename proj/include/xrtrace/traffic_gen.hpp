#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "xrtrace/packet.hpp"

namespace xrtrace::gen {

struct NormalParam {
    double mean = 0.0;
    double std_dev = 0.0;
};

/// Generative description of a remote-rendering stream: one stereo frame per
/// cycle sent as two DL bursts, plus a small UL cluster each cycle.
struct TrafficModel {
    NormalParam frame_size{60000.0, 6000.0};         // bytes per stereo frame
    NormalParam frame_interval_us{16667.0, 500.0};
    NormalParam eye_interval_us{6000.0, 400.0};     // start of burst 1 to start of burst 2
    double eye_split_fraction = 0.5;                  // share of frame bytes in the first burst
    std::uint32_t payload_size = 1200;                // bytes per long packet
    std::int64_t packet_spacing_us = 20;              // within a burst
    std::uint32_t ul_packets_min = 2;
    std::uint32_t ul_packets_max = 3;
    std::uint32_t ul_payload_min = 100;
    std::uint32_t ul_payload_max = 400;
    std::int64_t ul_packet_spacing_us = 40;
    std::int64_t ul_offset_us = 1000;                 // UL cluster start relative to the frame start
    bool dl_sync_packets = true;                      // one short DL packet per cycle
    std::uint32_t dl_sync_payload = 64;
    double duration_s = 10.0;
    std::uint64_t seed = 1;

    Ipv4 device_ip{10, 0, 0, 2};
    Ipv4 server_ip{10, 0, 0, 1};
    std::uint16_t device_port = 50000;
    std::uint16_t server_port = 50001;

    /// Throws Error{ConfigError} when an invariant is violated.
    void validate(std::uint32_t long_packet_threshold = 1000) const;
};

/// Ground truth for one generated frame.
struct GeneratedFrame {
    std::int64_t start_us = 0;
    std::int64_t eye_interval_us = 0;
    std::int64_t size_bytes = 0;
    std::int64_t first_burst_bytes = 0;
};

struct GeneratedTrace {
    Trace records;  // UL and DL interleaved, sorted by timestamp
    std::vector<GeneratedFrame> frames;
    std::int64_t dl_long_bytes = 0;
    std::int64_t dl_short_bytes = 0;
};

/// Deterministic for a fixed model (seed included). Frame starts are the
/// running sum of truncated-normal interval draws (>= 1000 us); sizes are
/// truncated below at 2 * payload_size; eye intervals are truncated to
/// [100 us, frame interval). Throws Error{EmptyTrace} when no frame fits in
/// the duration.
[[nodiscard]] GeneratedTrace generate_trace(const TrafficModel& model);

/// Splits a burst into payload_size packets. A remainder of at most 1000
/// bytes is merged into the last full packet so every packet stays long.
[[nodiscard]] std::vector<std::uint32_t> packetize_burst(std::int64_t burst_bytes, std::uint32_t payload_size);

}  // namespace xrtrace::gen
