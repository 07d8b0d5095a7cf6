#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "xrtrace/packet.hpp"

namespace xrtrace {

/// A run of long DL packets carrying one eye's share of a rendered frame.
struct Burst {
    std::int64_t start_us = 0;
    std::int64_t end_us = 0;
    std::size_t packet_count = 0;
    std::int64_t total_bytes = 0;

    friend bool operator==(const Burst&, const Burst&) = default;
};

/// Two adjacent bursts forming one stereo frame. Which burst is which eye is
/// not observable, so "left" is simply the earlier one.
struct FrameRecord {
    Burst left;
    Burst right;

    [[nodiscard]] std::int64_t frame_size_bytes() const noexcept { return left.total_bytes + right.total_bytes; }
    [[nodiscard]] std::int64_t frame_start_us() const noexcept { return left.start_us; }
    [[nodiscard]] std::int64_t eye_interval_us() const noexcept { return right.start_us - left.start_us; }
};

/// The three per-frame series that get modeled downstream.
struct FrameSeries {
    std::vector<double> sizes;
    std::vector<double> frame_intervals_us;  // size() == sizes.size() - 1 when sizes is nonempty
    std::vector<double> eye_intervals_us;
    std::size_t orphan_bursts = 0;
};

struct BurstParams {
    std::uint32_t long_packet_threshold = 1000;  // bytes; packets must be strictly larger
    std::int64_t gap_threshold_us = 3000;
};

/// Groups long packets greedily: a packet extends the current burst when it
/// follows the previous long packet by at most gap_threshold_us. Packets at or
/// below long_packet_threshold are ignored.
[[nodiscard]] std::vector<Burst> detect_bursts(std::span<const PacketRecord> dl_packets, const BurstParams& params = {});

struct PairingResult {
    std::vector<FrameRecord> frames;
    std::size_t orphans = 0;
    std::int64_t orphan_bytes = 0;
};

/// Left-to-right scan pairing burst i with i+1 when their starts are at most
/// pairing_window_us apart. Unpaired bursts are counted and dropped.
[[nodiscard]] PairingResult pair_eyes(std::span<const Burst> bursts, std::int64_t pairing_window_us = 10000);

/// Frame intervals are measured between the start of consecutive frames
/// (first packet of the earlier eye burst).
[[nodiscard]] FrameSeries extract_series(std::span<const FrameRecord> frames);

struct RunningStats {
    std::size_t n = 0;
    double mean = 0.0;
    double std_dev = 0.0;  // unbiased; 0 when n < 2
    double min = 0.0;
    double max = 0.0;
};

[[nodiscard]] RunningStats describe(std::span<const double> values);

struct UlCadence {
    std::size_t packets = 0;
    std::size_t clusters = 0;
    double clusters_per_second = 0.0;
    std::map<std::size_t, std::size_t> packets_per_cluster;  // cluster size -> occurrences
    std::vector<double> intervals_us;                         // between cluster starts
    RunningStats interval_stats;
};

/// Clusters UL packets with the same greedy gap rule as detect_bursts and
/// summarizes the cadence.
[[nodiscard]] UlCadence ul_cadence_stats(std::span<const PacketRecord> ul_packets, std::int64_t cluster_gap_us = 1000);

struct AnalysisConfig {
    EndpointConfig endpoints;
    BurstParams burst;
    std::int64_t pairing_window_us = 10000;
    std::int64_t ul_cluster_gap_us = 1000;
};

/// End-to-end reconstruction of one trace.
struct TraceAnalysis {
    DirectionCounts counts;
    std::vector<Burst> bursts;
    PairingResult pairing;
    FrameSeries series;
    UlCadence ul;
    std::int64_t total_dl_bytes = 0;
    std::int64_t short_dl_bytes = 0;
    std::int64_t frame_bytes = 0;
};

[[nodiscard]] TraceAnalysis analyze_trace(Trace records, const AnalysisConfig& cfg);

/// `frame_index,size_bytes,frame_interval_us,eye_interval_us`; the interval
/// field of frame 0 is empty.
[[nodiscard]] std::string series_to_csv(const FrameSeries& series);

/// Reads one numeric column (by header name) from a CSV document, skipping
/// empty fields. Used to feed series files back into the fitters.
[[nodiscard]] std::vector<double> read_series_column(std::string_view csv_text, std::string_view column);

}  // namespace xrtrace
