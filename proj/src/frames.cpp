#include "xrtrace/frames.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "xrtrace/error.hpp"
#include "xrtrace/text.hpp"

namespace xrtrace {

std::vector<Burst> detect_bursts(std::span<const PacketRecord> dl_packets, const BurstParams& params) {
    if (params.long_packet_threshold == 0 || params.gap_threshold_us <= 0) {
        throw Error(ErrorCode::DomainError, "burst thresholds must be positive");
    }
    std::vector<Burst> bursts;
    std::optional<std::int64_t> prev_long;
    for (const auto& pkt : dl_packets) {
        if (pkt.payload_len <= params.long_packet_threshold) continue;
        if (!prev_long || pkt.timestamp_us - *prev_long > params.gap_threshold_us) {
            bursts.push_back(Burst{pkt.timestamp_us, pkt.timestamp_us, 0, 0});
        }
        auto& b = bursts.back();
        b.end_us = pkt.timestamp_us;
        ++b.packet_count;
        b.total_bytes += pkt.payload_len;
        prev_long = pkt.timestamp_us;
    }
    return bursts;
}

PairingResult pair_eyes(std::span<const Burst> bursts, std::int64_t pairing_window_us) {
    if (pairing_window_us <= 0) throw Error(ErrorCode::DomainError, "pairing window must be positive");
    PairingResult out;
    std::size_t i = 0;
    while (i < bursts.size()) {
        if (i + 1 < bursts.size() && bursts[i + 1].start_us - bursts[i].start_us <= pairing_window_us) {
            out.frames.push_back(FrameRecord{bursts[i], bursts[i + 1]});
            i += 2;
        } else {
            ++out.orphans;
            out.orphan_bytes += bursts[i].total_bytes;
            ++i;
        }
    }
    return out;
}

FrameSeries extract_series(std::span<const FrameRecord> frames) {
    FrameSeries s;
    s.sizes.reserve(frames.size());
    s.eye_intervals_us.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        s.sizes.push_back(static_cast<double>(frames[i].frame_size_bytes()));
        s.eye_intervals_us.push_back(static_cast<double>(frames[i].eye_interval_us()));
        if (i > 0) {
            s.frame_intervals_us.push_back(
                static_cast<double>(frames[i].frame_start_us() - frames[i - 1].frame_start_us()));
        }
    }
    return s;
}

RunningStats describe(std::span<const double> values) {
    RunningStats st;
    st.n = values.size();
    if (values.empty()) return st;
    // Welford
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t k = 0;
    for (double v : values) {
        ++k;
        const double delta = v - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (v - mean);
    }
    st.mean = mean;
    st.std_dev = st.n > 1 ? std::sqrt(m2 / static_cast<double>(st.n - 1)) : 0.0;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    st.min = *lo;
    st.max = *hi;
    return st;
}

UlCadence ul_cadence_stats(std::span<const PacketRecord> ul_packets, std::int64_t cluster_gap_us) {
    if (cluster_gap_us <= 0) throw Error(ErrorCode::DomainError, "cluster gap must be positive");
    UlCadence out;
    out.packets = ul_packets.size();
    if (ul_packets.empty()) return out;

    std::vector<std::int64_t> starts;
    std::vector<std::size_t> sizes;
    std::int64_t prev = 0;
    for (std::size_t i = 0; i < ul_packets.size(); ++i) {
        const auto ts = ul_packets[i].timestamp_us;
        if (i == 0 || ts - prev > cluster_gap_us) {
            starts.push_back(ts);
            sizes.push_back(0);
        }
        ++sizes.back();
        prev = ts;
    }
    out.clusters = starts.size();
    for (auto s : sizes) ++out.packets_per_cluster[s];
    for (std::size_t i = 1; i < starts.size(); ++i) out.intervals_us.push_back(static_cast<double>(starts[i] - starts[i - 1]));
    out.interval_stats = describe(out.intervals_us);
    if (starts.back() > starts.front()) {
        // n cluster starts span n - 1 intervals.
        out.clusters_per_second =
            static_cast<double>(out.clusters - 1) * 1e6 / static_cast<double>(starts.back() - starts.front());
    }
    return out;
}

TraceAnalysis analyze_trace(Trace records, const AnalysisConfig& cfg) {
    cfg.endpoints.validate();
    auto classified = classify_direction(std::move(records), cfg.endpoints);
    TraceAnalysis a;
    a.counts = classified.counts;

    Trace dl;
    Trace ul;
    for (const auto& r : classified.records) {
        if (r.direction == Direction::DL) {
            dl.push_back(r);
            a.total_dl_bytes += r.payload_len;
            if (r.payload_len <= cfg.burst.long_packet_threshold) a.short_dl_bytes += r.payload_len;
        } else if (r.direction == Direction::UL) {
            ul.push_back(r);
        }
    }
    a.bursts = detect_bursts(dl, cfg.burst);
    a.pairing = pair_eyes(a.bursts, cfg.pairing_window_us);
    a.series = extract_series(a.pairing.frames);
    a.series.orphan_bursts = a.pairing.orphans;
    for (const auto& f : a.pairing.frames) a.frame_bytes += f.frame_size_bytes();
    a.ul = ul_cadence_stats(ul, cfg.ul_cluster_gap_us);
    return a;
}

std::string series_to_csv(const FrameSeries& series) {
    std::string out = "frame_index,size_bytes,frame_interval_us,eye_interval_us\n";
    for (std::size_t i = 0; i < series.sizes.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += format_double(series.sizes[i]);
        out += ',';
        if (i > 0) out += format_double(series.frame_intervals_us[i - 1]);
        out += ',';
        out += format_double(series.eye_intervals_us[i]);
        out += '\n';
    }
    return out;
}

std::vector<double> read_series_column(std::string_view csv_text, std::string_view column) {
    LineReader lines(csv_text);
    auto header = lines.next();
    if (!header) throw Error(ErrorCode::SchemaError, "line 1: missing CSV header");
    const auto names = split_csv(*header);
    std::optional<std::size_t> idx;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (trim(names[i]) == column) idx = i;
    }
    if (!idx) throw Error(ErrorCode::SchemaError, "line 1: missing column '" + std::string(column) + "'");
    std::vector<double> out;
    while (auto line = lines.next()) {
        if (trim(*line).empty()) continue;
        const auto fields = split_csv(*line);
        if (*idx >= fields.size()) {
            throw Error(ErrorCode::SchemaError,
                        "line " + std::to_string(lines.line_number()) + ": missing column '" + std::string(column) + "'");
        }
        if (trim(fields[*idx]).empty()) continue;
        out.push_back(parse_double(fields[*idx], lines.line_number(), column));
    }
    return out;
}

}  // namespace xrtrace
