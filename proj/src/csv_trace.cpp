#include "xrtrace/csv_trace.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <limits>
#include <optional>
#include <vector>

#include "xrtrace/error.hpp"
#include "xrtrace/text.hpp"

namespace xrtrace {
namespace {

enum Column { kTimestamp, kSrcIp, kSrcPort, kDstIp, kDstPort, kPayloadLen, kColumnCount };

constexpr std::array<std::string_view, kColumnCount> kColumnNames = {
    "timestamp_us", "src_ip", "src_port", "dst_ip", "dst_port", "payload_len"};

[[noreturn]] void parse_fail(std::size_t line, std::string_view column, std::string_view value) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": bad " + std::string(column) + " value '" +
                                          std::string(value) + "'");
}

template <typename Int>
Int parse_int(std::string_view field, std::size_t line, std::string_view column, Int lo, Int hi) {
    field = trim(field);
    Int value{};
    auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || p != field.data() + field.size() || field.empty() || value < lo || value > hi) {
        parse_fail(line, column, field);
    }
    return value;
}

Ipv4 parse_ip(std::string_view field, std::size_t line, std::string_view column) {
    auto ip = Ipv4::parse(trim(field));
    if (!ip) parse_fail(line, column, field);
    return *ip;
}

}  // namespace

Trace parse_csv(std::string_view text) {
    LineReader lines(text);
    auto header_line = lines.next();
    if (!header_line) throw Error(ErrorCode::SchemaError, "line 1: missing CSV header");

    std::array<std::optional<std::size_t>, kColumnCount> index{};
    const auto header = split_csv(*header_line);
    for (std::size_t i = 0; i < header.size(); ++i) {
        for (std::size_t c = 0; c < kColumnCount; ++c) {
            if (trim(header[i]) == kColumnNames[c]) index[c] = i;
        }
    }
    for (std::size_t c = 0; c < kColumnCount; ++c) {
        if (!index[c]) {
            throw Error(ErrorCode::SchemaError, "line 1: missing column '" + std::string(kColumnNames[c]) + "'");
        }
    }

    Trace out;
    while (auto line = lines.next()) {
        if (trim(*line).empty()) continue;
        const auto fields = split_csv(*line);
        auto field = [&](Column c) {
            if (*index[c] >= fields.size()) {
                throw Error(ErrorCode::SchemaError, "line " + std::to_string(lines.line_number()) + ": missing column '" +
                                                        std::string(kColumnNames[c]) + "'");
            }
            return fields[*index[c]];
        };
        const std::size_t ln = lines.line_number();
        PacketRecord r;
        r.timestamp_us = parse_int<std::int64_t>(field(kTimestamp), ln, kColumnNames[kTimestamp], 0,
                                                 std::numeric_limits<std::int64_t>::max());
        r.src_ip = parse_ip(field(kSrcIp), ln, kColumnNames[kSrcIp]);
        r.src_port = parse_int<std::uint16_t>(field(kSrcPort), ln, kColumnNames[kSrcPort], 0, 65535);
        r.dst_ip = parse_ip(field(kDstIp), ln, kColumnNames[kDstIp]);
        r.dst_port = parse_int<std::uint16_t>(field(kDstPort), ln, kColumnNames[kDstPort], 0, 65535);
        r.payload_len = parse_int<std::uint32_t>(field(kPayloadLen), ln, kColumnNames[kPayloadLen], 0, kMaxUdpPayload);
        out.push_back(r);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const PacketRecord& a, const PacketRecord& b) { return a.timestamp_us < b.timestamp_us; });
    return out;
}

std::string write_csv(const Trace& records) {
    std::string out(kTraceCsvHeader);
    out += '\n';
    for (const auto& r : records) {
        out += std::to_string(r.timestamp_us);
        out += ',';
        out += r.src_ip.to_string();
        out += ',';
        out += std::to_string(r.src_port);
        out += ',';
        out += r.dst_ip.to_string();
        out += ',';
        out += std::to_string(r.dst_port);
        out += ',';
        out += std::to_string(r.payload_len);
        out += '\n';
    }
    return out;
}

}  // namespace xrtrace
