#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "xrtrace/packet.hpp"

namespace xrtrace {

/// Link types accepted by the reader.
inline constexpr std::uint32_t kLinkTypeEthernet = 1;
inline constexpr std::uint32_t kLinkTypeLinuxSll = 113;

inline constexpr std::size_t kPcapGlobalHeaderLen = 24;
inline constexpr std::size_t kPcapRecordHeaderLen = 16;

struct PcapSkipCounts {
    std::size_t non_ipv4 = 0;   // ARP, IPv6, anything that is not EtherType 0x0800
    std::size_t non_udp = 0;
    std::size_t fragments = 0;  // IPv4 fragments are dropped, not reassembled
    std::size_t malformed = 0;  // headers cut short by snaplen or inconsistent lengths

    [[nodiscard]] std::size_t total() const noexcept { return non_ipv4 + non_udp + fragments + malformed; }
};

struct PcapParseResult {
    Trace records;  // sorted by timestamp, direction = Other
    PcapSkipCounts skipped;
    std::size_t frames = 0;  // link-layer frames seen; == records.size() + skipped.total()
    std::uint32_t link_type = 0;
    bool nanosecond = false;
    bool swapped = false;
};

/// Parses a classic (not pcapng) capture held in memory.
///
/// Throws Error{UnsupportedCapture} for a bad global header or link type and
/// Error{TruncatedCapture} when a record header or body runs past the end of
/// the input; the message carries the byte offset of the record.
[[nodiscard]] PcapParseResult parse_pcap(std::span<const std::uint8_t> bytes);

/// Serializes records as little-endian microsecond pcap with Ethernet framing
/// and synthetic MAC/IPv4/UDP headers. Payload bytes are zero.
[[nodiscard]] std::vector<std::uint8_t> write_pcap(const Trace& records);

}  // namespace xrtrace
