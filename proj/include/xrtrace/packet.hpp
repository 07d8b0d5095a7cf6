#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace xrtrace {

/// IPv4 address held in host byte order.
class Ipv4 {
public:
    constexpr Ipv4() = default;
    constexpr explicit Ipv4(std::uint32_t value) : value_(value) {}
    constexpr Ipv4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d)
        : value_((std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) | (std::uint32_t{c} << 8) | d) {}

    /// Parses dotted-quad notation; returns nullopt on anything else.
    [[nodiscard]] static std::optional<Ipv4> parse(std::string_view text);

    [[nodiscard]] constexpr std::uint32_t value() const noexcept { return value_; }
    [[nodiscard]] std::string to_string() const;

    friend constexpr bool operator==(Ipv4, Ipv4) = default;

private:
    std::uint32_t value_ = 0;
};

enum class Direction : std::uint8_t { UL, DL, Other };

[[nodiscard]] std::string_view to_string(Direction d) noexcept;

/// Maximum UDP payload carried by an IPv4 datagram.
inline constexpr std::uint32_t kMaxUdpPayload = 65507;

/// One captured UDP datagram.
struct PacketRecord {
    std::int64_t timestamp_us = 0;
    Direction direction = Direction::Other;
    Ipv4 src_ip;
    Ipv4 dst_ip;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint32_t payload_len = 0;

    friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

using Trace = std::vector<PacketRecord>;

/// Device/server pair that defines the UL and DL streams.
struct EndpointConfig {
    Ipv4 device_ip;
    Ipv4 server_ip;
    std::optional<std::uint16_t> device_port;
    std::optional<std::uint16_t> server_port;

    /// Throws ConfigError when device_ip == server_ip.
    void validate() const;
};

struct DirectionCounts {
    std::size_t ul = 0;
    std::size_t dl = 0;
    std::size_t other = 0;
};

struct ClassifiedTrace {
    Trace records;
    DirectionCounts counts;
};

/// Relabels every record as UL, DL or Other from its addresses alone.
/// Re-running on the output is a no-op.
[[nodiscard]] ClassifiedTrace classify_direction(Trace records, const EndpointConfig& cfg);

/// Copies records with the given direction, preserving order.
[[nodiscard]] Trace filter_direction(const Trace& records, Direction d);

}  // namespace xrtrace
