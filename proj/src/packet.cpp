#include "xrtrace/packet.hpp"

#include <algorithm>
#include <charconv>

#include "xrtrace/error.hpp"

namespace xrtrace {

std::optional<Ipv4> Ipv4::parse(std::string_view text) {
    std::uint32_t value = 0;
    const char* p = text.data();
    const char* end = text.data() + text.size();
    for (int octet = 0; octet < 4; ++octet) {
        if (octet > 0) {
            if (p == end || *p != '.') return std::nullopt;
            ++p;
        }
        unsigned part = 0;
        auto [next, ec] = std::from_chars(p, end, part);
        if (ec != std::errc{} || next == p || next - p > 3 || part > 255) return std::nullopt;
        value = (value << 8) | part;
        p = next;
    }
    if (p != end) return std::nullopt;
    return Ipv4{value};
}

std::string Ipv4::to_string() const {
    return std::to_string(value_ >> 24) + '.' + std::to_string((value_ >> 16) & 0xff) + '.' +
           std::to_string((value_ >> 8) & 0xff) + '.' + std::to_string(value_ & 0xff);
}

std::string_view to_string(Direction d) noexcept {
    switch (d) {
        case Direction::UL: return "UL";
        case Direction::DL: return "DL";
        case Direction::Other: return "Other";
    }
    return "Other";
}

void EndpointConfig::validate() const {
    if (device_ip == server_ip) {
        throw Error(ErrorCode::ConfigError, "device_ip and server_ip must differ (" + device_ip.to_string() + ")");
    }
}

namespace {

bool port_ok(std::optional<std::uint16_t> want, std::uint16_t got) {
    return !want || *want == got;
}

}  // namespace

ClassifiedTrace classify_direction(Trace records, const EndpointConfig& cfg) {
    DirectionCounts counts;
    for (auto& r : records) {
        if (r.src_ip == cfg.device_ip && r.dst_ip == cfg.server_ip && port_ok(cfg.device_port, r.src_port) &&
            port_ok(cfg.server_port, r.dst_port)) {
            r.direction = Direction::UL;
            ++counts.ul;
        } else if (r.src_ip == cfg.server_ip && r.dst_ip == cfg.device_ip && port_ok(cfg.server_port, r.src_port) &&
                   port_ok(cfg.device_port, r.dst_port)) {
            r.direction = Direction::DL;
            ++counts.dl;
        } else {
            r.direction = Direction::Other;
            ++counts.other;
        }
    }
    return {std::move(records), counts};
}

Trace filter_direction(const Trace& records, Direction d) {
    Trace out;
    std::copy_if(records.begin(), records.end(), std::back_inserter(out),
                 [d](const PacketRecord& r) { return r.direction == d; });
    return out;
}

}  // namespace xrtrace
