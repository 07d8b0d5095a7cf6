#include "xrtrace/pcap.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <string>

#include "xrtrace/error.hpp"

namespace xrtrace {
namespace {

constexpr std::uint32_t kMagicMicro = 0xa1b2c3d4;
constexpr std::uint32_t kMagicMicroSwapped = 0xd4c3b2a1;
constexpr std::uint32_t kMagicNano = 0xa1b23c4d;
constexpr std::uint32_t kMagicNanoSwapped = 0x4d3cb2a1;

constexpr std::uint16_t kEtherTypeIpv4 = 0x0800;
constexpr std::uint16_t kEtherTypeVlan = 0x8100;
constexpr std::uint8_t kIpProtoUdp = 17;
constexpr std::size_t kEthernetHeaderLen = 14;
constexpr std::size_t kSllHeaderLen = 16;
constexpr std::size_t kUdpHeaderLen = 8;
constexpr std::size_t kIpv4MinHeaderLen = 20;

std::uint32_t load_le32(const std::uint8_t* p) {
    return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
           (std::uint32_t{p[3]} << 24);
}

std::uint32_t load_be32(const std::uint8_t* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
           std::uint32_t{p[3]};
}

std::uint16_t load_be16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}

class HeaderReader {
public:
    explicit HeaderReader(bool big_endian) : big_endian_(big_endian) {}
    std::uint32_t u32(const std::uint8_t* p) const { return big_endian_ ? load_be32(p) : load_le32(p); }
    std::uint16_t u16(const std::uint8_t* p) const {
        return big_endian_ ? load_be16(p) : static_cast<std::uint16_t>(p[0] | (p[1] << 8));
    }

private:
    bool big_endian_;
};

enum class Decode { Udp, NonIpv4, NonUdp, Fragment, Malformed };

// Decodes one frame starting at the network-layer header.
Decode decode_ipv4_udp(std::span<const std::uint8_t> ip, PacketRecord& out) {
    if (ip.size() < kIpv4MinHeaderLen) return Decode::Malformed;
    if ((ip[0] >> 4) != 4) return Decode::NonIpv4;
    const std::size_t ihl = std::size_t{ip[0] & 0x0fu} * 4;
    if (ihl < kIpv4MinHeaderLen || ip.size() < ihl) return Decode::Malformed;
    const std::uint16_t flags_frag = load_be16(&ip[6]);
    const bool more_fragments = (flags_frag & 0x2000) != 0;
    const std::uint16_t frag_offset = flags_frag & 0x1fff;
    if (ip[9] != kIpProtoUdp) return Decode::NonUdp;
    if (more_fragments || frag_offset != 0) return Decode::Fragment;
    if (ip.size() < ihl + kUdpHeaderLen) return Decode::Malformed;
    const auto* udp = &ip[ihl];
    const std::uint16_t udp_len = load_be16(udp + 4);
    if (udp_len < kUdpHeaderLen) return Decode::Malformed;
    out.src_ip = Ipv4{load_be32(&ip[12])};
    out.dst_ip = Ipv4{load_be32(&ip[16])};
    out.src_port = load_be16(udp);
    out.dst_port = load_be16(udp + 2);
    out.payload_len = udp_len - static_cast<std::uint32_t>(kUdpHeaderLen);
    if (out.payload_len > kMaxUdpPayload) return Decode::Malformed;
    return Decode::Udp;
}

Decode decode_frame(std::span<const std::uint8_t> frame, std::uint32_t link_type, PacketRecord& out) {
    std::size_t offset = 0;
    std::uint16_t ether_type = 0;
    if (link_type == kLinkTypeEthernet) {
        if (frame.size() < kEthernetHeaderLen) return Decode::Malformed;
        ether_type = load_be16(&frame[12]);
        offset = kEthernetHeaderLen;
        while (ether_type == kEtherTypeVlan) {
            if (frame.size() < offset + 4) return Decode::Malformed;
            ether_type = load_be16(&frame[offset + 2]);
            offset += 4;
        }
    } else {
        if (frame.size() < kSllHeaderLen) return Decode::Malformed;
        ether_type = load_be16(&frame[14]);
        offset = kSllHeaderLen;
    }
    if (ether_type != kEtherTypeIpv4) return Decode::NonIpv4;
    return decode_ipv4_udp(frame.subspan(offset), out);
}

void put_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_le16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_be16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

// Locally administered MAC derived from the IPv4 address.
void put_mac(std::vector<std::uint8_t>& out, Ipv4 ip) {
    out.push_back(0x02);
    out.push_back(0x00);
    put_be32(out, ip.value());
}

std::uint16_t ipv4_checksum(std::span<const std::uint8_t> header) {
    std::uint32_t sum = 0;
    for (std::size_t i = 0; i + 1 < header.size(); i += 2) sum += load_be16(&header[i]);
    while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
    return static_cast<std::uint16_t>(~sum);
}

}  // namespace

PcapParseResult parse_pcap(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kPcapGlobalHeaderLen) {
        throw Error(ErrorCode::UnsupportedCapture,
                    "capture shorter than the 24-byte pcap global header (" + std::to_string(bytes.size()) + " bytes)");
    }
    PcapParseResult result;
    const std::uint32_t magic = load_le32(bytes.data());
    switch (magic) {
        case kMagicMicro: break;
        case kMagicMicroSwapped: result.swapped = true; break;
        case kMagicNano: result.nanosecond = true; break;
        case kMagicNanoSwapped:
            result.swapped = true;
            result.nanosecond = true;
            break;
        default:
            throw Error(ErrorCode::UnsupportedCapture, "unrecognized pcap magic 0x" + [&] {
                std::array<char, 9> buf{};
                std::snprintf(buf.data(), buf.size(), "%08x", magic);
                return std::string(buf.data());
            }());
    }
    const HeaderReader rd(result.swapped);
    const std::uint16_t version_major = rd.u16(&bytes[4]);
    if (version_major != 2) {
        throw Error(ErrorCode::UnsupportedCapture, "unsupported pcap major version " + std::to_string(version_major));
    }
    result.link_type = rd.u32(&bytes[20]) & 0x0fffffff;
    if (result.link_type != kLinkTypeEthernet && result.link_type != kLinkTypeLinuxSll) {
        throw Error(ErrorCode::UnsupportedCapture, "unsupported link type " + std::to_string(result.link_type));
    }

    std::size_t offset = kPcapGlobalHeaderLen;
    while (offset < bytes.size()) {
        if (bytes.size() - offset < kPcapRecordHeaderLen) {
            throw Error(ErrorCode::TruncatedCapture,
                        "record header truncated at byte offset " + std::to_string(offset));
        }
        const auto* hdr = &bytes[offset];
        const std::uint32_t ts_sec = rd.u32(hdr);
        const std::uint32_t ts_frac = rd.u32(hdr + 4);
        const std::uint32_t incl_len = rd.u32(hdr + 8);
        if (bytes.size() - offset - kPcapRecordHeaderLen < incl_len) {
            throw Error(ErrorCode::TruncatedCapture, "record body truncated at byte offset " + std::to_string(offset) +
                                                         " (needs " + std::to_string(incl_len) + " bytes)");
        }
        const auto frame = bytes.subspan(offset + kPcapRecordHeaderLen, incl_len);
        offset += kPcapRecordHeaderLen + incl_len;
        ++result.frames;

        PacketRecord rec;
        const std::int64_t frac_us = result.nanosecond ? ts_frac / 1000 : ts_frac;
        rec.timestamp_us = std::int64_t{ts_sec} * 1'000'000 + frac_us;
        switch (decode_frame(frame, result.link_type, rec)) {
            case Decode::Udp: result.records.push_back(rec); break;
            case Decode::NonIpv4: ++result.skipped.non_ipv4; break;
            case Decode::NonUdp: ++result.skipped.non_udp; break;
            case Decode::Fragment: ++result.skipped.fragments; break;
            case Decode::Malformed: ++result.skipped.malformed; break;
        }
    }
    std::stable_sort(result.records.begin(), result.records.end(),
                     [](const PacketRecord& a, const PacketRecord& b) { return a.timestamp_us < b.timestamp_us; });
    return result;
}

std::vector<std::uint8_t> write_pcap(const Trace& records) {
    constexpr std::size_t kFrameOverhead = kEthernetHeaderLen + kIpv4MinHeaderLen + kUdpHeaderLen;
    std::vector<std::uint8_t> out;
    std::size_t total = kPcapGlobalHeaderLen;
    for (const auto& r : records) total += kPcapRecordHeaderLen + kFrameOverhead + r.payload_len;
    out.reserve(total);

    put_le32(out, kMagicMicro);
    put_le16(out, 2);
    put_le16(out, 4);
    put_le32(out, 0);  // thiszone
    put_le32(out, 0);  // sigfigs
    put_le32(out, 262144);
    put_le32(out, kLinkTypeEthernet);

    for (const auto& r : records) {
        if (r.timestamp_us < 0 || r.timestamp_us / 1'000'000 > 0xffffffffLL) {
            throw Error(ErrorCode::DomainError,
                        "timestamp " + std::to_string(r.timestamp_us) + " us not representable in pcap");
        }
        if (r.payload_len > kMaxUdpPayload) {
            throw Error(ErrorCode::DomainError, "payload_len " + std::to_string(r.payload_len) + " exceeds 65507");
        }
        const auto frame_len = static_cast<std::uint32_t>(kFrameOverhead + r.payload_len);
        put_le32(out, static_cast<std::uint32_t>(r.timestamp_us / 1'000'000));
        put_le32(out, static_cast<std::uint32_t>(r.timestamp_us % 1'000'000));
        put_le32(out, frame_len);
        put_le32(out, frame_len);

        put_mac(out, r.dst_ip);
        put_mac(out, r.src_ip);
        put_be16(out, kEtherTypeIpv4);

        const std::size_t ip_start = out.size();
        out.push_back(0x45);
        out.push_back(0x00);
        put_be16(out, static_cast<std::uint16_t>(kIpv4MinHeaderLen + kUdpHeaderLen + r.payload_len));
        put_be16(out, 0);       // identification
        put_be16(out, 0x4000);  // don't fragment
        out.push_back(64);
        out.push_back(kIpProtoUdp);
        put_be16(out, 0);  // checksum placeholder
        put_be32(out, r.src_ip.value());
        put_be32(out, r.dst_ip.value());
        const std::uint16_t csum = ipv4_checksum(std::span(out).subspan(ip_start, kIpv4MinHeaderLen));
        out[ip_start + 10] = static_cast<std::uint8_t>(csum >> 8);
        out[ip_start + 11] = static_cast<std::uint8_t>(csum);

        put_be16(out, r.src_port);
        put_be16(out, r.dst_port);
        put_be16(out, static_cast<std::uint16_t>(kUdpHeaderLen + r.payload_len));
        put_be16(out, 0);  // UDP checksum optional over IPv4
        out.insert(out.end(), r.payload_len, std::uint8_t{0});
    }
    return out;
}

}  // namespace xrtrace
