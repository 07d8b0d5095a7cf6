#pragma once

#include <string>
#include <string_view>

#include "xrtrace/packet.hpp"

namespace xrtrace {

/// Header of the packet interchange CSV.
inline constexpr std::string_view kTraceCsvHeader = "timestamp_us,src_ip,src_port,dst_ip,dst_port,payload_len";

/// Parses the packet interchange CSV. Columns are matched by header name, so
/// their order may vary and extra columns are ignored. LF and CRLF are both
/// accepted. Rows are stably sorted by timestamp; direction is left Other.
///
/// Throws Error{SchemaError} for a missing column and Error{ParseError} for a
/// malformed field; both messages carry the 1-based line number.
[[nodiscard]] Trace parse_csv(std::string_view text);

[[nodiscard]] std::string write_csv(const Trace& records);

}  // namespace xrtrace
