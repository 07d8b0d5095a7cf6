#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace xrtrace {

/// Stable error identifiers; the CLI prints these verbatim.
enum class ErrorCode {
    UnsupportedCapture,
    TruncatedCapture,
    ParseError,
    SchemaError,
    DomainError,
    ZeroVarianceError,
    InsufficientData,
    SingularDesign,
    OrderSelectionError,
    InsufficientHistory,
    EmptyTrace,
    ConfigError,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every data error raised by the toolkit.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace xrtrace
