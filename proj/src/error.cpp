#include "xrtrace/error.hpp"

namespace xrtrace {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::UnsupportedCapture: return "UnsupportedCapture";
        case ErrorCode::TruncatedCapture: return "TruncatedCapture";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::ZeroVarianceError: return "ZeroVarianceError";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::SingularDesign: return "SingularDesign";
        case ErrorCode::OrderSelectionError: return "OrderSelectionError";
        case ErrorCode::InsufficientHistory: return "InsufficientHistory";
        case ErrorCode::EmptyTrace: return "EmptyTrace";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace xrtrace
