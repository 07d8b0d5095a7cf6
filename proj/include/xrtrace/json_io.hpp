#pragma once

#include <json.hpp>

#include "xrtrace/arma.hpp"
#include "xrtrace/dist_fit.hpp"
#include "xrtrace/frames.hpp"
#include "xrtrace/pcap.hpp"
#include "xrtrace/qoe.hpp"
#include "xrtrace/traffic_gen.hpp"

// JSON mappings for the toolkit's reports and config files. Readers throw
// Error{ConfigError} on malformed documents.
namespace xrtrace {

using Json = nlohmann::ordered_json;

/// Non-finite values become null.
[[nodiscard]] Json number(double v);

[[nodiscard]] Json to_json(const RunningStats& s);
[[nodiscard]] Json to_json(const UlCadence& c);
[[nodiscard]] Json to_json(const PcapSkipCounts& s);
[[nodiscard]] Json to_json(const EndpointConfig& e);

[[nodiscard]] Json to_json(const dist::SampleSummary& s);
[[nodiscard]] Json to_json(const dist::DistributionFit& f);  // without the Q-Q points
[[nodiscard]] Json to_json(const dist::FitSelection& s);

[[nodiscard]] Json to_json(const arma::ArmaModel& m);
[[nodiscard]] arma::ArmaModel arma_model_from_json(const Json& j);
[[nodiscard]] Json to_json(const arma::AdfResult& r);
[[nodiscard]] Json to_json(const arma::OrderSelection& s);
[[nodiscard]] Json to_json(const arma::ForecastReport& r);  // metrics only

[[nodiscard]] Json to_json(const qoe::QoeParams& p);
[[nodiscard]] qoe::QoeParams qoe_params_from_json(const Json& j, qoe::QoeParams base = {});
[[nodiscard]] Json to_json(const qoe::QoeReport& r);
[[nodiscard]] Json to_json(const qoe::Comparison& c);
[[nodiscard]] Json to_json(const qoe::RateReport& r);
[[nodiscard]] Json to_json(const qoe::CalibrationReport& r);

/// Accepts {"name", "windows": [{"fps", "pixels", "latency_ms"}...]} or
/// {"name", "fps": [...], "pixels": [...], "latency_ms": [...]}.
[[nodiscard]] qoe::ScenarioWindows scenario_from_json(const Json& j, std::string fallback_name);

[[nodiscard]] Json to_json(const gen::TrafficModel& m);
/// Missing keys keep their defaults; unknown keys are rejected.
[[nodiscard]] gen::TrafficModel traffic_model_from_json(const Json& j);

[[nodiscard]] Json parse_json(std::string_view text, std::string_view what);

}  // namespace xrtrace
