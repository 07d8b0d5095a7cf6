#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "xrtrace/random.hpp"

namespace xrtrace::qoe {

/// Parameters of the windowed QoE score
///   QoE = sum_n ln(F_n / f_min) + sum_n ln(R_n / r_min) - u sum_n exp(L_n / l_min).
struct QoeParams {
    double f_min = 9.0;            // frames/s
    double r_min = 1024.0 * 540.0;  // pixels per frame
    double l_min = 40.0;           // ms
    double u = 0.3;                // latency penalty factor

    void validate() const;
};

/// Per-window frame rate, resolution (total pixels) and latency of one scenario.
struct ScenarioWindows {
    std::string name;
    std::vector<double> fps;
    std::vector<double> pixels;
    std::vector<double> latency_ms;

    [[nodiscard]] std::size_t size() const noexcept { return fps.size(); }
    void validate() const;
};

struct WindowTerms {
    double q = 0.0;  // frame-rate utility
    double p = 0.0;  // resolution utility
    double g = 0.0;  // latency penalty before scaling by u
    double qoe = 0.0;
};

struct QoeReport {
    std::string name;
    std::vector<WindowTerms> windows;
    double total = 0.0;
    double average = 0.0;  // total / N
};

/// Throws Error{DomainError} for empty, mismatched or non-positive inputs.
[[nodiscard]] QoeReport qoe_total(const ScenarioWindows& s, const QoeParams& params);

struct RankedScenario {
    std::size_t input_index = 0;
    std::string name;
    double total = 0.0;
    double average = 0.0;
};

struct Comparison {
    std::vector<RankedScenario> ranking;  // best first; ties keep input order
    std::vector<QoeReport> reports;       // input order
};

[[nodiscard]] Comparison compare_scenarios(std::span<const ScenarioWindows> scenarios, const QoeParams& params);

/// `window,<name>...` per-window QoE table across scenarios (windows beyond a
/// scenario's length are left empty).
[[nodiscard]] std::string comparison_to_csv(const Comparison& cmp);

/// `window,fps,pixels,latency_ms,q,p,g,qoe` for one scenario.
[[nodiscard]] std::string report_to_csv(const ScenarioWindows& s, const QoeReport& report);

/// Reads `window,fps,pixels,latency_ms` rows.
[[nodiscard]] ScenarioWindows scenario_from_csv(std::string_view text, std::string name);

struct RateReport {
    std::uint64_t bits_per_second = 0;
    double mbit_per_s = 0.0;   // 10^6
    double gbit_per_s = 0.0;   // 10^9
    double gibit_per_s = 0.0;  // 2^30
};

/// width * height * bits_per_pixel * fps * sensors, with overflow checking.
[[nodiscard]] RateReport raw_data_rate(std::uint64_t width, std::uint64_t height, std::uint64_t bits_per_pixel,
                                       std::uint64_t fps, std::uint64_t sensors = 1);

/// Window boundaries for per-window frame rates derived from a trace.
/// F_n counts frames starting in window n divided by the window length;
/// resolution and latency are not observable in packets and are supplied.
[[nodiscard]] ScenarioWindows windows_from_frame_starts(std::span<const std::int64_t> frame_start_us,
                                                        std::int64_t window_us, double pixels, double latency_ms,
                                                        std::string name);

/// Uniform range for sampling synthetic per-window values.
struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

struct ScenarioRanges {
    std::string name;
    Range fps;
    double pixels = 0.0;
    Range latency_ms;
};

/// The four rendering setups (remote/local x high/low resolution) with the
/// frame-rate and latency ranges measured for the city-model system.
[[nodiscard]] std::vector<ScenarioRanges> reference_ranges();

/// Reported average QoE per reference scenario, keyed by name.
[[nodiscard]] std::map<std::string, double> reference_averages();

[[nodiscard]] ScenarioWindows sample_scenario(const ScenarioRanges& ranges, std::size_t windows, Rng& rng);

struct CalibrationGrid {
    std::vector<double> f_min;
    std::vector<double> r_min;
    std::vector<double> l_min;
    std::vector<double> u;

    /// Log-spaced grids around the default parameters.
    [[nodiscard]] static CalibrationGrid standard();
};

struct CalibrationReport {
    QoeParams best;
    double residual = 0.0;  // sum of squared (fitted - target) averages
    std::map<std::string, double> fitted;
    std::map<std::string, double> targets;
    std::size_t evaluated = 0;
};

/// Exhaustive grid search for the parameters whose per-scenario average QoE
/// best matches the targets. Scenarios without a target are ignored.
[[nodiscard]] CalibrationReport calibrate(std::span<const ScenarioWindows> scenarios,
                                          const std::map<std::string, double>& targets,
                                          const CalibrationGrid& grid = CalibrationGrid::standard());

}  // namespace xrtrace::qoe
