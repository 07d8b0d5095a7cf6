#include "xrtrace/qoe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xrtrace/error.hpp"
#include "xrtrace/text.hpp"

namespace xrtrace::qoe {
namespace {

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

void require_positive(std::span<const double> values, const std::string& what, const std::string& scenario) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!positive(values[i])) {
            throw Error(ErrorCode::DomainError, "scenario '" + scenario + "' window " + std::to_string(i) + ": " + what +
                                                    " must be positive, got " + format_double(values[i]));
        }
    }
}

std::vector<double> geometric(double lo, double hi, std::size_t count) {
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = count > 1 ? static_cast<double>(i) / static_cast<double>(count - 1) : 0.0;
        out[i] = lo * std::pow(hi / lo, t);
    }
    return out;
}

}  // namespace

void QoeParams::validate() const {
    if (!positive(f_min) || !positive(r_min) || !positive(l_min) || !positive(u)) {
        throw Error(ErrorCode::DomainError, "QoE parameters f_min, r_min, l_min and u must all be positive");
    }
}

void ScenarioWindows::validate() const {
    if (fps.empty()) throw Error(ErrorCode::DomainError, "scenario '" + name + "' has no windows");
    if (pixels.size() != fps.size() || latency_ms.size() != fps.size()) {
        throw Error(ErrorCode::DomainError, "scenario '" + name + "' has per-window lists of unequal length");
    }
    require_positive(fps, "fps", name);
    require_positive(pixels, "pixels", name);
    require_positive(latency_ms, "latency_ms", name);
}

QoeReport qoe_total(const ScenarioWindows& s, const QoeParams& params) {
    params.validate();
    s.validate();
    QoeReport rep;
    rep.name = s.name;
    rep.windows.reserve(s.size());
    double sum_q = 0.0, sum_p = 0.0, sum_g = 0.0;
    for (std::size_t n = 0; n < s.size(); ++n) {
        WindowTerms w;
        w.q = std::log(s.fps[n] / params.f_min);
        w.p = std::log(s.pixels[n] / params.r_min);
        w.g = std::exp(s.latency_ms[n] / params.l_min);
        w.qoe = w.q + w.p - params.u * w.g;
        sum_q += w.q;
        sum_p += w.p;
        sum_g += w.g;
        rep.windows.push_back(w);
    }
    rep.total = sum_q + sum_p - params.u * sum_g;
    rep.average = rep.total / static_cast<double>(s.size());
    return rep;
}

Comparison compare_scenarios(std::span<const ScenarioWindows> scenarios, const QoeParams& params) {
    if (scenarios.size() < 2) {
        throw Error(ErrorCode::DomainError, "comparison needs at least two scenarios, got " +
                                                std::to_string(scenarios.size()));
    }
    Comparison cmp;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        cmp.reports.push_back(qoe_total(scenarios[i], params));
        cmp.ranking.push_back({i, cmp.reports.back().name, cmp.reports.back().total, cmp.reports.back().average});
    }
    std::stable_sort(cmp.ranking.begin(), cmp.ranking.end(),
                     [](const RankedScenario& a, const RankedScenario& b) { return a.average > b.average; });
    return cmp;
}

std::string comparison_to_csv(const Comparison& cmp) {
    std::string out = "window";
    std::size_t rows = 0;
    for (const auto& r : cmp.reports) {
        out += ',' + r.name;
        rows = std::max(rows, r.windows.size());
    }
    out += '\n';
    for (std::size_t n = 0; n < rows; ++n) {
        out += std::to_string(n);
        for (const auto& r : cmp.reports) {
            out += ',';
            if (n < r.windows.size()) out += format_double(r.windows[n].qoe);
        }
        out += '\n';
    }
    return out;
}

std::string report_to_csv(const ScenarioWindows& s, const QoeReport& report) {
    std::string out = "window,fps,pixels,latency_ms,q,p,g,qoe\n";
    for (std::size_t n = 0; n < report.windows.size(); ++n) {
        const auto& w = report.windows[n];
        out += std::to_string(n) + ',' + format_double(s.fps[n]) + ',' + format_double(s.pixels[n]) + ',' +
               format_double(s.latency_ms[n]) + ',' + format_double(w.q) + ',' + format_double(w.p) + ',' +
               format_double(w.g) + ',' + format_double(w.qoe) + '\n';
    }
    return out;
}

ScenarioWindows scenario_from_csv(std::string_view text, std::string name) {
    LineReader lines(text);
    auto header = lines.next();
    if (!header) throw Error(ErrorCode::SchemaError, "line 1: missing CSV header");
    const auto names = split_csv(*header);
    const std::string_view wanted[] = {"fps", "pixels", "latency_ms"};
    std::size_t idx[3];
    for (std::size_t c = 0; c < 3; ++c) {
        auto it = std::find_if(names.begin(), names.end(), [&](std::string_view h) { return trim(h) == wanted[c]; });
        if (it == names.end()) {
            throw Error(ErrorCode::SchemaError, "line 1: missing column '" + std::string(wanted[c]) + "'");
        }
        idx[c] = static_cast<std::size_t>(it - names.begin());
    }
    ScenarioWindows s;
    s.name = std::move(name);
    while (auto line = lines.next()) {
        if (trim(*line).empty()) continue;
        const auto fields = split_csv(*line);
        for (std::size_t c = 0; c < 3; ++c) {
            if (idx[c] >= fields.size()) {
                throw Error(ErrorCode::SchemaError, "line " + std::to_string(lines.line_number()) +
                                                        ": missing column '" + std::string(wanted[c]) + "'");
            }
        }
        s.fps.push_back(parse_double(fields[idx[0]], lines.line_number(), wanted[0]));
        s.pixels.push_back(parse_double(fields[idx[1]], lines.line_number(), wanted[1]));
        s.latency_ms.push_back(parse_double(fields[idx[2]], lines.line_number(), wanted[2]));
    }
    return s;
}

RateReport raw_data_rate(std::uint64_t width, std::uint64_t height, std::uint64_t bits_per_pixel, std::uint64_t fps,
                         std::uint64_t sensors) {
    const std::uint64_t factors[] = {width, height, bits_per_pixel, fps, sensors};
    std::uint64_t bits = 1;
    for (auto f : factors) {
        if (f == 0) throw Error(ErrorCode::DomainError, "raw data rate arguments must be positive");
        if (__builtin_mul_overflow(bits, f, &bits)) {
            throw Error(ErrorCode::DomainError, "raw data rate overflows 64 bits");
        }
    }
    RateReport r;
    r.bits_per_second = bits;
    const auto b = static_cast<double>(bits);
    r.mbit_per_s = b / 1e6;
    r.gbit_per_s = b / 1e9;
    r.gibit_per_s = b / 1073741824.0;
    return r;
}

ScenarioWindows windows_from_frame_starts(std::span<const std::int64_t> frame_start_us, std::int64_t window_us,
                                          double pixels, double latency_ms, std::string name) {
    if (window_us <= 0) throw Error(ErrorCode::DomainError, "window length must be positive");
    ScenarioWindows s;
    s.name = std::move(name);
    if (frame_start_us.empty()) return s;
    const std::int64_t origin = frame_start_us.front();
    const auto last = static_cast<std::size_t>((frame_start_us.back() - origin) / window_us);
    // Only complete windows are reported; a partial tail would understate F_n.
    const std::size_t windows = last;
    std::vector<std::size_t> counts(last + 1, 0);
    for (auto t : frame_start_us) ++counts[static_cast<std::size_t>((t - origin) / window_us)];
    const double seconds = static_cast<double>(window_us) / 1e6;
    for (std::size_t n = 0; n < windows; ++n) {
        s.fps.push_back(static_cast<double>(counts[n]) / seconds);
        s.pixels.push_back(pixels);
        s.latency_ms.push_back(latency_ms);
    }
    return s;
}

std::vector<ScenarioRanges> reference_ranges() {
    constexpr double kHigh = 2048.0 * 1080.0;
    constexpr double kLow = 1024.0 * 540.0;
    return {
        {"Remote_high", {55, 60}, kHigh, {68, 86}},
        {"Remote_low", {55, 60}, kLow, {59, 65}},
        {"Local_high", {9, 21}, kHigh, {40, 110}},
        {"Local_low", {25, 33}, kLow, {40, 40}},
    };
}

std::map<std::string, double> reference_averages() {
    return {{"Remote_high", 0.92}, {"Local_high", 0.46}, {"Remote_low", 0.64}, {"Local_low", 0.53}};
}

ScenarioWindows sample_scenario(const ScenarioRanges& ranges, std::size_t windows, Rng& rng) {
    ScenarioWindows s;
    s.name = ranges.name;
    for (std::size_t n = 0; n < windows; ++n) {
        s.fps.push_back(ranges.fps.lo + (ranges.fps.hi - ranges.fps.lo) * rng.uniform());
        s.pixels.push_back(ranges.pixels);
        s.latency_ms.push_back(ranges.latency_ms.lo + (ranges.latency_ms.hi - ranges.latency_ms.lo) * rng.uniform());
    }
    return s;
}

CalibrationGrid CalibrationGrid::standard() {
    CalibrationGrid g;
    g.f_min = geometric(1.0, 60.0, 25);
    g.r_min = geometric(1024.0 * 540.0 / 16.0, 2048.0 * 1080.0 * 4.0, 25);
    g.l_min = geometric(10.0, 400.0, 60);
    g.u = geometric(1e-4, 5.0, 80);
    return g;
}

CalibrationReport calibrate(std::span<const ScenarioWindows> scenarios, const std::map<std::string, double>& targets,
                            const CalibrationGrid& grid) {
    struct Prepared {
        std::string name;
        double n;
        double sum_ln_f;
        double sum_ln_r;
        const std::vector<double>* latency;
        double target;
    };
    std::vector<Prepared> prep;
    for (const auto& s : scenarios) {
        s.validate();
        auto it = targets.find(s.name);
        if (it == targets.end()) continue;
        Prepared p{s.name, static_cast<double>(s.size()), 0.0, 0.0, &s.latency_ms, it->second};
        for (std::size_t i = 0; i < s.size(); ++i) {
            p.sum_ln_f += std::log(s.fps[i]);
            p.sum_ln_r += std::log(s.pixels[i]);
        }
        prep.push_back(p);
    }
    if (prep.empty()) throw Error(ErrorCode::DomainError, "no scenario matches a calibration target");
    if (grid.f_min.empty() || grid.r_min.empty() || grid.l_min.empty() || grid.u.empty()) {
        throw Error(ErrorCode::DomainError, "calibration grid has an empty axis");
    }

    CalibrationReport rep;
    rep.residual = std::numeric_limits<double>::infinity();
    std::vector<double> sum_g(prep.size());
    for (double l_min : grid.l_min) {
        for (std::size_t k = 0; k < prep.size(); ++k) {
            sum_g[k] = 0.0;
            for (double l : *prep[k].latency) sum_g[k] += std::exp(l / l_min);
        }
        for (double f_min : grid.f_min) {
            const double ln_f = std::log(f_min);
            for (double r_min : grid.r_min) {
                const double ln_r = std::log(r_min);
                for (double u : grid.u) {
                    double rss = 0.0;
                    for (std::size_t k = 0; k < prep.size(); ++k) {
                        const auto& p = prep[k];
                        const double avg = (p.sum_ln_f - p.n * ln_f + p.sum_ln_r - p.n * ln_r - u * sum_g[k]) / p.n;
                        rss += (avg - p.target) * (avg - p.target);
                    }
                    ++rep.evaluated;
                    if (rss < rep.residual) {
                        rep.residual = rss;
                        rep.best = {f_min, r_min, l_min, u};
                    }
                }
            }
        }
    }
    for (const auto& p : prep) {
        rep.targets[p.name] = p.target;
    }
    for (const auto& s : scenarios) {
        if (targets.count(s.name)) rep.fitted[s.name] = qoe_total(s, rep.best).average;
    }
    return rep;
}

}  // namespace xrtrace::qoe
