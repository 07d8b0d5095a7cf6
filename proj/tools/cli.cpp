#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>

#include "xrtrace/arma.hpp"
#include "xrtrace/csv_trace.hpp"
#include "xrtrace/dist_fit.hpp"
#include "xrtrace/error.hpp"
#include "xrtrace/frames.hpp"
#include "xrtrace/json_io.hpp"
#include "xrtrace/pcap.hpp"
#include "xrtrace/qoe.hpp"
#include "xrtrace/text.hpp"
#include "xrtrace/traffic_gen.hpp"

namespace xrtrace::cli {
namespace {

namespace fs = std::filesystem;

constexpr std::string_view kSeriesColumns[] = {"size_bytes", "frame_interval_us", "eye_interval_us"};

// Names the module operation running when an Error escapes.
struct Stage {
    std::string op = "cli.run";
    void operator()(std::string name) { op = std::move(name); }
};

Ipv4 parse_ip_arg(const std::string& text, const char* flag) {
    auto ip = Ipv4::parse(text);
    if (!ip) throw CLI::ValidationError(flag, "not an IPv4 address: " + text);
    return *ip;
}

std::string mbit_display(double mbit) {
    std::array<char, 64> buf{};
    std::snprintf(buf.data(), buf.size(), "%.1f Mbit/s", mbit);
    return buf.data();
}

Json summary_or_null(const std::vector<double>& v) {
    if (v.empty()) return nullptr;
    return to_json(dist::summarize(v));
}

Trace load_trace(const std::string& path, std::string format, Stage& stage, Json& input_info) {
    const auto bytes = read_binary_file(path);
    if (format == "auto") {
        bool pcap_magic = false;
        if (bytes.size() >= 4) {
            const std::uint32_t m = std::uint32_t{bytes[0]} | (std::uint32_t{bytes[1]} << 8) |
                                    (std::uint32_t{bytes[2]} << 16) | (std::uint32_t{bytes[3]} << 24);
            pcap_magic = m == 0xa1b2c3d4 || m == 0xd4c3b2a1 || m == 0xa1b23c4d || m == 0x4d3cb2a1;
        }
        format = pcap_magic ? "pcap" : "csv";
    }
    input_info["path"] = path;
    input_info["format"] = format;
    if (format == "pcap") {
        stage("trace_ingest.parse_pcap");
        auto res = parse_pcap(bytes);
        input_info["link_type"] = res.link_type;
        input_info["nanosecond"] = res.nanosecond;
        input_info["frames"] = res.frames;
        input_info["udp_records"] = res.records.size();
        input_info["skipped"] = to_json(res.skipped);
        return std::move(res.records);
    }
    stage("trace_ingest.parse_csv");
    auto records = parse_csv(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    input_info["udp_records"] = records.size();
    return records;
}

qoe::ScenarioWindows load_scenario(const std::string& path) {
    const auto text = read_text_file(path);
    const auto stem = fs::path(path).stem().string();
    if (fs::path(path).extension() == ".csv") return qoe::scenario_from_csv(text, stem);
    return scenario_from_json(parse_json(text, path), stem);
}

std::vector<qoe::ScenarioWindows> reference_scenarios(std::size_t windows, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<qoe::ScenarioWindows> out;
    for (const auto& r : qoe::reference_ranges()) out.push_back(qoe::sample_scenario(r, windows, rng));
    return out;
}

std::pair<std::size_t, std::size_t> parse_order(const std::string& text) {
    const auto comma = text.find(',');
    try {
        if (comma == std::string::npos) throw std::invalid_argument("missing comma");
        std::size_t used = 0;
        const auto p = std::stoul(text.substr(0, comma), &used);
        if (used != comma) throw std::invalid_argument("bad p");
        const auto rest = text.substr(comma + 1);
        const auto q = std::stoul(rest, &used);
        if (used != rest.size()) throw std::invalid_argument("bad q");
        return {p, q};
    } catch (const std::exception&) {
        throw CLI::ValidationError("--order", "expected p,q (for example 5,4), got " + text);
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Trace analysis, traffic modeling and synthetic trace generation for remote-rendering XR streams",
                 "xrtrace"};
    app.require_subcommand(1);
    Stage stage;
    Json result;

    // analyze
    struct {
        std::string input, format = "auto", device_ip = "10.0.0.2", server_ip = "10.0.0.1", series_out;
        std::optional<std::uint16_t> device_port, server_port;
        std::uint32_t long_threshold = 1000;
        std::int64_t gap_us = 3000, pair_window_us = 10000, ul_gap_us = 1000;
    } an;
    auto* analyze = app.add_subcommand("analyze", "Reconstruct frames from a pcap or CSV trace");
    analyze->add_option("input", an.input, "pcap or CSV trace")->required()->check(CLI::ExistingFile);
    analyze->add_option("--format", an.format, "auto, pcap or csv")->check(CLI::IsMember({"auto", "pcap", "csv"}));
    analyze->add_option("--device-ip", an.device_ip, "XR device address");
    analyze->add_option("--server-ip", an.server_ip, "rendering server address");
    analyze->add_option("--device-port", an.device_port);
    analyze->add_option("--server-port", an.server_port);
    analyze->add_option("--long-threshold", an.long_threshold, "long DL packet threshold, bytes")->check(CLI::PositiveNumber);
    analyze->add_option("--gap-us", an.gap_us, "max gap inside a burst")->check(CLI::PositiveNumber);
    analyze->add_option("--pair-window-us", an.pair_window_us, "max start distance of two eye bursts")->check(CLI::PositiveNumber);
    analyze->add_option("--ul-gap-us", an.ul_gap_us, "max gap inside a UL cluster")->check(CLI::PositiveNumber);
    analyze->add_option("--series-out", an.series_out, "write the frame series CSV here");

    // fit-dist
    struct {
        std::string input, qq_out_dir;
        std::vector<std::string> columns;
    } fd;
    auto* fit_dist = app.add_subcommand("fit-dist", "Fit Normal/Laplace/Logistic to series columns via Q-Q linearity");
    fit_dist->add_option("input", fd.input, "series CSV")->required()->check(CLI::ExistingFile);
    fit_dist->add_option("--column", fd.columns, "column(s) to fit; default: every frame-series column present");
    fit_dist->add_option("--qq-out-dir", fd.qq_out_dir, "write <column>_<family>.csv Q-Q points here");

    // fit-arma
    struct {
        std::string input, column, order, forecast_out, model_out;
        std::size_t max_p = 8, max_q = 8, lags = 40;
        double split = 0.7;
    } fa;
    auto* fit_arma = app.add_subcommand("fit-arma", "ADF test, ACF/PACF, order selection, ARMA fit and 70/30 evaluation");
    fit_arma->add_option("input", fa.input, "series CSV")->required()->check(CLI::ExistingFile);
    fit_arma->add_option("--column", fa.column, "series column (default size_bytes, or the only column)");
    fit_arma->add_option("--order", fa.order, "fixed p,q instead of AIC selection");
    fit_arma->add_option("--max-p", fa.max_p)->check(CLI::Range(0, 8));
    fit_arma->add_option("--max-q", fa.max_q)->check(CLI::Range(0, 8));
    fit_arma->add_option("--lags", fa.lags, "ACF/PACF lags")->check(CLI::PositiveNumber);
    fit_arma->add_option("--split", fa.split, "training fraction")->check(CLI::Range(0.01, 0.99));
    fit_arma->add_option("--forecast-out", fa.forecast_out, "write t,actual,predicted CSV here");
    fit_arma->add_option("--model-out", fa.model_out, "write the model JSON here");

    // qoe / compare / calibrate share parameter flags
    struct {
        std::string params_file, csv_out;
        std::optional<double> f_min, r_min, l_min, u;
        std::vector<std::string> inputs;
        bool reference = false;
        std::size_t windows = 30;
        std::uint64_t seed = 1;
        std::vector<std::string> targets;
    } qo;
    auto add_params = [&](CLI::App* sub) {
        sub->add_option("--params", qo.params_file, "QoE params JSON {f_min, r_min, l_min, u}")->check(CLI::ExistingFile);
        sub->add_option("--f-min", qo.f_min)->check(CLI::PositiveNumber);
        sub->add_option("--r-min", qo.r_min)->check(CLI::PositiveNumber);
        sub->add_option("--l-min", qo.l_min)->check(CLI::PositiveNumber);
        sub->add_option("--u", qo.u)->check(CLI::PositiveNumber);
    };
    auto add_reference = [&](CLI::App* sub) {
        sub->add_flag("--reference", qo.reference, "use the four sampled reference scenarios");
        sub->add_option("--windows", qo.windows, "windows per sampled scenario")->check(CLI::PositiveNumber);
        sub->add_option("--seed", qo.seed, "seed for sampled scenarios");
    };
    auto* qoe_cmd = app.add_subcommand("qoe", "Score one scenario with the windowed QoE model");
    qoe_cmd->add_option("input", qo.inputs, "scenario JSON or CSV")->required()->expected(1)->check(CLI::ExistingFile);
    qoe_cmd->add_option("--csv-out", qo.csv_out, "per-window terms CSV");
    add_params(qoe_cmd);

    auto* compare = app.add_subcommand("compare", "Rank scenarios by average QoE per window");
    compare->add_option("inputs", qo.inputs, "scenario files")->check(CLI::ExistingFile);
    compare->add_option("--csv-out", qo.csv_out, "per-window QoE table CSV");
    add_params(compare);
    add_reference(compare);

    auto* calibrate = app.add_subcommand("calibrate", "Grid-search QoE params against target averages");
    calibrate->add_option("inputs", qo.inputs, "scenario files (default: sampled reference scenarios)")->check(CLI::ExistingFile);
    calibrate->add_option("--target", qo.targets, "name=average (default: reference averages)");
    add_reference(calibrate);

    // generate
    struct {
        std::string config, out, format = "auto";
        std::optional<std::uint64_t> seed;
        std::optional<double> duration;
    } ge;
    auto* generate = app.add_subcommand("generate", "Write a synthetic trace from a traffic model");
    generate->add_option("--config", ge.config, "traffic model JSON (defaults when omitted)")->check(CLI::ExistingFile);
    generate->add_option("--out", ge.out, "output pcap or CSV")->required();
    generate->add_option("--format", ge.format, "auto, pcap or csv")->check(CLI::IsMember({"auto", "pcap", "csv"}));
    generate->add_option("--seed", ge.seed);
    generate->add_option("--duration", ge.duration, "seconds")->check(CLI::NonNegativeNumber);

    // rate
    struct {
        std::uint64_t width = 0, height = 0, bpp = 0, fps = 0, sensors = 1;
    } ra;
    auto* rate = app.add_subcommand("rate", "Raw sensor or video data rate");
    rate->add_option("width", ra.width)->required()->check(CLI::PositiveNumber);
    rate->add_option("height", ra.height)->required()->check(CLI::PositiveNumber);
    rate->add_option("bits_per_pixel", ra.bpp)->required()->check(CLI::PositiveNumber);
    rate->add_option("fps", ra.fps)->required()->check(CLI::PositiveNumber);
    rate->add_option("--sensors", ra.sensors)->check(CLI::PositiveNumber);

    std::vector<const char*> argv{"xrtrace"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        if (app.get_subcommands().empty()) err << app.help();
        return kExitUsage;
    }

    auto resolve_params = [&] {
        qoe::QoeParams p;
        if (!qo.params_file.empty()) p = qoe_params_from_json(parse_json(read_text_file(qo.params_file), qo.params_file));
        if (qo.f_min) p.f_min = *qo.f_min;
        if (qo.r_min) p.r_min = *qo.r_min;
        if (qo.l_min) p.l_min = *qo.l_min;
        if (qo.u) p.u = *qo.u;
        return p;
    };

    try {
        if (analyze->parsed()) {
            stage("cli.analyze");
            AnalysisConfig cfg;
            cfg.endpoints.device_ip = parse_ip_arg(an.device_ip, "--device-ip");
            cfg.endpoints.server_ip = parse_ip_arg(an.server_ip, "--server-ip");
            cfg.endpoints.device_port = an.device_port;
            cfg.endpoints.server_port = an.server_port;
            cfg.burst = {an.long_threshold, an.gap_us};
            cfg.pairing_window_us = an.pair_window_us;
            cfg.ul_cluster_gap_us = an.ul_gap_us;
            cfg.endpoints.validate();

            Json input;
            auto trace = load_trace(an.input, an.format, stage, input);
            stage("frame_assembly.analyze_trace");
            const auto a = analyze_trace(std::move(trace), cfg);

            std::vector<double> packets, bytes;
            for (const auto& b : a.bursts) {
                packets.push_back(static_cast<double>(b.packet_count));
                bytes.push_back(static_cast<double>(b.total_bytes));
            }
            result = {{"command", "analyze"},
                      {"config",
                       {{"endpoints", to_json(cfg.endpoints)},
                        {"long_packet_threshold", cfg.burst.long_packet_threshold},
                        {"gap_threshold_us", cfg.burst.gap_threshold_us},
                        {"pairing_window_us", cfg.pairing_window_us},
                        {"ul_cluster_gap_us", cfg.ul_cluster_gap_us},
                        {"format", an.format}}},
                      {"input", input},
                      {"directions", {{"ul", a.counts.ul}, {"dl", a.counts.dl}, {"other", a.counts.other}}},
                      {"bursts", {{"count", a.bursts.size()}, {"packets", to_json(describe(packets))}, {"bytes", to_json(describe(bytes))}}},
                      {"frames", {{"count", a.pairing.frames.size()}, {"orphan_bursts", a.pairing.orphans}}},
                      {"conservation",
                       {{"total_dl_bytes", a.total_dl_bytes},
                        {"frame_bytes", a.frame_bytes},
                        {"orphan_bytes", a.pairing.orphan_bytes},
                        {"short_dl_bytes", a.short_dl_bytes},
                        {"balanced", a.frame_bytes + a.pairing.orphan_bytes + a.short_dl_bytes == a.total_dl_bytes}}},
                      {"series",
                       {{"size_bytes", summary_or_null(a.series.sizes)},
                        {"frame_interval_us", summary_or_null(a.series.frame_intervals_us)},
                        {"eye_interval_us", summary_or_null(a.series.eye_intervals_us)}}},
                      {"ul", to_json(a.ul)}};
            if (!an.series_out.empty()) {
                stage("frame_assembly.extract_series");
                write_file(an.series_out, series_to_csv(a.series));
                result["series_csv"] = an.series_out;
            }
        } else if (fit_dist->parsed()) {
            stage("dist_fit.read_series");
            const auto text = read_text_file(fd.input);
            auto columns = fd.columns;
            if (columns.empty()) {
                LineReader lines(text);
                const auto header = lines.next().value_or("");
                for (auto name : split_csv(header)) {
                    name = trim(name);
                    if (std::find(std::begin(kSeriesColumns), std::end(kSeriesColumns), name) != std::end(kSeriesColumns)) {
                        columns.emplace_back(name);
                    }
                }
                if (columns.empty()) throw Error(ErrorCode::SchemaError, "no frame-series column found; pass --column");
            }
            Json series = Json::object();
            for (const auto& col : columns) {
                stage("dist_fit.read_series");
                const auto values = read_series_column(text, col);
                stage("dist_fit.fit_select");
                const auto sel = dist::fit_select(values);
                series[col] = {{"summary", to_json(dist::summarize(values))}, {"selection", to_json(sel)}};
                if (!fd.qq_out_dir.empty()) {
                    stage("dist_fit.qq_points");
                    fs::create_directories(fd.qq_out_dir);
                    for (const auto& f : sel.fits) {
                        const auto path = (fs::path(fd.qq_out_dir) / (col + "_" + std::string(dist::to_string(f.family)) + ".csv")).string();
                        write_file(path, dist::qq_to_csv(f));
                    }
                }
            }
            result = {{"command", "fit-dist"},
                      {"config", {{"input", fd.input}, {"columns", columns}, {"qq_out_dir", fd.qq_out_dir}}},
                      {"series", series}};
        } else if (fit_arma->parsed()) {
            stage("arma_engine.read_series");
            const auto text = read_text_file(fa.input);
            std::string column = fa.column;
            if (column.empty()) {
                LineReader lines(text);
                const auto header = split_csv(lines.next().value_or(""));
                column = header.size() == 1 ? std::string(trim(header[0])) : "size_bytes";
            }
            const auto values = read_series_column(text, column);

            stage("arma_engine.adf_test");
            const auto adf = arma::adf_test(values);
            if (!adf.reject_unit_root) err << "warning: ADF test does not reject a unit root; ARMA fit may be unreliable\n";
            stage("arma_engine.acf");
            const std::size_t lags = std::min(fa.lags, values.size() - 1);
            const auto acf = arma::acf(values, lags);
            stage("arma_engine.pacf");
            const auto pacf = arma::pacf(values, lags);

            std::size_t p = 0, q = 0;
            Json selection = nullptr;
            if (!fa.order.empty()) {
                std::tie(p, q) = parse_order(fa.order);
            } else {
                stage("arma_engine.select_order");
                const auto sel = arma::select_order(values, fa.max_p, fa.max_q);
                p = sel.p;
                q = sel.q;
                selection = to_json(sel);
            }
            stage("arma_engine.fit_arma");
            const auto fit = arma::fit_arma(values, p, q);
            stage("arma_engine.evaluate");
            const auto report = arma::evaluate(values, p, q, fa.split);

            Json acf_j = Json::array(), pacf_j = Json::array();
            for (double v : acf) acf_j.push_back(number(v));
            for (double v : pacf) pacf_j.push_back(number(v));
            result = {{"command", "fit-arma"},
                      {"config",
                       {{"input", fa.input}, {"column", column}, {"order", fa.order.empty() ? Json(nullptr) : Json(fa.order)},
                        {"max_p", fa.max_p}, {"max_q", fa.max_q}, {"lags", lags}, {"split", fa.split}}},
                      {"n", values.size()},
                      {"adf", to_json(adf)},
                      {"acf", acf_j},
                      {"pacf", pacf_j},
                      {"order_selection", selection},
                      {"model", to_json(fit.model)},
                      {"fit",
                       {{"n_obs", fit.n_obs}, {"aic", number(fit.aic)}, {"ar_stationary", fit.ar_stationary},
                        {"ma_invertible", fit.ma_invertible}}},
                      {"forecast", to_json(report)},
                      {"forecast_model", to_json(report.model)}};
            if (!fa.forecast_out.empty()) write_file(fa.forecast_out, arma::forecast_to_csv(report));
            if (!fa.model_out.empty()) write_file(fa.model_out, to_json(fit.model).dump(2) + "\n");
        } else if (qoe_cmd->parsed()) {
            stage("qoe.load_scenario");
            const auto params = resolve_params();
            const auto s = load_scenario(qo.inputs.at(0));
            stage("qoe.qoe_total");
            const auto rep = qoe::qoe_total(s, params);
            result = {{"command", "qoe"}, {"config", {{"input", qo.inputs.at(0)}, {"params", to_json(params)}}}, {"report", to_json(rep)}};
            if (!qo.csv_out.empty()) write_file(qo.csv_out, qoe::report_to_csv(s, rep));
        } else if (compare->parsed()) {
            stage("qoe.load_scenario");
            const auto params = resolve_params();
            std::vector<qoe::ScenarioWindows> scenarios;
            if (qo.reference) scenarios = reference_scenarios(qo.windows, qo.seed);
            for (const auto& path : qo.inputs) scenarios.push_back(load_scenario(path));
            stage("qoe.compare_scenarios");
            const auto cmp = qoe::compare_scenarios(scenarios, params);
            Json reports = Json::array();
            for (const auto& r : cmp.reports) reports.push_back(to_json(r));
            result = {{"command", "compare"},
                      {"config",
                       {{"inputs", qo.inputs}, {"reference", qo.reference}, {"windows", qo.windows}, {"seed", qo.seed},
                        {"params", to_json(params)}}},
                      {"ranking", to_json(cmp)["ranking"]},
                      {"reports", reports}};
            if (!qo.csv_out.empty()) write_file(qo.csv_out, qoe::comparison_to_csv(cmp));
        } else if (calibrate->parsed()) {
            stage("qoe.load_scenario");
            std::vector<qoe::ScenarioWindows> scenarios;
            if (qo.reference || qo.inputs.empty()) scenarios = reference_scenarios(qo.windows, qo.seed);
            for (const auto& path : qo.inputs) scenarios.push_back(load_scenario(path));
            std::map<std::string, double> targets;
            for (const auto& t : qo.targets) {
                const auto eq = t.find('=');
                if (eq == std::string::npos) {
                    err << "usage error: --target expects name=value, got " << t << "\n";
                    return kExitUsage;
                }
                targets[t.substr(0, eq)] = parse_double(t.substr(eq + 1), 0, "--target");
            }
            if (targets.empty()) targets = qoe::reference_averages();
            stage("qoe.calibrate");
            const auto rep = qoe::calibrate(scenarios, targets);
            Json tj = Json::object();
            for (const auto& [k, v] : targets) tj[k] = v;
            result = {{"command", "calibrate"},
                      {"config", {{"inputs", qo.inputs}, {"windows", qo.windows}, {"seed", qo.seed}, {"targets", tj}}},
                      {"calibration", to_json(rep)}};
        } else if (generate->parsed()) {
            stage("traffic_gen.load_model");
            gen::TrafficModel model;
            if (!ge.config.empty()) model = traffic_model_from_json(parse_json(read_text_file(ge.config), ge.config));
            if (ge.seed) model.seed = *ge.seed;
            if (ge.duration) model.duration_s = *ge.duration;
            std::string format = ge.format;
            if (format == "auto") format = fs::path(ge.out).extension() == ".csv" ? "csv" : "pcap";
            stage("traffic_gen.generate_trace");
            const auto trace = gen::generate_trace(model);
            if (format == "csv") {
                stage("traffic_gen.write_csv");
                write_file(ge.out, write_csv(trace.records));
            } else {
                stage("traffic_gen.write_pcap");
                const auto bytes = write_pcap(trace.records);
                write_file(ge.out, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
            }
            result = {{"command", "generate"},
                      {"config", {{"model", to_json(model)}, {"out", ge.out}, {"format", format}}},
                      {"records", trace.records.size()},
                      {"frames", trace.frames.size()},
                      {"dl_long_bytes", trace.dl_long_bytes},
                      {"dl_short_bytes", trace.dl_short_bytes}};
        } else if (rate->parsed()) {
            stage("qoe.raw_data_rate");
            const auto r = qoe::raw_data_rate(ra.width, ra.height, ra.bpp, ra.fps, ra.sensors);
            std::array<char, 64> gib{};
            std::snprintf(gib.data(), gib.size(), "%.3f Gibit/s", r.gibit_per_s);
            result = {{"command", "rate"},
                      {"config", {{"width", ra.width}, {"height", ra.height}, {"bits_per_pixel", ra.bpp}, {"fps", ra.fps}, {"sensors", ra.sensors}}},
                      {"rate", to_json(r)},
                      {"display", mbit_display(r.mbit_per_s)},
                      {"display_binary", gib.data()}};
            err << mbit_display(r.mbit_per_s) << " (" << gib.data() << ")\n";
        }
    } catch (const Error& e) {
        err << "error[" << stage.op << "] " << to_string(e.code()) << ": " << e.what() << "\n";
        return kExitDataError;
    } catch (const CLI::ValidationError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }
    out << result.dump(2) << "\n";
    return kExitOk;
}

}  // namespace xrtrace::cli
