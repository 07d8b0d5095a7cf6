#include "xrtrace/json_io.hpp"

#include <cmath>
#include <set>

#include "xrtrace/error.hpp"

namespace xrtrace {
namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

template <typename T>
T get(const Json& j, const char* key, const std::string& ctx) {
    if (!j.contains(key)) bad(ctx + ": missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        bad(ctx + ": key '" + key + "': " + e.what());
    }
}

template <typename T>
void get_opt(const Json& j, const char* key, T& out, const std::string& ctx) {
    if (j.contains(key)) out = get<T>(j, key, ctx);
}

void get_normal(const Json& j, const char* key, gen::NormalParam& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    const std::string ctx = std::string("traffic model '") + key + "'";
    if (!v.is_object()) bad(ctx + ": expected {\"mean\", \"std\"}");
    get_opt(v, "mean", out.mean, ctx);
    get_opt(v, "std", out.std_dev, ctx);
}

Ipv4 get_ip(const Json& j, const char* key, Ipv4 fallback) {
    if (!j.contains(key)) return fallback;
    const auto text = get<std::string>(j, key, "traffic model");
    auto ip = Ipv4::parse(text);
    if (!ip) bad("traffic model: '" + std::string(key) + "' is not an IPv4 address: " + text);
    return *ip;
}

Json vec(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

}  // namespace

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json to_json(const RunningStats& s) {
    return {{"n", s.n}, {"mean", number(s.mean)}, {"std_dev", number(s.std_dev)}, {"min", number(s.min)}, {"max", number(s.max)}};
}

Json to_json(const UlCadence& c) {
    Json hist = Json::object();
    for (const auto& [size, count] : c.packets_per_cluster) hist[std::to_string(size)] = count;
    return {{"packets", c.packets},
            {"clusters", c.clusters},
            {"clusters_per_second", number(c.clusters_per_second)},
            {"packets_per_cluster", hist},
            {"interval_us", to_json(c.interval_stats)}};
}

Json to_json(const PcapSkipCounts& s) {
    return {{"non_ipv4", s.non_ipv4}, {"non_udp", s.non_udp}, {"fragments", s.fragments}, {"malformed", s.malformed}};
}

Json to_json(const EndpointConfig& e) {
    Json j = {{"device_ip", e.device_ip.to_string()}, {"server_ip", e.server_ip.to_string()}};
    j["device_port"] = e.device_port ? Json(*e.device_port) : Json(nullptr);
    j["server_port"] = e.server_port ? Json(*e.server_port) : Json(nullptr);
    return j;
}

Json to_json(const dist::SampleSummary& s) {
    Json edges = Json::array();
    for (double e : s.histogram.edges) edges.push_back(number(e));
    return {{"n", s.n},
            {"mean", number(s.mean)},
            {"std_dev", number(s.std_dev)},
            {"min", number(s.min)},
            {"max", number(s.max)},
            {"histogram", {{"edges", edges}, {"counts", s.histogram.counts}}}};
}

Json to_json(const dist::DistributionFit& f) {
    return {{"family", std::string(dist::to_string(f.family))},
            {"location", number(f.location)},
            {"scale", number(f.scale)},
            {"linearity", number(f.linearity)},
            {"qq_points", f.qq_points.size()}};
}

Json to_json(const dist::FitSelection& s) {
    Json fits = Json::array();
    for (const auto& f : s.fits) fits.push_back(to_json(f));
    return {{"best", std::string(dist::to_string(s.best))}, {"fits", fits}};
}

Json to_json(const arma::ArmaModel& m) {
    return {{"p", m.p}, {"q", m.q}, {"c", number(m.c)}, {"phi", vec(m.phi)}, {"theta", vec(m.theta)}, {"sigma2", number(m.sigma2)}};
}

arma::ArmaModel arma_model_from_json(const Json& j) {
    const std::string ctx = "ARMA model";
    arma::ArmaModel m;
    m.p = get<std::size_t>(j, "p", ctx);
    m.q = get<std::size_t>(j, "q", ctx);
    m.c = get<double>(j, "c", ctx);
    m.phi = get<std::vector<double>>(j, "phi", ctx);
    m.theta = get<std::vector<double>>(j, "theta", ctx);
    m.sigma2 = get<double>(j, "sigma2", ctx);
    if (m.phi.size() != m.p || m.theta.size() != m.q) bad(ctx + ": coefficient counts do not match p and q");
    if (m.sigma2 < 0) bad(ctx + ": sigma2 must be non-negative");
    return m;
}

Json to_json(const arma::AdfResult& r) {
    return {{"statistic", number(r.statistic)},
            {"lags_used", r.lags_used},
            {"n_obs", r.n_obs},
            {"critical_values", {{"1%", r.critical.one_percent}, {"5%", r.critical.five_percent}, {"10%", r.critical.ten_percent}}},
            {"reject_unit_root", r.reject_unit_root}};
}

Json to_json(const arma::OrderSelection& s) {
    Json table = Json::array();
    for (const auto& c : s.table) {
        table.push_back({{"p", c.p}, {"q", c.q}, {"aic", c.aic ? number(*c.aic) : Json(nullptr)}});
    }
    return {{"p", s.p}, {"q", s.q}, {"aic_table", table}};
}

Json to_json(const arma::ForecastReport& r) {
    return {{"split_fraction", r.split_fraction},
            {"train_size", r.train_size},
            {"test_start", r.test_start},
            {"test_size", r.predictions.size()},
            {"mae", number(r.mae)},
            {"rmse", number(r.rmse)},
            {"mape_percent", number(r.mape)}};
}

Json to_json(const qoe::QoeParams& p) {
    return {{"f_min", p.f_min}, {"r_min", p.r_min}, {"l_min", p.l_min}, {"u", p.u}};
}

qoe::QoeParams qoe_params_from_json(const Json& j, qoe::QoeParams base) {
    const std::string ctx = "QoE params";
    if (!j.is_object()) bad(ctx + ": expected an object");
    get_opt(j, "f_min", base.f_min, ctx);
    get_opt(j, "r_min", base.r_min, ctx);
    get_opt(j, "l_min", base.l_min, ctx);
    get_opt(j, "u", base.u, ctx);
    return base;
}

Json to_json(const qoe::QoeReport& r) {
    Json windows = Json::array();
    for (const auto& w : r.windows) {
        windows.push_back({{"q", number(w.q)}, {"p", number(w.p)}, {"g", number(w.g)}, {"qoe", number(w.qoe)}});
    }
    return {{"name", r.name}, {"windows", r.windows.size()}, {"total", number(r.total)}, {"average", number(r.average)},
            {"per_window", windows}};
}

Json to_json(const qoe::Comparison& c) {
    Json ranking = Json::array();
    for (std::size_t i = 0; i < c.ranking.size(); ++i) {
        const auto& r = c.ranking[i];
        ranking.push_back({{"rank", i + 1}, {"name", r.name}, {"input_index", r.input_index},
                           {"total", number(r.total)}, {"average", number(r.average)}});
    }
    return {{"ranking", ranking}};
}

Json to_json(const qoe::RateReport& r) {
    return {{"bits_per_second", r.bits_per_second},
            {"mbit_per_s", r.mbit_per_s},
            {"gbit_per_s", r.gbit_per_s},
            {"gibit_per_s", r.gibit_per_s}};
}

Json to_json(const qoe::CalibrationReport& r) {
    Json rows = Json::array();
    for (const auto& [name, target] : r.targets) {
        const auto it = r.fitted.find(name);
        rows.push_back({{"name", name}, {"target", target}, {"fitted", it != r.fitted.end() ? number(it->second) : Json(nullptr)}});
    }
    return {{"best_params", to_json(r.best)}, {"residual_sum_squares", number(r.residual)},
            {"grid_points", r.evaluated}, {"scenarios", rows}};
}

qoe::ScenarioWindows scenario_from_json(const Json& j, std::string fallback_name) {
    const std::string ctx = "scenario";
    if (!j.is_object()) bad(ctx + ": expected an object");
    qoe::ScenarioWindows s;
    s.name = j.contains("name") ? get<std::string>(j, "name", ctx) : std::move(fallback_name);
    if (j.contains("windows")) {
        const auto& w = j.at("windows");
        if (!w.is_array()) bad(ctx + ": 'windows' must be an array");
        for (const auto& row : w) {
            s.fps.push_back(get<double>(row, "fps", ctx));
            s.pixels.push_back(get<double>(row, "pixels", ctx));
            s.latency_ms.push_back(get<double>(row, "latency_ms", ctx));
        }
    } else {
        s.fps = get<std::vector<double>>(j, "fps", ctx);
        s.pixels = get<std::vector<double>>(j, "pixels", ctx);
        s.latency_ms = get<std::vector<double>>(j, "latency_ms", ctx);
    }
    return s;
}

Json to_json(const gen::TrafficModel& m) {
    auto normal = [](const gen::NormalParam& p) { return Json{{"mean", p.mean}, {"std", p.std_dev}}; };
    return {{"frame_size", normal(m.frame_size)},
            {"frame_interval_us", normal(m.frame_interval_us)},
            {"eye_interval_us", normal(m.eye_interval_us)},
            {"eye_split_fraction", m.eye_split_fraction},
            {"payload_size", m.payload_size},
            {"packet_spacing_us", m.packet_spacing_us},
            {"ul_packets_min", m.ul_packets_min},
            {"ul_packets_max", m.ul_packets_max},
            {"ul_payload_min", m.ul_payload_min},
            {"ul_payload_max", m.ul_payload_max},
            {"ul_packet_spacing_us", m.ul_packet_spacing_us},
            {"ul_offset_us", m.ul_offset_us},
            {"dl_sync_packets", m.dl_sync_packets},
            {"dl_sync_payload", m.dl_sync_payload},
            {"duration_s", m.duration_s},
            {"seed", m.seed},
            {"device_ip", m.device_ip.to_string()},
            {"server_ip", m.server_ip.to_string()},
            {"device_port", m.device_port},
            {"server_port", m.server_port}};
}

gen::TrafficModel traffic_model_from_json(const Json& j) {
    const std::string ctx = "traffic model";
    if (!j.is_object()) bad(ctx + ": expected an object");
    gen::TrafficModel m;
    const auto known = to_json(m);
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) bad(ctx + ": unknown key '" + key + "'");
    }
    get_normal(j, "frame_size", m.frame_size);
    get_normal(j, "frame_interval_us", m.frame_interval_us);
    get_normal(j, "eye_interval_us", m.eye_interval_us);
    get_opt(j, "eye_split_fraction", m.eye_split_fraction, ctx);
    get_opt(j, "payload_size", m.payload_size, ctx);
    get_opt(j, "packet_spacing_us", m.packet_spacing_us, ctx);
    get_opt(j, "ul_packets_min", m.ul_packets_min, ctx);
    get_opt(j, "ul_packets_max", m.ul_packets_max, ctx);
    get_opt(j, "ul_payload_min", m.ul_payload_min, ctx);
    get_opt(j, "ul_payload_max", m.ul_payload_max, ctx);
    get_opt(j, "ul_packet_spacing_us", m.ul_packet_spacing_us, ctx);
    get_opt(j, "ul_offset_us", m.ul_offset_us, ctx);
    get_opt(j, "dl_sync_packets", m.dl_sync_packets, ctx);
    get_opt(j, "dl_sync_payload", m.dl_sync_payload, ctx);
    get_opt(j, "duration_s", m.duration_s, ctx);
    get_opt(j, "seed", m.seed, ctx);
    m.device_ip = get_ip(j, "device_ip", m.device_ip);
    m.server_ip = get_ip(j, "server_ip", m.server_ip);
    get_opt(j, "device_port", m.device_port, ctx);
    get_opt(j, "server_port", m.server_port, ctx);
    return m;
}

Json parse_json(std::string_view text, std::string_view what) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        bad(std::string(what) + ": invalid JSON: " + e.what());
    }
}

}  // namespace xrtrace
