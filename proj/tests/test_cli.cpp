#include <doctest.h>

#include <filesystem>
#include <sstream>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "xrtrace/dist_fit.hpp"
#include "xrtrace/frames.hpp"
#include "xrtrace/json_io.hpp"
#include "xrtrace/pcap.hpp"
#include "xrtrace/text.hpp"
#include "xrtrace/traffic_gen.hpp"

using namespace xrtrace;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
    [[nodiscard]] nlohmann::json json() const { return nlohmann::json::parse(out); }
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() / ("xrtrace_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    [[nodiscard]] std::string operator/(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

}  // namespace

TEST_CASE("usage errors exit 2") {
    CHECK(run({}).code == cli::kExitUsage);
    CHECK(run({"frobnicate"}).code == cli::kExitUsage);
    CHECK(run({"rate", "640", "480"}).code == cli::kExitUsage);
    CHECK(run({"analyze", "/nonexistent/file.pcap"}).code == cli::kExitUsage);
    CHECK(run({"generate"}).code == cli::kExitUsage);
}

TEST_CASE("rate prints the decimal figure") {
    const auto r = run({"rate", "640", "480", "8", "30", "--sensors", "4"});
    REQUIRE(r.code == cli::kExitOk);
    const auto j = r.json();
    CHECK(j["display"] == "294.9 Mbit/s");
    CHECK(j["rate"]["bits_per_second"] == 294912000);
    CHECK(j["config"]["sensors"] == 4);

    const auto big = run({"rate", "2048", "1080", "24", "60"}).json();
    CHECK(big["display_binary"] == "2.966 Gibit/s");
}

TEST_CASE("generate then analyze recovers the frame count") {
    TempDir dir;
    write_file(dir / "m.json", R"({"duration_s": 3.0, "seed": 12})");
    const auto gen = run({"generate", "--config", dir / "m.json", "--out", dir / "t.pcap"});
    REQUIRE(gen.code == cli::kExitOk);
    const auto frames = gen.json()["frames"].get<std::size_t>();
    CHECK(frames > 100);

    const auto an = run({"analyze", dir / "t.pcap"});
    REQUIRE(an.code == cli::kExitOk);
    const auto j = an.json();
    CHECK(j["frames"]["count"] == frames);
    CHECK(j["frames"]["orphan_bursts"] == 0);
    CHECK(j["conservation"]["balanced"] == true);

    // CSV output of the same model yields the same analysis
    REQUIRE(run({"generate", "--config", dir / "m.json", "--out", dir / "t.csv"}).code == cli::kExitOk);
    const auto csv = run({"analyze", dir / "t.csv"}).json();
    CHECK(csv["series"] == j["series"]);
}

TEST_CASE("fit-arma honors an explicit order") {
    TempDir dir;
    REQUIRE(run({"generate", "--out", dir / "t.pcap", "--duration", "20"}).code == cli::kExitOk);
    REQUIRE(run({"analyze", dir / "t.pcap", "--series-out", dir / "s.csv"}).code == cli::kExitOk);
    const auto r = run({"fit-arma", dir / "s.csv", "--column", "size_bytes", "--order", "5,4", "--forecast-out",
                        dir / "f.csv", "--model-out", dir / "m.json"});
    REQUIRE(r.code == cli::kExitOk);
    const auto j = r.json();
    CHECK(j["model"]["p"] == 5);
    CHECK(j["model"]["q"] == 4);
    CHECK(j["model"]["phi"].size() == 5);
    CHECK(j["model"]["theta"].size() == 4);
    CHECK(fs::exists(dir / "f.csv"));
    const auto saved = nlohmann::json::parse(read_text_file(dir / "m.json"));
    CHECK(saved["p"] == 5);

    CHECK(run({"fit-arma", dir / "s.csv", "--order", "5"}).code == cli::kExitUsage);
}

TEST_CASE("data errors exit 1 with a stable identifier") {
    TempDir dir;
    REQUIRE(run({"generate", "--out", dir / "t.pcap", "--duration", "1"}).code == cli::kExitOk);
    auto bytes = read_binary_file(dir / "t.pcap");
    bytes.resize(100);
    write_file(dir / "bad.pcap", std::string(bytes.begin(), bytes.end()));
    const auto r = run({"analyze", dir / "bad.pcap", "--format", "pcap"});
    CHECK(r.code == cli::kExitDataError);
    CHECK(r.err.find("error[trace_ingest.parse_pcap] TruncatedCapture") != std::string::npos);

    write_file(dir / "const.csv", "frame_index,size_bytes\n0,5\n1,5\n2,5\n3,5\n4,5\n5,5\n");
    const auto z = run({"fit-dist", dir / "const.csv", "--column", "size_bytes"});
    CHECK(z.code == cli::kExitDataError);
    CHECK(z.err.find("error[dist_fit.") != std::string::npos);

    write_file(dir / "bad.json", R"({"duration_s": 1.0, "eye_split_fraction": 2.0})");
    const auto g = run({"generate", "--config", dir / "bad.json", "--out", dir / "x.pcap"});
    CHECK(g.code == cli::kExitDataError);
    CHECK(g.err.find("ConfigError") != std::string::npos);
}

TEST_CASE("reruns are byte identical") {
    TempDir dir;
    REQUIRE(run({"generate", "--out", dir / "t.pcap", "--duration", "5", "--seed", "3"}).code == cli::kExitOk);
    const auto a = run({"analyze", dir / "t.pcap", "--series-out", dir / "s.csv"});
    const auto b = run({"analyze", dir / "t.pcap", "--series-out", dir / "s.csv"});
    CHECK(a.out == b.out);
    const auto c = run({"fit-dist", dir / "s.csv"});
    const auto d = run({"fit-dist", dir / "s.csv"});
    CHECK(c.code == cli::kExitOk);
    CHECK(c.out == d.out);
    const auto e = run({"compare", "--reference", "--seed", "9"});
    const auto f = run({"compare", "--reference", "--seed", "9"});
    CHECK(e.code == cli::kExitOk);
    CHECK(e.out == f.out);
}

TEST_CASE("file pipeline equals the in-process pipeline") {
    TempDir dir;
    gen::TrafficModel m;
    m.duration_s = 8.0;
    m.seed = 21;
    write_file(dir / "t.pcap", [&] {
        const auto bytes = write_pcap(gen::generate_trace(m).records);
        return std::string(bytes.begin(), bytes.end());
    }());
    REQUIRE(run({"analyze", dir / "t.pcap", "--series-out", dir / "s.csv"}).code == cli::kExitOk);
    const auto r = run({"fit-dist", dir / "s.csv", "--column", "size_bytes"});
    REQUIRE(r.code == cli::kExitOk);

    AnalysisConfig cfg;
    cfg.endpoints = {m.device_ip, m.server_ip, {}, {}};
    const auto a = analyze_trace(gen::generate_trace(m).records, cfg);
    const auto sel = dist::fit_select(a.series.sizes);
    const auto j = r.json();
    CHECK(j["series"]["size_bytes"]["selection"] == nlohmann::json::parse(to_json(sel).dump()));
}

TEST_CASE("qoe and compare read scenario files") {
    TempDir dir;
    write_file(dir / "a.csv", "window,fps,pixels,latency_ms\n0,60,4000,60\n");
    const auto r = run({"qoe", dir / "a.csv", "--f-min", "30", "--r-min", "1000", "--l-min", "40", "--u", "0.1"});
    REQUIRE(r.code == cli::kExitOk);
    CHECK(std::abs(r.json()["report"]["total"].get<double>() - 1.63127) < 1e-4);

    write_file(dir / "b.json", R"({"name": "b", "fps": [60], "pixels": [4000], "latency_ms": [80]})");
    const auto c = run({"compare", dir / "a.csv", dir / "b.json", "--f-min", "30", "--r-min", "1000"});
    REQUIRE(c.code == cli::kExitOk);
    CHECK(c.json()["ranking"][0]["name"] == "a");
}
