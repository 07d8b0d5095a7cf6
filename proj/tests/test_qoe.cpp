#include <doctest.h>

#include <cmath>
#include <limits>

#include "xrtrace/error.hpp"
#include "xrtrace/qoe.hpp"
#include "xrtrace/random.hpp"

using namespace xrtrace;
using namespace xrtrace::qoe;

namespace {

ScenarioWindows one_window(double f, double r, double l) { return {"s", {f}, {r}, {l}}; }

ScenarioWindows random_scenario(Rng& rng, std::size_t n, std::string name = "s") {
    ScenarioWindows s{std::move(name), {}, {}, {}};
    for (std::size_t i = 0; i < n; ++i) {
        s.fps.push_back(5.0 + 55.0 * rng.uniform());
        s.pixels.push_back(1e5 + 3e6 * rng.uniform());
        s.latency_ms.push_back(20.0 + 100.0 * rng.uniform());
    }
    return s;
}

}  // namespace

TEST_CASE("all ratios at their minimum") {
    const QoeParams p{30.0, 1000.0, 40.0, 1.0};
    const auto r = qoe_total(one_window(30.0, 1000.0, 40.0), p);
    CHECK(r.total == doctest::Approx(-std::exp(1.0)).epsilon(1e-14));
    CHECK(r.windows[0].q == 0.0);
    CHECK(r.windows[0].p == 0.0);
}

TEST_CASE("worked example") {
    const QoeParams p{30.0, 1000.0, 40.0, 0.1};
    const auto r = qoe_total(one_window(60.0, 4000.0, 60.0), p);
    const double expected = std::log(2.0) + std::log(4.0) - 0.1 * std::exp(1.5);
    CHECK(r.total == doctest::Approx(expected).epsilon(1e-14));
    CHECK(std::abs(r.total - 1.63127) < 1e-4);
    CHECK(r.windows[0].g == doctest::Approx(std::exp(1.5)));
    CHECK(r.average == r.total);
}

TEST_CASE("report terms add up") {
    Rng rng(1);
    const auto s = random_scenario(rng, 25);
    const QoeParams p;
    const auto r = qoe_total(s, p);
    double q = 0, pp = 0, g = 0;
    for (const auto& w : r.windows) {
        q += w.q;
        pp += w.p;
        g += w.g;
        CHECK(w.qoe == doctest::Approx(w.q + w.p - p.u * w.g));
    }
    CHECK(r.total == doctest::Approx(q + pp - p.u * g).epsilon(1e-12));
    CHECK(r.average == doctest::Approx(r.total / 25.0));
}

TEST_CASE("doubling every frame rate adds N ln 2") {
    Rng rng(2);
    auto s = random_scenario(rng, 17);
    const QoeParams p;
    const double before = qoe_total(s, p).total;
    for (double& f : s.fps) f *= 2.0;
    CHECK(qoe_total(s, p).total - before == doctest::Approx(17.0 * std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("monotonicity in each input") {
    Rng rng(3);
    const QoeParams p;
    for (int trial = 0; trial < 100; ++trial) {
        const auto s = random_scenario(rng, 5);
        const double base = qoe_total(s, p).total;
        const auto i = static_cast<std::size_t>(rng.uniform_int(0, 4));
        auto f = s, r = s, l = s;
        f.fps[i] *= 1.01;
        r.pixels[i] *= 1.01;
        l.latency_ms[i] += 1.0;
        CHECK(qoe_total(f, p).total > base);
        CHECK(qoe_total(r, p).total > base);
        CHECK(qoe_total(l, p).total < base);
    }
}

TEST_CASE("additivity over window concatenation") {
    Rng rng(4);
    const QoeParams p;
    const auto a = random_scenario(rng, 7);
    const auto b = random_scenario(rng, 11);
    auto ab = a;
    ab.fps.insert(ab.fps.end(), b.fps.begin(), b.fps.end());
    ab.pixels.insert(ab.pixels.end(), b.pixels.begin(), b.pixels.end());
    ab.latency_ms.insert(ab.latency_ms.end(), b.latency_ms.begin(), b.latency_ms.end());
    CHECK(qoe_total(ab, p).total == doctest::Approx(qoe_total(a, p).total + qoe_total(b, p).total).epsilon(1e-12));
}

TEST_CASE("common resolution scaling keeps the ranking") {
    Rng rng(5);
    const QoeParams p;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ScenarioWindows> s;
        for (int k = 0; k < 4; ++k) s.push_back(random_scenario(rng, 10, "s" + std::to_string(k)));
        const auto base = compare_scenarios(s, p);
        for (auto& sc : s)
            for (double& r : sc.pixels) r *= 3.5;
        const auto scaled = compare_scenarios(s, p);
        for (std::size_t k = 0; k < 4; ++k) {
            CHECK(scaled.ranking[k].input_index == base.ranking[k].input_index);
            CHECK(scaled.reports[k].total - base.reports[k].total == doctest::Approx(10.0 * std::log(3.5)).epsilon(1e-9));
        }
    }
}

TEST_CASE("compare_scenarios ties and latency ordering") {
    Rng rng(6);
    const QoeParams p;
    auto a = random_scenario(rng, 8, "a");
    auto b = a;
    b.name = "b";
    auto cmp = compare_scenarios(std::vector<ScenarioWindows>{a, b}, p);
    CHECK(cmp.ranking[0].average == cmp.ranking[1].average);
    CHECK(cmp.ranking[0].name == "a");
    CHECK(cmp.ranking[1].name == "b");

    for (double& l : a.latency_ms) l += 5.0;
    cmp = compare_scenarios(std::vector<ScenarioWindows>{a, b}, p);
    CHECK(cmp.ranking[0].name == "b");
    CHECK(cmp.ranking[1].average < cmp.ranking[0].average);

    CHECK_THROWS_AS((void)compare_scenarios(std::vector<ScenarioWindows>{a}, p), Error);
}

TEST_CASE("reference scenarios rank remote before local") {
    const QoeParams p;
    std::size_t ordered = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Rng rng(seed);
        std::vector<ScenarioWindows> s;
        for (const auto& r : reference_ranges()) s.push_back(sample_scenario(r, 30, rng));
        const auto cmp = compare_scenarios(s, p);
        std::vector<std::string> names;
        for (const auto& r : cmp.ranking) names.push_back(r.name);
        if (names == std::vector<std::string>{"Remote_high", "Remote_low", "Local_low", "Local_high"}) ++ordered;
    }
    CHECK(ordered >= 95);
}

TEST_CASE("domain errors") {
    const QoeParams p;
    for (auto s : {one_window(0.0, 1e6, 40.0), one_window(30.0, -1.0, 40.0), one_window(30.0, 1e6, 0.0),
                   one_window(std::nan(""), 1e6, 40.0)}) {
        try {
            (void)qoe_total(s, p);
            FAIL("expected DomainError");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DomainError);
        }
    }
    CHECK_THROWS_AS((void)qoe_total(ScenarioWindows{"x", {}, {}, {}}, p), Error);
    CHECK_THROWS_AS((void)qoe_total(ScenarioWindows{"x", {30, 30}, {1e6}, {40, 40}}, p), Error);
    CHECK_THROWS_AS((void)qoe_total(one_window(30, 1e6, 40), QoeParams{9, 1e5, 40, 0.0}), Error);
    // values below the minimum are allowed and give negative log terms
    CHECK(qoe_total(one_window(4.5, 1e6, 40), p).windows[0].q == doctest::Approx(-std::log(2.0)));
}

TEST_CASE("raw data rate") {
    const auto a = raw_data_rate(640, 480, 8, 30, 4);
    CHECK(a.bits_per_second == 294'912'000u);
    CHECK(std::round(a.mbit_per_s * 10.0) / 10.0 == 294.9);

    const auto b = raw_data_rate(512, 512, 16, 45, 1);
    CHECK(b.bits_per_second == 188'743'680u);
    CHECK(std::round(b.mbit_per_s * 10.0) / 10.0 == 188.7);

    const auto c = raw_data_rate(2048, 1080, 24, 60);
    CHECK(c.bits_per_second == 3'185'049'600u);
    CHECK(std::round(c.gibit_per_s * 1000.0) / 1000.0 == 2.966);
    CHECK(c.gbit_per_s == doctest::Approx(3.1850496));

    const auto k4 = raw_data_rate(7680, 4320, 48, 240, 16);
    CHECK(k4.bits_per_second == 7680ull * 4320 * 48 * 240 * 16);

    CHECK_THROWS_AS((void)raw_data_rate(0, 480, 8, 30), Error);
    CHECK_THROWS_AS((void)raw_data_rate(std::numeric_limits<std::uint64_t>::max(), 2, 1, 1), Error);
}

TEST_CASE("raw data rate is symmetric in its arguments") {
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        std::array<std::uint64_t, 5> v{};
        for (auto& x : v) x = static_cast<std::uint64_t>(rng.uniform_int(1, 5000));
        const auto base = raw_data_rate(v[0], v[1], v[2], v[3], v[4]).bits_per_second;
        CHECK(raw_data_rate(v[4], v[2], v[0], v[3], v[1]).bits_per_second == base);
        CHECK(raw_data_rate(v[0] * 2, v[1], v[2], v[3], v[4]).bits_per_second == 2 * base);
    }
}

TEST_CASE("windows_from_frame_starts counts complete windows") {
    std::vector<std::int64_t> starts;
    for (std::int64_t t = 0; t < 2'500'000; t += 20'000) starts.push_back(t);  // 50 fps for 2.5 s
    const auto s = windows_from_frame_starts(starts, 1'000'000, 2048.0 * 1080.0, 70.0, "trace");
    REQUIRE(s.size() == 2);
    CHECK(s.fps[0] == doctest::Approx(50.0));
    CHECK(s.fps[1] == doctest::Approx(50.0));
    CHECK(s.latency_ms[0] == 70.0);
}

TEST_CASE("scenario CSV round trip") {
    Rng rng(10);
    const auto s = random_scenario(rng, 6, "x");
    const auto back = scenario_from_csv(report_to_csv(s, qoe_total(s, QoeParams{})), "x");
    CHECK(back.fps == s.fps);
    CHECK(back.pixels == s.pixels);
    CHECK(back.latency_ms == s.latency_ms);
    CHECK_THROWS_AS((void)scenario_from_csv("window,fps,pixels\n0,1,2\n", "x"), Error);
}

TEST_CASE("calibration reports the best grid point") {
    Rng rng(11);
    std::vector<ScenarioWindows> s;
    for (const auto& r : reference_ranges()) s.push_back(sample_scenario(r, 30, rng));
    CalibrationGrid grid{{9.0, 20.0}, {1024.0 * 540.0}, {40.0, 80.0}, {0.1, 0.3}};
    const auto rep = calibrate(s, reference_averages(), grid);
    CHECK(rep.evaluated == 8);
    CHECK(rep.fitted.size() == 4);
    double best = INFINITY;
    for (double f : grid.f_min)
        for (double l : grid.l_min)
            for (double u : grid.u) {
                const QoeParams p{f, 1024.0 * 540.0, l, u};
                double rss = 0.0;
                for (const auto& sc : s) {
                    const double d = qoe_total(sc, p).average - reference_averages().at(sc.name);
                    rss += d * d;
                }
                best = std::min(best, rss);
            }
    CHECK(rep.residual == doctest::Approx(best).epsilon(1e-12));
}
