#include "xrtrace/dist_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "xrtrace/error.hpp"
#include "xrtrace/frames.hpp"
#include "xrtrace/text.hpp"

namespace xrtrace::dist {
namespace {

// Wichura, Algorithm AS 241 (PPND16): relative accuracy about 1e-16.
double normal_quantile(double p) {
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r + 6.7265770927008700853e+4) * r +
                    4.5921953931549871457e+4) * r + 1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                 1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r + 3.9307895800092710610e+4) * r +
                    2.1213794301586595867e+4) * r + 5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                 4.2313330701600911252e+1) * r + 1.0);
    }
    double r = q < 0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r + 2.41780725177450611770e-1) * r +
                   1.27045825245236838258e+0) * r + 3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
                4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r + 1.51986665636164571966e-2) * r +
                   1.48103976427480074590e-1) * r + 6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
                2.05319162663775882187e+0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 1.24266094738807843860e-3) * r +
                   2.65321895265761230930e-2) * r + 2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
                5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r + 1.84631831751005468180e-5) * r +
                   7.86869131145613259100e-4) * r + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0 ? -val : val;
}

// Linear-interpolation sample quantile of sorted data.
double sorted_quantile(std::span<const double> sorted, double prob) {
    const double pos = prob * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double squared_correlation(std::span<const QqPoint> pts) {
    const auto n = static_cast<double>(pts.size());
    double mx = 0, my = 0;
    for (const auto& pt : pts) {
        mx += pt.theoretical;
        my += pt.sample;
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (const auto& pt : pts) {
        const double dx = pt.theoretical - mx;
        const double dy = pt.sample - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0 || syy == 0) return 0.0;
    return std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
}

}  // namespace

std::string_view to_string(Family f) noexcept {
    switch (f) {
        case Family::Normal: return "Normal";
        case Family::Laplace: return "Laplace";
        case Family::Logistic: return "Logistic";
    }
    return "Normal";
}

SampleSummary summarize(std::span<const double> sample) {
    if (sample.empty()) throw Error(ErrorCode::InsufficientData, "cannot summarize an empty sample");
    const auto st = describe(sample);
    SampleSummary s{st.n, st.mean, st.std_dev, st.min, st.max, {}};

    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    if (s.max == s.min) {
        s.histogram.edges = {s.min - 0.5, s.max + 0.5};
        s.histogram.counts = {s.n};
        return s;
    }
    const double iqr = sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
    const double width_fd = 2.0 * iqr / std::cbrt(static_cast<double>(s.n));
    std::size_t bins = 30;
    if (width_fd > 0) {
        const double wanted = std::ceil((s.max - s.min) / width_fd);
        if (wanted >= 1 && wanted <= 10000) bins = static_cast<std::size_t>(wanted);
    }
    const double width = (s.max - s.min) / static_cast<double>(bins);
    s.histogram.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) s.histogram.edges[i] = s.min + width * static_cast<double>(i);
    s.histogram.edges.back() = s.max;
    s.histogram.counts.assign(bins, 0);
    for (double v : sample) {
        auto idx = static_cast<std::size_t>((v - s.min) / width);
        ++s.histogram.counts[std::min(idx, bins - 1)];
    }
    return s;
}

double theoretical_quantile(Family family, double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw Error(ErrorCode::DomainError, "quantile probability must lie in (0, 1), got " + format_double(p));
    }
    switch (family) {
        case Family::Normal: return normal_quantile(p);
        case Family::Laplace: return p < 0.5 ? std::log(2.0 * p) : -std::log(2.0 * (1.0 - p));
        case Family::Logistic: return std::log(p / (1.0 - p));
    }
    return 0.0;
}

double unit_std_dev(Family family) noexcept {
    switch (family) {
        case Family::Normal: return 1.0;
        case Family::Laplace: return std::numbers::sqrt2;
        case Family::Logistic: return std::numbers::pi / std::sqrt(3.0);
    }
    return 1.0;
}

namespace {

struct Moments {
    double mean;
    double std_dev;
};

Moments checked_moments(std::span<const double> sample) {
    if (sample.size() < 3) {
        throw Error(ErrorCode::InsufficientData, "Q-Q comparison needs at least 3 values, got " +
                                                     std::to_string(sample.size()));
    }
    const auto st = describe(sample);
    if (st.max == st.min || st.std_dev == 0.0) {
        throw Error(ErrorCode::ZeroVarianceError, "sample is constant (" + format_double(st.min) + ")");
    }
    return {st.mean, st.std_dev};
}

std::vector<QqPoint> build_points(std::span<const double> sample, Family family, double location, double scale) {
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    std::vector<QqPoint> pts(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double p = (static_cast<double>(i) + 0.5) / n;
        pts[i] = {p, theoretical_quantile(family, p), (sorted[i] - location) / scale};
    }
    return pts;
}

}  // namespace

std::vector<QqPoint> qq_points(std::span<const double> sample, Family family) {
    const auto m = checked_moments(sample);
    return build_points(sample, family, m.mean, m.std_dev / unit_std_dev(family));
}

DistributionFit fit_family(std::span<const double> sample, Family family) {
    const auto m = checked_moments(sample);
    DistributionFit fit;
    fit.family = family;
    fit.location = m.mean;
    fit.scale = m.std_dev / unit_std_dev(family);
    fit.qq_points = build_points(sample, family, fit.location, fit.scale);
    fit.linearity = squared_correlation(fit.qq_points);
    return fit;
}

FitSelection fit_select(std::span<const double> sample) {
    if (sample.size() < 30) {
        throw Error(ErrorCode::InsufficientData,
                    "distribution selection needs at least 30 values, got " + std::to_string(sample.size()));
    }
    FitSelection sel;
    for (std::size_t i = 0; i < kFamilies.size(); ++i) sel.fits[i] = fit_family(sample, kFamilies[i]);
    std::size_t best = 0;
    for (std::size_t i = 1; i < sel.fits.size(); ++i) {
        if (sel.fits[i].linearity > sel.fits[best].linearity) best = i;
    }
    sel.best = kFamilies[best];
    return sel;
}

std::string qq_to_csv(const DistributionFit& fit) {
    std::string out = "p,theoretical,sample\n";
    for (const auto& pt : fit.qq_points) {
        out += format_double(pt.p);
        out += ',';
        out += format_double(pt.theoretical);
        out += ',';
        out += format_double(pt.sample);
        out += '\n';
    }
    return out;
}

}  // namespace xrtrace::dist
