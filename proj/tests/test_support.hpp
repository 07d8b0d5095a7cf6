#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "xrtrace/random.hpp"

// Seeded series generators shared by the unit and acceptance tests.
namespace xrtrace::testing {

inline std::vector<double> white_noise(std::uint64_t seed, std::size_t n, double sigma = 1.0) {
    Rng rng(seed);
    std::vector<double> x(n);
    for (auto& v : x) v = sigma * rng.normal();
    return x;
}

inline std::vector<double> random_walk(std::uint64_t seed, std::size_t n) {
    auto x = white_noise(seed, n);
    for (std::size_t i = 1; i < n; ++i) x[i] += x[i - 1];
    return x;
}

/// x_t = c + e_t + sum phi_i x_{t-i} + sum theta_j e_{t-j}, after a burn-in.
inline std::vector<double> simulate_arma(const std::vector<double>& phi, const std::vector<double>& theta, double c,
                                         double sigma, std::size_t n, std::uint64_t seed, std::size_t burn = 500) {
    Rng rng(seed);
    const std::size_t total = n + burn;
    std::vector<double> x(total, 0.0), e(total, 0.0);
    for (std::size_t t = 0; t < total; ++t) {
        e[t] = sigma * rng.normal();
        double v = c + e[t];
        for (std::size_t i = 1; i <= phi.size() && i <= t; ++i) v += phi[i - 1] * x[t - i];
        for (std::size_t j = 1; j <= theta.size() && j <= t; ++j) v += theta[j - 1] * e[t - j];
        x[t] = v;
    }
    return {x.begin() + static_cast<std::ptrdiff_t>(burn), x.end()};
}

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Inverse of a monotone CDF by bisection on [-40, 40].
template <typename Cdf>
double invert_by_bisection(Cdf cdf, double p) {
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace xrtrace::testing
