#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xrtrace::dist {

/// Candidate families, in tie-break priority order.
enum class Family { Normal, Laplace, Logistic };

inline constexpr std::array<Family, 3> kFamilies = {Family::Normal, Family::Laplace, Family::Logistic};

[[nodiscard]] std::string_view to_string(Family f) noexcept;

struct Histogram {
    std::vector<double> edges;  // counts.size() + 1 edges
    std::vector<std::size_t> counts;
};

struct SampleSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double std_dev = 0.0;  // unbiased
    double min = 0.0;
    double max = 0.0;
    Histogram histogram;
};

/// Summary statistics plus a Freedman-Diaconis histogram (30 bins when the
/// IQR is zero or the rule asks for more than 10000 bins).
[[nodiscard]] SampleSummary summarize(std::span<const double> sample);

/// Inverse CDF of the standardized family at p in (0, 1). Throws
/// Error{DomainError} outside that interval.
[[nodiscard]] double theoretical_quantile(Family family, double p);

/// Standard deviation of the standardized family, i.e. the factor that maps
/// a sample standard deviation to the family's scale parameter.
[[nodiscard]] double unit_std_dev(Family family) noexcept;

struct QqPoint {
    double p = 0.0;
    double theoretical = 0.0;
    double sample = 0.0;
};

struct DistributionFit {
    Family family = Family::Normal;
    double location = 0.0;
    double scale = 1.0;
    std::vector<QqPoint> qq_points;
    double linearity = 0.0;  // squared Pearson correlation of the Q-Q points
};

/// Q-Q points with plotting position (i - 0.5)/n against the family. The
/// sample is standardized with method-of-moments location and scale so a
/// perfect fit lies on y = x.
///
/// Throws Error{InsufficientData} when n < 3 and Error{ZeroVarianceError}
/// for a constant sample.
[[nodiscard]] std::vector<QqPoint> qq_points(std::span<const double> sample, Family family);

[[nodiscard]] DistributionFit fit_family(std::span<const double> sample, Family family);

struct FitSelection {
    Family best = Family::Normal;
    std::array<DistributionFit, 3> fits;  // indexed like kFamilies
};

/// Fits all three families and picks the highest linearity; ties go to the
/// earlier family in kFamilies. Requires n >= 30.
[[nodiscard]] FitSelection fit_select(std::span<const double> sample);

/// `p,theoretical,sample` rows for external plotting.
[[nodiscard]] std::string qq_to_csv(const DistributionFit& fit);

}  // namespace xrtrace::dist
