#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xrtrace::arma {

/// F_t = c + e_t + sum_i phi_i F_{t-i} + sum_j theta_j e_{t-j}
struct ArmaModel {
    std::size_t p = 0;
    std::size_t q = 0;
    double c = 0.0;
    std::vector<double> phi;
    std::vector<double> theta;
    double sigma2 = 0.0;  // variance of e_t
};

struct ArmaFit {
    ArmaModel model;
    std::vector<double> residuals;  // final-stage regression residuals
    std::size_t n_obs = 0;          // rows in the final regression
    double aic = 0.0;
    bool ar_stationary = true;  // AR roots outside the unit circle
    bool ma_invertible = true;
};

/// Asymptotic constant-only Dickey-Fuller critical values.
struct AdfCriticalValues {
    double one_percent = -3.43;
    double five_percent = -2.86;
    double ten_percent = -2.57;
};

struct AdfResult {
    double statistic = 0.0;
    std::size_t lags_used = 0;
    std::size_t n_obs = 0;
    AdfCriticalValues critical;
    bool reject_unit_root = false;  // statistic < 5% critical value
};

struct AdfOptions {
    /// Highest lag considered; defaults to floor(12 (n/100)^(1/4)).
    std::optional<std::size_t> max_lag;
    /// Drop trailing lags while the last one has |t| < 1.645.
    bool trim_lags = true;
};

/// Augmented Dickey-Fuller regression with a constant and no trend:
/// dF_t = a + g F_{t-1} + sum_i b_i dF_{t-i} + e_t, statistic = g / se(g).
///
/// Throws Error{InsufficientData} for n < 20 and Error{SingularDesign} when
/// the regression is degenerate (for example a perfect linear ramp).
[[nodiscard]] AdfResult adf_test(std::span<const double> series, const AdfOptions& options = {});

/// Sample autocorrelation for lags 0..n_lags using the biased (1/n)
/// autocovariance. acf[0] == 1.
[[nodiscard]] std::vector<double> acf(std::span<const double> series, std::size_t n_lags);

/// Partial autocorrelation for lags 0..n_lags by Durbin-Levinson on the acf.
/// pacf[0] == 1 and pacf[1] == acf[1].
[[nodiscard]] std::vector<double> pacf(std::span<const double> series, std::size_t n_lags);

/// Hannan-Rissanen estimate with one refinement pass:
///  1. long AR by least squares gives residual proxies,
///  2. regress F_t on [1, F_{t-1..t-p}, e_{t-1..t-q}],
///  3. recompute residuals from that model and regress again.
/// p = q = 0 yields c = mean and sigma2 = population variance.
[[nodiscard]] ArmaFit fit_arma(std::span<const double> series, std::size_t p, std::size_t q);

/// Order of the stage-1 long autoregression for a given (p, q) and length.
[[nodiscard]] std::size_t long_ar_order(std::size_t p, std::size_t q, std::size_t n) noexcept;

/// One-step residuals of a model over a series, zero-initialized for the
/// first max(p, q) points where the recursion lacks history.
[[nodiscard]] std::vector<double> filter_residuals(const ArmaModel& model, std::span<const double> series);

/// Iterates the model with future shocks set to zero. `history` and
/// `residual_history` end with the most recent values. Throws
/// Error{InsufficientHistory} if either is shorter than p or q.
[[nodiscard]] std::vector<double> forecast(const ArmaModel& model, std::span<const double> history,
                                           std::span<const double> residual_history, std::size_t steps);

struct AicCell {
    std::size_t p = 0;
    std::size_t q = 0;
    std::optional<double> aic;  // nullopt when the fit failed
};

struct OrderSelection {
    std::size_t p = 0;
    std::size_t q = 0;
    std::vector<double> acf;
    std::vector<double> pacf;
    std::vector<AicCell> table;
};

/// AIC = n ln(sigma2) + 2 (p + q + 1) over a grid, with sigma2 measured on a
/// common tail of the series so every cell is scored on the same points.
/// Ties keep the smaller model (row-major scan order).
[[nodiscard]] OrderSelection select_order(std::span<const double> series, std::size_t max_p = 8,
                                          std::size_t max_q = 8);

struct ForecastReport {
    double split_fraction = 0.7;
    std::size_t train_size = 0;
    std::size_t test_start = 0;  // index of the first predicted point
    ArmaModel model;
    std::vector<double> predictions;
    std::vector<double> actuals;
    double mae = 0.0;
    double rmse = 0.0;
    double mape = 0.0;  // percent, over nonzero actuals; NaN if none
};

/// Fits on the first floor(split n) points and walks forward over the rest
/// with one-step predictions, feeding back true values and the residuals
/// they imply.
[[nodiscard]] ForecastReport evaluate(std::span<const double> series, std::size_t p, std::size_t q,
                                      double split = 0.7);

/// `t,actual,predicted` rows, t being the index into the full series.
[[nodiscard]] std::string forecast_to_csv(const ForecastReport& report);

/// True when every root of 1 - a_1 z - ... - a_k z^k lies outside the unit circle.
[[nodiscard]] bool roots_outside_unit_circle(std::span<const double> coeffs);

}  // namespace xrtrace::arma
