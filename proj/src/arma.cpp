#include "xrtrace/arma.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "ols.hpp"
#include "xrtrace/error.hpp"
#include "xrtrace/frames.hpp"
#include "xrtrace/text.hpp"

namespace xrtrace::arma {
namespace {

constexpr double kLagTrimT = 1.6448536269514722;

double mean_of(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// OLS for the ADF regression on rows [first_row, n) of the differenced series.
struct AdfRegression {
    double statistic;
    double last_lag_t;
    std::size_t rows;
};

AdfRegression adf_regression(std::span<const double> level, std::span<const double> diff, std::size_t lags,
                             std::size_t first_row) {
    // diff[k] = level[k + 1] - level[k]; row k regresses diff[k] on level[k] and diff[k-1..k-lags].
    const std::size_t rows = diff.size() - first_row;
    const auto cols = static_cast<Eigen::Index>(2 + lags);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows), cols);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t k = first_row + r;
        const auto row = static_cast<Eigen::Index>(r);
        y(row) = diff[k];
        x(row, 0) = 1.0;
        x(row, 1) = level[k];
        for (std::size_t i = 1; i <= lags; ++i) x(row, static_cast<Eigen::Index>(1 + i)) = diff[k - i];
    }
    const auto fit = detail::ols(x, y, true);
    const double dof = static_cast<double>(rows) - static_cast<double>(cols);
    const double s2 = fit.rss / dof;
    if (!(s2 > 0.0) || !std::isfinite(s2)) {
        throw Error(ErrorCode::SingularDesign, "ADF regression fits exactly; residual variance is zero");
    }
    auto t_of = [&](Eigen::Index j) { return fit.coef(j) / std::sqrt(s2 * fit.xtx_inv(j, j)); };
    return {t_of(1), lags > 0 ? t_of(cols - 1) : 0.0, rows};
}

}  // namespace

AdfResult adf_test(std::span<const double> series, const AdfOptions& options) {
    const std::size_t n = series.size();
    if (n < 20) throw Error(ErrorCode::InsufficientData, "ADF test needs at least 20 points, got " + std::to_string(n));

    std::vector<double> diff(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) diff[i] = series[i + 1] - series[i];

    std::size_t max_lag = options.max_lag.value_or(
        static_cast<std::size_t>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25))));
    // Keep at least a handful of residual degrees of freedom.
    max_lag = std::min(max_lag, (n - 1) / 2 - 2);

    std::size_t lags = max_lag;
    if (options.trim_lags) {
        // General-to-specific on a fixed sample so the t statistics are comparable.
        while (lags > 0) {
            const auto reg = adf_regression(series, diff, lags, max_lag);
            if (std::abs(reg.last_lag_t) >= kLagTrimT) break;
            --lags;
        }
    }
    const auto reg = adf_regression(series, diff, lags, lags);
    AdfResult res;
    res.statistic = reg.statistic;
    res.lags_used = lags;
    res.n_obs = reg.rows;
    res.reject_unit_root = res.statistic < res.critical.five_percent;
    return res;
}

std::vector<double> acf(std::span<const double> series, std::size_t n_lags) {
    const std::size_t n = series.size();
    if (n_lags >= n) {
        throw Error(ErrorCode::InsufficientData,
                    "acf lag count " + std::to_string(n_lags) + " must be below series length " + std::to_string(n));
    }
    const double mean = mean_of(series);
    double c0 = 0.0;
    for (double v : series) c0 += (v - mean) * (v - mean);
    if (c0 == 0.0) throw Error(ErrorCode::ZeroVarianceError, "acf of a constant series is undefined");
    std::vector<double> out(n_lags + 1);
    for (std::size_t k = 0; k <= n_lags; ++k) {
        double ck = 0.0;
        for (std::size_t t = k; t < n; ++t) ck += (series[t] - mean) * (series[t - k] - mean);
        out[k] = ck / c0;
    }
    out[0] = 1.0;
    return out;
}

std::vector<double> pacf(std::span<const double> series, std::size_t n_lags) {
    const auto r = acf(series, n_lags);
    std::vector<double> out(n_lags + 1, 0.0);
    out[0] = 1.0;
    if (n_lags == 0) return out;

    // Durbin-Levinson
    std::vector<double> phi(n_lags + 1, 0.0);
    std::vector<double> prev(n_lags + 1, 0.0);
    phi[1] = r[1];
    out[1] = r[1];
    double v = 1.0 - r[1] * r[1];
    for (std::size_t k = 2; k <= n_lags; ++k) {
        prev = phi;
        double num = r[k];
        for (std::size_t j = 1; j < k; ++j) num -= prev[j] * r[k - j];
        const double kk = v > 0.0 ? num / v : 0.0;
        phi[k] = kk;
        for (std::size_t j = 1; j < k; ++j) phi[j] = prev[j] - kk * prev[k - j];
        v *= (1.0 - kk * kk);
        out[k] = kk;
    }
    return out;
}

bool roots_outside_unit_circle(std::span<const double> coeffs) {
    const auto k = static_cast<Eigen::Index>(coeffs.size());
    if (k == 0) return true;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index j = 0; j < k; ++j) companion(0, j) = coeffs[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 1; i < k; ++i) companion(i, i - 1) = 1.0;
    const Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    for (Eigen::Index i = 0; i < k; ++i) {
        if (std::abs(es.eigenvalues()(i)) >= 1.0 - 1e-9) return false;
    }
    return true;
}

std::size_t long_ar_order(std::size_t p, std::size_t q, std::size_t n) noexcept {
    const std::size_t wanted = std::max<std::size_t>(20, 2 * (p + q));
    // Short series cannot support the full long AR; cap so its regression keeps 3 rows per regressor.
    const std::size_t cap = n >= 8 ? (n - 4) / 4 : 1;
    return std::max<std::size_t>(std::min(wanted, cap), std::max<std::size_t>(p + q, 1));
}

std::vector<double> filter_residuals(const ArmaModel& model, std::span<const double> series) {
    const std::size_t n = series.size();
    const std::size_t warmup = std::max(model.p, model.q);
    std::vector<double> e(n, 0.0);
    for (std::size_t t = warmup; t < n; ++t) {
        double pred = model.c;
        for (std::size_t i = 1; i <= model.p; ++i) pred += model.phi[i - 1] * series[t - i];
        for (std::size_t j = 1; j <= model.q; ++j) pred += model.theta[j - 1] * e[t - j];
        e[t] = series[t] - pred;
    }
    return e;
}

namespace {

// Regresses F_t on [1, F_{t-1..t-p}, e_{t-1..t-q}] for t in [first, n).
detail::OlsResult arma_regression(std::span<const double> x, std::span<const double> e, std::size_t p,
                                  std::size_t q, std::size_t first) {
    const std::size_t rows = x.size() - first;
    const auto cols = static_cast<Eigen::Index>(1 + p + q);
    Eigen::MatrixXd design(static_cast<Eigen::Index>(rows), cols);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = first + r;
        const auto row = static_cast<Eigen::Index>(r);
        y(row) = x[t];
        design(row, 0) = 1.0;
        for (std::size_t i = 1; i <= p; ++i) design(row, static_cast<Eigen::Index>(i)) = x[t - i];
        for (std::size_t j = 1; j <= q; ++j) design(row, static_cast<Eigen::Index>(p + j)) = e[t - j];
    }
    return detail::ols(design, y);
}

ArmaModel model_from(const detail::OlsResult& fit, std::size_t p, std::size_t q) {
    ArmaModel m;
    m.p = p;
    m.q = q;
    m.c = fit.coef(0);
    for (std::size_t i = 0; i < p; ++i) m.phi.push_back(fit.coef(static_cast<Eigen::Index>(1 + i)));
    for (std::size_t j = 0; j < q; ++j) m.theta.push_back(fit.coef(static_cast<Eigen::Index>(1 + p + j)));
    m.sigma2 = fit.rss / static_cast<double>(fit.residuals.size());
    return m;
}

// Replaces every inverse root of 1 - a_1 z - ... - a_k z^k that lies on or
// outside the unit circle by its reciprocal conjugate, which leaves the
// autocorrelation shape unchanged. Returns true when anything moved.
bool reflect_inverse_roots(std::vector<double>& a) {
    const auto k = static_cast<Eigen::Index>(a.size());
    if (k == 0 || roots_outside_unit_circle(a)) return false;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index j = 0; j < k; ++j) companion(0, j) = a[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 1; i < k; ++i) companion(i, i - 1) = 1.0;
    const Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    constexpr double kMaxModulus = 0.999;
    std::vector<std::complex<double>> poly{1.0};  // coefficients of prod (1 - l z)
    for (Eigen::Index i = 0; i < k; ++i) {
        std::complex<double> l = es.eigenvalues()(i);
        if (std::abs(l) >= 1.0) l = 1.0 / std::conj(l);
        if (std::abs(l) > kMaxModulus) l *= kMaxModulus / std::abs(l);
        poly.push_back(0.0);
        for (std::size_t j = poly.size() - 1; j > 0; --j) poly[j] -= l * poly[j - 1];
    }
    for (std::size_t j = 0; j < a.size(); ++j) a[j] = -poly[j + 1].real();
    return true;
}

bool make_admissible(ArmaModel& m) {
    bool changed = reflect_inverse_roots(m.phi);
    std::vector<double> neg(m.theta.size());
    std::transform(m.theta.begin(), m.theta.end(), neg.begin(), std::negate<>());
    if (reflect_inverse_roots(neg)) {
        std::transform(neg.begin(), neg.end(), m.theta.begin(), std::negate<>());
        changed = true;
    }
    return changed;
}

// After reflection the coefficients no longer come from a regression, so the
// intercept is re-estimated from the implied residuals to keep their mean at 0.
std::vector<double> refit_intercept(ArmaModel& m, std::span<const double> x, std::size_t first) {
    const double ar_sum = std::accumulate(m.phi.begin(), m.phi.end(), 0.0);
    m.c = mean_of(x) * (1.0 - ar_sum);
    const auto e = filter_residuals(m, x);
    std::vector<double> r(e.begin() + static_cast<std::ptrdiff_t>(first), e.end());
    const double shift = mean_of(r);
    m.c += shift;
    double ss = 0.0;
    for (double& v : r) {
        v -= shift;
        ss += v * v;
    }
    m.sigma2 = ss / static_cast<double>(r.size());
    return r;
}

void finish_diagnostics(ArmaFit& fit) {
    fit.aic = static_cast<double>(fit.n_obs) * std::log(fit.model.sigma2) +
              2.0 * static_cast<double>(fit.model.p + fit.model.q + 1);
    fit.ar_stationary = roots_outside_unit_circle(fit.model.phi);
    std::vector<double> neg_theta;
    for (double t : fit.model.theta) neg_theta.push_back(-t);
    fit.ma_invertible = roots_outside_unit_circle(neg_theta);
}

}  // namespace

ArmaFit fit_arma(std::span<const double> series, std::size_t p, std::size_t q) {
    const std::size_t n = series.size();
    const std::size_t need = 10 * (p + q + 1);
    if (n < need || n == 0) {
        throw Error(ErrorCode::InsufficientData, "ARMA(" + std::to_string(p) + "," + std::to_string(q) + ") needs at least " +
                                                     std::to_string(need) + " points, got " + std::to_string(n));
    }
    ArmaFit out;
    if (p == 0 && q == 0) {
        const double mean = mean_of(series);
        double ss = 0.0;
        for (double v : series) ss += (v - mean) * (v - mean);
        out.model.c = mean;
        out.model.sigma2 = ss / static_cast<double>(n);
        out.residuals.reserve(n);
        for (double v : series) out.residuals.push_back(v - mean);
        out.n_obs = n;
        if (out.model.sigma2 > 0) finish_diagnostics(out);
        return out;
    }

    // Stage 1: long autoregression for residual proxies.
    const std::size_t m = long_ar_order(p, q, n);
    std::vector<double> e(n, 0.0);
    {
        const auto long_fit = arma_regression(series, e, m, 0, m);
        for (std::size_t t = m; t < n; ++t) e[t] = long_fit.residuals(static_cast<Eigen::Index>(t - m));
    }

    // Stage 2: regression on lagged values and lagged proxies.
    const std::size_t first = std::max(p, m + q);
    auto fit = arma_regression(series, e, p, q, first);
    ArmaModel model = model_from(fit, p, q);
    bool reflected = make_admissible(model);

    // Stage 3: one refinement with residuals implied by the stage-2 model.
    if (q > 0) {
        const auto refined = filter_residuals(model, series);
        const bool finite = std::all_of(refined.begin(), refined.end(), [](double v) { return std::isfinite(v); });
        if (finite) {
            fit = arma_regression(series, refined, p, q, first);
            model = model_from(fit, p, q);
            reflected = make_admissible(model);
        }
    }
    if (reflected) {
        out.residuals = refit_intercept(model, series, first);
    } else {
        out.residuals.assign(fit.residuals.data(), fit.residuals.data() + fit.residuals.size());
    }
    out.model = std::move(model);
    out.n_obs = out.residuals.size();
    if (out.model.sigma2 > 0) {
        finish_diagnostics(out);
    } else {
        out.aic = -std::numeric_limits<double>::infinity();
    }
    return out;
}

std::vector<double> forecast(const ArmaModel& model, std::span<const double> history,
                             std::span<const double> residual_history, std::size_t steps) {
    if (history.size() < model.p || residual_history.size() < model.q) {
        throw Error(ErrorCode::InsufficientHistory, "forecast needs " + std::to_string(model.p) + " values and " +
                                                        std::to_string(model.q) + " residuals of history");
    }
    std::vector<double> x(history.end() - static_cast<std::ptrdiff_t>(model.p), history.end());
    std::vector<double> e(residual_history.end() - static_cast<std::ptrdiff_t>(model.q), residual_history.end());
    std::vector<double> out;
    out.reserve(steps);
    for (std::size_t s = 0; s < steps; ++s) {
        double next = model.c;
        for (std::size_t i = 1; i <= model.p; ++i) next += model.phi[i - 1] * x[x.size() - i];
        for (std::size_t j = 1; j <= model.q; ++j) next += model.theta[j - 1] * e[e.size() - j];
        out.push_back(next);
        x.push_back(next);
        e.push_back(0.0);
    }
    return out;
}

OrderSelection select_order(std::span<const double> series, std::size_t max_p, std::size_t max_q) {
    OrderSelection sel;
    const std::size_t n = series.size();
    const std::size_t n_lags = std::min<std::size_t>(40, n > 1 ? n - 1 : 0);
    if (n > 1) {
        sel.acf = acf(series, n_lags);
        sel.pacf = pacf(series, n_lags);
    }
    const std::size_t tail_start = long_ar_order(max_p, max_q, n) + max_q;
    std::optional<double> best;
    for (std::size_t p = 0; p <= max_p; ++p) {
        for (std::size_t q = 0; q <= max_q; ++q) {
            AicCell cell{p, q, std::nullopt};
            try {
                const auto fit = fit_arma(series, p, q);
                const auto e = filter_residuals(fit.model, series);
                if (tail_start < n) {
                    double ss = 0.0;
                    for (std::size_t t = tail_start; t < n; ++t) ss += e[t] * e[t];
                    const double count = static_cast<double>(n - tail_start);
                    const double s2 = ss / count;
                    if (std::isfinite(s2) && s2 > 0) {
                        cell.aic = count * std::log(s2) + 2.0 * static_cast<double>(p + q + 1);
                    }
                }
            } catch (const Error&) {
                // Cell stays empty; other orders may still fit.
            }
            if (cell.aic && (!best || *cell.aic < *best)) {
                best = cell.aic;
                sel.p = p;
                sel.q = q;
            }
            sel.table.push_back(cell);
        }
    }
    if (!best) throw Error(ErrorCode::OrderSelectionError, "no ARMA order in the grid could be fitted");
    return sel;
}

ForecastReport evaluate(std::span<const double> series, std::size_t p, std::size_t q, double split) {
    if (!(split > 0.0 && split < 1.0)) throw Error(ErrorCode::DomainError, "split fraction must lie in (0, 1)");
    const std::size_t n = series.size();
    const auto train = static_cast<std::size_t>(std::floor(split * static_cast<double>(n) + 1e-9));
    if (train == 0 || train >= n) {
        throw Error(ErrorCode::InsufficientData, "series of " + std::to_string(n) + " points leaves an empty split");
    }
    ForecastReport rep;
    rep.split_fraction = split;
    rep.train_size = train;
    rep.test_start = train;
    rep.model = fit_arma(series.first(train), p, q).model;

    // Walk forward: residuals over the whole series follow from true values.
    const auto e = filter_residuals(rep.model, series);
    double abs_sum = 0.0, sq_sum = 0.0, pct_sum = 0.0;
    std::size_t pct_count = 0;
    for (std::size_t t = train; t < n; ++t) {
        double pred = rep.model.c;
        for (std::size_t i = 1; i <= rep.model.p; ++i) pred += rep.model.phi[i - 1] * series[t - i];
        for (std::size_t j = 1; j <= rep.model.q; ++j) pred += rep.model.theta[j - 1] * e[t - j];
        rep.predictions.push_back(pred);
        rep.actuals.push_back(series[t]);
        const double err = series[t] - pred;
        abs_sum += std::abs(err);
        sq_sum += err * err;
        if (series[t] != 0.0) {
            pct_sum += std::abs(err / series[t]);
            ++pct_count;
        }
    }
    const auto m = static_cast<double>(rep.predictions.size());
    rep.mae = abs_sum / m;
    rep.rmse = std::sqrt(sq_sum / m);
    rep.mape = pct_count > 0 ? 100.0 * pct_sum / static_cast<double>(pct_count)
                             : std::numeric_limits<double>::quiet_NaN();
    return rep;
}

std::string forecast_to_csv(const ForecastReport& report) {
    std::string out = "t,actual,predicted\n";
    for (std::size_t i = 0; i < report.predictions.size(); ++i) {
        out += std::to_string(report.test_start + i);
        out += ',';
        out += format_double(report.actuals[i]);
        out += ',';
        out += format_double(report.predictions[i]);
        out += '\n';
    }
    return out;
}

}  // namespace xrtrace::arma
