#pragma once

#include <Eigen/Dense>

#include "xrtrace/error.hpp"

namespace xrtrace::detail {

struct OlsResult {
    Eigen::VectorXd coef;
    Eigen::VectorXd residuals;
    double rss = 0.0;
    Eigen::MatrixXd xtx_inv;  // empty unless requested
};

/// Ordinary least squares via column-pivoted QR. Throws Error{SingularDesign}
/// when the design is rank deficient or has no residual degrees of freedom.
inline OlsResult ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, bool want_covariance = false) {
    if (x.rows() <= x.cols()) {
        throw Error(ErrorCode::SingularDesign, "regression has " + std::to_string(x.rows()) + " rows for " +
                                                   std::to_string(x.cols()) + " regressors");
    }
    // Unit-norm columns make the rank test independent of regressor scale.
    Eigen::VectorXd norms = x.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < norms.size(); ++j) {
        if (norms(j) == 0.0) norms(j) = 1.0;
    }
    const Eigen::MatrixXd scaled = x * norms.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
    qr.setThreshold(1e-10);
    if (qr.rank() < x.cols()) {
        throw Error(ErrorCode::SingularDesign, "design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                                                   " of " + std::to_string(x.cols()) + ")");
    }
    OlsResult r;
    r.coef = qr.solve(y).cwiseQuotient(norms);
    r.residuals = y - x * r.coef;
    r.rss = r.residuals.squaredNorm();
    if (want_covariance) {
        const auto k = x.cols();
        const Eigen::MatrixXd upper = qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
        const Eigen::MatrixXd r_inv =
            upper.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
        const Eigen::MatrixXd permuted = qr.colsPermutation() * (r_inv * r_inv.transpose()) *
                                         qr.colsPermutation().transpose();
        r.xtx_inv = norms.cwiseInverse().asDiagonal() * permuted * norms.cwiseInverse().asDiagonal();
    }
    return r;
}

}  // namespace xrtrace::detail
