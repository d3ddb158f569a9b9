#include "hdproj/estimators.hpp"

#include <cmath>
#include <string>

#include <lapacke.h>

namespace hdproj {

Vector sample_mean(const Matrix& samples) {
    if (samples.rows() < 1) {
        throw ValidationError("sample_mean: no rows");
    }
    return samples.colwise().mean();
}

Vector thresholded_mean(const Matrix& samples, double c) {
    if (c < 0.0) {
        throw ValidationError("thresholded_mean: c must be non-negative, got " + std::to_string(c));
    }
    Vector mean = sample_mean(samples);
    const double p = static_cast<double>(samples.cols());
    const double n = static_cast<double>(samples.rows());
    const double tau = c * std::sqrt(std::log(p) / n);
    for (Index j = 0; j < mean.size(); ++j) {
        if (std::abs(mean(j)) < tau) mean(j) = 0.0;
    }
    return mean;
}

CovarianceEstimate pooled_covariance(const Matrix& x, const Matrix& z,
                                     std::optional<double> offdiag_c) {
    if (x.cols() != z.cols()) {
        throw ValidationError("pooled_covariance: column count mismatch");
    }
    const Index n_x = x.rows();
    const Index n_z = z.rows();
    if (n_x < 1 || n_z < 1 || n_x + n_z < 3) {
        throw ValidationError("pooled_covariance: needs n_x + n_z >= 3 with both groups non-empty");
    }
    const Index p = x.cols();
    const Matrix cx = x.rowwise() - sample_mean(x).transpose();
    const Matrix cz = z.rowwise() - sample_mean(z).transpose();

    Matrix sigma = Matrix::Zero(p, p);
    sigma.selfadjointView<Eigen::Lower>().rankUpdate(cx.transpose(), 1.0);
    sigma.selfadjointView<Eigen::Lower>().rankUpdate(cz.transpose(), 1.0);
    sigma /= static_cast<double>(n_x + n_z - 2);

    if (offdiag_c) {
        if (*offdiag_c < 0.0) {
            throw ValidationError("pooled_covariance: off-diagonal threshold must be non-negative");
        }
        const double tau = *offdiag_c *
                           std::sqrt(std::log(static_cast<double>(p)) /
                                     static_cast<double>(n_x + n_z));
        for (Index j = 0; j < p; ++j) {
            for (Index i = j + 1; i < p; ++i) {
                if (std::abs(sigma(i, j)) < tau) sigma(i, j) = 0.0;
            }
        }
    }
    sigma.triangularView<Eigen::StrictlyUpper>() = sigma.transpose();

    return CovarianceEstimate{std::move(sigma), n_x + n_z};
}

namespace {

Matrix checked_symmetric(const Matrix& sigma, const char* who) {
    if (sigma.rows() != sigma.cols()) {
        throw ValidationError(std::string(who) + ": matrix is not square");
    }
    const double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-8) {
        throw ValidationError(std::string(who) + ": matrix is not symmetric (max asymmetry " +
                              std::to_string(asym) + ")");
    }
    return 0.5 * (sigma + sigma.transpose());
}

}  // namespace

EigenPair top_eigen(const Matrix& sigma, Index k) {
    Matrix work = checked_symmetric(sigma, "top_eigen");
    const Index p = work.rows();
    if (k < 1 || k > p) {
        throw ValidationError("top_eigen: k = " + std::to_string(k) +
                              " out of range for p = " + std::to_string(p));
    }
    Vector w(p);
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L',
                                           static_cast<lapack_int>(p), work.data(),
                                           static_cast<lapack_int>(p), w.data());
    if (info != 0) {
        throw NumericalError("top_eigen: dsyevd failed with info = " + std::to_string(info));
    }
    // dsyevd returns ascending order; flip to non-increasing.
    EigenPair out;
    out.values.resize(k);
    out.vectors.resize(p, k);
    for (Index i = 0; i < k; ++i) {
        out.values(i) = w(p - 1 - i);
        out.vectors.col(i) = work.col(p - 1 - i);
    }
    return out;
}

namespace {

// Inverted spectrum of (lambda*I - sigma) under the tolerance rules.
Vector inverted_shift(double lambda, const Vector& eigvals, Index null_index,
                      double rel_tol) {
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
        throw ValidationError("pinv_shifted: rel_tol must lie in (0, 1)");
    }
    const Index p = eigvals.size();
    if (null_index < 0 || null_index >= p) {
        throw ValidationError("pinv_shifted: null index out of range");
    }
    Vector d = Vector::Constant(p, lambda) - eigvals;
    const double dmax = d.cwiseAbs().maxCoeff();
    Vector inv = Vector::Zero(p);
    for (Index i = 0; i < p; ++i) {
        if (i == null_index) continue;
        if (std::abs(d(i)) > rel_tol * dmax) inv(i) = 1.0 / d(i);
    }
    return inv;
}

}  // namespace

Matrix pinv_shifted_at(double lambda, const EigenPair& eig, Index null_index,
                       double rel_tol) {
    const Vector inv = inverted_shift(lambda, eig.values, null_index, rel_tol);
    return eig.vectors * inv.asDiagonal() * eig.vectors.transpose();
}

Vector apply_pinv_shifted(double lambda, const EigenPair& eig, Index null_index,
                          double rel_tol, const Vector& rhs) {
    const Vector inv = inverted_shift(lambda, eig.values, null_index, rel_tol);
    return eig.vectors * (inv.asDiagonal() * (eig.vectors.transpose() * rhs));
}

Matrix pinv_shifted(double lambda1, const Matrix& sigma, double rel_tol) {
    const EigenPair eig = top_eigen(sigma, sigma.rows());
    const double lambda_max = eig.values(0);
    const double slack = 1e-7 * (1.0 + std::abs(lambda_max));
    if (lambda1 < lambda_max - slack) {
        throw ValidationError("pinv_shifted: lambda1 = " + std::to_string(lambda1) +
                              " is below the top eigenvalue " + std::to_string(lambda_max));
    }
    return pinv_shifted_at(lambda1, eig, 0, rel_tol);
}

}  // namespace hdproj
