// ============================================================================
// Moment estimators and spectral primitives: group means (optionally hard
// thresholded), the pooled covariance, symmetric eigendecomposition, and the
// shifted pseudo-inverse (lambda*I - Sigma)^+ that the influence function
// is built from.
// ============================================================================

#pragma once

#include <optional>

#include "hdproj/types.hpp"

namespace hdproj {

// Eigenvalues in non-increasing order; vectors holds the matching
// orthonormal eigenvectors as columns (p x k).
struct EigenPair {
    Vector values;
    Matrix vectors;
};

struct CovarianceEstimate {
    Matrix sigma;
    Index n_effective = 0;  // pooled sample count n_x + n_z
};

// Column-wise mean; at least one row required.
Vector sample_mean(const Matrix& samples);

// Column-wise mean with entries below c * sqrt(log(p) / n) in magnitude set
// to exactly zero (entries at the threshold are kept).  c = 0 disables the
// screen.  Used for out-of-fold nuisance means in high dimensions.
Vector thresholded_mean(const Matrix& samples, double c);

// Pooled covariance: each group is centered at its own mean and the summed
// outer products are divided by n_x + n_z - 2.  When offdiag_c is set,
// off-diagonal entries below c * sqrt(log(p) / (n_x + n_z)) in magnitude are
// zeroed; the diagonal is never touched.
CovarianceEstimate pooled_covariance(const Matrix& x, const Matrix& z,
                                     std::optional<double> offdiag_c = {});

// Top-k eigenpairs of a symmetric matrix (delegates to LAPACK dsyevd).
// Asymmetry beyond 1e-8 is an error; smaller asymmetry is symmetrized away.
EigenPair top_eigen(const Matrix& sigma, Index k);

// (lambda1 * I - sigma)^+ for lambda1 >= lambda_max(sigma) up to slack.
// Shifted eigenvalues whose magnitude falls below rel_tol times the largest
// are treated as zero, and the direction belonging to sigma's top eigenvalue
// is zeroed unconditionally: it is the exact null direction of the operator
// and must never be inverted, however the tolerances fall.
Matrix pinv_shifted(double lambda1, const Matrix& sigma, double rel_tol = 1e-8);

// Generalization used when the projection component is the k-th eigenpair:
// builds (lambda * I - sigma)^+ from an existing full eigendecomposition of
// sigma, nulling the direction at null_index (0-based position in eig).
// Eigenvalues above lambda are inverted with their (negative) sign.
Matrix pinv_shifted_at(double lambda, const EigenPair& eig, Index null_index,
                       double rel_tol);

// Matrix-free version of pinv_shifted_at: returns (lambda*I - sigma)^+ rhs.
Vector apply_pinv_shifted(double lambda, const EigenPair& eig, Index null_index,
                          double rel_tol, const Vector& rhs);

}  // namespace hdproj
