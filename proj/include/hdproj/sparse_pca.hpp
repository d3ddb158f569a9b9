// ============================================================================
// Sparse principal components by truncated power iteration.  Each component
// is initialized at the dense leading eigenvector of the current (deflated)
// matrix, then repeatedly multiplied, truncated to the largest-magnitude
// `budget` entries, and renormalized.  Deflation subtracts the Rayleigh
// quotient of the accepted component against the original matrix.
// ============================================================================

#pragma once

#include <vector>

#include "hdproj/dataset.hpp"
#include "hdproj/estimators.hpp"
#include "hdproj/types.hpp"

namespace hdproj {

namespace sparse_pca_defaults {
constexpr int max_iter = 500;
constexpr double conv_tol = 1e-7;
}  // namespace sparse_pca_defaults

struct SparsePcaConfig {
    int n_components = 1;
    Index budget = 0;  // nonzero entries kept per component; 0 means ceil(sqrt(p))
    int max_iter = sparse_pca_defaults::max_iter;
    double conv_tol = sparse_pca_defaults::conv_tol;
};

struct SparsePcaResult {
    std::vector<Direction> components;  // unit norm, largest-|entry| positive
    Vector eigenvalues;                 // Rayleigh quotients v' sigma v
};

// leading can pass a precomputed unit-norm initializer for the first
// component (the dense leading eigenvector of sigma); when null it is
// computed internally via top_eigen.
SparsePcaResult sparse_pc(const Matrix& sigma, const SparsePcaConfig& config,
                          const Vector* leading = nullptr);

Index default_budget(Index p);

// Scores each candidate budget s by v_s' sigma v_s - lambda1 * s / p, where
// v_s is the first sparse component at budget s, and returns the maximizer
// (ties go to the smaller budget).
Index choose_budget(const Matrix& sigma, const std::vector<Index>& candidates);

}  // namespace hdproj
