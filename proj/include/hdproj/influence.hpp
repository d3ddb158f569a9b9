// ============================================================================
// Eigen-projection influence functions and the per-fold nuisance bundle they
// are evaluated against.  For a fold's complement data the bundle carries the
// (optionally thresholded) group means, the pooled covariance, the paired
// eigenvalue/component, and the shifted-pseudo-inverse vector
//
//     s = (lambda * I - sigma)^+ (mu_x - mu_z).
//
// The influence value at a sample x with centered c = x - mu is evaluated in
// the factored form (s'c)(c'v) - s' sigma v, never through the p x p outer
// product; the trailing scalar is precomputed once per fold.
// ============================================================================

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <tuple>

#include "hdproj/dataset.hpp"
#include "hdproj/estimators.hpp"
#include "hdproj/population.hpp"
#include "hdproj/types.hpp"

namespace hdproj {

struct NuisanceOptions {
    bool threshold_means = true;  // hard threshold at threshold_c * sqrt(log p / n)
    double threshold_c = 1.0;
    std::optional<double> cov_offdiag_c;  // off-diagonal covariance threshold; off by default
    bool dense_pc = false;                // use the dense eigenvector instead of the sparse PC
    Index sparsity_budget = 0;            // 0 means ceil(sqrt(p))
    double pinv_rel_tol = 1e-8;
};

struct NuisanceFit {
    Vector mu_x;
    Vector mu_z;
    CovarianceEstimate sigma;
    double lambda = 0.0;  // eigenvalue paired with v (the top one when pc_index = 1)
    Direction v;
    Vector s;
    double w = 0.0;  // in-fold n_x / (n_x + n_z)
    double s_sigma_v = 0.0;
    int pc_index = 1;
};

// Memo shared by the test statistics when several of them run on the same
// dataset and fold plan (one Monte Carlo replicate): the per-fold complement
// covariance and its eigendecomposition, sparse/dense PCs, fitted lasso
// coefficients, and oracle nuisance bundles.  A cache instance is used from
// one thread; `shared` may point at a read-only prefilled cache.
struct FoldCache {
    struct Spectral {
        CovarianceEstimate cov;
        EigenPair eig;  // full decomposition
    };
    using SpectralKey = std::tuple<int, bool, double>;             // fold, cov threshold on, c
    using PcKey = std::tuple<int, bool, double, int, Index, bool>; // + pc_index, budget, dense
    using LassoKey = std::tuple<int, std::uint64_t, int, int>;     // fold, seed, cv_folds, grid
    using OracleKey = std::tuple<int, int, double>;                // fold, pc_index, pinv rel_tol

    std::map<SpectralKey, std::shared_ptr<const Spectral>> spectral;
    std::map<PcKey, std::shared_ptr<const Direction>> pc;
    std::map<LassoKey, std::shared_ptr<const Vector>> lasso_beta;
    std::map<OracleKey, std::shared_ptr<const NuisanceFit>> oracle;

    const FoldCache* shared = nullptr;
};

// Complement covariance and full eigendecomposition for one fold, memoized.
std::shared_ptr<const FoldCache::Spectral> spectral_for(
    const Dataset& data, const FoldPlan& plan, int fold,
    const std::optional<double>& cov_offdiag_c, FoldCache* cache);

// The pc_index-th component of the fold's complement covariance (sparse by
// default, dense on request), memoized.  Sign follows the largest-entry
// convention; cross-fold alignment is the caller's concern.
std::shared_ptr<const Direction> pc_for(const Dataset& data, const FoldPlan& plan,
                                        int fold, int pc_index,
                                        const NuisanceOptions& options,
                                        FoldCache* cache);

// Out-of-fold nuisance estimates for the given fold and component index.
NuisanceFit fit_nuisance(const Dataset& data, const FoldPlan& plan, int fold,
                         int pc_index, const NuisanceOptions& options,
                         FoldCache* cache = nullptr);

// Population quantities in place of estimates; w still comes from the
// in-fold sample counts.
NuisanceFit oracle_nuisance(const PopulationSpec& pop, Index n_x_infold,
                            Index n_z_infold, int pc_index, double rel_tol = 1e-8);

double influence_value(const Vector& sample, const NuisanceFit& fit, Group group);

// Same functional form evaluated at the population quantities.  Test oracle.
double true_influence(const Vector& sample, const PopulationSpec& pop, Group group);

}  // namespace hdproj
