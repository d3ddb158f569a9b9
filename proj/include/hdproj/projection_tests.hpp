// ============================================================================
// Cross-fitted two-sample projection tests.  All three statistics share the
// same skeleton: directions (and any other nuisances) are estimated on each
// fold's complement, per-fold projected mean differences and variances are
// computed on the held-out fold, and the fold contributions are pooled into
// a standardized statistic that is asymptotically N(0,1) under the
// projected null.
//
//   plugin    projected mean difference along a provided direction
//   onestep   plugin along the PC, debiased by the eigen-projection
//             influence function, with a matching variance and a 95% CI
//   anchored  plugin along the PC + n^alpha * (L1 logistic coefficients)
//
// Directions estimated per fold are sign-aligned to fold 1's estimate before
// any pooling.  An in-fold projected variance of exactly zero raises
// DegenerateVarianceError.
// ============================================================================

#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hdproj/dataset.hpp"
#include "hdproj/influence.hpp"
#include "hdproj/numeric.hpp"
#include "hdproj/population.hpp"
#include "hdproj/sparse_logistic.hpp"
#include "hdproj/types.hpp"

namespace hdproj {

// Thresholding exponents of the anchored rule; the reference n (smaller
// in-fold group size) is resolved per fold.
struct AnchorExponents {
    double w_exponent = 0.5;
    double r_exponent = 1.0 / 3.0;
    bool r_zero = false;
};

struct TestOptions {
    NuisanceOptions nuisance;
    int pc_index = 1;
    // Population values replace estimates when set (held by pointer so a
    // Monte Carlo run shares one copy across replicates).
    std::shared_ptr<const PopulationSpec> oracle;
    std::uint64_t seed = 0;  // CV substreams for the anchored lasso
    int cv_folds = lasso_defaults::cv_folds;
    int grid_size = lasso_defaults::grid_size;
    AnchorExponents anchor;
};

struct FoldDiagnostic {
    int fold = 0;  // 1-based
    double theta = 0.0;
    Index nonzeros = 0;
};

struct TestResult {
    std::string kind;  // "plugin" | "onestep" | "anchored"
    double statistic = 0.0;
    double std_error = 0.0;
    double p_value = 0.0;
    double theta_hat = 0.0;
    std::optional<std::array<double, 2>> ci_95;  // one-step only
    std::vector<FoldDiagnostic> per_fold;
    Vector mean_direction;
};

// Yields the direction for one fold from that fold's complement.
using DirectionProvider =
    std::function<Direction(const Dataset&, const FoldPlan&, int fold, FoldCache*)>;

DirectionProvider pc_direction_provider(int pc_index, NuisanceOptions options = {});
DirectionProvider fixed_direction_provider(Direction direction);

TestResult t_plugin(const Dataset& data, const FoldPlan& plan,
                    const DirectionProvider& provider, const TestOptions& options = {},
                    FoldCache* cache = nullptr);

TestResult t_onestep(const Dataset& data, const FoldPlan& plan,
                     const TestOptions& options = {}, FoldCache* cache = nullptr);

TestResult t_anchored(const Dataset& data, const FoldPlan& plan,
                      const TestOptions& options = {}, FoldCache* cache = nullptr);

// Two-sided p-value under the standard normal reference.
inline double p_value(double t) { return two_sided_p(t); }

}  // namespace hdproj
