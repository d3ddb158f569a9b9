// ============================================================================
// L1-penalized logistic regression via cyclic coordinate descent, with
// cross-validated penalty selection, plus the anchored direction rule that
// blends a principal component with the fitted classifier.
//
// The solver standardizes columns internally (centered, unit population
// variance; constant columns are left unscaled).  The penalty, the grid, and
// the reported KKT residual all live on that standardized problem; returned
// coefficients are mapped back to the original scale.
// ============================================================================

#pragma once

#include <cstdint>
#include <vector>

#include "hdproj/types.hpp"

namespace hdproj {

namespace lasso_defaults {
constexpr int grid_size = 50;
constexpr double grid_floor = 0.01;  // smallest lambda as a fraction of lambda_max
constexpr int cv_folds = 5;
constexpr double coef_tol = 1e-7;    // max coefficient change per sweep
constexpr int max_cycles = 10000;
}  // namespace lasso_defaults

struct LassoFit {
    double intercept = 0.0;  // original scale
    Vector beta;             // original scale
    double lambda = 0.0;     // selected penalty
    Vector lambda_grid;      // descending; the grid prefix CV actually evaluated
    std::vector<Index> path_nonzeros;  // full-data path down to the selected penalty
    Vector cv_deviance;                // mean validation deviance per lambda_grid entry
    double kkt_residual = 0.0;         // standardized problem, at the selected fit

    Index nonzero_count() const;
};

// Largest penalty with an all-zero solution: max_j |<x_j, y - ybar>| / n on
// the standardized columns (evaluated through the solver's own initial
// gradient so the all-zero property holds exactly, not just in theory).
double lasso_lambda_max(const Matrix& features, const std::vector<int>& labels);

// grid_size log-spaced values from lambda_max down to grid_floor*lambda_max.
Vector lasso_grid(double lambda_max, int grid_size);

// Labels are 0/1; both classes must be present and n >= 2*cv_folds.  CV fold
// assignment is a seeded shuffle + round-robin within each class, so every
// validation fold sees both classes whenever each class has >= cv_folds
// members.  Each training path stops once its deviance saturates (the usual
// lasso-path convention; with p >> n the tail of the grid just interpolates
// toward a separating fit), and CV compares the grid prefix that every fold
// reached.  The penalty minimizing mean validation deviance is selected
// (ties go to the larger penalty) and the returned fit is the warm-started
// full-data solution at that penalty.
LassoFit fit_logistic_lasso(const Matrix& features, const std::vector<int>& labels,
                            std::uint64_t seed,
                            int cv_folds = lasso_defaults::cv_folds,
                            int grid_size = lasso_defaults::grid_size);

// Full-data coefficient path over an explicit descending grid, original
// scale.  Exposed for property checks on the path itself.
std::vector<LassoFit> lasso_path(const Matrix& features, const std::vector<int>& labels,
                                 const Vector& grid);

struct AnchorConfig {
    double w_exponent = 0.5;         // alpha in (0, 1/2]; classifier weight is n^alpha
    double r_exponent = 1.0 / 3.0;   // gamma > 0; inclusion threshold is n^-gamma
    bool r_zero = false;             // force the threshold to 0 (always include beta)
    Index n_reference = 0;           // the n the rates are evaluated at
};

// v + n^alpha * beta when ||beta|| >= n^-gamma, otherwise v alone.
Vector anchored_direction(const Vector& v, const Vector& beta, const AnchorConfig& config);

}  // namespace hdproj
