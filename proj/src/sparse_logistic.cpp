#include "hdproj/sparse_logistic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hdproj/rng.hpp"

namespace hdproj {

Index LassoFit::nonzero_count() const {
    Index count = 0;
    for (Index j = 0; j < beta.size(); ++j) {
        if (beta(j) != 0.0) ++count;
    }
    return count;
}

namespace {

double sigmoid(double eta) {
    if (eta >= 0.0) {
        return 1.0 / (1.0 + std::exp(-eta));
    }
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

double soft_threshold(double z, double lambda) {
    if (z > lambda) return z - lambda;
    if (z < -lambda) return z + lambda;
    return 0.0;
}

struct Standardized {
    Matrix xs;      // centered, unit population variance (constant columns unscaled)
    Vector center;
    Vector scale;
};

Standardized standardize(const Matrix& features) {
    Standardized s;
    const Index n = features.rows();
    const Index p = features.cols();
    s.center = features.colwise().mean();
    s.scale.resize(p);
    s.xs = features.rowwise() - s.center.transpose();
    for (Index j = 0; j < p; ++j) {
        const double var = s.xs.col(j).squaredNorm() / static_cast<double>(n);
        s.scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
        if (s.scale(j) != 1.0) s.xs.col(j) /= s.scale(j);
    }
    return s;
}

void check_labels(Index n, const std::vector<int>& labels) {
    if (static_cast<Index>(labels.size()) != n) {
        throw ValidationError("lasso: label count " + std::to_string(labels.size()) +
                              " does not match sample count " + std::to_string(n));
    }
    Index ones = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) {
            throw ValidationError("lasso: labels must be 0 or 1");
        }
        ones += y;
    }
    if (ones == 0 || ones == static_cast<Index>(n)) {
        throw ValidationError("lasso: both classes must be present");
    }
}

// Coordinate descent state on the standardized problem.  prob, residual,
// and weight are functions of eta and are refreshed whenever eta moves, so
// coordinate scans never re-evaluate the logistic function.
struct CdState {
    double intercept = 0.0;
    Vector beta;          // standardized scale
    Vector eta;           // intercept + xs * beta, kept incrementally
    Vector prob;          // sigmoid(eta)
    Vector residual;      // prob - y
    Vector weight;        // prob * (1 - prob)
};

void refresh_probs(const std::vector<int>& y, CdState& state) {
    const Index n = state.eta.size();
    for (Index i = 0; i < n; ++i) {
        const double p = sigmoid(state.eta(i));
        state.prob(i) = p;
        state.residual(i) = p - y[static_cast<std::size_t>(i)];
        state.weight(i) = p * (1.0 - p);
    }
}

// One coordinate-descent pass over the quadratic approximation at the
// current linearization point: frozen per-sample weights w, working
// residual r, and wres = w .* r maintained together.  An inactive
// coordinate whose gradient sits inside the penalty cannot move, so only
// one dot product is spent on it.  Returns the largest coefficient change.
double sweep_wls(const Matrix& xs, double lambda, const std::vector<Index>& coords,
                 const Vector& w, double w_total, Vector& r, Vector& wres,
                 CdState& state) {
    const Index n = xs.rows();
    const double dn = static_cast<double>(n);
    double max_change = 0.0;

    const double d0 = wres.sum() / w_total;
    if (d0 != 0.0) {
        state.intercept += d0;
        r.array() -= d0;
        wres -= d0 * w;
        max_change = std::abs(d0);
    }

    for (Index j : coords) {
        const auto col = xs.col(j);
        const double old = state.beta(j);
        const double dot = col.dot(wres) / dn;
        if (old == 0.0 && std::abs(dot) <= lambda) continue;
        const double h = std::max(col.cwiseAbs2().dot(w) / dn, 1e-10);
        const double updated = soft_threshold(h * old + dot, lambda) / h;
        const double delta = updated - old;
        if (delta != 0.0) {
            state.beta(j) = updated;
            r -= delta * col;
            wres -= delta * w.cwiseProduct(col);
            max_change = std::max(max_change, std::abs(delta));
        }
    }
    return max_change;
}

// Solves one penalty from a warm start: outer loop re-linearizes the
// logistic loss at the current fit, inner loop runs coordinate descent on
// that quadratic, iterating the active set to convergence between full
// passes.  Every sweep counts against the per-penalty cycle cap.
void solve_at(const Matrix& xs, const std::vector<int>& y, double lambda,
              CdState& state) {
    const Index n = xs.rows();
    const Index p = xs.cols();
    std::vector<Index> all(static_cast<std::size_t>(p));
    std::iota(all.begin(), all.end(), 0);

    Vector w(n), r(n), wres(n);
    int cycles = 0;
    while (cycles < lasso_defaults::max_cycles) {
        // Linearize: wres starts as y - prob, the downhill gradient
        // direction, and r as its weighted counterpart.
        for (Index i = 0; i < n; ++i) {
            w(i) = std::max(state.weight(i), 1e-5);
            wres(i) = -state.residual(i);
            r(i) = wres(i) / w(i);
        }
        const double w_total = w.sum();
        const Vector r_start = r;

        double outer_change = 0.0;
        while (cycles < lasso_defaults::max_cycles) {
            ++cycles;
            const double full_change =
                sweep_wls(xs, lambda, all, w, w_total, r, wres, state);
            outer_change = std::max(outer_change, full_change);
            if (full_change < lasso_defaults::coef_tol) break;

            std::vector<Index> active;
            for (Index j = 0; j < p; ++j) {
                if (state.beta(j) != 0.0) active.push_back(j);
            }
            while (cycles < lasso_defaults::max_cycles) {
                ++cycles;
                const double change =
                    sweep_wls(xs, lambda, active, w, w_total, r, wres, state);
                outer_change = std::max(outer_change, change);
                if (change < lasso_defaults::coef_tol) break;
            }
        }

        state.eta += r_start - r;
        refresh_probs(y, state);
        if (outer_change < lasso_defaults::coef_tol) return;
    }
}

double initial_intercept(const std::vector<int>& y) {
    double ybar = 0.0;
    for (int v : y) ybar += v;
    ybar /= static_cast<double>(y.size());
    return std::log(ybar / (1.0 - ybar));
}

// lambda_max evaluated through the same arithmetic the solver uses for its
// initial gradient, so soft-thresholding at lambda >= lambda_max keeps every
// coefficient at exactly zero.  The small headroom factor absorbs the
// rounding drift from the solver polishing the intercept before its first
// coordinate pass.
double lambda_max_standardized(const Matrix& xs, const std::vector<int>& y) {
    const Index n = xs.rows();
    const double p0 = sigmoid(initial_intercept(y));
    Vector residual(n);
    for (Index i = 0; i < n; ++i) residual(i) = p0 - y[static_cast<std::size_t>(i)];
    double best = 0.0;
    for (Index j = 0; j < xs.cols(); ++j) {
        best = std::max(best, std::abs(xs.col(j).dot(residual)) / static_cast<double>(n));
    }
    return best * (1.0 + 1e-12);
}

// Training deviance straight from the cached probabilities.
double deviance_of_state(const std::vector<int>& y, const CdState& state) {
    double total = 0.0;
    for (Index i = 0; i < state.prob.size(); ++i) {
        const double prob = std::clamp(state.prob(i), 1e-12, 1.0 - 1e-12);
        const double yy = static_cast<double>(y[static_cast<std::size_t>(i)]);
        total += -2.0 * (yy * std::log(prob) + (1.0 - yy) * std::log(1.0 - prob));
    }
    return total / static_cast<double>(state.prob.size());
}

// Warm-started path over a descending grid.  With stop_when_saturated the
// path ends early once the training deviance is nearly exhausted (below
// 0.1% of the null deviance), or stops improving between grid points, or
// the active set has grown to half the sample size; past any of those
// points smaller penalties only interpolate toward a separating fit and
// cross-validation has nothing left to distinguish.  The returned vector
// may then be shorter than the grid.
std::vector<CdState> path_standardized(const Matrix& xs, const std::vector<int>& y,
                                       const Vector& grid, bool stop_when_saturated) {
    CdState state;
    state.beta = Vector::Zero(xs.cols());
    state.intercept = initial_intercept(y);
    state.eta = Vector::Constant(xs.rows(), state.intercept);
    state.prob.resize(xs.rows());
    state.residual.resize(xs.rows());
    state.weight.resize(xs.rows());
    refresh_probs(y, state);

    std::vector<CdState> fits;
    fits.reserve(static_cast<std::size_t>(grid.size()));
    const Index df_cap = std::max<Index>(50, xs.rows() / 2);
    double null_dev = 0.0;
    double prev_dev = 0.0;
    for (Index g = 0; g < grid.size(); ++g) {
        solve_at(xs, y, grid(g), state);
        fits.push_back(state);
        if (!stop_when_saturated) continue;
        const double dev = deviance_of_state(y, state);
        if (g > 0 && (dev <= 1e-3 * null_dev || prev_dev - dev < 1e-5 * null_dev)) {
            break;
        }
        if (g == 0) null_dev = dev;
        prev_dev = dev;
        Index nnz = 0;
        for (Index j = 0; j < state.beta.size(); ++j) {
            if (state.beta(j) != 0.0) ++nnz;
        }
        if (nnz > df_cap) break;
    }
    return fits;
}

double mean_deviance(const Matrix& xs, const std::vector<int>& y, const CdState& fit,
                     const std::vector<Index>& rows) {
    double total = 0.0;
    for (Index i : rows) {
        const double eta = fit.intercept + xs.row(i).dot(fit.beta);
        double prob = sigmoid(eta);
        prob = std::clamp(prob, 1e-12, 1.0 - 1e-12);
        const double yy = static_cast<double>(y[static_cast<std::size_t>(i)]);
        total += -2.0 * (yy * std::log(prob) + (1.0 - yy) * std::log(1.0 - prob));
    }
    return total / static_cast<double>(rows.size());
}

double kkt_residual_at(const Matrix& xs, const std::vector<int>& y, const CdState& fit,
                       double lambda) {
    const Index n = xs.rows();
    Vector residual(n);
    for (Index i = 0; i < n; ++i) {
        residual(i) = sigmoid(fit.eta(i)) - y[static_cast<std::size_t>(i)];
    }
    residual /= static_cast<double>(n);
    double worst = std::abs(residual.sum());  // unpenalized intercept
    for (Index j = 0; j < xs.cols(); ++j) {
        const double g = xs.col(j).dot(residual);
        if (fit.beta(j) != 0.0) {
            worst = std::max(worst, std::abs(g + lambda * (fit.beta(j) > 0.0 ? 1.0 : -1.0)));
        } else {
            worst = std::max(worst, std::abs(g) - lambda);
        }
    }
    return worst;
}

LassoFit to_original_scale(const Standardized& s, const CdState& fit) {
    LassoFit out;
    out.beta = fit.beta.cwiseQuotient(s.scale);
    out.intercept = fit.intercept - out.beta.dot(s.center);
    return out;
}

// Shuffle + round-robin within each class.
std::vector<int> cv_assignment(const std::vector<int>& labels, int folds, std::uint64_t seed) {
    std::vector<int> fold_of(labels.size());
    for (int cls = 0; cls <= 1; ++cls) {
        std::vector<std::int64_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == cls) members.push_back(static_cast<std::int64_t>(i));
        }
        Rng rng(mix64(seed, 100 + static_cast<std::uint64_t>(cls)));
        rng.shuffle(members);
        for (std::size_t r = 0; r < members.size(); ++r) {
            fold_of[static_cast<std::size_t>(members[r])] = static_cast<int>(r % static_cast<std::size_t>(folds));
        }
    }
    return fold_of;
}

}  // namespace

double lasso_lambda_max(const Matrix& features, const std::vector<int>& labels) {
    check_labels(features.rows(), labels);
    return lambda_max_standardized(standardize(features).xs, labels);
}

Vector lasso_grid(double lambda_max, int grid_size) {
    if (grid_size < 1) {
        throw ValidationError("lasso_grid: grid_size must be at least 1");
    }
    if (!(lambda_max > 0.0)) {
        throw ValidationError("lasso_grid: lambda_max must be positive");
    }
    Vector grid(grid_size);
    if (grid_size == 1) {
        grid(0) = lambda_max;
        return grid;
    }
    for (int g = 0; g < grid_size; ++g) {
        grid(g) = lambda_max * std::pow(lasso_defaults::grid_floor,
                                        static_cast<double>(g) / static_cast<double>(grid_size - 1));
    }
    return grid;
}

std::vector<LassoFit> lasso_path(const Matrix& features, const std::vector<int>& labels,
                                 const Vector& grid) {
    check_labels(features.rows(), labels);
    for (Index g = 0; g + 1 < grid.size(); ++g) {
        if (!(grid(g) >= grid(g + 1))) {
            throw ValidationError("lasso_path: grid must be non-increasing");
        }
    }
    if (grid.size() < 1 || !(grid(grid.size() - 1) > 0.0)) {
        throw ValidationError("lasso_path: grid must be non-empty and positive");
    }
    const Standardized s = standardize(features);
    const std::vector<CdState> states = path_standardized(s.xs, labels, grid, false);
    std::vector<LassoFit> fits;
    fits.reserve(states.size());
    for (Index g = 0; g < grid.size(); ++g) {
        LassoFit fit = to_original_scale(s, states[static_cast<std::size_t>(g)]);
        fit.lambda = grid(g);
        fit.lambda_grid = grid;
        fit.kkt_residual = kkt_residual_at(s.xs, labels, states[static_cast<std::size_t>(g)], grid(g));
        fits.push_back(std::move(fit));
    }
    return fits;
}

LassoFit fit_logistic_lasso(const Matrix& features, const std::vector<int>& labels,
                            std::uint64_t seed, int cv_folds, int grid_size) {
    const Index n = features.rows();
    check_labels(n, labels);
    if (cv_folds < 2) {
        throw ValidationError("lasso: cv_folds must be at least 2");
    }
    if (n < 2 * static_cast<Index>(cv_folds)) {
        throw ValidationError("lasso: need n >= 2 * cv_folds, got n = " + std::to_string(n) +
                              ", cv_folds = " + std::to_string(cv_folds));
    }

    const Standardized s = standardize(features);
    const double lambda_max = lambda_max_standardized(s.xs, labels);
    if (!(lambda_max > 0.0)) {
        throw ValidationError("lasso: lambda_max is zero; features carry no marginal signal");
    }
    const Vector grid = lasso_grid(lambda_max, grid_size);

    const std::vector<int> fold_of = cv_assignment(labels, cv_folds, seed);
    Vector cv_dev = Vector::Zero(grid.size());
    Index usable = grid.size();  // grid prefix every training fold computed
    for (int f = 0; f < cv_folds; ++f) {
        std::vector<Index> train_rows, val_rows;
        for (Index i = 0; i < n; ++i) {
            (fold_of[static_cast<std::size_t>(i)] == f ? val_rows : train_rows).push_back(i);
        }
        Matrix train_x(static_cast<Index>(train_rows.size()), features.cols());
        std::vector<int> train_y(train_rows.size());
        for (std::size_t i = 0; i < train_rows.size(); ++i) {
            train_x.row(static_cast<Index>(i)) = s.xs.row(train_rows[i]);
            train_y[i] = labels[static_cast<std::size_t>(train_rows[i])];
        }
        Index ones = 0;
        for (int y : train_y) ones += y;
        if (ones == 0 || ones == static_cast<Index>(train_y.size())) {
            throw ValidationError("lasso: CV training fold " + std::to_string(f) +
                                  " lost a class; reduce cv_folds");
        }
        const std::vector<CdState> fits = path_standardized(train_x, train_y, grid, true);
        usable = std::min(usable, static_cast<Index>(fits.size()));
        for (Index g = 0; g < static_cast<Index>(fits.size()); ++g) {
            cv_dev(g) += mean_deviance(s.xs, labels, fits[static_cast<std::size_t>(g)], val_rows);
        }
    }
    const Vector cv_mean = cv_dev.head(usable) / static_cast<double>(cv_folds);

    // Grid descends, so the first minimizer is the largest such penalty.
    Index selected = 0;
    for (Index g = 1; g < usable; ++g) {
        if (cv_mean(g) < cv_mean(selected)) selected = g;
    }

    // Full-data refit only needs the path down to the selected penalty.
    const Vector refit_grid = grid.head(selected + 1);
    const std::vector<CdState> full = path_standardized(s.xs, labels, refit_grid, false);
    LassoFit fit = to_original_scale(s, full.back());
    fit.lambda = grid(selected);
    fit.lambda_grid = grid.head(usable);
    fit.cv_deviance = cv_mean;
    fit.kkt_residual = kkt_residual_at(s.xs, labels, full.back(), grid(selected));
    fit.path_nonzeros.reserve(full.size());
    for (const CdState& state : full) {
        Index count = 0;
        for (Index j = 0; j < state.beta.size(); ++j) {
            if (state.beta(j) != 0.0) ++count;
        }
        fit.path_nonzeros.push_back(count);
    }
    return fit;
}

Vector anchored_direction(const Vector& v, const Vector& beta, const AnchorConfig& config) {
    if (v.size() != beta.size()) {
        throw ValidationError("anchored_direction: dimension mismatch");
    }
    if (!(config.w_exponent > 0.0 && config.w_exponent <= 0.5)) {
        throw ValidationError("anchored_direction: w_exponent must lie in (0, 1/2]");
    }
    if (!config.r_zero && !(config.r_exponent > 0.0)) {
        throw ValidationError("anchored_direction: r_exponent must be positive");
    }
    if (config.n_reference < 1) {
        throw ValidationError("anchored_direction: n_reference must be at least 1");
    }
    const double n = static_cast<double>(config.n_reference);
    const double r_n = config.r_zero ? 0.0 : std::pow(n, -config.r_exponent);
    if (beta.norm() >= r_n) {
        return v + std::pow(n, config.w_exponent) * beta;
    }
    return v;
}

}  // namespace hdproj
