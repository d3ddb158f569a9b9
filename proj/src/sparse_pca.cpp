#include "hdproj/sparse_pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace hdproj {

Index default_budget(Index p) {
    return static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(p))));
}

namespace {

// Keeps the `budget` largest-magnitude entries of v and zeroes the rest.
// Ties at the cutoff magnitude are resolved toward lower indices so the
// result does not depend on the sort implementation.
void truncate_to_budget(Vector& v, Index budget) {
    const Index p = v.size();
    if (budget >= p) return;
    std::vector<Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return std::abs(v(a)) > std::abs(v(b));
    });
    for (Index r = budget; r < p; ++r) v(order[static_cast<std::size_t>(r)]) = 0.0;
}

void orient_largest_entry_positive(Vector& v) {
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > best) {
            best = std::abs(v(i));
            arg = i;
        }
    }
    if (v(arg) < 0.0) v = -v;
}

}  // namespace

SparsePcaResult sparse_pc(const Matrix& sigma, const SparsePcaConfig& config,
                          const Vector* leading) {
    const Index p = sigma.rows();
    if (sigma.cols() != p) {
        throw ValidationError("sparse_pc: matrix is not square");
    }
    const Index budget = config.budget == 0 ? default_budget(p) : config.budget;
    if (budget < 1) {
        throw ValidationError("sparse_pc: budget must be at least 1, got " +
                              std::to_string(config.budget));
    }
    if (config.n_components < 1 || static_cast<Index>(config.n_components) > p) {
        throw ValidationError("sparse_pc: n_components = " + std::to_string(config.n_components) +
                              " out of range for p = " + std::to_string(p));
    }
    if (config.max_iter < 1 || !(config.conv_tol > 0.0)) {
        throw ValidationError("sparse_pc: max_iter must be >= 1 and conv_tol > 0");
    }
    if (sigma.cwiseAbs().maxCoeff() == 0.0) {
        throw ValidationError("sparse_pc: all-zero matrix has no principal direction");
    }

    SparsePcaResult result;
    result.eigenvalues.resize(config.n_components);
    Matrix deflated = sigma;
    for (int comp = 0; comp < config.n_components; ++comp) {
        Vector v;
        if (comp == 0 && leading != nullptr) {
            v = *leading;
        } else {
            v = top_eigen(deflated, 1).vectors.col(0);
        }
        truncate_to_budget(v, budget);
        double norm = v.norm();
        if (norm == 0.0) {
            throw NumericalError("sparse_pc: initializer truncated to zero");
        }
        v /= norm;

        for (int iter = 0; iter < config.max_iter; ++iter) {
            Vector next = deflated * v;
            truncate_to_budget(next, budget);
            norm = next.norm();
            if (norm == 0.0) {
                throw NumericalError("sparse_pc: iterate collapsed to zero at component " +
                                     std::to_string(comp + 1));
            }
            next /= norm;
            const double step = (next - v).norm();
            v = std::move(next);
            if (step <= config.conv_tol) break;
        }

        orient_largest_entry_positive(v);
        const double rayleigh = v.dot(sigma * v);
        result.eigenvalues(comp) = rayleigh;
        Direction dir;
        dir.weights = v;
        dir.origin = DirectionOrigin::pc;
        dir.pc_index = comp + 1;
        result.components.push_back(std::move(dir));
        if (comp + 1 < config.n_components) {
            deflated.noalias() -= rayleigh * v * v.transpose();
        }
    }
    return result;
}

Index choose_budget(const Matrix& sigma, const std::vector<Index>& candidates) {
    if (candidates.empty()) {
        throw ValidationError("choose_budget: no candidate budgets");
    }
    std::vector<Index> sorted = candidates;
    std::sort(sorted.begin(), sorted.end());
    const double p = static_cast<double>(sigma.rows());
    const EigenPair top = top_eigen(sigma, 1);
    const double lambda1 = top.values(0);
    const Vector init = top.vectors.col(0);

    Index best_budget = sorted.front();
    double best_score = -std::numeric_limits<double>::infinity();
    for (Index s : sorted) {
        SparsePcaConfig cfg;
        cfg.budget = s;
        const SparsePcaResult r = sparse_pc(sigma, cfg, &init);
        const double score = r.eigenvalues(0) - lambda1 * static_cast<double>(s) / p;
        if (score > best_score) {
            best_score = score;
            best_budget = s;
        }
    }
    return best_budget;
}

}  // namespace hdproj
