#include "hdproj/influence.hpp"

#include <cmath>
#include <string>

#include "hdproj/sparse_pca.hpp"

namespace hdproj {

namespace {

// Looks a key up in the per-call cache, then in the read-only shared cache.
template <typename MapMember, typename Key>
auto cache_find(FoldCache* cache, MapMember member, const Key& key)
    -> typename std::remove_reference_t<decltype(cache->*member)>::mapped_type {
    if (cache == nullptr) return nullptr;
    if (auto it = (cache->*member).find(key); it != (cache->*member).end()) {
        return it->second;
    }
    if (cache->shared != nullptr) {
        const auto& shared_map = cache->shared->*member;
        if (auto it = shared_map.find(key); it != shared_map.end()) {
            return it->second;
        }
    }
    return nullptr;
}

void check_fold(const Dataset& data, const FoldPlan& plan, int fold) {
    data.validate();
    if (plan.m < 2 ||
        static_cast<Index>(plan.x_fold.size()) != data.n_x() ||
        static_cast<Index>(plan.z_fold.size()) != data.n_z()) {
        throw ValidationError("fold plan does not match the dataset");
    }
    if (fold < 0 || fold >= plan.m) {
        throw ValidationError("fold index " + std::to_string(fold) + " out of range for m = " +
                              std::to_string(plan.m));
    }
}

void orient_largest_entry_positive(Vector& v) {
    Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
}

}  // namespace

std::shared_ptr<const FoldCache::Spectral> spectral_for(
    const Dataset& data, const FoldPlan& plan, int fold,
    const std::optional<double>& cov_offdiag_c, FoldCache* cache) {
    check_fold(data, plan, fold);
    const FoldCache::SpectralKey key{fold, cov_offdiag_c.has_value(),
                                     cov_offdiag_c.value_or(0.0)};
    if (auto hit = cache_find(cache, &FoldCache::spectral, key)) return hit;

    auto entry = std::make_shared<FoldCache::Spectral>();
    const Matrix x_out = rows_at(data.x, plan.x_out(fold));
    const Matrix z_out = rows_at(data.z, plan.z_out(fold));
    entry->cov = pooled_covariance(x_out, z_out, cov_offdiag_c);
    entry->eig = top_eigen(entry->cov.sigma, entry->cov.sigma.rows());
    if (cache != nullptr) cache->spectral.emplace(key, entry);
    return entry;
}

std::shared_ptr<const Direction> pc_for(const Dataset& data, const FoldPlan& plan,
                                        int fold, int pc_index,
                                        const NuisanceOptions& options,
                                        FoldCache* cache) {
    if (pc_index < 1 || static_cast<Index>(pc_index) > data.p()) {
        throw ValidationError("pc_for: component index " + std::to_string(pc_index) +
                              " out of range for p = " + std::to_string(data.p()));
    }
    const Index budget =
        options.sparsity_budget == 0 ? default_budget(data.p()) : options.sparsity_budget;
    const FoldCache::PcKey key{fold, options.cov_offdiag_c.has_value(),
                               options.cov_offdiag_c.value_or(0.0), pc_index, budget,
                               options.dense_pc};
    if (auto hit = cache_find(cache, &FoldCache::pc, key)) return hit;

    const auto spectral = spectral_for(data, plan, fold, options.cov_offdiag_c, cache);
    auto dir = std::make_shared<Direction>();
    if (options.dense_pc) {
        Vector v = spectral->eig.vectors.col(pc_index - 1);
        orient_largest_entry_positive(v);
        dir->weights = std::move(v);
        dir->origin = DirectionOrigin::pc;
        dir->pc_index = pc_index;
    } else {
        SparsePcaConfig cfg;
        cfg.n_components = pc_index;
        cfg.budget = budget;
        const Vector leading = spectral->eig.vectors.col(0);
        SparsePcaResult result = sparse_pc(spectral->cov.sigma, cfg, &leading);
        *dir = std::move(result.components[static_cast<std::size_t>(pc_index - 1)]);
    }
    if (cache != nullptr) cache->pc.emplace(key, dir);
    return dir;
}

namespace {

// Assembles s and the precomputed scalar; shared by the estimated and
// oracle paths.
void finish_fit(NuisanceFit& fit, const EigenPair& eig, double rel_tol) {
    const Vector mu_diff = fit.mu_x - fit.mu_z;
    if (mu_diff.isZero(0.0)) {
        fit.s = Vector::Zero(mu_diff.size());
        fit.s_sigma_v = 0.0;
        return;
    }
    fit.s = apply_pinv_shifted(fit.lambda, eig, static_cast<Index>(fit.pc_index - 1),
                               rel_tol, mu_diff);
    fit.s_sigma_v = fit.s.dot(fit.sigma.sigma.selfadjointView<Eigen::Lower>() * fit.v.weights);
}

}  // namespace

NuisanceFit fit_nuisance(const Dataset& data, const FoldPlan& plan, int fold,
                         int pc_index, const NuisanceOptions& options,
                         FoldCache* cache) {
    check_fold(data, plan, fold);
    const auto spectral = spectral_for(data, plan, fold, options.cov_offdiag_c, cache);
    const auto component = pc_for(data, plan, fold, pc_index, options, cache);

    const Matrix x_out = rows_at(data.x, plan.x_out(fold));
    const Matrix z_out = rows_at(data.z, plan.z_out(fold));

    NuisanceFit fit;
    fit.pc_index = pc_index;
    if (options.threshold_means) {
        fit.mu_x = thresholded_mean(x_out, options.threshold_c);
        fit.mu_z = thresholded_mean(z_out, options.threshold_c);
    } else {
        fit.mu_x = sample_mean(x_out);
        fit.mu_z = sample_mean(z_out);
    }
    fit.sigma = spectral->cov;
    fit.lambda = spectral->eig.values(pc_index - 1);
    fit.v = *component;
    const double n_x_in = static_cast<double>(plan.x_in(fold).size());
    const double n_z_in = static_cast<double>(plan.z_in(fold).size());
    fit.w = n_x_in / (n_x_in + n_z_in);
    finish_fit(fit, spectral->eig, options.pinv_rel_tol);
    return fit;
}

NuisanceFit oracle_nuisance(const PopulationSpec& pop, Index n_x_infold,
                            Index n_z_infold, int pc_index, double rel_tol) {
    pop.validate();
    if (n_x_infold < 1 || n_z_infold < 1) {
        throw ValidationError("oracle_nuisance: in-fold counts must be positive");
    }
    NuisanceFit fit;
    fit.pc_index = pc_index;
    fit.mu_x = pop.mu_x;
    fit.mu_z = pop.mu_z;
    fit.sigma = CovarianceEstimate{pop.sigma, 0};
    auto [lambda, v] = population_component(pop, pc_index);
    fit.lambda = lambda;
    fit.v.weights = std::move(v);
    fit.v.origin = DirectionOrigin::pc;
    fit.v.pc_index = pc_index;
    fit.w = static_cast<double>(n_x_infold) /
            static_cast<double>(n_x_infold + n_z_infold);
    if ((fit.mu_x - fit.mu_z).isZero(0.0)) {
        fit.s = Vector::Zero(pop.p());
        fit.s_sigma_v = 0.0;
    } else {
        finish_fit(fit, top_eigen(pop.sigma, pop.p()), rel_tol);
    }
    return fit;
}

double influence_value(const Vector& sample, const NuisanceFit& fit, Group group) {
    const Vector& mu = group == Group::x ? fit.mu_x : fit.mu_z;
    if (sample.size() != mu.size()) {
        throw ValidationError("influence_value: sample dimension mismatch");
    }
    const Vector centered = sample - mu;
    return fit.s.dot(centered) * centered.dot(fit.v.weights) - fit.s_sigma_v;
}

double true_influence(const Vector& sample, const PopulationSpec& pop, Group group) {
    const NuisanceFit fit = oracle_nuisance(pop, 1, 1, 1);
    return influence_value(sample, fit, group);
}

}  // namespace hdproj
