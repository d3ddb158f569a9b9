// ============================================================================
// Data generators and the Monte Carlo engine.
// ============================================================================

#include "hdproj/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include <Eigen/Cholesky>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "hdproj/influence.hpp"
#include "hdproj/numeric.hpp"
#include "hdproj/sparse_logistic.hpp"

namespace hdproj {

namespace {

// Round-robin dealing gives deterministic fold sizes: fold f of n items gets
// every index congruent to f mod m.
Index infold_count(Index n, int m, int fold) {
    return (n - static_cast<Index>(fold) + static_cast<Index>(m) - 1) /
           static_cast<Index>(m);
}

Matrix draw_rows(const MvnSampler& sampler, Index rows, Rng& rng) {
    Matrix out;
    for (Index i = 0; i < rows; ++i) {
        const Vector row = sampler.draw(rng);
        if (i == 0) out.resize(rows, row.size());
        out.row(i) = row.transpose();
    }
    return out;
}

void mask_half(Matrix& values, Rng& rng) {
    for (Index i = 0; i < values.rows(); ++i) {
        for (Index j = 0; j < values.cols(); ++j) {
            if (rng.next_bernoulli_half()) values(i, j) = 0.0;
        }
    }
}

}  // namespace

MvnSampler::MvnSampler(Vector mu, const Matrix& sigma) : mu_(std::move(mu)) {
    if (sigma.rows() != sigma.cols() || sigma.rows() != mu_.size()) {
        throw ValidationError("MvnSampler: sigma must be p x p to match mu");
    }
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success) {
        const double jitter = 1e-10 * sigma.trace() / static_cast<double>(sigma.rows());
        Matrix padded = sigma;
        padded.diagonal().array() += jitter;
        llt.compute(padded);
        if (llt.info() != Eigen::Success) {
            throw NumericalError("MvnSampler: covariance is not positive definite");
        }
    }
    chol_lower_ = llt.matrixL();
}

Vector MvnSampler::draw(Rng& rng) const {
    Vector z(mu_.size());
    for (Index i = 0; i < z.size(); ++i) z[i] = rng.next_normal();
    return mu_ + chol_lower_.triangularView<Eigen::Lower>() * z;
}

SpikedGenerator::SpikedGenerator(Setting setting) {
    const Index p = 100;
    Vector v1 = Vector::Zero(p);
    v1.head(10).setConstant(1.0 / std::sqrt(10.0));

    Vector mu_x = Vector::Zero(p);
    mu_x.head(5).setConstant(2.5);
    mu_x.segment(5, 5).setConstant(-2.5);
    const Vector mu_z = setting == Setting::global_null ? mu_x : Vector(-mu_x);

    Matrix sigma = Matrix::Identity(p, p);
    sigma += 3.0 * v1 * v1.transpose();

    Vector eigvals = Vector::Ones(p);
    eigvals[0] = 4.0;

    population_.label = setting == Setting::global_null ? "spiked-global" : "spiked-projected";
    population_.mu_x = mu_x;
    population_.mu_z = mu_z;
    population_.sigma = sigma;
    population_.eigvals = eigvals;
    population_.v1 = v1;

    sampler_x_ = std::make_unique<MvnSampler>(mu_x, sigma);
    sampler_z_ = std::make_unique<MvnSampler>(mu_z, sigma);
}

Dataset SpikedGenerator::generate(std::uint64_t seed) const {
    Rng rng(seed);
    Dataset data;
    data.x = draw_rows(*sampler_x_, n_x(), rng);
    data.z = draw_rows(*sampler_z_, n_z(), rng);
    return data;
}

ZeroInflatedGenerator::ZeroInflatedGenerator(Setting setting, Index n_per_group)
    : n_(n_per_group) {
    if (n_per_group < 4) {
        throw ValidationError("ZeroInflatedGenerator: need at least 4 samples per group");
    }
    const Index p = 1000;
    Vector v1 = Vector::Zero(p);
    v1.head(20).setConstant(1.0 / std::sqrt(20.0));
    Vector v2 = Vector::Zero(p);
    v2.segment(20, 20).setConstant(1.0 / std::sqrt(20.0));

    Matrix sigma_pre = Matrix::Identity(p, p);
    sigma_pre += 100.0 * v1 * v1.transpose();
    sigma_pre += 50.0 * v2 * v2.transpose();

    Vector mu_x_pre = Vector::Zero(p);
    mu_x_pre.head(20).setConstant(1.0);
    Vector mu_z_pre = mu_x_pre;
    if (setting == Setting::projected_null) {
        mu_z_pre.segment(20, 20).setConstant(5.0);
    } else if (setting == Setting::alternative) {
        mu_z_pre.head(20).setConstant(1.2);
        mu_z_pre.segment(20, 20).setConstant(0.9);
    }

    // Masking halves the means, halves the variances, and quarters the
    // covariances; v1 and v2 stay eigenvectors because the diagonal
    // adjustment is constant on each one's support.
    Matrix sigma = 0.25 * sigma_pre;
    sigma.diagonal() += 0.25 * sigma_pre.diagonal();

    Vector eigvals(p);
    eigvals[0] = 26.75;
    eigvals[1] = 13.625;
    eigvals.segment(2, 19).setConstant(1.75);
    eigvals.segment(21, 19).setConstant(1.125);
    eigvals.tail(960).setConstant(0.5);

    switch (setting) {
        case Setting::global_null: population_.label = "zinf-global"; break;
        case Setting::projected_null: population_.label = "zinf-projected"; break;
        case Setting::alternative: population_.label = "zinf-alternative"; break;
    }
    population_.mu_x = 0.5 * mu_x_pre;
    population_.mu_z = 0.5 * mu_z_pre;
    population_.sigma = sigma;
    population_.eigvals = eigvals;
    population_.v1 = v1;
    population_.v2 = v2;

    sampler_x_ = std::make_unique<MvnSampler>(mu_x_pre, sigma_pre);
    sampler_z_ = std::make_unique<MvnSampler>(mu_z_pre, sigma_pre);
}

Dataset ZeroInflatedGenerator::generate(std::uint64_t seed) const {
    Rng rng(seed);
    Dataset data;
    data.x = draw_rows(*sampler_x_, n_, rng);
    mask_half(data.x, rng);
    data.z = draw_rows(*sampler_z_, n_, rng);
    mask_half(data.z, rng);
    return data;
}

BlockGenerator::BlockGenerator(Index n_x, Index n_z) : n_x_(n_x), n_z_(n_z) {
    if (n_x < 4 || n_z < 4) {
        throw ValidationError("BlockGenerator: need at least 4 samples per group");
    }
    const Index p = 300;
    Matrix sigma = Matrix::Identity(p, p);
    sigma.block(0, 0, 10, 10).setConstant(1.8);
    sigma.block(0, 0, 10, 10).diagonal().setConstant(2.0);
    sigma.block(10, 10, 10, 10).setConstant(0.6);
    sigma.block(10, 10, 10, 10).diagonal().setConstant(1.0);

    Vector mu_x = Vector::Ones(p);
    Vector mu_z = Vector::Ones(p);
    mu_z.segment(10, 10).setConstant(2.0);

    // Compound-symmetry blocks: diag a, off-diag b has eigenvalues a + 9b
    // (uniform vector) and a - b with multiplicity nine.
    Vector eigvals(p);
    eigvals[0] = 2.0 + 9.0 * 1.8;
    eigvals[1] = 1.0 + 9.0 * 0.6;
    eigvals.segment(2, 280).setConstant(1.0);
    eigvals.segment(282, 9).setConstant(2.0 - 1.8);
    eigvals.segment(291, 9).setConstant(1.0 - 0.6);
    std::sort(eigvals.data(), eigvals.data() + p, std::greater<double>());

    Vector v1 = Vector::Zero(p);
    v1.head(10).setConstant(1.0 / std::sqrt(10.0));
    Vector v2 = Vector::Zero(p);
    v2.segment(10, 10).setConstant(1.0 / std::sqrt(10.0));

    population_.label = "blocks";
    population_.mu_x = mu_x;
    population_.mu_z = mu_z;
    population_.sigma = sigma;
    population_.eigvals = eigvals;
    population_.v1 = v1;
    population_.v2 = v2;

    sampler_x_ = std::make_unique<MvnSampler>(mu_x, sigma);
    sampler_z_ = std::make_unique<MvnSampler>(mu_z, sigma);
}

Dataset BlockGenerator::generate(std::uint64_t seed) const {
    Rng rng(seed);
    Dataset data;
    const auto mask_and_floor = [&rng](Matrix& values) {
        for (Index i = 0; i < values.rows(); ++i) {
            for (Index j = 0; j < values.cols(); ++j) {
                if (rng.next_bernoulli_half()) values(i, j) = 0.0;
                if (values(i, j) < 0.5) values(i, j) = 0.0;
            }
        }
    };
    data.x = draw_rows(*sampler_x_, n_x_, rng);
    mask_and_floor(data.x);
    data.z = draw_rows(*sampler_z_, n_z_, rng);
    mask_and_floor(data.z);
    return data;
}

namespace {

constexpr std::uint64_t plan_stream = seed_streams::fold_plan;
constexpr std::uint64_t lasso_stream = seed_streams::lasso;

void check_spec(const TestSpec& spec) {
    if (spec.statistic != "plugin" && spec.statistic != "onestep" &&
        spec.statistic != "anchored") {
        throw ValidationError("monte_carlo: unknown statistic '" + spec.statistic + "'");
    }
    if (spec.fixed_direction && spec.statistic != "plugin") {
        throw ValidationError("monte_carlo: fixed_direction applies to the plugin statistic only");
    }
    if (spec.pc_index < 1) {
        throw ValidationError("monte_carlo: pc_index must be >= 1");
    }
}

TestResult run_spec(const Dataset& data, const FoldPlan& plan, const TestSpec& spec,
                    const std::shared_ptr<const PopulationSpec>& population,
                    std::uint64_t rep_seed, FoldCache* cache) {
    TestOptions options;
    options.nuisance = spec.nuisance;
    options.pc_index = spec.pc_index;
    options.seed = mix64(rep_seed, lasso_stream);
    options.cv_folds = spec.cv_folds;
    options.grid_size = spec.grid_size;
    options.anchor = spec.anchor;
    if (spec.oracle) options.oracle = population;

    if (spec.statistic == "plugin") {
        const DirectionProvider provider =
            spec.fixed_direction
                ? fixed_direction_provider(
                      Direction{*spec.fixed_direction, DirectionOrigin::user, 0})
                : pc_direction_provider(spec.pc_index, spec.nuisance);
        return t_plugin(data, plan, provider, options, cache);
    }
    if (spec.statistic == "onestep") return t_onestep(data, plan, options, cache);
    return t_anchored(data, plan, options, cache);
}

}  // namespace

std::vector<McReport> monte_carlo_multi(const Generator& generator,
                                        const std::vector<TestSpec>& specs,
                                        std::int64_t reps, std::uint64_t base_seed,
                                        double alpha, int workers) {
    if (reps < 1) throw ValidationError("monte_carlo: reps must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("monte_carlo: alpha must lie in (0, 1)");
    }
    if (specs.empty()) throw ValidationError("monte_carlo: at least one test spec required");
    const int m = specs.front().m_folds;
    for (const TestSpec& spec : specs) {
        check_spec(spec);
        if (spec.m_folds != m) {
            throw ValidationError("monte_carlo: specs disagree on m_folds; fold plans are shared");
        }
    }
    make_folds(generator.n_x(), generator.n_z(), m, 0);  // fail fast on bad m

    std::shared_ptr<const PopulationSpec> population;
    FoldCache shared_cache;
    const bool any_oracle =
        std::any_of(specs.begin(), specs.end(), [](const TestSpec& s) { return s.oracle; });
    if (any_oracle) {
        population = std::make_shared<const PopulationSpec>(generator.population());
        std::set<std::pair<int, double>> wanted;
        for (const TestSpec& spec : specs) {
            if (spec.oracle) wanted.insert({spec.pc_index, spec.nuisance.pinv_rel_tol});
        }
        for (const auto& [pc_index, rel_tol] : wanted) {
            for (int fold = 0; fold < m; ++fold) {
                const FoldCache::OracleKey key{fold, pc_index, rel_tol};
                shared_cache.oracle.emplace(
                    key, std::make_shared<const NuisanceFit>(oracle_nuisance(
                             *population, infold_count(generator.n_x(), m, fold),
                             infold_count(generator.n_z(), m, fold), pc_index, rel_tol)));
            }
        }
    }

    const double z_crit = normal_quantile(1.0 - alpha / 2.0);
    const std::size_t arms = specs.size();
    std::vector<std::vector<double>> t_values(arms, std::vector<double>(reps, 0.0));
    std::vector<std::vector<char>> degenerate(arms, std::vector<char>(reps, 0));
    bool failed = false;
    std::string failure;

#ifdef _OPENMP
    const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#else
    (void)workers;
#endif
    for (std::int64_t r = 0; r < reps; ++r) {
        bool skip;
#ifdef _OPENMP
#pragma omp atomic read
#endif
        skip = failed;
        if (skip) continue;
        try {
            const std::uint64_t rep_seed = mix64(base_seed, static_cast<std::uint64_t>(r));
            const Dataset data = generator.generate(rep_seed);
            const FoldPlan plan =
                make_folds(data.n_x(), data.n_z(), m, mix64(rep_seed, plan_stream));
            FoldCache cache;
            cache.shared = &shared_cache;
            for (std::size_t s = 0; s < arms; ++s) {
                try {
                    const TestResult result =
                        run_spec(data, plan, specs[s], population, rep_seed, &cache);
                    t_values[s][static_cast<std::size_t>(r)] = result.statistic;
                } catch (const DegenerateVarianceError&) {
                    degenerate[s][static_cast<std::size_t>(r)] = 1;
                }
            }
        } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical(hdproj_mc_failure)
#endif
            {
                if (!failed) failure = e.what();
#ifdef _OPENMP
#pragma omp atomic write
#endif
                failed = true;
            }
        }
    }
    if (failed) throw NumericalError("monte_carlo: replicate failed: " + failure);

    std::vector<McReport> reports(arms);
    for (std::size_t s = 0; s < arms; ++s) {
        McReport& report = reports[s];
        report.reps = reps;
        report.seed = base_seed;
        for (std::int64_t r = 0; r < reps; ++r) {
            if (degenerate[s][static_cast<std::size_t>(r)] != 0) {
                ++report.degenerate_reps;
                continue;
            }
            const double t = t_values[s][static_cast<std::size_t>(r)];
            report.statistic_samples.push_back(t);
            report.sample_reps.push_back(r);
            if (std::abs(t) > z_crit) ++report.rejections;
        }
        if (report.statistic_samples.empty()) {
            throw NumericalError("monte_carlo: every replicate had degenerate variance");
        }
        report.rejection_rate = static_cast<double>(report.rejections) /
                                static_cast<double>(reps - report.degenerate_reps);
        report.ks_to_normal = ks_distance_to_normal(report.statistic_samples);
    }
    return reports;
}

McReport monte_carlo(const Generator& generator, const TestSpec& spec, std::int64_t reps,
                     std::uint64_t base_seed, double alpha, int workers) {
    return monte_carlo_multi(generator, {spec}, reps, base_seed, alpha, workers).front();
}

McReport monte_carlo_serial(const Generator& generator, const TestSpec& spec,
                            std::int64_t reps, std::uint64_t base_seed, double alpha) {
    if (reps < 1) throw ValidationError("monte_carlo: reps must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("monte_carlo: alpha must lie in (0, 1)");
    }
    check_spec(spec);

    std::shared_ptr<const PopulationSpec> population;
    if (spec.oracle) {
        population = std::make_shared<const PopulationSpec>(generator.population());
    }
    const double z_crit = normal_quantile(1.0 - alpha / 2.0);

    McReport report;
    report.reps = reps;
    report.seed = base_seed;
    for (std::int64_t r = 0; r < reps; ++r) {
        const std::uint64_t rep_seed = mix64(base_seed, static_cast<std::uint64_t>(r));
        const Dataset data = generator.generate(rep_seed);
        const FoldPlan plan =
            make_folds(data.n_x(), data.n_z(), spec.m_folds, mix64(rep_seed, plan_stream));
        FoldCache cache;
        try {
            const TestResult result = run_spec(data, plan, spec, population, rep_seed, &cache);
            report.statistic_samples.push_back(result.statistic);
            report.sample_reps.push_back(r);
            if (std::abs(result.statistic) > z_crit) ++report.rejections;
        } catch (const DegenerateVarianceError&) {
            ++report.degenerate_reps;
        }
    }
    if (report.statistic_samples.empty()) {
        throw NumericalError("monte_carlo: every replicate had degenerate variance");
    }
    report.rejection_rate = static_cast<double>(report.rejections) /
                            static_cast<double>(reps - report.degenerate_reps);
    report.ks_to_normal = ks_distance_to_normal(report.statistic_samples);
    return report;
}

DegeneracyReport degeneracy_demo(std::int64_t reps, std::uint64_t seed, bool alternative,
                                 Index alt_n, int workers) {
    if (reps < 50) throw ValidationError("degeneracy_demo: reps must be >= 50");

    std::unique_ptr<ZeroInflatedGenerator> generator;
    if (alternative) {
        generator = std::make_unique<ZeroInflatedGenerator>(
            ZeroInflatedGenerator::Setting::alternative, alt_n);
    }

    std::vector<char> zero(static_cast<std::size_t>(reps), 0);
    bool failed = false;
    std::string failure;

#ifdef _OPENMP
    const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#else
    (void)workers;
#endif
    for (std::int64_t r = 0; r < reps; ++r) {
        bool skip;
#ifdef _OPENMP
#pragma omp atomic read
#endif
        skip = failed;
        if (skip) continue;
        try {
            const std::uint64_t rep_seed = mix64(seed, static_cast<std::uint64_t>(r));
            Matrix features;
            std::vector<int> labels;
            if (alternative) {
                const Dataset data = generator->generate(rep_seed);
                features.resize(data.n_x() + data.n_z(), data.p());
                features << data.x, data.z;
                labels.assign(static_cast<std::size_t>(data.n_x()), 0);
                labels.insert(labels.end(), static_cast<std::size_t>(data.n_z()), 1);
            } else {
                const Index n_x = 100, n_z = 50, p = 100;
                Rng rng(rep_seed);
                features.resize(n_x + n_z, p);
                for (Index i = 0; i < n_x + n_z; ++i) {
                    for (Index j = 0; j < p; ++j) features(i, j) = rng.next_normal();
                }
                labels.assign(static_cast<std::size_t>(n_x), 0);
                labels.insert(labels.end(), static_cast<std::size_t>(n_z), 1);
            }
            const LassoFit fit =
                fit_logistic_lasso(features, labels, mix64(rep_seed, lasso_stream));
            zero[static_cast<std::size_t>(r)] = fit.nonzero_count() == 0 ? 1 : 0;
        } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical(hdproj_demo_failure)
#endif
            {
                if (!failed) failure = e.what();
#ifdef _OPENMP
#pragma omp atomic write
#endif
                failed = true;
            }
        }
    }
    if (failed) throw NumericalError("degeneracy_demo: replicate failed: " + failure);

    DegeneracyReport report;
    report.reps = reps;
    report.zero_fits = std::count(zero.begin(), zero.end(), static_cast<char>(1));
    report.zero_fraction = static_cast<double>(report.zero_fits) / static_cast<double>(reps);
    return report;
}

}  // namespace hdproj
