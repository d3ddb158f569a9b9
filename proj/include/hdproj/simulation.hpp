// ============================================================================
// Synthetic data generators with known population structure, and the Monte
// Carlo engine that calibrates the test statistics against them.
//
// Replicates are independent: replicate r derives its seed as
// mix64(base_seed, r), so results are identical for any worker count and
// replicates can run concurrently.  monte_carlo runs them under OpenMP;
// monte_carlo_serial is the plain-loop reference implementation kept for
// testing the parallel path against.
// ============================================================================

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hdproj/dataset.hpp"
#include "hdproj/population.hpp"
#include "hdproj/projection_tests.hpp"
#include "hdproj/rng.hpp"
#include "hdproj/types.hpp"

namespace hdproj {

// Per-replicate substreams: a replicate seed fans out into independent
// streams for the fold plan and the classifier CV splits.
namespace seed_streams {
inline constexpr std::uint64_t fold_plan = 0xF01D;
inline constexpr std::uint64_t lasso = 0x1A55;
}  // namespace seed_streams

class Generator {
public:
    virtual ~Generator() = default;
    virtual Dataset generate(std::uint64_t seed) const = 0;
    virtual const PopulationSpec& population() const = 0;
    virtual Index n_x() const = 0;
    virtual Index n_z() const = 0;
};

// Multivariate normal sampling shared by the generators: mu + L z with L the
// Cholesky factor of sigma.  If the factorization fails, a jitter of
// 1e-10 * trace(sigma)/p is added to the diagonal once before giving up.
class MvnSampler {
public:
    MvnSampler(Vector mu, const Matrix& sigma);
    Vector draw(Rng& rng) const;

private:
    Vector mu_;
    Matrix chol_lower_;
};

// p = 100, N_X = 500, N_Z = 250, sigma = 3 v1 v1' + I with v1 uniform on the
// first ten coordinates.  mu_x loads +-2.5 on those coordinates; under the
// projected null mu_z flips its sign, which separates the means while keeping
// mu_x - mu_z orthogonal to v1.
class SpikedGenerator : public Generator {
public:
    enum class Setting { global_null, projected_null };
    explicit SpikedGenerator(Setting setting);

    Dataset generate(std::uint64_t seed) const override;
    const PopulationSpec& population() const override { return population_; }
    Index n_x() const override { return 500; }
    Index n_z() const override { return 250; }

private:
    PopulationSpec population_;
    std::unique_ptr<MvnSampler> sampler_x_;
    std::unique_ptr<MvnSampler> sampler_z_;
};

// p = 1000 zero-inflated data: normal pre-values from a two-spike covariance
// (100 on v1, 50 on v2, each supported on twenty coordinates), then each
// entry is zeroed independently with probability 1/2.  The population()
// moments describe the post-masking distribution with its analytic spectrum.
class ZeroInflatedGenerator : public Generator {
public:
    enum class Setting { global_null, projected_null, alternative };
    ZeroInflatedGenerator(Setting setting, Index n_per_group);

    Dataset generate(std::uint64_t seed) const override;
    const PopulationSpec& population() const override { return population_; }
    Index n_x() const override { return n_; }
    Index n_z() const override { return n_; }

private:
    Index n_;
    PopulationSpec population_;  // post-masking moments
    std::unique_ptr<MvnSampler> sampler_x_;
    std::unique_ptr<MvnSampler> sampler_z_;
};

// p = 300 block-covariance data (two 10-dim correlated blocks, identity
// elsewhere); the group mean shift sits on the second block.  After the
// normal draw, entries are masked to zero with probability 1/2 and every
// remaining value below 0.5 is zeroed as well.  population() describes the
// pre-masking normal law.
class BlockGenerator : public Generator {
public:
    BlockGenerator(Index n_x, Index n_z);

    Dataset generate(std::uint64_t seed) const override;
    const PopulationSpec& population() const override { return population_; }
    Index n_x() const override { return n_x_; }
    Index n_z() const override { return n_z_; }

private:
    Index n_x_;
    Index n_z_;
    PopulationSpec population_;  // pre-masking moments
    std::unique_ptr<MvnSampler> sampler_x_;
    std::unique_ptr<MvnSampler> sampler_z_;
};

// One statistic arm of a Monte Carlo run.
struct TestSpec {
    std::string statistic;  // "plugin" | "onestep" | "anchored"
    int pc_index = 1;
    int m_folds = 2;
    bool oracle = false;  // use the generator's population as nuisances
    NuisanceOptions nuisance;
    AnchorExponents anchor;
    int cv_folds = lasso_defaults::cv_folds;
    int grid_size = lasso_defaults::grid_size;
    std::optional<Vector> fixed_direction;  // plugin along a user vector
};

struct McReport {
    std::int64_t reps = 0;
    std::int64_t rejections = 0;
    double rejection_rate = 0.0;  // rejections / (reps - degenerate_reps)
    std::vector<double> statistic_samples;  // non-degenerate reps, in rep order
    double ks_to_normal = 0.0;
    std::int64_t degenerate_reps = 0;
    std::uint64_t seed = 0;

    std::vector<std::int64_t> sample_reps;  // replicate index per sample
};

// Evaluates every spec on the same replicate datasets (shared fold plans and
// shared nuisance cache).  All specs must agree on m_folds.  workers <= 0
// means one thread per available core.
std::vector<McReport> monte_carlo_multi(const Generator& generator,
                                        const std::vector<TestSpec>& specs,
                                        std::int64_t reps, std::uint64_t base_seed,
                                        double alpha, int workers);

McReport monte_carlo(const Generator& generator, const TestSpec& spec,
                     std::int64_t reps, std::uint64_t base_seed, double alpha,
                     int workers);

// Reference implementation: identical replicate semantics, no thread pool.
McReport monte_carlo_serial(const Generator& generator, const TestSpec& spec,
                            std::int64_t reps, std::uint64_t base_seed, double alpha);

struct DegeneracyReport {
    std::int64_t reps = 0;
    std::int64_t zero_fits = 0;
    double zero_fraction = 0.0;
};

// How often the cross-validated lasso returns an exactly-zero coefficient
// vector.  The default setting is the small-sample null configuration
// (N_X = 100, N_Z = 50, p = 100, equal group means, identity covariance);
// with alternative = true the fit runs on strongly separated zero-inflated
// data of size alt_n per group instead.
DegeneracyReport degeneracy_demo(std::int64_t reps, std::uint64_t seed,
                                 bool alternative = false, Index alt_n = 500,
                                 int workers = 1);

}  // namespace hdproj
