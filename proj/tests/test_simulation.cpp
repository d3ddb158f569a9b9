// ============================================================================
// Generators and the Monte Carlo engine.  Population moments are checked
// against the analytic constants, the masking conventions against the raw
// draws, and the engine against itself: serial, one worker, and several
// workers must produce byte-identical reports, and a multi-arm run must
// equal the corresponding single-arm runs.
// ============================================================================

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "hdproj/numeric.hpp"
#include "hdproj/simulation.hpp"
#include "hdproj/types.hpp"

using namespace hdproj;

namespace {

bool reports_identical(const McReport& a, const McReport& b) {
    if (a.reps != b.reps || a.rejections != b.rejections ||
        a.degenerate_reps != b.degenerate_reps || a.seed != b.seed) {
        return false;
    }
    if (a.statistic_samples != b.statistic_samples) return false;
    if (a.sample_reps != b.sample_reps) return false;
    return a.ks_to_normal == b.ks_to_normal && a.rejection_rate == b.rejection_rate;
}

// All rows identical: every projected in-fold variance is exactly zero.
class ConstantGenerator : public Generator {
public:
    ConstantGenerator() {
        population_.label = "constant";
        population_.mu_x = Vector::Ones(3);
        population_.mu_z = Vector::Ones(3);
        population_.sigma = Matrix::Identity(3, 3);
    }
    Dataset generate(std::uint64_t) const override {
        Dataset d;
        d.x = Matrix::Ones(8, 3);
        d.z = Matrix::Ones(8, 3);
        return d;
    }
    const PopulationSpec& population() const override { return population_; }
    Index n_x() const override { return 8; }
    Index n_z() const override { return 8; }

private:
    PopulationSpec population_;
};

}  // namespace

TEST_CASE("spiked generator population and draws") {
    const SpikedGenerator gen(SpikedGenerator::Setting::projected_null);
    const PopulationSpec& pop = gen.population();

    CHECK(pop.label == "spiked-projected");
    REQUIRE(pop.p() == 100);
    CHECK(pop.eigvals(0) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(pop.eigvals(1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pop.eigvals(99) == doctest::Approx(1.0).epsilon(1e-15));

    REQUIRE(pop.v1.has_value());
    for (Index i = 0; i < 10; ++i) {
        CHECK((*pop.v1)(i) == doctest::Approx(1.0 / std::sqrt(10.0)).epsilon(1e-15));
    }
    CHECK((*pop.v1)(10) == 0.0);

    // v1 is an exact eigenvector at eigenvalue 4.
    CHECK((pop.sigma * *pop.v1 - 4.0 * *pop.v1).cwiseAbs().maxCoeff() < 1e-12);

    // mu_x loads +-2.5 on the support; the projected null flips mu_z, so the
    // mean difference is orthogonal to v1.
    CHECK(pop.mu_x(0) == 2.5);
    CHECK(pop.mu_x(5) == -2.5);
    CHECK(pop.mu_x(10) == 0.0);
    CHECK((pop.mu_z + pop.mu_x).cwiseAbs().maxCoeff() == 0.0);
    CHECK(std::abs((pop.mu_x - pop.mu_z).dot(*pop.v1)) < 1e-12);

    const SpikedGenerator null_gen(SpikedGenerator::Setting::global_null);
    CHECK(null_gen.population().label == "spiked-global");
    CHECK((null_gen.population().mu_z - null_gen.population().mu_x).cwiseAbs().maxCoeff() == 0.0);

    const Dataset d = gen.generate(5);
    CHECK(d.n_x() == 500);
    CHECK(d.n_z() == 250);
    CHECK(d.p() == 100);
    const Dataset again = gen.generate(5);
    CHECK((d.x - again.x).cwiseAbs().maxCoeff() == 0.0);
    CHECK((d.z - again.z).cwiseAbs().maxCoeff() == 0.0);
    const Dataset other = gen.generate(6);
    CHECK((d.x - other.x).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("zero-inflated generator: masking and idealized moments") {
    const ZeroInflatedGenerator gen(ZeroInflatedGenerator::Setting::projected_null, 30);
    const PopulationSpec& pop = gen.population();

    CHECK(pop.label == "zinf-projected");
    REQUIRE(pop.p() == 1000);

    // Post-masking means are half the pre-masking ones.
    CHECK(pop.mu_x(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(pop.mu_x(20) == 0.0);
    CHECK(pop.mu_z(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(pop.mu_z(20) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(pop.mu_z(40) == 0.0);

    // Analytic spectrum of the idealized post-masking covariance.
    REQUIRE(pop.eigvals.size() == 1000);
    CHECK(pop.eigvals(0) == doctest::Approx(26.75).epsilon(1e-12));
    CHECK(pop.eigvals(1) == doctest::Approx(13.625).epsilon(1e-12));
    CHECK(pop.eigvals(2) == doctest::Approx(1.75).epsilon(1e-12));
    CHECK(pop.eigvals(20) == doctest::Approx(1.75).epsilon(1e-12));
    CHECK(pop.eigvals(21) == doctest::Approx(1.125).epsilon(1e-12));
    CHECK(pop.eigvals(39) == doctest::Approx(1.125).epsilon(1e-12));
    CHECK(pop.eigvals(40) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(pop.eigvals(999) == doctest::Approx(0.5).epsilon(1e-12));

    // The stored spike directions are exact eigenvectors of sigma.
    REQUIRE(pop.v1.has_value());
    REQUIRE(pop.v2.has_value());
    CHECK((pop.sigma * *pop.v1 - 26.75 * *pop.v1).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((pop.sigma * *pop.v2 - 13.625 * *pop.v2).cwiseAbs().maxCoeff() < 1e-10);

    // Roughly half the entries are masked to exact zero.
    const Dataset d = gen.generate(77);
    CHECK(d.n_x() == 30);
    CHECK(d.p() == 1000);
    Index zeros = 0;
    for (Index i = 0; i < d.x.size(); ++i) zeros += d.x(i) == 0.0 ? 1 : 0;
    const double frac = static_cast<double>(zeros) / static_cast<double>(d.x.size());
    CHECK(frac > 0.47);
    CHECK(frac < 0.53);

    // The alternative shifts both spike supports in mu_z.
    const ZeroInflatedGenerator alt(ZeroInflatedGenerator::Setting::alternative, 30);
    CHECK(alt.population().label == "zinf-alternative");
    CHECK(alt.population().mu_z(0) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(alt.population().mu_z(20) == doctest::Approx(0.45).epsilon(1e-15));

    CHECK_THROWS_AS(ZeroInflatedGenerator(ZeroInflatedGenerator::Setting::global_null, 3),
                    ValidationError);
}

TEST_CASE("block generator: spectrum, mean shift, and the value floor") {
    const BlockGenerator gen(25, 20);
    const PopulationSpec& pop = gen.population();

    CHECK(pop.label == "blocks");
    REQUIRE(pop.p() == 300);
    REQUIRE(pop.eigvals.size() == 300);
    // Compound-symmetry blocks: 2 + 9 * 1.8 = 18.2 and 1 + 9 * 0.6 = 6.4,
    // then 280 unit directions, then the repeated small eigenvalues
    // 0.4 and 0.2 with multiplicity nine each.
    CHECK(pop.eigvals(0) == doctest::Approx(18.2).epsilon(1e-12));
    CHECK(pop.eigvals(1) == doctest::Approx(6.4).epsilon(1e-12));
    CHECK(pop.eigvals(2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pop.eigvals(281) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pop.eigvals(282) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(pop.eigvals(290) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(pop.eigvals(291) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(pop.eigvals(299) == doctest::Approx(0.2).epsilon(1e-12));

    // Pre-masking means: ones everywhere, with the shift on block two.
    CHECK(pop.mu_x(0) == 1.0);
    CHECK(pop.mu_x(15) == 1.0);
    CHECK(pop.mu_z(9) == 1.0);
    CHECK(pop.mu_z(10) == 2.0);
    CHECK(pop.mu_z(19) == 2.0);
    CHECK(pop.mu_z(20) == 1.0);

    // Every observed value is either exactly zero or at least 0.5.
    const Dataset d = gen.generate(3);
    CHECK(d.n_x() == 25);
    CHECK(d.n_z() == 20);
    for (Index i = 0; i < d.x.size(); ++i) {
        const double v = d.x(i);
        CHECK((v == 0.0 || v >= 0.5));
    }

    CHECK_THROWS_AS(BlockGenerator(3, 20), ValidationError);
}

TEST_CASE("mvn sampler reproduces its moments and rejects garbage") {
    Vector mu(3);
    mu << 1.0, -2.0, 0.5;
    Matrix sigma(3, 3);
    sigma << 2.0, 0.6, 0.0, 0.6, 1.0, -0.2, 0.0, -0.2, 0.5;

    MvnSampler sampler(mu, sigma);
    Rng rng(1234);
    const int n = 40000;
    Vector mean = Vector::Zero(3);
    Matrix cov = Matrix::Zero(3, 3);
    std::vector<Vector> draws;
    for (int i = 0; i < n; ++i) {
        draws.push_back(sampler.draw(rng));
        mean += draws.back();
    }
    mean /= static_cast<double>(n);
    for (const Vector& v : draws) cov += (v - mean) * (v - mean).transpose();
    cov /= static_cast<double>(n);

    CHECK((mean - mu).cwiseAbs().maxCoeff() < 0.03);
    CHECK((cov - sigma).cwiseAbs().maxCoeff() < 0.05);

    Matrix indefinite = Matrix::Identity(2, 2);
    indefinite(1, 1) = -1.0;
    CHECK_THROWS_AS(MvnSampler(Vector::Zero(2), indefinite), NumericalError);
}

TEST_CASE("monte carlo: serial and parallel runs are identical") {
    const SpikedGenerator gen(SpikedGenerator::Setting::projected_null);
    TestSpec spec;
    spec.statistic = "onestep";
    spec.oracle = true;
    spec.m_folds = 2;

    const McReport serial = monte_carlo_serial(gen, spec, 12, 99, 0.05);
    const McReport one = monte_carlo(gen, spec, 12, 99, 0.05, 1);
    const McReport three = monte_carlo(gen, spec, 12, 99, 0.05, 3);

    CHECK(reports_identical(serial, one));
    CHECK(reports_identical(serial, three));
    CHECK(serial.reps == 12);
    CHECK(serial.degenerate_reps == 0);
    CHECK(serial.statistic_samples.size() == 12);
    CHECK(serial.seed == 99);

    // Rejections recount from the samples at alpha = 0.05.
    const double crit = normal_quantile(0.975);
    std::int64_t expect = 0;
    for (double t : serial.statistic_samples) expect += std::abs(t) > crit ? 1 : 0;
    CHECK(serial.rejections == expect);
    CHECK(serial.rejection_rate == doctest::Approx(static_cast<double>(expect) / 12.0));
}

TEST_CASE("multi-arm runs equal the corresponding single-arm runs") {
    const SpikedGenerator gen(SpikedGenerator::Setting::global_null);

    TestSpec onestep;
    onestep.statistic = "onestep";
    onestep.oracle = true;

    TestSpec plugin;
    plugin.statistic = "plugin";
    Vector e1 = Vector::Zero(100);
    e1(0) = 1.0;
    plugin.fixed_direction = e1;

    const std::vector<McReport> multi =
        monte_carlo_multi(gen, {onestep, plugin}, 8, 31, 0.05, 1);
    REQUIRE(multi.size() == 2);

    const McReport lone_onestep = monte_carlo(gen, onestep, 8, 31, 0.05, 1);
    const McReport lone_plugin = monte_carlo(gen, plugin, 8, 31, 0.05, 1);
    CHECK(reports_identical(multi[0], lone_onestep));
    CHECK(reports_identical(multi[1], lone_plugin));
}

TEST_CASE("a fixed direction with real signal rejects every time") {
    const SpikedGenerator gen(SpikedGenerator::Setting::projected_null);
    TestSpec spec;
    spec.statistic = "plugin";
    Vector e1 = Vector::Zero(100);
    e1(0) = 1.0;
    spec.fixed_direction = e1;  // mu_x - mu_z loads 5.0 on this coordinate

    const McReport report = monte_carlo(gen, spec, 10, 7, 0.05, 1);
    CHECK(report.rejection_rate == 1.0);
    CHECK(report.degenerate_reps == 0);
}

TEST_CASE("monte carlo surfaces degenerate arms and bad specs") {
    const ConstantGenerator gen;
    TestSpec spec;
    spec.statistic = "plugin";
    Vector e1 = Vector::Zero(3);
    e1(0) = 1.0;
    spec.fixed_direction = e1;

    // Every replicate degenerates: the run cannot report anything.
    CHECK_THROWS_AS(monte_carlo(gen, spec, 5, 1, 0.05, 1), NumericalError);

    const SpikedGenerator ok(SpikedGenerator::Setting::global_null);
    TestSpec bad_name;
    bad_name.statistic = "median";
    CHECK_THROWS_AS(monte_carlo(ok, bad_name, 5, 1, 0.05, 1), ValidationError);

    TestSpec bad_reps;
    bad_reps.statistic = "onestep";
    bad_reps.oracle = true;
    CHECK_THROWS_AS(monte_carlo(ok, bad_reps, 0, 1, 0.05, 1), ValidationError);

    TestSpec fixed_on_onestep;
    fixed_on_onestep.statistic = "onestep";
    fixed_on_onestep.fixed_direction = e1;
    CHECK_THROWS_AS(monte_carlo(ok, fixed_on_onestep, 5, 1, 0.05, 1), ValidationError);

    TestSpec disagree_a, disagree_b;
    disagree_a.statistic = "onestep";
    disagree_a.oracle = true;
    disagree_a.m_folds = 2;
    disagree_b = disagree_a;
    disagree_b.m_folds = 3;
    CHECK_THROWS_AS(monte_carlo_multi(ok, {disagree_a, disagree_b}, 5, 1, 0.05, 1),
                    ValidationError);
}

TEST_CASE("degeneracy demo bookkeeping") {
    CHECK_THROWS_AS(degeneracy_demo(10, 1), ValidationError);  // too few reps

    const DegeneracyReport report = degeneracy_demo(50, 3);
    CHECK(report.reps == 50);
    CHECK(report.zero_fits >= 0);
    CHECK(report.zero_fits <= 50);
    CHECK(report.zero_fraction ==
          doctest::Approx(static_cast<double>(report.zero_fits) / 50.0).epsilon(1e-15));

    const DegeneracyReport again = degeneracy_demo(50, 3);
    CHECK(report.zero_fits == again.zero_fits);
}
