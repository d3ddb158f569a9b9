// ============================================================================
// hdproj command line front end.
//
//   hdproj test             run a projection test on a CSV dataset
//   hdproj simulate         write a synthetic dataset to CSV
//   hdproj montecarlo       rejection-rate study on a named setting
//   hdproj demo-degeneracy  exact-zero rate of the cross-validated lasso
//
// Exit codes: 0 success, 2 invalid input or flag combination, 3 numerical
// degeneracy or solver failure.
// ============================================================================

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hdproj/dataset.hpp"
#include "hdproj/projection_tests.hpp"
#include "hdproj/serialize.hpp"
#include "hdproj/simulation.hpp"
#include "hdproj/types.hpp"

namespace {

using namespace hdproj;

constexpr int exit_ok = 0;
constexpr int exit_validation = 2;
constexpr int exit_numerical = 3;

Index parse_budget(const std::string& text) {
    if (text == "auto") return 0;
    long long value = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || value < 1) {
        throw ValidationError("--sparsity-budget expects 'auto' or a positive integer, got '" +
                              text + "'");
    }
    return static_cast<Index>(value);
}

std::unique_ptr<Generator> make_generator(const std::string& setting, Index n, Index n_x,
                                          Index n_z, bool n_given) {
    const auto spiked = [&](SpikedGenerator::Setting s) -> std::unique_ptr<Generator> {
        if (n_given) {
            throw ValidationError("--n does not apply to --setting " + setting +
                                  "; its group sizes are fixed at 500/250");
        }
        return std::make_unique<SpikedGenerator>(s);
    };
    if (setting == "spiked-global" || setting == "appA-global") {
        return spiked(SpikedGenerator::Setting::global_null);
    }
    if (setting == "spiked-projected" || setting == "appA-projected") {
        return spiked(SpikedGenerator::Setting::projected_null);
    }
    if (setting == "zinf-global" || setting == "f1-global") {
        return std::make_unique<ZeroInflatedGenerator>(
            ZeroInflatedGenerator::Setting::global_null, n);
    }
    if (setting == "zinf-projected" || setting == "f1-projected") {
        return std::make_unique<ZeroInflatedGenerator>(
            ZeroInflatedGenerator::Setting::projected_null, n);
    }
    if (setting == "zinf-alternative" || setting == "f1-alternative") {
        return std::make_unique<ZeroInflatedGenerator>(
            ZeroInflatedGenerator::Setting::alternative, n);
    }
    if (setting == "blocks" || setting == "f2") {
        return std::make_unique<BlockGenerator>(n_x > 0 ? n_x : n, n_z > 0 ? n_z : n);
    }
    throw ValidationError(
        "unknown --setting '" + setting +
        "'; expected one of spiked-global, spiked-projected, zinf-global, zinf-projected, "
        "zinf-alternative, blocks (aliases: appA-global, appA-projected, f1-global, "
        "f1-projected, f1-alternative, f2)");
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open output file '" + path + "'");
    out << text;
    if (!out) throw ValidationError("failed writing output file '" + path + "'");
}

void write_json(const std::string& path, const ordered_json& j) {
    write_text(path, j.dump(2) + "\n");
}

std::string feature_label(const std::vector<std::string>& names, Index i) {
    if (i < static_cast<Index>(names.size())) return names[static_cast<std::size_t>(i)];
    return "f" + std::to_string(i + 1);
}

void print_top_features(const Vector& direction, const std::vector<std::string>& names) {
    std::vector<Index> order(static_cast<std::size_t>(direction.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return std::abs(direction[a]) > std::abs(direction[b]);
    });
    const std::size_t shown = std::min<std::size_t>(10, order.size());
    std::cout << "top features by |weight|:\n";
    for (std::size_t i = 0; i < shown; ++i) {
        const Index j = order[i];
        std::cout << "  " << feature_label(names, j) << "  " << direction[j] << "\n";
    }
}

// ---------------------------------------------------------------------------
// test
// ---------------------------------------------------------------------------

struct TestCmd {
    std::string csv;
    std::string group_column = "group";
    std::vector<std::string> labels;
    std::string statistic;
    int m_folds = 0;
    int pc_index = 1;
    std::string direction_csv;
    std::uint64_t seed = 0;
    bool threshold_means = true;
    std::string sparsity_budget = "auto";
    bool dense_pc = false;
    double w_exponent = 0.5;
    double r_exponent = 1.0 / 3.0;
    bool r_zero = false;
    int cv_folds = lasso_defaults::cv_folds;
    int grid_size = lasso_defaults::grid_size;
    std::string output;

    bool pc_index_given = false;
    bool r_exponent_given = false;
};

int run_test(const TestCmd& cmd) {
    if (!cmd.direction_csv.empty() && cmd.statistic != "plugin") {
        throw ValidationError("--direction only applies to --statistic plugin; the " +
                              cmd.statistic + " statistic estimates its own direction");
    }
    if (!cmd.direction_csv.empty() && cmd.pc_index_given) {
        throw ValidationError(
            "--pc-index cannot be combined with --direction; a user-supplied direction "
            "replaces the principal component");
    }
    if (cmd.r_zero && cmd.r_exponent_given) {
        throw ValidationError("--r-zero and --r-exponent are mutually exclusive");
    }
    if (cmd.dense_pc && cmd.sparsity_budget != "auto") {
        throw ValidationError("--sparsity-budget has no effect with --dense-pc");
    }

    std::optional<std::pair<std::string, std::string>> labels;
    if (!cmd.labels.empty()) labels = std::make_pair(cmd.labels[0], cmd.labels[1]);
    const CsvDataset csv = load_csv(cmd.csv, cmd.group_column, labels);
    const Dataset& data = csv.data;

    TestOptions options;
    options.nuisance.threshold_means = cmd.threshold_means;
    options.nuisance.dense_pc = cmd.dense_pc;
    options.nuisance.sparsity_budget = parse_budget(cmd.sparsity_budget);
    options.pc_index = cmd.pc_index;
    options.seed = mix64(cmd.seed, seed_streams::lasso);
    options.cv_folds = cmd.cv_folds;
    options.grid_size = cmd.grid_size;
    options.anchor.w_exponent = cmd.w_exponent;
    options.anchor.r_exponent = cmd.r_exponent;
    options.anchor.r_zero = cmd.r_zero;

    const FoldPlan plan = make_folds(data.n_x(), data.n_z(), cmd.m_folds,
                                     mix64(cmd.seed, seed_streams::fold_plan));

    TestResult result;
    if (cmd.statistic == "plugin") {
        DirectionProvider provider;
        if (!cmd.direction_csv.empty()) {
            const auto weights = load_direction_csv(cmd.direction_csv);
            std::vector<std::string> names = data.feature_names;
            if (names.empty()) {
                names.reserve(static_cast<std::size_t>(data.p()));
                for (Index i = 0; i < data.p(); ++i) names.push_back(feature_label(names, i));
            }
            provider = fixed_direction_provider(
                Direction{direction_from_named_weights(names, weights),
                          DirectionOrigin::user, 0});
        } else {
            provider = pc_direction_provider(cmd.pc_index, options.nuisance);
        }
        result = t_plugin(data, plan, provider, options);
    } else if (cmd.statistic == "onestep") {
        result = t_onestep(data, plan, options);
    } else if (cmd.statistic == "anchored") {
        result = t_anchored(data, plan, options);
    } else {
        throw ValidationError("unknown --statistic '" + cmd.statistic +
                              "'; expected plugin, onestep, or anchored");
    }

    std::cout << "statistic: " << result.statistic << "\n";
    std::cout << "p_value: " << result.p_value << "\n";
    print_top_features(result.mean_direction, data.feature_names);

    if (!cmd.output.empty()) {
        ordered_json config;
        config["command"] = "test";
        config["csv"] = cmd.csv;
        config["group_column"] = cmd.group_column;
        config["x_label"] = csv.x_label;
        config["z_label"] = csv.z_label;
        config["statistic"] = cmd.statistic;
        config["pc_index"] = cmd.pc_index;
        config["m_folds"] = cmd.m_folds;
        config["seed"] = cmd.seed;
        config["threshold_means"] = cmd.threshold_means;
        config["sparsity_budget"] = cmd.sparsity_budget;
        config["dense_pc"] = cmd.dense_pc;
        config["direction"] = cmd.direction_csv;
        config["anchor"] = {{"w_exponent", cmd.w_exponent},
                            {"r_exponent", cmd.r_zero ? 0.0 : cmd.r_exponent},
                            {"r_zero", cmd.r_zero}};
        config["cv_folds"] = cmd.cv_folds;
        config["grid_size"] = cmd.grid_size;
        write_json(cmd.output, report_file(config, "result", to_json(result)));
        std::cout << "report: " << cmd.output << "\n";
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateCmd {
    std::string setting;
    Index n = 500;
    Index n_x = 0;
    Index n_z = 0;
    std::uint64_t seed = 0;
    std::string output;
    std::string group_column = "group";
    std::string x_label = "x";
    std::string z_label = "z";

    bool n_given = false;
};

int run_simulate(const SimulateCmd& cmd) {
    const auto generator = make_generator(cmd.setting, cmd.n, cmd.n_x, cmd.n_z, cmd.n_given);
    const Dataset data = generator->generate(cmd.seed);
    write_csv(data, cmd.output, cmd.group_column, cmd.x_label, cmd.z_label);
    std::cout << "wrote " << data.n_x() << "+" << data.n_z() << " rows with p=" << data.p()
              << " to " << cmd.output << "\n";
    return exit_ok;
}

// ---------------------------------------------------------------------------
// montecarlo
// ---------------------------------------------------------------------------

struct MonteCarloCmd {
    std::string setting;
    std::string statistic;
    int m_folds = 0;
    std::int64_t reps = 0;
    std::uint64_t seed = 0;
    Index n = 500;
    Index n_x = 0;
    Index n_z = 0;
    double alpha = 0.05;
    bool oracle = false;
    int pc_index = 1;
    bool threshold_means = true;
    std::string sparsity_budget = "auto";
    bool dense_pc = false;
    double w_exponent = 0.5;
    double r_exponent = 1.0 / 3.0;
    bool r_zero = false;
    int cv_folds = lasso_defaults::cv_folds;
    int grid_size = lasso_defaults::grid_size;
    int workers = 0;
    std::string output;
    std::string samples_csv_path;
    std::string format = "json";

    bool n_given = false;
    bool r_exponent_given = false;
};

int run_montecarlo(const MonteCarloCmd& cmd) {
    if (cmd.r_zero && cmd.r_exponent_given) {
        throw ValidationError("--r-zero and --r-exponent are mutually exclusive");
    }
    if (cmd.dense_pc && cmd.sparsity_budget != "auto") {
        throw ValidationError("--sparsity-budget has no effect with --dense-pc");
    }
    if (cmd.format != "json" && cmd.format != "csv") {
        throw ValidationError("--format expects json or csv, got '" + cmd.format + "'");
    }
    if (cmd.format == "csv" && cmd.output.empty()) {
        throw ValidationError("--format csv requires --output for the samples file");
    }

    const auto generator = make_generator(cmd.setting, cmd.n, cmd.n_x, cmd.n_z, cmd.n_given);

    TestSpec spec;
    spec.statistic = cmd.statistic;
    spec.pc_index = cmd.pc_index;
    spec.m_folds = cmd.m_folds;
    spec.oracle = cmd.oracle;
    spec.nuisance.threshold_means = cmd.threshold_means;
    spec.nuisance.dense_pc = cmd.dense_pc;
    spec.nuisance.sparsity_budget = parse_budget(cmd.sparsity_budget);
    spec.anchor.w_exponent = cmd.w_exponent;
    spec.anchor.r_exponent = cmd.r_exponent;
    spec.anchor.r_zero = cmd.r_zero;
    spec.cv_folds = cmd.cv_folds;
    spec.grid_size = cmd.grid_size;

    const McReport report =
        monte_carlo(*generator, spec, cmd.reps, cmd.seed, cmd.alpha, cmd.workers);

    std::cout << "rejection_rate: " << report.rejection_rate << " (" << report.rejections
              << "/" << (report.reps - report.degenerate_reps) << ")\n";
    std::cout << "ks_to_normal: " << report.ks_to_normal << "\n";
    if (report.degenerate_reps > 0) {
        std::cout << "degenerate_reps: " << report.degenerate_reps << "\n";
    }

    ordered_json config;
    config["command"] = "montecarlo";
    config["setting"] = generator->population().label;
    config["n_x"] = generator->n_x();
    config["n_z"] = generator->n_z();
    config["statistic"] = cmd.statistic;
    config["pc_index"] = cmd.pc_index;
    config["m_folds"] = cmd.m_folds;
    config["reps"] = cmd.reps;
    config["seed"] = cmd.seed;
    config["alpha"] = cmd.alpha;
    config["oracle"] = cmd.oracle;
    config["threshold_means"] = cmd.threshold_means;
    config["sparsity_budget"] = cmd.sparsity_budget;
    config["dense_pc"] = cmd.dense_pc;
    config["anchor"] = {{"w_exponent", cmd.w_exponent},
                        {"r_exponent", cmd.r_zero ? 0.0 : cmd.r_exponent},
                        {"r_zero", cmd.r_zero}};
    config["cv_folds"] = cmd.cv_folds;
    config["grid_size"] = cmd.grid_size;

    if (!cmd.output.empty()) {
        if (cmd.format == "csv") {
            write_text(cmd.output, samples_csv(report));
        } else {
            write_json(cmd.output, report_file(config, "report", to_json(report)));
        }
        std::cout << "report: " << cmd.output << "\n";
    }
    if (!cmd.samples_csv_path.empty()) {
        write_text(cmd.samples_csv_path, samples_csv(report));
        std::cout << "samples: " << cmd.samples_csv_path << "\n";
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------
// demo-degeneracy
// ---------------------------------------------------------------------------

struct DemoCmd {
    std::int64_t reps = 200;
    std::uint64_t seed = 0;
    bool alternative = false;
    Index alt_n = 500;
    int workers = 0;
    std::string output;
};

int run_demo(const DemoCmd& cmd) {
    const DegeneracyReport report =
        degeneracy_demo(cmd.reps, cmd.seed, cmd.alternative, cmd.alt_n, cmd.workers);
    std::cout << "zero_fraction: " << report.zero_fraction << " (" << report.zero_fits << "/"
              << report.reps << ")\n";
    if (!cmd.output.empty()) {
        ordered_json config;
        config["command"] = "demo-degeneracy";
        config["reps"] = cmd.reps;
        config["seed"] = cmd.seed;
        config["alternative"] = cmd.alternative;
        config["alt_n"] = cmd.alt_n;
        write_json(cmd.output, report_file(config, "report", to_json(report)));
        std::cout << "report: " << cmd.output << "\n";
    }
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-fitted projection tests for high-dimensional two-sample means"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(HDPROJ_VERSION));

    TestCmd test_cmd;
    CLI::App* test = app.add_subcommand("test", "Run a projection test on CSV data");
    test->add_option("csv", test_cmd.csv, "Input CSV with a group column")->required();
    test->add_option("--group-column", test_cmd.group_column,
                     "Header name of the group column");
    test->add_option("--labels", test_cmd.labels,
                     "Group labels mapped to X and Z, in that order")
        ->expected(2);
    test->add_option("--statistic", test_cmd.statistic, "plugin, onestep, or anchored")
        ->required();
    test->add_option("--m-folds", test_cmd.m_folds, "Number of cross-fitting folds")
        ->required()
        ->check(CLI::Range(2, 1000000));
    CLI::Option* test_pc = test->add_option("--pc-index", test_cmd.pc_index,
                                            "Principal component to target (1-based)");
    test->add_option("--direction", test_cmd.direction_csv,
                     "CSV of (feature_name, weight) supplying the plugin direction");
    test->add_option("--seed", test_cmd.seed, "Seed for fold plan and CV substreams");
    test->add_flag("--threshold-means,!--no-threshold-means", test_cmd.threshold_means,
                   "Soft-threshold nuisance means (default on)");
    test->add_option("--sparsity-budget", test_cmd.sparsity_budget,
                     "Sparse PC cardinality: 'auto' or a positive integer");
    test->add_flag("--dense-pc", test_cmd.dense_pc,
                   "Use the unconstrained eigenvector instead of the sparse PC");
    test->add_option("--w-exponent", test_cmd.w_exponent,
                     "Anchored classifier weight exponent");
    CLI::Option* test_rexp =
        test->add_option("--r-exponent", test_cmd.r_exponent,
                         "Anchored inclusion threshold exponent");
    test->add_flag("--r-zero", test_cmd.r_zero,
                   "Always include the classifier direction in the anchor");
    test->add_option("--cv-folds", test_cmd.cv_folds, "Lasso cross-validation folds");
    test->add_option("--grid-size", test_cmd.grid_size, "Lasso penalty grid size");
    test->add_option("--output", test_cmd.output, "Write the TestResult JSON here");

    SimulateCmd sim_cmd;
    CLI::App* simulate = app.add_subcommand("simulate", "Write a synthetic dataset to CSV");
    simulate->add_option("--setting", sim_cmd.setting, "Generator name")->required();
    CLI::Option* sim_n =
        simulate->add_option("--n", sim_cmd.n, "Samples per group (where adjustable)");
    simulate->add_option("--n-x", sim_cmd.n_x, "Group X size for the blocks setting");
    simulate->add_option("--n-z", sim_cmd.n_z, "Group Z size for the blocks setting");
    simulate->add_option("--seed", sim_cmd.seed, "Generator seed");
    simulate->add_option("--output", sim_cmd.output, "Output CSV path")->required();
    simulate->add_option("--group-column", sim_cmd.group_column, "Group column name");
    simulate->add_option("--x-label", sim_cmd.x_label, "Label written for group X");
    simulate->add_option("--z-label", sim_cmd.z_label, "Label written for group Z");

    MonteCarloCmd mc_cmd;
    CLI::App* mc = app.add_subcommand("montecarlo", "Rejection-rate study on a named setting");
    mc->add_option("--setting", mc_cmd.setting, "Generator name")->required();
    mc->add_option("--statistic", mc_cmd.statistic, "plugin, onestep, or anchored")
        ->required();
    mc->add_option("--m-folds", mc_cmd.m_folds, "Number of cross-fitting folds")
        ->required()
        ->check(CLI::Range(2, 1000000));
    mc->add_option("--reps", mc_cmd.reps, "Monte Carlo replicates")
        ->required()
        ->check(CLI::Range(std::int64_t{1}, std::int64_t{100000000}));
    mc->add_option("--seed", mc_cmd.seed, "Base seed; replicate r uses mix64(seed, r)");
    CLI::Option* mc_n = mc->add_option("--n", mc_cmd.n, "Samples per group (where adjustable)");
    mc->add_option("--n-x", mc_cmd.n_x, "Group X size for the blocks setting");
    mc->add_option("--n-z", mc_cmd.n_z, "Group Z size for the blocks setting");
    mc->add_option("--alpha", mc_cmd.alpha, "Two-sided level")
        ->check(CLI::Range(1e-12, 1.0 - 1e-12));
    mc->add_flag("--oracle", mc_cmd.oracle, "Substitute population nuisances");
    mc->add_option("--pc-index", mc_cmd.pc_index, "Principal component to target (1-based)");
    mc->add_flag("--threshold-means,!--no-threshold-means", mc_cmd.threshold_means,
                 "Soft-threshold nuisance means (default on)");
    mc->add_option("--sparsity-budget", mc_cmd.sparsity_budget,
                   "Sparse PC cardinality: 'auto' or a positive integer");
    mc->add_flag("--dense-pc", mc_cmd.dense_pc,
                 "Use the unconstrained eigenvector instead of the sparse PC");
    mc->add_option("--w-exponent", mc_cmd.w_exponent, "Anchored classifier weight exponent");
    CLI::Option* mc_rexp =
        mc->add_option("--r-exponent", mc_cmd.r_exponent,
                       "Anchored inclusion threshold exponent");
    mc->add_flag("--r-zero", mc_cmd.r_zero,
                 "Always include the classifier direction in the anchor");
    mc->add_option("--cv-folds", mc_cmd.cv_folds, "Lasso cross-validation folds");
    mc->add_option("--grid-size", mc_cmd.grid_size, "Lasso penalty grid size");
    mc->add_option("--workers", mc_cmd.workers,
                   "Worker threads for replicates (0 = all cores)")
        ->envname("HDPROJ_WORKERS");
    mc->add_option("--output", mc_cmd.output, "Report file path");
    mc->add_option("--samples-csv", mc_cmd.samples_csv_path,
                   "Also write the (rep, t) samples CSV here");
    mc->add_option("--format", mc_cmd.format,
                   "Report format written to --output: json or csv");

    DemoCmd demo_cmd;
    CLI::App* demo = app.add_subcommand(
        "demo-degeneracy", "Exact-zero rate of the cross-validated logistic lasso");
    demo->add_option("--reps", demo_cmd.reps, "Replicates (at least 50)");
    demo->add_option("--seed", demo_cmd.seed, "Base seed");
    demo->add_flag("--alternative", demo_cmd.alternative,
                   "Fit on strongly separated zero-inflated data instead of the null");
    demo->add_option("--alt-n", demo_cmd.alt_n, "Samples per group for --alternative");
    demo->add_option("--workers", demo_cmd.workers,
                     "Worker threads for replicates (0 = all cores)")
        ->envname("HDPROJ_WORKERS");
    demo->add_option("--output", demo_cmd.output, "Report file path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_validation;
    }

    test_cmd.pc_index_given = test_pc->count() > 0;
    test_cmd.r_exponent_given = test_rexp->count() > 0;
    sim_cmd.n_given = sim_n->count() > 0;
    mc_cmd.n_given = mc_n->count() > 0;
    mc_cmd.r_exponent_given = mc_rexp->count() > 0;

    try {
        if (test->parsed()) return run_test(test_cmd);
        if (simulate->parsed()) return run_simulate(sim_cmd);
        if (mc->parsed()) return run_montecarlo(mc_cmd);
        if (demo->parsed()) return run_demo(demo_cmd);
        return exit_validation;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_validation;
    } catch (const DegenerateVarianceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical;
    }
}
