// ============================================================================
// Report serialization.
// ============================================================================

#include "hdproj/serialize.hpp"

#include <charconv>
#include <system_error>

namespace hdproj {

namespace {

void append_double(std::string& out, double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    out.append(buf, res.ptr);
}

}  // namespace

ordered_json to_json(const TestResult& result) {
    ordered_json j;
    j["statistic"] = result.statistic;
    j["std_error"] = result.std_error;
    j["p_value"] = result.p_value;
    j["theta_hat"] = result.theta_hat;
    if (result.ci_95) {
        j["ci_95"] = {(*result.ci_95)[0], (*result.ci_95)[1]};
    } else {
        j["ci_95"] = nullptr;
    }
    ordered_json folds = ordered_json::array();
    for (const FoldDiagnostic& diag : result.per_fold) {
        ordered_json f;
        f["fold"] = diag.fold;
        f["theta"] = diag.theta;
        f["nonzeros"] = diag.nonzeros;
        folds.push_back(std::move(f));
    }
    j["per_fold"] = std::move(folds);
    j["mean_direction"] =
        std::vector<double>(result.mean_direction.data(),
                            result.mean_direction.data() + result.mean_direction.size());
    return j;
}

ordered_json to_json(const McReport& report) {
    ordered_json j;
    j["reps"] = report.reps;
    j["rejections"] = report.rejections;
    j["rejection_rate"] = report.rejection_rate;
    j["statistic_samples"] = report.statistic_samples;
    j["ks_to_normal"] = report.ks_to_normal;
    j["degenerate_reps"] = report.degenerate_reps;
    j["seed"] = report.seed;
    return j;
}

ordered_json to_json(const DegeneracyReport& report) {
    ordered_json j;
    j["reps"] = report.reps;
    j["zero_fits"] = report.zero_fits;
    j["zero_fraction"] = report.zero_fraction;
    return j;
}

std::string samples_csv(const McReport& report) {
    std::string out = "rep,t\n";
    for (std::size_t i = 0; i < report.statistic_samples.size(); ++i) {
        out += std::to_string(report.sample_reps[i]);
        out += ',';
        append_double(out, report.statistic_samples[i]);
        out += '\n';
    }
    return out;
}

ordered_json report_file(const ordered_json& config, const std::string& key,
                         ordered_json payload) {
    ordered_json j;
    j["version"] = HDPROJ_VERSION;
    j["config"] = config;
    j[key] = std::move(payload);
    return j;
}

}  // namespace hdproj
