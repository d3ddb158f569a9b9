#include "hdproj/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "hdproj/rng.hpp"

namespace hdproj {

void Dataset::validate() const {
    if (x.cols() != z.cols()) {
        throw ValidationError("dataset: column count mismatch between groups (" +
                              std::to_string(x.cols()) + " vs " + std::to_string(z.cols()) + ")");
    }
    if (p() < 1) {
        throw ValidationError("dataset: no feature columns");
    }
    if (n_x() < 2 || n_z() < 2) {
        throw ValidationError("dataset: each group needs at least 2 samples (got " +
                              std::to_string(n_x()) + " and " + std::to_string(n_z()) + ")");
    }
    if (!x.allFinite() || !z.allFinite()) {
        throw ValidationError("dataset: non-finite entry");
    }
    if (!feature_names.empty() && static_cast<Index>(feature_names.size()) != p()) {
        throw ValidationError("dataset: feature_names length " +
                              std::to_string(feature_names.size()) + " does not match p = " +
                              std::to_string(p()));
    }
}

Index Direction::nonzero_count() const {
    Index count = 0;
    for (Index i = 0; i < weights.size(); ++i) {
        if (weights(i) != 0.0) ++count;
    }
    return count;
}

namespace {

std::vector<Index> indices_where(const std::vector<int>& fold_of, int fold, bool inside) {
    std::vector<Index> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
        if ((fold_of[i] == fold) == inside) out.push_back(static_cast<Index>(i));
    }
    return out;
}

std::vector<int> deal_folds(Index n, int m, std::uint64_t stream_seed) {
    std::vector<std::int64_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(stream_seed);
    rng.shuffle(order);
    std::vector<int> fold_of(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < order.size(); ++i) {
        fold_of[static_cast<std::size_t>(order[i])] = static_cast<int>(i % static_cast<std::size_t>(m));
    }
    return fold_of;
}

}  // namespace

std::vector<Index> FoldPlan::x_in(int fold) const { return indices_where(x_fold, fold, true); }
std::vector<Index> FoldPlan::x_out(int fold) const { return indices_where(x_fold, fold, false); }
std::vector<Index> FoldPlan::z_in(int fold) const { return indices_where(z_fold, fold, true); }
std::vector<Index> FoldPlan::z_out(int fold) const { return indices_where(z_fold, fold, false); }

FoldPlan make_folds(Index n_x, Index n_z, int m, std::uint64_t seed) {
    if (m < 2) {
        throw ValidationError("make_folds: m must be at least 2, got " + std::to_string(m));
    }
    if (static_cast<Index>(m) > std::min(n_x, n_z)) {
        throw ValidationError("make_folds: m = " + std::to_string(m) +
                              " exceeds the smaller group size " +
                              std::to_string(std::min(n_x, n_z)));
    }
    FoldPlan plan;
    plan.m = m;
    plan.x_fold = deal_folds(n_x, m, mix64(seed, 1));
    plan.z_fold = deal_folds(n_z, m, mix64(seed, 2));
    return plan;
}

Vector align_sign(const Vector& reference, const Vector& candidate) {
    if (reference.size() != candidate.size()) {
        throw ValidationError("align_sign: dimension mismatch");
    }
    return reference.dot(candidate) < 0.0 ? Vector(-candidate) : candidate;
}

Matrix rows_at(const Matrix& samples, const std::vector<Index>& idx) {
    Matrix out(static_cast<Index>(idx.size()), samples.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.row(static_cast<Index>(i)) = samples.row(idx[i]);
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, std::size_t row, const std::string& column) {
    const std::string cell = trim(raw);
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || cell.empty()) {
        throw ValidationError("csv: non-numeric cell at row " + std::to_string(row) +
                              ", column '" + column + "': '" + cell + "'");
    }
    if (!std::isfinite(value)) {
        throw ValidationError("csv: non-finite value at row " + std::to_string(row) +
                              ", column '" + column + "'");
    }
    return value;
}

}  // namespace

CsvDataset load_csv(const std::string& path, const std::string& group_column,
                    std::optional<std::pair<std::string, std::string>> labels) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("csv: cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError("csv: '" + path + "' is empty");
    }
    std::vector<std::string> header = split_csv_line(line);
    for (auto& h : header) h = trim(h);

    std::size_t group_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == group_column) {
            group_col = i;
            break;
        }
    }
    if (group_col == header.size()) {
        throw ValidationError("csv: group column '" + group_column + "' not found in header");
    }

    std::vector<std::string> feature_names;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i != group_col) feature_names.push_back(header[i]);
    }
    if (feature_names.empty()) {
        throw ValidationError("csv: no feature columns besides '" + group_column + "'");
    }
    {
        auto sorted = feature_names;
        std::sort(sorted.begin(), sorted.end());
        auto dup = std::adjacent_find(sorted.begin(), sorted.end());
        if (dup != sorted.end()) {
            throw ValidationError("csv: duplicate feature column '" + *dup + "'");
        }
    }

    std::string x_label, z_label;
    bool have_x = false, have_z = false;
    if (labels) {
        x_label = labels->first;
        z_label = labels->second;
        have_x = have_z = true;
        if (x_label == z_label) {
            throw ValidationError("csv: the two group labels must differ");
        }
    }

    std::vector<std::vector<double>> x_rows, z_rows;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw ValidationError("csv: row " + std::to_string(row) + " has " +
                                  std::to_string(fields.size()) + " cells, header has " +
                                  std::to_string(header.size()));
        }
        const std::string label = trim(fields[group_col]);
        std::vector<double> values;
        values.reserve(feature_names.size());
        std::size_t name_idx = 0;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i == group_col) continue;
            values.push_back(parse_cell(fields[i], row, feature_names[name_idx]));
            ++name_idx;
        }
        if (!have_x) {
            x_label = label;
            have_x = true;
        } else if (!have_z && label != x_label) {
            z_label = label;
            have_z = true;
        }
        if (label == x_label) {
            x_rows.push_back(std::move(values));
        } else if (have_z && label == z_label) {
            z_rows.push_back(std::move(values));
        } else {
            throw ValidationError("csv: row " + std::to_string(row) + " has group label '" +
                                  label + "', expected '" + x_label + "' or '" + z_label + "'");
        }
    }

    CsvDataset out;
    out.x_label = x_label;
    out.z_label = z_label;
    const Index p = static_cast<Index>(feature_names.size());
    out.data.x.resize(static_cast<Index>(x_rows.size()), p);
    for (std::size_t i = 0; i < x_rows.size(); ++i) {
        for (Index j = 0; j < p; ++j) out.data.x(static_cast<Index>(i), j) = x_rows[i][static_cast<std::size_t>(j)];
    }
    out.data.z.resize(static_cast<Index>(z_rows.size()), p);
    for (std::size_t i = 0; i < z_rows.size(); ++i) {
        for (Index j = 0; j < p; ++j) out.data.z(static_cast<Index>(i), j) = z_rows[i][static_cast<std::size_t>(j)];
    }
    out.data.feature_names = std::move(feature_names);
    out.data.validate();
    return out;
}

namespace {

std::string shortest_repr(double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

void write_group(std::ofstream& out, const Matrix& samples, const std::string& label) {
    for (Index i = 0; i < samples.rows(); ++i) {
        out << label;
        for (Index j = 0; j < samples.cols(); ++j) {
            out << ',' << shortest_repr(samples(i, j));
        }
        out << '\n';
    }
}

}  // namespace

void write_csv(const Dataset& dataset, const std::string& path,
               const std::string& group_column, const std::string& x_label,
               const std::string& z_label) {
    dataset.validate();
    if (x_label == z_label) {
        throw ValidationError("write_csv: the two group labels must differ");
    }
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("write_csv: cannot open '" + path + "' for writing");
    }
    out << group_column;
    for (Index j = 0; j < dataset.p(); ++j) {
        if (dataset.feature_names.empty()) {
            out << ",f" << (j + 1);
        } else {
            out << ',' << dataset.feature_names[static_cast<std::size_t>(j)];
        }
    }
    out << '\n';
    write_group(out, dataset.x, x_label);
    write_group(out, dataset.z, z_label);
    if (!out) {
        throw ValidationError("write_csv: write to '" + path + "' failed");
    }
}

std::vector<std::pair<std::string, double>> load_direction_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("direction csv: cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError("direction csv: '" + path + "' is empty");
    }
    if (split_csv_line(line).size() != 2) {
        throw ValidationError("direction csv: expected two columns (feature_name, weight)");
    }
    std::vector<std::pair<std::string, double>> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != 2) {
            throw ValidationError("direction csv: row " + std::to_string(row) +
                                  " has " + std::to_string(fields.size()) + " cells, expected 2");
        }
        out.emplace_back(trim(fields[0]), parse_cell(fields[1], row, "weight"));
    }
    if (out.empty()) {
        throw ValidationError("direction csv: no weight rows in '" + path + "'");
    }
    return out;
}

Vector direction_from_named_weights(
    const std::vector<std::string>& feature_names,
    const std::vector<std::pair<std::string, double>>& weights) {
    std::unordered_map<std::string, Index> position;
    for (std::size_t i = 0; i < feature_names.size(); ++i) {
        position.emplace(feature_names[i], static_cast<Index>(i));
    }
    Vector direction = Vector::Zero(static_cast<Index>(feature_names.size()));
    for (const auto& [name, weight] : weights) {
        auto it = position.find(name);
        if (it == position.end()) {
            throw ValidationError("direction csv: feature '" + name + "' not present in the dataset");
        }
        direction(it->second) = weight;
    }
    return direction;
}

}  // namespace hdproj
