// ============================================================================
// Two-sample data handling: the Dataset container, CSV input/output, fold
// plans for cross-fitting, and the sign-alignment convention used when
// estimated directions from different folds are combined.
// ============================================================================

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hdproj/types.hpp"

namespace hdproj {

enum class Group { x, z };

struct Dataset {
    Matrix x;  // n_x by p, one sample per row
    Matrix z;  // n_z by p
    std::vector<std::string> feature_names;  // size p, or empty

    Index n_x() const { return x.rows(); }
    Index n_z() const { return z.rows(); }
    Index p() const { return x.cols(); }

    // Enforces: matching column counts, at least 2 samples per group, all
    // entries finite, feature_names either empty or of length p.
    void validate() const;
};

// How a projection direction was obtained.  pc directions carry the
// component index (1-based) and are kept at unit norm.
enum class DirectionOrigin { pc, classifier, anchored, user };

struct Direction {
    Vector weights;
    DirectionOrigin origin = DirectionOrigin::user;
    int pc_index = 0;  // 1-based; meaningful only when origin == pc

    Index nonzero_count() const;
};

// Partition of each group's sample indices into m folds.  Assignments are
// produced by a seeded shuffle within each group followed by round-robin
// dealing, so fold sizes within a group differ by at most one and the two
// groups' assignments are derived from independent substreams (changing n_z
// never perturbs the x-side assignment).
struct FoldPlan {
    int m = 0;
    std::vector<int> x_fold;  // size n_x, entries in [0, m)
    std::vector<int> z_fold;  // size n_z

    std::vector<Index> x_in(int fold) const;
    std::vector<Index> x_out(int fold) const;
    std::vector<Index> z_in(int fold) const;
    std::vector<Index> z_out(int fold) const;
};

FoldPlan make_folds(Index n_x, Index n_z, int m, std::uint64_t seed);

// Returns candidate, negated if reference.dot(candidate) < 0.  An exact zero
// dot product leaves the candidate unchanged.  Idempotent once aligned.
Vector align_sign(const Vector& reference, const Vector& candidate);

// Rows of the named columns, in sample order.
Matrix rows_at(const Matrix& samples, const std::vector<Index>& idx);

struct CsvDataset {
    Dataset data;
    std::string x_label;
    std::string z_label;
};

// Strict CSV reader.  The file must have a header row containing
// group_column; every other column is parsed as a double (non-numeric or
// non-finite cells are an error naming row and column).  When labels is
// empty the first label encountered maps to group X and the second to Z;
// any third distinct label is an error either way.
CsvDataset load_csv(const std::string& path, const std::string& group_column,
                    std::optional<std::pair<std::string, std::string>> labels = {});

// Inverse of load_csv: X rows first, then Z rows.  Values are written with
// shortest round-trip formatting, so load_csv(write_csv(d)) == d bit for bit.
// Missing feature names are synthesized as f1..fp.
void write_csv(const Dataset& dataset, const std::string& path,
               const std::string& group_column, const std::string& x_label,
               const std::string& z_label);

// Two-column CSV (feature_name, weight) with a header row.
std::vector<std::pair<std::string, double>> load_direction_csv(const std::string& path);

// Maps named weights onto the dataset's feature order.  Names absent from
// the file default to weight 0; names absent from the dataset are an error.
Vector direction_from_named_weights(
    const std::vector<std::string>& feature_names,
    const std::vector<std::pair<std::string, double>>& weights);

}  // namespace hdproj
