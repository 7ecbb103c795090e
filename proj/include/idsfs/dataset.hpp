#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "idsfs/util.hpp"

namespace idsfs {

enum class FeatureKind { continuous, categorical };

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::continuous;
    // Category -> positive integer code. May be pre-seeded by the schema file
    // (e.g. protocol_type tcp=1/udp=2/icmp=3); otherwise codes are assigned by
    // first appearance in the training file, 1-based. Unseen categories in
    // later files map to 0 with a warning.
    std::map<std::string, int> codes;
};

// Describes the column layout of a CSV file: an ordered feature list, the
// label column position, optionally ignored columns, and the label -> class
// id map. Loaded from a JSON schema file (layout documented in the README).
struct FeatureSchema {
    std::string name;
    std::vector<FeatureSpec> features;
    std::size_t label_column = 0;
    std::vector<std::size_t> ignored_columns;
    std::map<std::string, int> label_map;        // raw label -> class id >= 1
    std::map<int, std::string> class_names;      // class id -> display name
    bool strip_label_dot = false;                // KDD labels end in '.'
    bool drop_unmapped_labels = false;           // drop rows vs. error
    std::vector<std::string> sd_exclusion_features;

    std::size_t feature_count() const { return features.size(); }
    std::size_t column_count() const { return features.size() + 1 + ignored_columns.size(); }
    // csv column -> feature index, or nullopt for the label/ignored columns
    std::vector<std::optional<std::size_t>> column_roles() const;
    std::vector<std::size_t> sd_exclusion_indices() const;
    std::vector<int> class_ids() const;          // sorted label_map codomain
    std::string class_display_name(int class_id) const;

    void validate() const;
    static FeatureSchema from_json(const nlohmann::json& j);
    static FeatureSchema from_json_file(const std::string& path);
    nlohmann::json to_json() const;
};

// Raw CSV contents: the file bytes plus per-cell offsets. Cells are exposed
// as string views into the blob, which keeps multi-hundred-MB inputs cheap.
struct RawDataset {
    FeatureSchema schema;
    std::string blob;
    std::vector<std::uint32_t> bounds;  // rows * (cols + 1) offsets
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::string_view cell(std::size_t row, std::size_t col) const {
        const std::uint32_t begin = bounds[row * (cols + 1) + col];
        std::uint32_t end = bounds[row * (cols + 1) + col + 1];
        if (col + 1 < cols) --end;  // drop the separating comma
        return std::string_view(blob).substr(begin, end - begin);
    }
};

struct NumericDataset {
    FeatureSchema schema;
    std::size_t rows = 0;
    std::size_t cols = 0;                // == schema.feature_count()
    std::vector<double> values;          // row-major rows x cols
    std::vector<int> labels;             // class ids, length rows

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(values).subspan(r * cols, cols);
    }
    std::vector<double> column(std::size_t c) const;
    std::vector<int> present_class_ids() const;   // sorted distinct labels
    std::map<int, std::size_t> class_counts() const;
    NumericDataset subset(std::span<const std::size_t> row_indices) const;
    std::uint64_t content_hash() const;
};

// Min-max scaling fitted on one dataset and reusable on another (test data is
// scaled with the training min/max and clamped to [0,1]).
struct NormalizedView {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;          // row-major, every entry in [0,1]
    std::vector<double> col_min, col_max;

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    std::vector<double> column(std::size_t c) const;
    double scale(std::size_t c, double raw) const;        // clamped to [0,1]
    double denormalize(std::size_t c, double scaled) const;
    NumericDataset apply(const NumericDataset& other) const;
};

RawDataset load_csv(const std::string& path, const FeatureSchema& schema);
RawDataset parse_csv(std::string blob, const FeatureSchema& schema, const std::string& origin);

// register_new assigns fresh codes to first-seen categories (training data);
// frozen reuses a persisted table and maps unseen categories to 0 with a
// warning (test data).
enum class EncodePolicy { register_new, frozen };

// Converts raw cells to numbers: continuous cells are parsed, categorical
// cells are looked up (or registered) in the schema's code tables, labels are
// mapped to class ids. The returned dataset carries the updated schema.
NumericDataset encode(const RawDataset& raw, Warnings* warnings = nullptr,
                      EncodePolicy policy = EncodePolicy::register_new);

NormalizedView normalize_minmax(const NumericDataset& ds);

std::pair<NumericDataset, NumericDataset> stratified_split(const NumericDataset& ds,
                                                           double test_fraction,
                                                           std::uint64_t seed,
                                                           Warnings* warnings = nullptr);

// Validation index sets; fold f trains on every other fold.
std::vector<std::vector<std::size_t>> kfold_indices(std::span<const int> labels,
                                                    std::size_t k,
                                                    std::uint64_t seed);
std::vector<std::pair<NumericDataset, NumericDataset>> kfold_partition(const NumericDataset& ds,
                                                                       std::size_t k,
                                                                       std::uint64_t seed);

NumericDataset binarize_labels(const NumericDataset& ds, int positive_class,
                               Warnings* warnings = nullptr);

}  // namespace idsfs
