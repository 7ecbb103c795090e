#include "idsfs/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "idsfs/rng.hpp"

namespace idsfs {

namespace {

std::string kind_token(FeatureKind k) {
    return k == FeatureKind::continuous ? "continuous" : "categorical";
}

FeatureKind kind_from_token(const std::string& token, const std::string& feature) {
    if (token == "continuous") return FeatureKind::continuous;
    if (token == "categorical") return FeatureKind::categorical;
    throw std::runtime_error("schema: feature '" + feature + "' has unknown kind '" + token + "'");
}

}  // namespace

std::vector<std::optional<std::size_t>> FeatureSchema::column_roles() const {
    std::vector<std::optional<std::size_t>> roles(column_count());
    std::set<std::size_t> skip(ignored_columns.begin(), ignored_columns.end());
    skip.insert(label_column);
    std::size_t next = 0;
    for (std::size_t c = 0; c < roles.size(); ++c) {
        if (!skip.count(c)) roles[c] = next++;
    }
    return roles;
}

std::vector<std::size_t> FeatureSchema::sd_exclusion_indices() const {
    std::vector<std::size_t> out;
    for (const auto& name : sd_exclusion_features) {
        for (std::size_t i = 0; i < features.size(); ++i) {
            if (features[i].name == name) {
                out.push_back(i);
                break;
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> FeatureSchema::class_ids() const {
    std::set<int> ids;
    for (const auto& [label, id] : label_map) ids.insert(id);
    return std::vector<int>(ids.begin(), ids.end());
}

std::string FeatureSchema::class_display_name(int class_id) const {
    auto it = class_names.find(class_id);
    if (it != class_names.end()) return it->second;
    return "class " + std::to_string(class_id);
}

void FeatureSchema::validate() const {
    if (features.empty()) throw std::runtime_error("schema: no features");
    std::set<std::string> names;
    for (const auto& f : features) {
        if (f.name.empty()) throw std::runtime_error("schema: feature with empty name");
        if (!names.insert(f.name).second)
            throw std::runtime_error("schema: duplicate feature name '" + f.name + "'");
        std::set<int> codes;
        for (const auto& [cat, code] : f.codes) {
            if (code < 1)
                throw std::runtime_error("schema: feature '" + f.name + "' seeds code " +
                                         std::to_string(code) + " for '" + cat +
                                         "'; codes start at 1");
            if (!codes.insert(code).second)
                throw std::runtime_error("schema: feature '" + f.name + "' reuses code " +
                                         std::to_string(code));
        }
    }
    const std::size_t cols = column_count();
    if (label_column >= cols)
        throw std::runtime_error("schema: label_column " + std::to_string(label_column) +
                                 " out of range for " + std::to_string(cols) + " columns");
    std::set<std::size_t> ignored;
    for (std::size_t c : ignored_columns) {
        if (c >= cols)
            throw std::runtime_error("schema: ignored column " + std::to_string(c) +
                                     " out of range");
        if (c == label_column)
            throw std::runtime_error("schema: ignored column " + std::to_string(c) +
                                     " is the label column");
        if (!ignored.insert(c).second)
            throw std::runtime_error("schema: duplicate ignored column " + std::to_string(c));
    }
    if (label_map.empty()) throw std::runtime_error("schema: empty label map");
    for (const auto& [label, id] : label_map) {
        if (id < 1)
            throw std::runtime_error("schema: label '" + label + "' maps to class id " +
                                     std::to_string(id) + "; class ids start at 1");
    }
    for (const auto& name : sd_exclusion_features) {
        if (!names.count(name))
            throw std::runtime_error("schema: sd_exclusion feature '" + name + "' not defined");
    }
}

FeatureSchema FeatureSchema::from_json(const nlohmann::json& j) {
    FeatureSchema s;
    s.name = j.value("name", std::string{});
    if (!j.contains("features") || !j["features"].is_array())
        throw std::runtime_error("schema: missing 'features' array");
    for (const auto& jf : j["features"]) {
        FeatureSpec f;
        f.name = jf.at("name").get<std::string>();
        f.kind = kind_from_token(jf.value("kind", std::string("continuous")), f.name);
        if (jf.contains("codes")) {
            for (const auto& [cat, code] : jf["codes"].items())
                f.codes[cat] = code.get<int>();
        }
        s.features.push_back(std::move(f));
    }
    s.label_column = j.value("label_column", s.features.size());
    if (j.contains("ignored_columns"))
        s.ignored_columns = j["ignored_columns"].get<std::vector<std::size_t>>();
    if (!j.contains("labels") || !j["labels"].is_object())
        throw std::runtime_error("schema: missing 'labels' map");
    for (const auto& [label, id] : j["labels"].items()) s.label_map[label] = id.get<int>();
    if (j.contains("class_names")) {
        for (const auto& [id, name] : j["class_names"].items())
            s.class_names[std::stoi(id)] = name.get<std::string>();
    }
    s.strip_label_dot = j.value("strip_label_dot", false);
    s.drop_unmapped_labels = j.value("drop_unmapped_labels", false);
    if (j.contains("sd_exclusion_features"))
        s.sd_exclusion_features = j["sd_exclusion_features"].get<std::vector<std::string>>();
    s.validate();
    return s;
}

FeatureSchema FeatureSchema::from_json_file(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    try {
        return from_json(j);
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

nlohmann::json FeatureSchema::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["features"] = nlohmann::json::array();
    for (const auto& f : features) {
        nlohmann::json jf;
        jf["name"] = f.name;
        jf["kind"] = kind_token(f.kind);
        if (!f.codes.empty()) {
            nlohmann::json codes = nlohmann::json::object();
            for (const auto& [cat, code] : f.codes) codes[cat] = code;
            jf["codes"] = std::move(codes);
        }
        j["features"].push_back(std::move(jf));
    }
    j["label_column"] = label_column;
    if (!ignored_columns.empty()) j["ignored_columns"] = ignored_columns;
    nlohmann::json labels = nlohmann::json::object();
    for (const auto& [label, id] : label_map) labels[label] = id;
    j["labels"] = std::move(labels);
    if (!class_names.empty()) {
        nlohmann::json names = nlohmann::json::object();
        for (const auto& [id, n] : class_names) names[std::to_string(id)] = n;
        j["class_names"] = std::move(names);
    }
    j["strip_label_dot"] = strip_label_dot;
    j["drop_unmapped_labels"] = drop_unmapped_labels;
    if (!sd_exclusion_features.empty()) j["sd_exclusion_features"] = sd_exclusion_features;
    return j;
}

RawDataset load_csv(const std::string& path, const FeatureSchema& schema) {
    return parse_csv(read_file(path), schema, path);
}

RawDataset parse_csv(std::string blob, const FeatureSchema& schema, const std::string& origin) {
    schema.validate();
    if (blob.size() > std::numeric_limits<std::uint32_t>::max())
        throw std::runtime_error(origin + ": file exceeds 4 GiB");

    RawDataset raw;
    raw.schema = schema;
    raw.cols = schema.column_count();
    raw.blob = std::move(blob);

    const std::string& b = raw.blob;
    const std::size_t stride = raw.cols + 1;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < b.size()) {
        ++line_no;
        std::size_t eol = b.find('\n', pos);
        std::size_t end = (eol == std::string::npos) ? b.size() : eol;
        std::size_t content_end = end;
        if (content_end > pos && b[content_end - 1] == '\r') --content_end;
        if (content_end == pos && eol != std::string::npos) {  // blank line
            pos = end + 1;
            continue;
        }
        if (content_end > pos) {
            const std::size_t base = raw.bounds.size();
            raw.bounds.resize(base + stride);
            raw.bounds[base] = static_cast<std::uint32_t>(pos);
            std::size_t cell = 1;
            for (std::size_t i = pos; i < content_end; ++i) {
                if (b[i] == ',') {
                    if (cell >= raw.cols) {
                        ++cell;  // count the overflow for the message
                        continue;
                    }
                    raw.bounds[base + cell] = static_cast<std::uint32_t>(i + 1);
                    ++cell;
                }
            }
            if (cell != raw.cols)
                throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": expected " +
                                         std::to_string(raw.cols) + " columns, got " +
                                         std::to_string(cell));
            raw.bounds[base + raw.cols] = static_cast<std::uint32_t>(content_end);
            ++raw.rows;
        }
        if (eol == std::string::npos) break;
        pos = end + 1;
    }
    if (raw.rows == 0) throw std::runtime_error(origin + ": no data rows");

    // A header row would put non-numeric text in a continuous column.
    const auto roles = schema.column_roles();
    for (std::size_t c = 0; c < raw.cols; ++c) {
        if (!roles[c]) continue;
        if (schema.features[*roles[c]].kind != FeatureKind::continuous) continue;
        const std::string_view cell = raw.cell(0, c);
        double v = 0.0;
        const char* first = cell.data();
        const char* last = cell.data() + cell.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last)
            throw std::runtime_error(origin + ":1: column " + std::to_string(c) +
                                     " should be numeric but holds '" + std::string(cell) +
                                     "'; is this a header row?");
        break;
    }
    return raw;
}

NumericDataset encode(const RawDataset& raw, Warnings* warnings, EncodePolicy policy) {
    NumericDataset ds;
    ds.schema = raw.schema;
    ds.cols = raw.schema.feature_count();
    const auto roles = raw.schema.column_roles();
    const auto& label_map = ds.schema.label_map;

    std::vector<int> next_code(ds.cols, 1);
    for (std::size_t f = 0; f < ds.cols; ++f) {
        for (const auto& [cat, code] : ds.schema.features[f].codes)
            next_code[f] = std::max(next_code[f], code + 1);
    }

    std::map<std::string, std::size_t> dropped_labels;
    std::set<std::pair<std::size_t, std::string>> unseen_categories;
    ds.values.reserve(raw.rows * ds.cols);
    ds.labels.reserve(raw.rows);

    std::vector<double> row(ds.cols, 0.0);
    for (std::size_t r = 0; r < raw.rows; ++r) {
        std::string_view label_cell = raw.cell(r, raw.schema.label_column);
        if (ds.schema.strip_label_dot && !label_cell.empty() && label_cell.back() == '.')
            label_cell.remove_suffix(1);
        const auto lit = label_map.find(std::string(label_cell));
        if (lit == label_map.end()) {
            if (ds.schema.drop_unmapped_labels) {
                ++dropped_labels[std::string(label_cell)];
                continue;
            }
            throw std::runtime_error("row " + std::to_string(r + 1) + ": unknown label '" +
                                     std::string(label_cell) + "'");
        }

        for (std::size_t c = 0; c < raw.cols; ++c) {
            if (!roles[c]) continue;
            const std::size_t f = *roles[c];
            FeatureSpec& spec = ds.schema.features[f];
            const std::string_view cell = raw.cell(r, c);
            if (spec.kind == FeatureKind::continuous) {
                row[f] = parse_double(cell, "row " + std::to_string(r + 1) + ", feature '" +
                                                spec.name + "'");
            } else {
                auto it = spec.codes.find(std::string(cell));
                if (it != spec.codes.end()) {
                    row[f] = it->second;
                } else if (policy == EncodePolicy::register_new) {
                    const int code = next_code[f]++;
                    spec.codes.emplace(std::string(cell), code);
                    row[f] = code;
                } else {
                    row[f] = 0.0;
                    if (unseen_categories.emplace(f, std::string(cell)).second)
                        Warnings::emit(warnings, "feature '" + spec.name +
                                                     "': unseen category '" + std::string(cell) +
                                                     "' encoded as 0");
                }
            }
        }
        ds.values.insert(ds.values.end(), row.begin(), row.end());
        ds.labels.push_back(lit->second);
        ++ds.rows;
    }

    if (!dropped_labels.empty()) {
        std::size_t total = 0;
        std::string detail;
        for (const auto& [label, n] : dropped_labels) {
            total += n;
            if (!detail.empty()) detail += ", ";
            detail += label + " x" + std::to_string(n);
        }
        Warnings::emit(warnings, "dropped " + std::to_string(total) +
                                     " rows with labels outside the configured classes (" +
                                     detail + ")");
    }
    if (ds.rows == 0) throw std::runtime_error("encode: no rows left after label filtering");
    return ds;
}

std::vector<double> NumericDataset::column(std::size_t c) const {
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) out[r] = values[r * cols + c];
    return out;
}

std::vector<int> NumericDataset::present_class_ids() const {
    std::set<int> ids(labels.begin(), labels.end());
    return std::vector<int>(ids.begin(), ids.end());
}

std::map<int, std::size_t> NumericDataset::class_counts() const {
    std::map<int, std::size_t> counts;
    for (int l : labels) ++counts[l];
    return counts;
}

NumericDataset NumericDataset::subset(std::span<const std::size_t> row_indices) const {
    NumericDataset out;
    out.schema = schema;
    out.cols = cols;
    out.rows = row_indices.size();
    out.values.reserve(out.rows * cols);
    out.labels.reserve(out.rows);
    for (std::size_t r : row_indices) {
        const auto src = row(r);
        out.values.insert(out.values.end(), src.begin(), src.end());
        out.labels.push_back(labels[r]);
    }
    return out;
}

std::uint64_t NumericDataset::content_hash() const {
    std::uint64_t h = hash_doubles(values, 0x1d5f5 ^ rows);
    for (int l : labels) {
        h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(l));
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<double> NormalizedView::column(std::size_t c) const {
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) out[r] = values[r * cols + c];
    return out;
}

double NormalizedView::scale(std::size_t c, double raw) const {
    const double lo = col_min[c], hi = col_max[c];
    if (!(hi > lo)) return 0.0;
    return std::clamp((raw - lo) / (hi - lo), 0.0, 1.0);
}

double NormalizedView::denormalize(std::size_t c, double scaled) const {
    return col_min[c] + scaled * (col_max[c] - col_min[c]);
}

NumericDataset NormalizedView::apply(const NumericDataset& other) const {
    if (other.cols != cols) throw std::runtime_error("normalize: column count mismatch");
    NumericDataset out = other;
    for (std::size_t r = 0; r < out.rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) out.at(r, c) = scale(c, other.at(r, c));
    return out;
}

NormalizedView normalize_minmax(const NumericDataset& ds) {
    if (ds.rows == 0) throw std::runtime_error("normalize: empty dataset");
    NormalizedView view;
    view.rows = ds.rows;
    view.cols = ds.cols;
    view.col_min.assign(ds.cols, std::numeric_limits<double>::infinity());
    view.col_max.assign(ds.cols, -std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < ds.rows; ++r) {
        for (std::size_t c = 0; c < ds.cols; ++c) {
            const double v = ds.at(r, c);
            view.col_min[c] = std::min(view.col_min[c], v);
            view.col_max[c] = std::max(view.col_max[c], v);
        }
    }
    view.values.resize(ds.rows * ds.cols);
    for (std::size_t r = 0; r < ds.rows; ++r)
        for (std::size_t c = 0; c < ds.cols; ++c)
            view.values[r * ds.cols + c] = view.scale(c, ds.at(r, c));
    return view;
}

namespace {

// Class index lists in sorted-class order, each shuffled by the shared rng.
std::vector<std::pair<int, std::vector<std::size_t>>> shuffled_class_indices(
    std::span<const int> labels, Rng& rng) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    std::vector<std::pair<int, std::vector<std::size_t>>> out(by_class.begin(), by_class.end());
    for (auto& [cls, indices] : out) {
        for (std::size_t i = indices.size(); i > 1; --i)
            std::swap(indices[i - 1], indices[rng.uniform_index(i)]);
    }
    return out;
}

}  // namespace

std::pair<NumericDataset, NumericDataset> stratified_split(const NumericDataset& ds,
                                                           double test_fraction,
                                                           std::uint64_t seed,
                                                           Warnings* warnings) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw std::runtime_error("stratified_split: test_fraction must be in (0,1)");
    Rng rng(derive_seed(seed, "stratified_split"));
    std::vector<std::size_t> test_rows;
    for (auto& [cls, indices] : shuffled_class_indices(ds.labels, rng)) {
        if (indices.size() < 2) {
            Warnings::emit(warnings, "class " + std::to_string(cls) +
                                         " has a single sample; assigned to train");
            continue;
        }
        auto want = static_cast<std::size_t>(std::llround(
            static_cast<double>(indices.size()) * test_fraction));
        want = std::min(want, indices.size() - 1);
        test_rows.insert(test_rows.end(), indices.begin(), indices.begin() + want);
    }
    std::sort(test_rows.begin(), test_rows.end());
    std::vector<std::size_t> train_rows;
    train_rows.reserve(ds.rows - test_rows.size());
    std::size_t t = 0;
    for (std::size_t i = 0; i < ds.rows; ++i) {
        if (t < test_rows.size() && test_rows[t] == i)
            ++t;
        else
            train_rows.push_back(i);
    }
    return {ds.subset(train_rows), ds.subset(test_rows)};
}

std::vector<std::vector<std::size_t>> kfold_indices(std::span<const int> labels, std::size_t k,
                                                    std::uint64_t seed) {
    if (k < 2) throw std::runtime_error("kfold: k must be at least 2");
    if (k > labels.size())
        throw std::runtime_error("kfold: k=" + std::to_string(k) + " exceeds " +
                                 std::to_string(labels.size()) + " samples");
    Rng rng(derive_seed(seed, "kfold"));
    std::vector<std::vector<std::size_t>> folds(k);
    // One global round-robin cursor keeps overall fold sizes within 1 of each
    // other while each class is still spread as evenly as possible.
    std::size_t cursor = 0;
    for (auto& [cls, indices] : shuffled_class_indices(labels, rng)) {
        for (std::size_t idx : indices) folds[cursor++ % k].push_back(idx);
    }
    for (auto& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

std::vector<std::pair<NumericDataset, NumericDataset>> kfold_partition(const NumericDataset& ds,
                                                                       std::size_t k,
                                                                       std::uint64_t seed) {
    const auto folds = kfold_indices(ds.labels, k, seed);
    std::vector<std::pair<NumericDataset, NumericDataset>> out;
    out.reserve(k);
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<std::size_t> train_rows;
        train_rows.reserve(ds.rows - folds[f].size());
        for (std::size_t g = 0; g < k; ++g) {
            if (g == f) continue;
            train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
        }
        std::sort(train_rows.begin(), train_rows.end());
        out.emplace_back(ds.subset(train_rows), ds.subset(folds[f]));
    }
    return out;
}

NumericDataset binarize_labels(const NumericDataset& ds, int positive_class, Warnings* warnings) {
    const auto known = ds.schema.class_ids();
    if (!std::binary_search(known.begin(), known.end(), positive_class))
        throw std::runtime_error("binarize: unknown class id " + std::to_string(positive_class));
    NumericDataset out = ds;
    bool seen = false;
    for (auto& l : out.labels) {
        if (l == positive_class) {
            l = 1;
            seen = true;
        } else {
            l = 0;
        }
    }
    if (!seen)
        Warnings::emit(warnings, "class " + std::to_string(positive_class) +
                                     " absent from the data; all labels are 0");
    return out;
}

}  // namespace idsfs
