#include "idsfs/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "idsfs/rng.hpp"

namespace idsfs {

std::int64_t ConfusionMatrix::row_sum(std::size_t i) const {
    std::int64_t s = 0;
    for (std::size_t j = 0; j < size(); ++j) s += at(i, j);
    return s;
}

std::int64_t ConfusionMatrix::col_sum(std::size_t i) const {
    std::int64_t s = 0;
    for (std::size_t j = 0; j < size(); ++j) s += at(j, i);
    return s;
}

std::int64_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

ConfusionMatrix confusion(std::span<const int> actual, std::span<const int> predicted) {
    std::set<int> ids(actual.begin(), actual.end());
    ids.insert(predicted.begin(), predicted.end());
    const std::vector<int> class_ids(ids.begin(), ids.end());
    return confusion(actual, predicted, class_ids);
}

ConfusionMatrix confusion(std::span<const int> actual, std::span<const int> predicted,
                          std::span<const int> class_ids) {
    if (actual.size() != predicted.size())
        throw std::runtime_error("confusion: length mismatch");
    ConfusionMatrix cm;
    cm.class_ids.assign(class_ids.begin(), class_ids.end());
    cm.counts.assign(cm.size() * cm.size(), 0);
    std::map<int, std::size_t> index;
    for (std::size_t i = 0; i < cm.class_ids.size(); ++i) index[cm.class_ids[i]] = i;
    for (std::size_t s = 0; s < actual.size(); ++s) {
        const auto a = index.find(actual[s]);
        const auto p = index.find(predicted[s]);
        if (a == index.end())
            throw std::runtime_error("confusion: actual label " + std::to_string(actual[s]) +
                                     " outside the class set");
        if (p == index.end())
            throw std::runtime_error("confusion: predicted label " + std::to_string(predicted[s]) +
                                     " outside the class set");
        ++cm.at(a->second, p->second);
    }
    return cm;
}

namespace {

double safe_rate(std::int64_t num, std::int64_t den, bool& flag) {
    if (den == 0) {
        flag = true;
        return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MetricsReport metrics(const ConfusionMatrix& cm) {
    std::vector<std::int64_t> supports(cm.size());
    for (std::size_t i = 0; i < cm.size(); ++i) supports[i] = cm.row_sum(i);
    return metrics(cm, supports);
}

MetricsReport metrics(const ConfusionMatrix& cm, std::span<const std::int64_t> supports) {
    if (supports.size() != cm.size()) throw std::runtime_error("metrics: support size mismatch");
    const std::int64_t n = cm.total();
    if (n <= 0) throw std::runtime_error("metrics: empty confusion matrix");

    MetricsReport report;
    report.class_ids = cm.class_ids;
    report.supports.assign(supports.begin(), supports.end());
    report.per_class.resize(cm.size());

    for (std::size_t i = 0; i < cm.size(); ++i) {
        const std::int64_t tp = cm.at(i, i);
        const std::int64_t fn = cm.row_sum(i) - tp;
        const std::int64_t fp = cm.col_sum(i) - tp;
        const std::int64_t tn = n - tp - fn - fp;
        ClassMetrics& m = report.per_class[i];
        m.detection_rate = safe_rate(tp, tp + fn, m.zero_denominator);
        m.precision = safe_rate(tp, tp + fp, m.zero_denominator);
        m.false_alarm_rate = safe_rate(fp, fp + tn, m.zero_denominator);
        m.accuracy = safe_rate(tp + tn, n, m.zero_denominator);
        if (m.precision + m.detection_rate > 0.0)
            m.f_measure =
                2.0 * m.precision * m.detection_rate / (m.precision + m.detection_rate);
        else
            m.zero_denominator = true;
    }

    const auto weigh = [&](auto field) {
        std::vector<double> v(cm.size());
        for (std::size_t i = 0; i < cm.size(); ++i) v[i] = report.per_class[i].*field;
        return weighted_average(v, report.supports);
    };
    report.weighted.accuracy = weigh(&ClassMetrics::accuracy);
    report.weighted.detection_rate = weigh(&ClassMetrics::detection_rate);
    report.weighted.precision = weigh(&ClassMetrics::precision);
    report.weighted.false_alarm_rate = weigh(&ClassMetrics::false_alarm_rate);
    report.weighted.f_measure = weigh(&ClassMetrics::f_measure);
    for (const auto& m : report.per_class) report.weighted.zero_denominator |= m.zero_denominator;
    return report;
}

double weighted_average(std::span<const double> values, std::span<const std::int64_t> supports) {
    if (values.size() != supports.size())
        throw std::runtime_error("weighted_average: size mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        num += static_cast<double>(supports[i]) * values[i];
        den += static_cast<double>(supports[i]);
    }
    return den > 0.0 ? num / den : 0.0;
}

namespace {

nlohmann::json class_metrics_to_json(const ClassMetrics& m) {
    nlohmann::json j;
    j["accuracy"] = m.accuracy;
    j["detection_rate"] = m.detection_rate;
    j["precision"] = m.precision;
    j["false_alarm_rate"] = m.false_alarm_rate;
    j["f_measure"] = m.f_measure;
    j["zero_denominator"] = m.zero_denominator;
    return j;
}

ClassMetrics class_metrics_from_json(const nlohmann::json& j) {
    ClassMetrics m;
    m.accuracy = j.at("accuracy").get<double>();
    m.detection_rate = j.at("detection_rate").get<double>();
    m.precision = j.at("precision").get<double>();
    m.false_alarm_rate = j.at("false_alarm_rate").get<double>();
    m.f_measure = j.at("f_measure").get<double>();
    m.zero_denominator = j.value("zero_denominator", false);
    return m;
}

}  // namespace

nlohmann::json MetricsReport::to_json() const {
    nlohmann::json j;
    j["class_ids"] = class_ids;
    j["supports"] = supports;
    j["per_class"] = nlohmann::json::array();
    for (const auto& m : per_class) j["per_class"].push_back(class_metrics_to_json(m));
    j["weighted"] = class_metrics_to_json(weighted);
    return j;
}

MetricsReport MetricsReport::from_json(const nlohmann::json& j) {
    MetricsReport r;
    r.class_ids = j.at("class_ids").get<std::vector<int>>();
    r.supports = j.at("supports").get<std::vector<std::int64_t>>();
    for (const auto& jm : j.at("per_class")) r.per_class.push_back(class_metrics_from_json(jm));
    r.weighted = class_metrics_from_json(j.at("weighted"));
    return r;
}

nlohmann::json confusion_to_json(const ConfusionMatrix& cm) {
    nlohmann::json j;
    j["class_ids"] = cm.class_ids;
    j["counts"] = nlohmann::json::array();
    for (std::size_t i = 0; i < cm.size(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t k = 0; k < cm.size(); ++k) row.push_back(cm.at(i, k));
        j["counts"].push_back(std::move(row));
    }
    return j;
}

ConfusionMatrix confusion_from_json(const nlohmann::json& j) {
    ConfusionMatrix cm;
    cm.class_ids = j.at("class_ids").get<std::vector<int>>();
    cm.counts.assign(cm.size() * cm.size(), 0);
    const auto& rows = j.at("counts");
    if (rows.size() != cm.size()) throw std::runtime_error("confusion json: shape mismatch");
    for (std::size_t i = 0; i < cm.size(); ++i)
        for (std::size_t k = 0; k < cm.size(); ++k) cm.at(i, k) = rows[i][k].get<std::int64_t>();
    return cm;
}

NumericDataset project(const NumericDataset& ds, std::span<const std::size_t> selected) {
    if (selected.empty()) throw std::runtime_error("project: empty selection");
    std::vector<std::size_t> cols(selected.begin(), selected.end());
    std::sort(cols.begin(), cols.end());
    for (std::size_t c : cols)
        if (c >= ds.cols)
            throw std::runtime_error("project: feature index " + std::to_string(c) +
                                     " out of range");

    NumericDataset out;
    out.schema = ds.schema;
    out.schema.features.clear();
    out.schema.sd_exclusion_features.clear();
    out.schema.ignored_columns.clear();
    for (std::size_t c : cols) {
        if (c < ds.schema.features.size())
            out.schema.features.push_back(ds.schema.features[c]);
    }
    out.schema.label_column = out.schema.features.size();
    out.rows = ds.rows;
    out.cols = cols.size();
    out.labels = ds.labels;
    out.values.resize(out.rows * out.cols);
    for (std::size_t r = 0; r < ds.rows; ++r)
        for (std::size_t k = 0; k < cols.size(); ++k)
            out.values[r * out.cols + k] = ds.at(r, cols[k]);
    return out;
}

namespace {

double gini(const std::map<int, std::size_t>& counts, std::size_t n) {
    double g = 1.0;
    for (const auto& [cls, c] : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(n);
        g -= p * p;
    }
    return g;
}

int majority_class(const std::map<int, std::size_t>& counts) {
    int best = 0;
    std::size_t best_count = 0;
    bool first = true;
    for (const auto& [cls, c] : counts) {  // ascending class id, so ties keep the smaller
        if (first || c > best_count) {
            best = cls;
            best_count = c;
            first = false;
        }
    }
    return best;
}

}  // namespace

std::size_t TreeModel::leaf_count() const {
    std::size_t n = 0;
    for (const auto& node : nodes_)
        if (node.feature < 0) ++n;
    return n;
}

std::size_t TreeModel::depth() const {
    if (nodes_.empty()) return 0;
    std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
    std::size_t deepest = 0;
    while (!stack.empty()) {
        auto [idx, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        const Node& node = nodes_[idx];
        if (node.feature >= 0) {
            stack.push_back({node.left, d + 1});
            stack.push_back({node.right, d + 1});
        }
    }
    return deepest;
}

int TreeModel::predict_row(std::span<const double> row) const {
    if (row.size() != width_) throw std::runtime_error("tree: row width mismatch");
    int idx = 0;
    for (;;) {
        const Node& node = nodes_[idx];
        if (node.feature < 0) return node.klass;
        idx = row[node.feature] <= node.threshold ? node.left : node.right;
    }
}

TreeModel train_tree(const NumericDataset& train, const TreeParams& params) {
    if (train.rows < 1) throw std::runtime_error("train_tree: empty training set");
    TreeModel model;
    model.width_ = train.cols;

    struct Pending {
        std::vector<std::size_t> rows;
        int node;
        std::size_t depth;
    };

    std::vector<std::size_t> all(train.rows);
    std::iota(all.begin(), all.end(), 0);
    model.nodes_.emplace_back();
    std::vector<Pending> stack;
    stack.push_back({std::move(all), 0, 0});

    while (!stack.empty()) {
        Pending task = std::move(stack.back());
        stack.pop_back();
        const std::size_t n = task.rows.size();

        std::map<int, std::size_t> counts;
        for (std::size_t r : task.rows) ++counts[train.labels[r]];

        const bool pure = counts.size() == 1;
        if (pure || n < params.min_samples_split || task.depth >= params.max_depth) {
            model.nodes_[task.node].klass = majority_class(counts);
            continue;
        }

        // Greedy Gini split: midpoints of consecutive distinct values, values
        // equal to the threshold routed left.
        // Any candidate is acceptable: Gini is concave, so no split increases
        // weighted impurity, and patterns like XOR need zero-gain root splits.
        int best_feature = -1;
        double best_threshold = 0.0;
        double best_impurity = std::numeric_limits<double>::infinity();
        std::vector<std::pair<double, int>> sorted(n);
        for (std::size_t f = 0; f < train.cols; ++f) {
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t r = task.rows[i];
                sorted[i] = {train.at(r, f), train.labels[r]};
            }
            std::sort(sorted.begin(), sorted.end());
            if (sorted.front().first == sorted.back().first) continue;

            std::map<int, std::size_t> left;
            std::map<int, std::size_t> right = counts;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                ++left[sorted[i].second];
                auto it = right.find(sorted[i].second);
                if (--it->second == 0) right.erase(it);
                if (sorted[i].first == sorted[i + 1].first) continue;
                const std::size_t nl = i + 1, nr = n - nl;
                const double impurity =
                    (static_cast<double>(nl) * gini(left, nl) +
                     static_cast<double>(nr) * gini(right, nr)) /
                    static_cast<double>(n);
                if (impurity < best_impurity) {
                    best_impurity = impurity;
                    best_feature = static_cast<int>(f);
                    best_threshold = sorted[i].first + 0.5 * (sorted[i + 1].first - sorted[i].first);
                }
            }
        }

        if (best_feature < 0) {
            model.nodes_[task.node].klass = majority_class(counts);
            continue;
        }

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : task.rows) {
            if (train.at(r, best_feature) <= best_threshold)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }

        const int left_node = static_cast<int>(model.nodes_.size());
        model.nodes_.emplace_back();
        const int right_node = static_cast<int>(model.nodes_.size());
        model.nodes_.emplace_back();
        TreeModel::Node& node = model.nodes_[task.node];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = left_node;
        node.right = right_node;
        stack.push_back({std::move(right_rows), right_node, task.depth + 1});
        stack.push_back({std::move(left_rows), left_node, task.depth + 1});
    }
    return model;
}

std::vector<int> predict_tree(const TreeModel& model, const NumericDataset& rows) {
    std::vector<int> out(rows.rows);
    for (std::size_t r = 0; r < rows.rows; ++r) out[r] = model.predict_row(rows.row(r));
    return out;
}

std::vector<int> knn_predict(const NumericDataset& train, const NumericDataset& queries,
                             std::size_t k) {
    if (train.rows == 0) throw std::runtime_error("knn: empty training set");
    if (k < 1 || k > train.rows)
        throw std::runtime_error("knn: k must be in [1, training size]");
    if (train.cols != queries.cols) throw std::runtime_error("knn: width mismatch");

    std::vector<int> out(queries.rows);
    std::vector<std::pair<double, std::size_t>> dist(train.rows);
    for (std::size_t q = 0; q < queries.rows; ++q) {
        const auto qr = queries.row(q);
        for (std::size_t t = 0; t < train.rows; ++t) {
            const auto tr = train.row(t);
            double d2 = 0.0;
            for (std::size_t c = 0; c < train.cols; ++c) {
                const double d = qr[c] - tr[c];
                d2 += d * d;
            }
            dist[t] = {d2, t};
        }
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        std::map<int, std::size_t> votes;
        for (std::size_t i = 0; i < k; ++i) ++votes[train.labels[dist[i].second]];
        out[q] = majority_class(votes);
    }
    return out;
}

namespace {

class DtreeClassifier final : public Classifier {
public:
    explicit DtreeClassifier(TreeParams params) : params_(params) {}
    void fit(const NumericDataset& train) override { model_ = train_tree(train, params_); }
    std::vector<int> predict(const NumericDataset& rows) const override {
        return predict_tree(model_, rows);
    }
    std::string name() const override { return "dtree"; }

private:
    TreeParams params_;
    TreeModel model_;
};

class KnnClassifier final : public Classifier {
public:
    explicit KnnClassifier(std::size_t k) : k_(k) {}
    void fit(const NumericDataset& train) override { train_ = train; }
    std::vector<int> predict(const NumericDataset& rows) const override {
        return knn_predict(train_, rows, std::min(k_, train_.rows));
    }
    std::string name() const override { return "knn" + std::to_string(k_); }

private:
    std::size_t k_;
    NumericDataset train_;
};

}  // namespace

ClassifierSpec ClassifierSpec::from_token(std::string_view token) {
    ClassifierSpec spec;
    spec.token = std::string(token);
    if (token == "dtree") return spec;
    if (token == "knn5") {
        spec.knn_k = 5;
        return spec;
    }
    throw std::runtime_error("unknown classifier token '" + std::string(token) +
                             "' (expected dtree or knn5)");
}

std::unique_ptr<Classifier> make_classifier(const ClassifierSpec& spec) {
    if (spec.token == "dtree") return std::make_unique<DtreeClassifier>(spec.tree);
    if (spec.token == "knn5") return std::make_unique<KnnClassifier>(spec.knn_k);
    throw std::runtime_error("unknown classifier token '" + spec.token + "'");
}

ConfusionMatrix CrossValidation::pooled_confusion() const {
    if (fold_confusions.empty()) throw std::runtime_error("no folds to pool");
    ConfusionMatrix pooled = fold_confusions.front();
    for (std::size_t f = 1; f < fold_confusions.size(); ++f) {
        const ConfusionMatrix& cm = fold_confusions[f];
        if (cm.class_ids != pooled.class_ids)
            throw std::runtime_error("fold confusion matrices disagree on classes");
        for (std::size_t i = 0; i < pooled.counts.size(); ++i) pooled.counts[i] += cm.counts[i];
    }
    return pooled;
}

CrossValidation cross_validate(const NumericDataset& ds, std::span<const std::size_t> selected,
                               const ClassifierSpec& spec, std::size_t k, std::uint64_t seed,
                               Warnings* warnings) {
    const NumericDataset projected = project(ds, selected);
    const std::vector<int> class_ids = projected.present_class_ids();
    const auto folds = kfold_partition(projected, k, seed);

    CrossValidation cv;
    cv.folds.reserve(k);
    cv.fold_confusions.reserve(k);
    cv.single_class_fold.resize(k, false);
    double sum = 0.0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const auto& [train, val] = folds[f];
        if (train.present_class_ids().size() < 2 || val.present_class_ids().size() < 2) {
            cv.single_class_fold[f] = true;
            Warnings::emit(warnings, "fold " + std::to_string(f) + " has a single class");
        }
        const NormalizedView scaling = normalize_minmax(train);
        const NumericDataset train_scaled = scaling.apply(train);
        const NumericDataset val_scaled = scaling.apply(val);
        auto classifier = make_classifier(spec);
        classifier->fit(train_scaled);
        const std::vector<int> predicted = classifier->predict(val_scaled);
        ConfusionMatrix cm = confusion(val.labels, predicted, class_ids);
        cv.folds.push_back(metrics(cm));
        cv.fold_confusions.push_back(std::move(cm));
        const double acc = cv.folds.back().weighted.accuracy;
        sum += acc;
        cv.min_accuracy = f == 0 ? acc : std::min(cv.min_accuracy, acc);
    }
    cv.mean_accuracy = sum / static_cast<double>(folds.size());
    return cv;
}

TTestResult t_test(std::span<const double> sample_a, std::span<const double> sample_b) {
    if (sample_a.size() < 2 || sample_b.size() < 2)
        throw std::runtime_error("t_test: each sample needs at least 2 values");
    const auto stats = [](std::span<const double> s) {
        const double n = static_cast<double>(s.size());
        double mean = 0.0;
        for (double v : s) mean += v;
        mean /= n;
        double var = 0.0;
        for (double v : s) var += (v - mean) * (v - mean);
        var /= (n - 1.0);
        return std::pair{mean, var};
    };
    const auto [ma, va] = stats(sample_a);
    const auto [mb, vb] = stats(sample_b);
    const double na = static_cast<double>(sample_a.size());
    const double nb = static_cast<double>(sample_b.size());
    const double sa = va / na, sb = vb / nb;

    TTestResult result;
    if (sa + sb <= 0.0) {
        if (ma != mb)
            throw std::runtime_error("t_test: zero variance in both samples with unequal means");
        result.degrees_of_freedom = na + nb - 2.0;
        return result;  // t = 0, p = 1
    }
    result.t = (ma - mb) / std::sqrt(sa + sb);
    result.degrees_of_freedom =
        (sa + sb) * (sa + sb) /
        (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    const boost::math::students_t dist(result.degrees_of_freedom);
    result.p_value = 2.0 * boost::math::cdf(dist, -std::abs(result.t));
    result.significant = result.p_value < 0.05;
    return result;
}

}  // namespace idsfs
