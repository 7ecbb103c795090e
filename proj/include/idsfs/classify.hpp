#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "idsfs/dataset.hpp"

namespace idsfs {

struct ConfusionMatrix {
    std::vector<int> class_ids;          // sorted
    std::vector<std::int64_t> counts;    // C x C row-major, rows = actual

    std::size_t size() const { return class_ids.size(); }
    std::int64_t at(std::size_t actual, std::size_t predicted) const {
        return counts[actual * class_ids.size() + predicted];
    }
    std::int64_t& at(std::size_t actual, std::size_t predicted) {
        return counts[actual * class_ids.size() + predicted];
    }
    std::int64_t row_sum(std::size_t i) const;
    std::int64_t col_sum(std::size_t i) const;
    std::int64_t total() const;
};

ConfusionMatrix confusion(std::span<const int> actual, std::span<const int> predicted);
ConfusionMatrix confusion(std::span<const int> actual, std::span<const int> predicted,
                          std::span<const int> class_ids);

// All rates are fractions in [0,1]; reports render them as percentages.
struct ClassMetrics {
    double accuracy = 0.0;
    double detection_rate = 0.0;
    double precision = 0.0;
    double false_alarm_rate = 0.0;
    double f_measure = 0.0;
    bool zero_denominator = false;   // some rate had an empty denominator
};

struct MetricsReport {
    std::vector<int> class_ids;
    std::vector<std::int64_t> supports;
    std::vector<ClassMetrics> per_class;   // one-vs-rest, per class
    ClassMetrics weighted;                 // support-weighted averages

    nlohmann::json to_json() const;
    static MetricsReport from_json(const nlohmann::json& j);
};

nlohmann::json confusion_to_json(const ConfusionMatrix& cm);
ConfusionMatrix confusion_from_json(const nlohmann::json& j);

// Per-class one-vs-rest TP/FP/FN/TN, then rate formulas; weighted fields are
// support-weighted means. Zero-denominator rates report 0 and set the flag.
MetricsReport metrics(const ConfusionMatrix& cm);
MetricsReport metrics(const ConfusionMatrix& cm, std::span<const std::int64_t> supports);

// Support-weighted mean (sum N_i * v_i / sum N_i).
double weighted_average(std::span<const double> values, std::span<const std::int64_t> supports);

NumericDataset project(const NumericDataset& ds, std::span<const std::size_t> selected);

struct TreeParams {
    std::size_t max_depth = std::numeric_limits<std::size_t>::max();
    std::size_t min_samples_split = 2;
};

// Binary CART-style tree: greedy Gini splits over midpoints of sorted unique
// values; values equal to a threshold go left. Leaves predict the majority
// class (ties to the smallest class id).
class TreeModel {
public:
    struct Node {
        int feature = -1;        // -1 for leaves
        double threshold = 0.0;  // x <= threshold goes left
        int left = -1;
        int right = -1;
        int klass = -1;          // leaf prediction
    };

    std::size_t width() const { return width_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t leaf_count() const;
    std::size_t depth() const;
    int predict_row(std::span<const double> row) const;

    friend TreeModel train_tree(const NumericDataset& train, const TreeParams& params);

private:
    std::vector<Node> nodes_;
    std::size_t width_ = 0;
};

TreeModel train_tree(const NumericDataset& train, const TreeParams& params = {});
std::vector<int> predict_tree(const TreeModel& model, const NumericDataset& rows);

// Majority class among the k Euclidean-nearest training rows. Distance ties
// prefer the smaller training index; vote ties the smallest class id.
// Expects the caller to feed normalized values for both sides.
std::vector<int> knn_predict(const NumericDataset& train, const NumericDataset& queries,
                             std::size_t k);

// Classifier seam: additional algorithms plug in behind this interface.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual void fit(const NumericDataset& train) = 0;
    virtual std::vector<int> predict(const NumericDataset& rows) const = 0;
    virtual std::string name() const = 0;
};

struct ClassifierSpec {
    std::string token = "dtree";   // "dtree" | "knn5"
    TreeParams tree;
    std::size_t knn_k = 5;

    static ClassifierSpec from_token(std::string_view token);
};

std::unique_ptr<Classifier> make_classifier(const ClassifierSpec& spec);

struct CrossValidation {
    std::vector<MetricsReport> folds;
    std::vector<ConfusionMatrix> fold_confusions;
    std::vector<bool> single_class_fold;   // flagged, still evaluated
    double mean_accuracy = 0.0;            // mean over folds of weighted accuracy
    double min_accuracy = 0.0;

    ConfusionMatrix pooled_confusion() const;
};

// k-fold cross-validation of one feature subset: project, stratified folds,
// per-fold min-max scaling fitted on the training part.
CrossValidation cross_validate(const NumericDataset& ds, std::span<const std::size_t> selected,
                               const ClassifierSpec& spec, std::size_t k, std::uint64_t seed,
                               Warnings* warnings = nullptr);

struct TTestResult {
    double t = 0.0;
    double degrees_of_freedom = 0.0;
    double p_value = 1.0;     // two-sided
    bool significant = false; // p < 0.05
};

// Welch two-sample t-test with Welch-Satterthwaite degrees of freedom.
TTestResult t_test(std::span<const double> sample_a, std::span<const double> sample_b);

}  // namespace idsfs
