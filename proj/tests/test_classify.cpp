#include <doctest.h>

#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "idsfs/classify.hpp"
#include "idsfs/rng.hpp"
#include "support/synthetic.hpp"

using namespace idsfs;

namespace {

NumericDataset labeled(std::vector<std::vector<double>> rows, std::vector<int> labels) {
    NumericDataset ds;
    ds.schema = testsupport::toy_schema();
    ds.rows = rows.size();
    ds.cols = rows.empty() ? 0 : rows[0].size();
    for (const auto& row : rows) ds.values.insert(ds.values.end(), row.begin(), row.end());
    ds.labels = std::move(labels);
    return ds;
}

}  // namespace

TEST_CASE("confusion matrices count actual/predicted pairs") {
    const std::vector<int> actual{1, 1, 2};
    const std::vector<int> predicted{1, 2, 2};
    const ConfusionMatrix cm = confusion(actual, predicted);
    REQUIRE(cm.class_ids == std::vector<int>{1, 2});
    CHECK(cm.at(0, 0) == 1);
    CHECK(cm.at(0, 1) == 1);
    CHECK(cm.at(1, 0) == 0);
    CHECK(cm.at(1, 1) == 1);
    CHECK(cm.total() == 3);
    CHECK(cm.row_sum(0) == 2);
    CHECK(cm.col_sum(1) == 2);
}

TEST_CASE("perfect predictions produce a diagonal matrix") {
    const std::vector<int> labels{3, 1, 2, 1, 3};
    const ConfusionMatrix cm = confusion(labels, labels);
    for (std::size_t i = 0; i < cm.size(); ++i)
        for (std::size_t j = 0; j < cm.size(); ++j)
            CHECK(cm.at(i, j) == (i == j ? cm.row_sum(i) : 0));
}

TEST_CASE("labels outside the declared class set are rejected") {
    const std::vector<int> actual{1, 2};
    const std::vector<int> predicted{1, 9};
    const std::vector<int> ids{1, 2};
    CHECK_THROWS_AS(confusion(actual, predicted, ids), std::runtime_error);
}

TEST_CASE("detection rate, precision and false alarms follow their definitions") {
    // One-vs-rest for class 1: TP=90, FN=10, FP=5, TN=95.
    ConfusionMatrix cm;
    cm.class_ids = {1, 2};
    cm.counts = {90, 10, 5, 95};
    const MetricsReport report = metrics(cm);
    const ClassMetrics& c1 = report.per_class[0];
    CHECK(c1.detection_rate == doctest::Approx(0.90));
    CHECK(c1.precision == doctest::Approx(90.0 / 95.0));
    CHECK(c1.false_alarm_rate == doctest::Approx(0.05));
    CHECK(c1.accuracy == doctest::Approx(185.0 / 200.0));
    const double f = 2 * c1.precision * c1.detection_rate / (c1.precision + c1.detection_rate);
    CHECK(c1.f_measure == doctest::Approx(f));
    CHECK(report.supports == std::vector<std::int64_t>{100, 100});
}

TEST_CASE("f-measure equals precision when precision equals recall") {
    ConfusionMatrix cm;
    cm.class_ids = {1, 2};
    cm.counts = {80, 20, 20, 80};
    const MetricsReport report = metrics(cm);
    CHECK(report.per_class[0].precision == doctest::Approx(report.per_class[0].detection_rate));
    CHECK(report.per_class[0].f_measure == doctest::Approx(report.per_class[0].precision));
}

TEST_CASE("zero-denominator rates report zero and raise the flag") {
    // Class 2 is never predicted: its precision denominator is empty.
    ConfusionMatrix cm;
    cm.class_ids = {1, 2};
    cm.counts = {10, 0, 4, 0};
    const MetricsReport report = metrics(cm);
    CHECK(report.per_class[1].precision == 0.0);
    CHECK(report.per_class[1].zero_denominator);
    CHECK(!report.per_class[0].zero_denominator);
}

TEST_CASE("weighted averages use class supports") {
    const std::vector<double> values{1.0, 0.0};
    const std::vector<std::int64_t> supports{3, 1};
    CHECK(weighted_average(values, supports) == doctest::Approx(0.75));

    // Reference five-class accuracies and their test-set supports.
    const std::vector<double> accs{99.32, 99.91, 99.87, 99.98, 99.43};
    const std::vector<std::int64_t> n{60593, 222200, 2377, 39, 5993};
    CHECK(weighted_average(accs, n) == doctest::Approx(99.78).epsilon(1e-4));
}

TEST_CASE("equal supports reduce the weighted mean to the plain mean") {
    const std::vector<double> values{0.2, 0.4, 0.9};
    const std::vector<std::int64_t> supports{7, 7, 7};
    CHECK(weighted_average(values, supports) == doctest::Approx(0.5));
}

TEST_CASE("metric reports are stable under an order-preserving relabeling") {
    ConfusionMatrix cm;
    cm.class_ids = {1, 2, 3};
    cm.counts = {50, 3, 2, 4, 60, 1, 2, 2, 70};
    ConfusionMatrix shifted = cm;
    shifted.class_ids = {11, 12, 13};
    const MetricsReport a = metrics(cm);
    const MetricsReport b = metrics(shifted);
    for (std::size_t i = 0; i < a.per_class.size(); ++i) {
        CHECK(a.per_class[i].accuracy == b.per_class[i].accuracy);
        CHECK(a.per_class[i].detection_rate == b.per_class[i].detection_rate);
        CHECK(a.per_class[i].precision == b.per_class[i].precision);
        CHECK(a.per_class[i].false_alarm_rate == b.per_class[i].false_alarm_rate);
        CHECK(a.per_class[i].f_measure == b.per_class[i].f_measure);
    }
    CHECK(a.weighted.accuracy == b.weighted.accuracy);
    CHECK(a.weighted.f_measure == b.weighted.f_measure);
}

TEST_CASE("metrics json round trip") {
    ConfusionMatrix cm;
    cm.class_ids = {1, 2};
    cm.counts = {45, 5, 3, 47};
    const MetricsReport report = metrics(cm);
    const MetricsReport loaded = MetricsReport::from_json(report.to_json());
    CHECK(loaded.class_ids == report.class_ids);
    CHECK(loaded.supports == report.supports);
    REQUIRE(loaded.per_class.size() == report.per_class.size());
    for (std::size_t i = 0; i < report.per_class.size(); ++i) {
        CHECK(loaded.per_class[i].accuracy == report.per_class[i].accuracy);
        CHECK(loaded.per_class[i].f_measure == report.per_class[i].f_measure);
    }
    CHECK(loaded.weighted.accuracy == report.weighted.accuracy);

    const ConfusionMatrix cm2 = confusion_from_json(confusion_to_json(cm));
    CHECK(cm2.class_ids == cm.class_ids);
    CHECK(cm2.counts == cm.counts);
}

TEST_CASE("projection keeps the chosen columns in ascending order") {
    const auto ds = labeled({{1, 2, 3, 4}, {5, 6, 7, 8}}, {1, 2});
    const auto projected = project(ds, std::vector<std::size_t>{1, 3});
    CHECK(projected.cols == 2);
    CHECK(projected.values == std::vector<double>{2, 4, 6, 8});
    CHECK(projected.labels == ds.labels);

    const auto all = project(ds, std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(all.values == ds.values);

    const auto one = project(ds, std::vector<std::size_t>{0});
    CHECK(one.cols == 1);
    CHECK(one.values == std::vector<double>{1, 5});

    CHECK_THROWS_AS(project(ds, std::vector<std::size_t>{4}), std::runtime_error);
}

TEST_CASE("a separable 1-D dataset needs a single split") {
    const auto ds = labeled({{1}, {2}, {8}, {9}}, {1, 1, 2, 2});
    const TreeModel tree = train_tree(ds);
    CHECK(tree.node_count() == 3);
    CHECK(tree.depth() == 1);
    CHECK(predict_tree(tree, ds) == ds.labels);
    // The split threshold lies strictly between the class clusters.
    const auto mid = labeled({{4.9}}, {1});
    CHECK(predict_tree(tree, mid) == std::vector<int>{1});
}

TEST_CASE("a single-class dataset trains to a single leaf") {
    const auto ds = labeled({{1}, {5}, {9}}, {2, 2, 2});
    const TreeModel tree = train_tree(ds);
    CHECK(tree.node_count() == 1);
    CHECK(tree.leaf_count() == 1);
    CHECK(predict_tree(tree, ds) == std::vector<int>{2, 2, 2});
}

TEST_CASE("xor needs two levels of splits") {
    const auto ds = labeled({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {1, 2, 2, 1});

    TreeParams shallow;
    shallow.max_depth = 1;
    const TreeModel stump = train_tree(ds, shallow);
    const auto stump_pred = predict_tree(stump, ds);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < 4; ++i) correct += stump_pred[i] == ds.labels[i];
    CHECK(correct <= 3);

    const TreeModel full = train_tree(ds);
    CHECK(predict_tree(full, ds) == ds.labels);
    CHECK(full.depth() >= 2);
}

TEST_CASE("values equal to a threshold are routed left") {
    // Split lands at the midpoint 5.5; a query exactly on the threshold must
    // follow the same branch as values below it.
    const auto ds = labeled({{4}, {5}, {6}, {7}}, {1, 1, 2, 2});
    const TreeModel tree = train_tree(ds);
    CHECK(predict_tree(tree, labeled({{5.0}}, {0})) == std::vector<int>{1});
    CHECK(predict_tree(tree, labeled({{5.5001}}, {0})) == std::vector<int>{2});
}

TEST_CASE("distinct rows are fit perfectly at unlimited depth") {
    Rng rng(55);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
        rows.push_back({rng.uniform01() * 10, rng.uniform01() * 10, rng.uniform01() * 10});
        labels.push_back(1 + static_cast<int>(rng.uniform_index(3)));
    }
    const auto ds = labeled(std::move(rows), std::move(labels));
    const TreeModel tree = train_tree(ds);
    CHECK(predict_tree(tree, ds) == ds.labels);
}

TEST_CASE("min samples split stops early") {
    const auto ds = labeled({{1}, {2}, {8}, {9}}, {1, 1, 2, 2});
    TreeParams params;
    params.min_samples_split = 5;
    const TreeModel tree = train_tree(ds, params);
    CHECK(tree.node_count() == 1);  // root cannot split
}

TEST_CASE("tree rejects rows of the wrong width") {
    const auto ds = labeled({{1, 2}, {8, 9}}, {1, 2});
    const TreeModel tree = train_tree(ds);
    CHECK_THROWS_AS(predict_tree(tree, labeled({{1, 2, 3}}, {0})), std::runtime_error);
}

TEST_CASE("knn recalls exact training rows at k=1") {
    const auto train = labeled({{0, 0}, {1, 1}, {2, 2}}, {1, 2, 3});
    CHECK(knn_predict(train, train, 1) == train.labels);
}

TEST_CASE("knn with k equal to the training size predicts the global majority") {
    const auto train = labeled({{0}, {0.1}, {0.9}, {1}, {0.5}}, {1, 1, 2, 2, 1});
    const auto queries = labeled({{0.0}, {1.0}}, {0, 0});
    CHECK(knn_predict(train, queries, 5) == std::vector<int>{1, 1});
}

TEST_CASE("knn majority vote wins three to two") {
    const auto train = labeled({{0.0}, {0.1}, {0.2}, {0.3}, {0.4}}, {2, 2, 2, 1, 1});
    const auto query = labeled({{0.0}}, {0});
    CHECK(knn_predict(train, query, 5) == std::vector<int>{2});
}

TEST_CASE("knn breaks distance ties by training order and vote ties by class id") {
    // Two training rows at identical distance from the query: the earlier row
    // fills the neighbour slot.
    const auto train = labeled({{1.0}, {1.0}, {5.0}}, {2, 1, 1});
    const auto query = labeled({{1.0}}, {0});
    CHECK(knn_predict(train, query, 1) == std::vector<int>{2});

    // k=2 with one vote each: the smaller class id wins.
    CHECK(knn_predict(train, query, 2) == std::vector<int>{1});
}

TEST_CASE("knn validates its arguments") {
    const auto train = labeled({{0}, {1}}, {1, 2});
    const auto query = labeled({{0.5}}, {0});
    CHECK_THROWS_AS(knn_predict(train, query, 0), std::runtime_error);
    CHECK_THROWS_AS(knn_predict(train, query, 3), std::runtime_error);
    CHECK_THROWS_AS(knn_predict(labeled({}, {}), query, 1), std::runtime_error);
}

TEST_CASE("classifier tokens build the right models") {
    CHECK(make_classifier(ClassifierSpec::from_token("dtree"))->name() == "dtree");
    CHECK(make_classifier(ClassifierSpec::from_token("knn5"))->name() == "knn5");
    CHECK(ClassifierSpec::from_token("knn5").knn_k == 5);
    CHECK_THROWS_AS(ClassifierSpec::from_token("svm"), std::runtime_error);
}

TEST_CASE("cross validation is deterministic and aggregates fold accuracy") {
    const auto ds = testsupport::planted_dataset(21, 120);
    const std::vector<std::size_t> selected{0, 1, 2};
    const ClassifierSpec spec = ClassifierSpec::from_token("dtree");

    const CrossValidation a = cross_validate(ds, selected, spec, 5, 3);
    const CrossValidation b = cross_validate(ds, selected, spec, 5, 3);
    REQUIRE(a.folds.size() == 5);
    CHECK(a.mean_accuracy == b.mean_accuracy);
    CHECK(a.min_accuracy == b.min_accuracy);
    for (std::size_t f = 0; f < a.folds.size(); ++f)
        CHECK(a.fold_confusions[f].counts == b.fold_confusions[f].counts);

    CHECK(a.min_accuracy <= a.mean_accuracy + 1e-12);

    const ConfusionMatrix pooled = a.pooled_confusion();
    CHECK(pooled.total() == static_cast<std::int64_t>(ds.rows));
}

TEST_CASE("separable data cross-validates perfectly") {
    // Label is a threshold on the only informative feature.
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) {
        rows.push_back({static_cast<double>(i), 0.0});
        labels.push_back(i < 30 ? 1 : 2);
    }
    const auto ds = labeled(std::move(rows), std::move(labels));
    const CrossValidation cv =
        cross_validate(ds, std::vector<std::size_t>{0}, ClassifierSpec::from_token("dtree"), 5, 1);
    CHECK(cv.mean_accuracy == doctest::Approx(1.0));
    CHECK(cv.min_accuracy == doctest::Approx(1.0));
}

TEST_CASE("folds that lose a class are flagged but still evaluated") {
    // Eleven samples, one of them the only member of class 2: one validation
    // fold inevitably sees a single class.
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 10; ++i) {
        rows.push_back({static_cast<double>(i)});
        labels.push_back(1);
    }
    rows.push_back({99.0});
    labels.push_back(2);
    const auto ds = labeled(std::move(rows), std::move(labels));
    Warnings w;
    const CrossValidation cv = cross_validate(ds, std::vector<std::size_t>{0},
                                              ClassifierSpec::from_token("knn5"), 2, 1, &w);
    REQUIRE(cv.folds.size() == 2);
    CHECK((cv.single_class_fold[0] || cv.single_class_fold[1]));
    CHECK(!w.empty());
}

TEST_CASE("identical samples give a null t statistic") {
    const std::vector<double> a{0.9, 0.8, 0.85, 0.95};
    const TTestResult r = t_test(a, a);
    CHECK(r.t == 0.0);
    CHECK(!r.significant);
    CHECK(r.p_value == doctest::Approx(1.0));
}

TEST_CASE("well-separated samples are significant") {
    const std::vector<double> a{1.0, 0.99, 1.01, 1.0};
    const std::vector<double> b{0.0, 0.01, -0.01, 0.0};
    const TTestResult r = t_test(a, b);
    CHECK(std::abs(r.t) > 10.0);
    CHECK(r.significant);
    CHECK(r.p_value < 0.05);
}

TEST_CASE("the t statistic ignores sample order") {
    const std::vector<double> ab{2, 4};
    const std::vector<double> ba{4, 2};
    const TTestResult r = t_test(ab, ba);
    CHECK(r.t == doctest::Approx(0.0));
    CHECK(!r.significant);
}

TEST_CASE("welch statistic, degrees of freedom and p-value match a reference") {
    const std::vector<double> a{85.2, 88.1, 90.3, 86.4, 87.9};
    const std::vector<double> b{80.1, 82.5, 81.3, 79.8, 83.2, 80.7};
    const TTestResult r = t_test(a, b);
    CHECK(r.t == doctest::Approx(6.177349705503317).epsilon(1e-9));
    CHECK(r.degrees_of_freedom == doctest::Approx(7.002870123209257).epsilon(1e-9));
    CHECK(r.p_value == doctest::Approx(0.00045445996111187866).epsilon(1e-8));
    CHECK(r.significant);
}

TEST_CASE("degenerate zero-variance samples with different means are rejected") {
    const std::vector<double> a{1, 1, 1};
    const std::vector<double> b{2, 2, 2};
    CHECK_THROWS_AS(t_test(a, b), std::runtime_error);
    CHECK_THROWS_AS(t_test(std::vector<double>{1.0}, b), std::runtime_error);
}
