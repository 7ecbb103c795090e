#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "idsfs/classify.hpp"
#include "idsfs/dataset.hpp"
#include "idsfs/measures.hpp"
#include "idsfs/nsga2.hpp"
#include "idsfs/objectives.hpp"

// Pipeline phases hand off through files inside one run directory:
//   preprocess -> encoded.csv, sidecar.json
//   select     -> front.json, trace.csv
//   evaluate   -> evaluation.json
//   report     -> report.txt, scatter.csv
// Every phase updates manifest.json (config snapshot, input hashes, timings,
// file inventory). All artifacts except the manifest's timing fields are
// byte-reproducible from (config, inputs).

namespace idsfs {

struct PreprocessOptions {
    std::string data_path;
    std::string schema_path;
    std::string out_dir;
};

struct SelectOptions {
    std::string run_dir;               // directory written by preprocess
    std::string model_token = "model3a";
    GaConfig ga;
    int bins = kDefaultBins;
};

struct EvaluateOptions {
    std::string front_path;            // front.json inside a run directory
    std::string classifier = "dtree";
    std::size_t folds = 10;
    std::uint64_t seed = 1;
    std::string test_data_path;        // optional held-out raw file
};

struct ReportOptions {
    std::string run_dir;
};

struct PhaseOutcome {
    std::string run_dir;
    std::vector<std::string> files;    // artifact names, relative to run_dir
};

PhaseOutcome cmd_preprocess(const PreprocessOptions& opt, Warnings* warnings = nullptr);
PhaseOutcome cmd_select(const SelectOptions& opt, Warnings* warnings = nullptr);
PhaseOutcome cmd_evaluate(const EvaluateOptions& opt, Warnings* warnings = nullptr);
PhaseOutcome cmd_report(const ReportOptions& opt, Warnings* warnings = nullptr);

// Encoded dataset + the sidecar needed to interpret it.
struct EncodedData {
    FeatureSchema schema;
    NumericDataset data;
    std::string content_hash;
};

EncodedData load_encoded(const std::string& run_dir);

void save_front(const ParetoFront& front, const std::string& path);
ParetoFront load_front(const std::string& path);

struct SubsetEvaluation {
    std::size_t front_index = 0;
    Chromosome chromosome;
    std::vector<std::size_t> selected;
    double mean_accuracy = 0.0;
    double min_accuracy = 0.0;
    std::string error;                 // nonempty if this subset failed to evaluate
};

struct Evaluation {
    std::string classifier;
    std::size_t folds = 0;
    std::uint64_t seed = 0;
    std::vector<SubsetEvaluation> subsets;     // front order
    std::size_t best_index = 0;                // into subsets
    ConfusionMatrix best_confusion;            // pooled over CV folds
    MetricsReport best_metrics;                // from the pooled confusion
    std::optional<ConfusionMatrix> test_confusion;
    std::optional<MetricsReport> test_metrics;

    nlohmann::json to_json() const;
    static Evaluation from_json(const nlohmann::json& j);
};

Evaluation load_evaluation(const std::string& run_dir);

// Ranks front members by mean CV accuracy; ties prefer fewer selected
// features, then the lower front index.
std::size_t pick_best_subset(const std::vector<SubsetEvaluation>& subsets);

std::string render_report(const FeatureSchema& schema, const ParetoFront& front,
                          const Evaluation& eval);

}  // namespace idsfs
