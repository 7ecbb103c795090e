#include "idsfs/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace idsfs {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kEncodedCsv = "encoded.csv";
constexpr const char* kSidecarJson = "sidecar.json";
constexpr const char* kFrontJson = "front.json";
constexpr const char* kTraceCsv = "trace.csv";
constexpr const char* kEvaluationJson = "evaluation.json";
constexpr const char* kReportTxt = "report.txt";
constexpr const char* kScatterCsv = "scatter.csv";
constexpr const char* kManifestJson = "manifest.json";

std::string join_path(const std::string& dir, const char* name) {
    return (fs::path(dir) / name).string();
}

void require_artifact(const std::string& run_dir, const char* name, const char* producer) {
    if (!fs::exists(fs::path(run_dir) / name))
        throw std::runtime_error(run_dir + ": missing " + name + " (run " + producer + " first)");
}

class PhaseTimer {
public:
    PhaseTimer() : start_(std::chrono::steady_clock::now()) {}
    std::int64_t elapsed_ms() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

// Each phase records its config, duration, and outputs under phases.<name>;
// the top-level file inventory is the union of every phase's files. Duration
// is the one field of any artifact that varies between identical reruns.
void update_manifest(const std::string& run_dir, const std::string& phase, json phase_entry,
                     const std::vector<std::string>& files, std::int64_t duration_ms) {
    const std::string path = join_path(run_dir, kManifestJson);
    json manifest;
    if (fs::exists(path)) {
        try {
            manifest = json::parse(read_file(path));
        } catch (const json::exception& e) {
            throw std::runtime_error(path + ": " + e.what());
        }
    } else {
        manifest["tool"] = std::string(kToolVersion);
        manifest["phases"] = json::object();
    }
    phase_entry["duration_ms"] = duration_ms;
    phase_entry["files"] = files;
    manifest["phases"][phase] = std::move(phase_entry);

    std::set<std::string> inventory{kManifestJson};
    for (const auto& [name, entry] : manifest["phases"].items())
        for (const auto& f : entry["files"]) inventory.insert(f.get<std::string>());
    manifest["files"] = inventory;
    write_file(path, manifest.dump(1) + "\n");
}

json ga_config_to_json(const GaConfig& cfg) {
    json j;
    j["pop_size"] = cfg.pop_size;
    j["max_generations"] = cfg.max_generations;
    j["crossover_rate"] = cfg.crossover_rate;
    j["mutation_rate"] = cfg.mutation_rate;
    j["seed"] = cfg.seed;
    j["tournament_size"] = cfg.tournament_size;
    j["crossover"] =
        cfg.crossover_kind == GaConfig::Crossover::single_point ? "single_point" : "uniform";
    return j;
}

GaConfig ga_config_from_json(const json& j) {
    GaConfig cfg;
    cfg.pop_size = j.at("pop_size").get<std::size_t>();
    cfg.max_generations = j.at("max_generations").get<std::size_t>();
    cfg.crossover_rate = j.at("crossover_rate").get<double>();
    cfg.mutation_rate = j.at("mutation_rate").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.tournament_size = j.at("tournament_size").get<std::size_t>();
    cfg.crossover_kind = j.at("crossover").get<std::string>() == "uniform"
                             ? GaConfig::Crossover::uniform
                             : GaConfig::Crossover::single_point;
    return cfg;
}

}  // namespace

PhaseOutcome cmd_preprocess(const PreprocessOptions& opt, Warnings* warnings) {
    PhaseTimer timer;
    const FeatureSchema schema = FeatureSchema::from_json_file(opt.schema_path);
    std::string blob = read_file(opt.data_path);
    const std::uint64_t input_hash = hash_bytes(blob);
    const std::size_t input_bytes = blob.size();
    const RawDataset raw = parse_csv(std::move(blob), schema, opt.data_path);
    const NumericDataset ds = encode(raw, warnings);
    const NormalizedView norm = normalize_minmax(ds);

    fs::create_directories(opt.out_dir);

    std::string csv;
    csv.reserve(ds.rows * ds.cols * 4);
    for (std::size_t r = 0; r < ds.rows; ++r) {
        for (std::size_t c = 0; c < ds.cols; ++c) {
            csv += format_double(ds.at(r, c));
            csv += ',';
        }
        csv += std::to_string(ds.labels[r]);
        csv += '\n';
    }
    write_file(join_path(opt.out_dir, kEncodedCsv), csv);

    json sidecar;
    sidecar["tool"] = std::string(kToolVersion);
    sidecar["schema"] = ds.schema.to_json();
    sidecar["rows"] = ds.rows;
    sidecar["features"] = ds.cols;
    sidecar["content_hash"] = hash_hex(ds.content_hash());
    sidecar["source"] = {{"path", opt.data_path},
                         {"bytes", input_bytes},
                         {"hash", hash_hex(input_hash)}};
    sidecar["col_min"] = norm.col_min;
    sidecar["col_max"] = norm.col_max;
    json counts = json::object();
    for (const auto& [cls, n] : ds.class_counts()) counts[std::to_string(cls)] = n;
    sidecar["class_counts"] = std::move(counts);
    if (warnings && !warnings->empty()) sidecar["warnings"] = warnings->messages();
    write_file(join_path(opt.out_dir, kSidecarJson), sidecar.dump(1) + "\n");

    PhaseOutcome outcome;
    outcome.run_dir = opt.out_dir;
    outcome.files = {kEncodedCsv, kSidecarJson};
    json entry;
    entry["config"] = {{"data", {{"path", opt.data_path}, {"hash", hash_hex(input_hash)}}},
                       {"schema", opt.schema_path}};
    entry["rows"] = ds.rows;
    entry["features"] = ds.cols;
    update_manifest(opt.out_dir, "preprocess", std::move(entry), outcome.files,
                    timer.elapsed_ms());
    outcome.files.push_back(kManifestJson);
    return outcome;
}

EncodedData load_encoded(const std::string& run_dir) {
    require_artifact(run_dir, kSidecarJson, "preprocess");
    require_artifact(run_dir, kEncodedCsv, "preprocess");
    json sidecar;
    try {
        sidecar = json::parse(read_file(join_path(run_dir, kSidecarJson)));
    } catch (const json::exception& e) {
        throw std::runtime_error(join_path(run_dir, kSidecarJson) + ": " + e.what());
    }

    EncodedData out;
    out.schema = FeatureSchema::from_json(sidecar.at("schema"));
    out.content_hash = sidecar.at("content_hash").get<std::string>();

    NumericDataset& ds = out.data;
    ds.schema = out.schema;
    ds.cols = out.schema.feature_count();
    const std::string path = join_path(run_dir, kEncodedCsv);
    const std::string csv = read_file(path);
    std::size_t pos = 0, line_no = 0;
    while (pos < csv.size()) {
        ++line_no;
        std::size_t eol = csv.find('\n', pos);
        if (eol == std::string::npos) eol = csv.size();
        std::string_view line(csv.data() + pos, eol - pos);
        pos = eol + 1;
        if (line.empty()) continue;
        std::size_t cell = 0, start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i < line.size() && line[i] != ',') continue;
            const std::string_view token = line.substr(start, i - start);
            const std::string context = path + ":" + std::to_string(line_no);
            if (cell < ds.cols)
                ds.values.push_back(parse_double(token, context));
            else if (cell == ds.cols)
                ds.labels.push_back(static_cast<int>(parse_double(token, context)));
            else
                throw std::runtime_error(context + ": too many columns");
            ++cell;
            start = i + 1;
        }
        if (cell != ds.cols + 1)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(ds.cols + 1) + " columns");
        ++ds.rows;
    }
    if (ds.rows == 0) throw std::runtime_error(path + ": no data rows");
    if (hash_hex(ds.content_hash()) != out.content_hash)
        throw std::runtime_error(run_dir + ": encoded.csv does not match its sidecar hash");
    return out;
}

void save_front(const ParetoFront& front, const std::string& path) {
    json j;
    j["tool"] = std::string(kToolVersion);
    j["model"] = front.model_token;
    j["dataset_hash"] = hash_hex(front.dataset_hash);
    j["config"] = ga_config_to_json(front.config);
    j["members"] = json::array();
    for (const auto& member : front.members) {
        json m;
        m["bits"] = member.chromosome.to_string();
        json selected = json::array();
        for (std::size_t i : decode(member.chromosome).selected) selected.push_back(i);
        m["selected"] = std::move(selected);
        m["objectives"] = {member.objectives.selected_dissimilarity,
                           member.objectives.unselected_coverage,
                           member.objectives.dispersion};
        j["members"].push_back(std::move(m));
    }
    write_file(path, j.dump(1) + "\n");
}

ParetoFront load_front(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    ParetoFront front;
    front.model_token = j.at("model").get<std::string>();
    front.dataset_hash = std::stoull(j.at("dataset_hash").get<std::string>(), nullptr, 16);
    front.config = ga_config_from_json(j.at("config"));
    for (const auto& m : j.at("members")) {
        ScoredIndividual ind;
        ind.chromosome = Chromosome::from_string(m.at("bits").get<std::string>());
        const auto& obj = m.at("objectives");
        ind.objectives.selected_dissimilarity = obj.at(0).get<double>();
        ind.objectives.unselected_coverage = obj.at(1).get<double>();
        ind.objectives.dispersion = obj.at(2).get<double>();
        ind.rank = 1;
        front.members.push_back(std::move(ind));
    }
    if (front.members.empty()) throw std::runtime_error(path + ": empty front");
    return front;
}

PhaseOutcome cmd_select(const SelectOptions& opt, Warnings* warnings) {
    PhaseTimer timer;
    opt.ga.validate();
    const EncodedData encoded = load_encoded(opt.run_dir);
    const NumericDataset& ds = encoded.data;
    if (ds.cols < 3) throw std::runtime_error("select: need at least 3 features");

    const NormalizedView norm = normalize_minmax(ds);
    const MeasureCache cache = build_cache(ds, norm, opt.bins, warnings);
    const ObjectiveModel model =
        ObjectiveModel::from_token(opt.model_token, encoded.schema.sd_exclusion_indices());

    std::string trace =
        "generation,front_size,f_sel_min,f_sel_mean,f_sel_max,"
        "f_unsel_min,f_unsel_mean,f_unsel_max,f_disp_min,f_disp_mean,f_disp_max\n";
    const auto observer = [&trace](std::size_t gen, const std::vector<ScoredIndividual>& pop) {
        double lo[3], hi[3], sum[3] = {0, 0, 0};
        std::fill(std::begin(lo), std::end(lo), std::numeric_limits<double>::infinity());
        std::fill(std::begin(hi), std::end(hi), -std::numeric_limits<double>::infinity());
        std::size_t count = 0;
        for (const auto& ind : pop) {
            if (ind.rank != 1) continue;
            ++count;
            for (std::size_t o = 0; o < 3; ++o) {
                lo[o] = std::min(lo[o], ind.objectives[o]);
                hi[o] = std::max(hi[o], ind.objectives[o]);
                sum[o] += ind.objectives[o];
            }
        }
        trace += std::to_string(gen) + ',' + std::to_string(count);
        for (std::size_t o = 0; o < 3; ++o) {
            trace += ',' + format_double(lo[o]) + ',' +
                     format_double(sum[o] / static_cast<double>(count)) + ',' +
                     format_double(hi[o]);
        }
        trace += '\n';
    };

    const ParetoFront front = evolve(cache, model, opt.ga, observer);
    save_front(front, join_path(opt.run_dir, kFrontJson));
    write_file(join_path(opt.run_dir, kTraceCsv), trace);

    PhaseOutcome outcome;
    outcome.run_dir = opt.run_dir;
    outcome.files = {kFrontJson, kTraceCsv};
    json entry;
    json cfg = ga_config_to_json(opt.ga);
    cfg["model"] = opt.model_token;
    cfg["bins"] = opt.bins;
    entry["config"] = std::move(cfg);
    entry["front_size"] = front.members.size();
    update_manifest(opt.run_dir, "select", std::move(entry), outcome.files, timer.elapsed_ms());
    outcome.files.push_back(kManifestJson);
    return outcome;
}

json Evaluation::to_json() const {
    json j;
    j["tool"] = std::string(kToolVersion);
    j["classifier"] = classifier;
    j["folds"] = folds;
    j["seed"] = seed;
    j["subsets"] = json::array();
    for (const auto& s : subsets) {
        json js;
        js["front_index"] = s.front_index;
        js["bits"] = s.chromosome.to_string();
        json selected = json::array();
        for (std::size_t i : s.selected) selected.push_back(i);
        js["selected"] = std::move(selected);
        js["mean_accuracy"] = s.mean_accuracy;
        js["min_accuracy"] = s.min_accuracy;
        if (!s.error.empty()) js["error"] = s.error;
        j["subsets"].push_back(std::move(js));
    }
    j["best_index"] = best_index;
    j["best"] = {{"confusion", confusion_to_json(best_confusion)},
                 {"metrics", best_metrics.to_json()}};
    if (test_confusion && test_metrics)
        j["test"] = {{"confusion", confusion_to_json(*test_confusion)},
                     {"metrics", test_metrics->to_json()}};
    return j;
}

Evaluation Evaluation::from_json(const json& j) {
    Evaluation e;
    e.classifier = j.at("classifier").get<std::string>();
    e.folds = j.at("folds").get<std::size_t>();
    e.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& js : j.at("subsets")) {
        SubsetEvaluation s;
        s.front_index = js.at("front_index").get<std::size_t>();
        s.chromosome = Chromosome::from_string(js.at("bits").get<std::string>());
        for (const auto& i : js.at("selected")) s.selected.push_back(i.get<std::size_t>());
        s.mean_accuracy = js.at("mean_accuracy").get<double>();
        s.min_accuracy = js.at("min_accuracy").get<double>();
        s.error = js.value("error", std::string{});
        e.subsets.push_back(std::move(s));
    }
    e.best_index = j.at("best_index").get<std::size_t>();
    e.best_confusion = confusion_from_json(j.at("best").at("confusion"));
    e.best_metrics = MetricsReport::from_json(j.at("best").at("metrics"));
    if (j.contains("test")) {
        e.test_confusion = confusion_from_json(j.at("test").at("confusion"));
        e.test_metrics = MetricsReport::from_json(j.at("test").at("metrics"));
    }
    return e;
}

Evaluation load_evaluation(const std::string& run_dir) {
    require_artifact(run_dir, kEvaluationJson, "evaluate");
    try {
        return Evaluation::from_json(json::parse(read_file(join_path(run_dir, kEvaluationJson))));
    } catch (const json::exception& e) {
        throw std::runtime_error(join_path(run_dir, kEvaluationJson) + ": " + e.what());
    }
}

std::size_t pick_best_subset(const std::vector<SubsetEvaluation>& subsets) {
    std::size_t best = subsets.size();
    for (std::size_t i = 0; i < subsets.size(); ++i) {
        if (!subsets[i].error.empty()) continue;
        if (best == subsets.size()) {
            best = i;
            continue;
        }
        const auto& a = subsets[i];
        const auto& b = subsets[best];
        if (a.mean_accuracy > b.mean_accuracy ||
            (a.mean_accuracy == b.mean_accuracy && a.selected.size() < b.selected.size()))
            best = i;
    }
    if (best == subsets.size())
        throw std::runtime_error("evaluate: every subset failed to evaluate");
    return best;
}

PhaseOutcome cmd_evaluate(const EvaluateOptions& opt, Warnings* warnings) {
    PhaseTimer timer;
    const fs::path front_path(opt.front_path);
    const std::string run_dir =
        front_path.has_parent_path() ? front_path.parent_path().string() : std::string(".");
    const ParetoFront front = load_front(opt.front_path);
    const EncodedData encoded = load_encoded(run_dir);
    const ClassifierSpec spec = ClassifierSpec::from_token(opt.classifier);
    if (hash_hex(front.dataset_hash) != encoded.content_hash)
        Warnings::emit(warnings, "front.json was produced from different data than encoded.csv");

    Evaluation eval;
    eval.classifier = opt.classifier;
    eval.folds = opt.folds;
    eval.seed = opt.seed;

    std::vector<CrossValidation> cvs(front.members.size());
    for (std::size_t i = 0; i < front.members.size(); ++i) {
        SubsetEvaluation s;
        s.front_index = i;
        s.chromosome = front.members[i].chromosome;
        s.selected = decode(s.chromosome).selected;
        try {
            cvs[i] = cross_validate(encoded.data, s.selected, spec, opt.folds, opt.seed, warnings);
            s.mean_accuracy = cvs[i].mean_accuracy;
            s.min_accuracy = cvs[i].min_accuracy;
        } catch (const std::exception& e) {
            s.error = e.what();
            Warnings::emit(warnings, "subset " + std::to_string(i) + ": " + e.what());
        }
        eval.subsets.push_back(std::move(s));
    }
    eval.best_index = pick_best_subset(eval.subsets);
    eval.best_confusion = cvs[eval.best_index].pooled_confusion();
    eval.best_metrics = metrics(eval.best_confusion);

    if (!opt.test_data_path.empty()) {
        const auto& selected = eval.subsets[eval.best_index].selected;
        const RawDataset raw_test = load_csv(opt.test_data_path, encoded.schema);
        const NumericDataset test = encode(raw_test, warnings, EncodePolicy::frozen);
        const NumericDataset train_proj = project(encoded.data, selected);
        const NumericDataset test_proj = project(test, selected);
        const NormalizedView scaling = normalize_minmax(train_proj);
        auto classifier = make_classifier(spec);
        classifier->fit(scaling.apply(train_proj));
        const std::vector<int> predicted = classifier->predict(scaling.apply(test_proj));
        std::set<int> ids(encoded.data.labels.begin(), encoded.data.labels.end());
        ids.insert(test.labels.begin(), test.labels.end());
        const std::vector<int> class_ids(ids.begin(), ids.end());
        eval.test_confusion = confusion(test.labels, predicted, class_ids);
        eval.test_metrics = metrics(*eval.test_confusion);
    }

    write_file(join_path(run_dir, kEvaluationJson), eval.to_json().dump(1) + "\n");

    PhaseOutcome outcome;
    outcome.run_dir = run_dir;
    outcome.files = {kEvaluationJson};
    json entry;
    json cfg = {{"classifier", opt.classifier}, {"folds", opt.folds}, {"seed", opt.seed}};
    if (!opt.test_data_path.empty()) cfg["test_data"] = opt.test_data_path;
    entry["config"] = std::move(cfg);
    entry["front_size"] = front.members.size();
    entry["best_index"] = eval.best_index;
    update_manifest(run_dir, "evaluate", std::move(entry), outcome.files, timer.elapsed_ms());
    outcome.files.push_back(kManifestJson);
    return outcome;
}

namespace {

std::string percent(double rate) { return format_fixed(rate * 100.0, 2); }

void pad_to(std::string& line, std::size_t width) {
    if (line.size() < width) line.append(width - line.size(), ' ');
}

std::string metric_table(const FeatureSchema& schema, const MetricsReport& report) {
    const std::vector<std::string> headers = {"Class",     "Accuracy",  "Detection rate",
                                              "Precision", "False alarm rate", "F-measure"};
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < report.class_ids.size(); ++i) {
        const ClassMetrics& m = report.per_class[i];
        rows.push_back({schema.class_display_name(report.class_ids[i]), percent(m.accuracy),
                        percent(m.detection_rate), percent(m.precision),
                        percent(m.false_alarm_rate), percent(m.f_measure)});
    }
    rows.push_back({"Weighted average", percent(report.weighted.accuracy),
                    percent(report.weighted.detection_rate), percent(report.weighted.precision),
                    percent(report.weighted.false_alarm_rate),
                    percent(report.weighted.f_measure)});

    std::vector<std::size_t> widths(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c) widths[c] = headers[c].size();
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());

    std::string out;
    const auto emit = [&](const std::vector<std::string>& row) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) line += "  ";
            std::string cell = row[c];
            pad_to(cell, widths[c]);
            line += cell;
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line + "\n";
    };
    emit(headers);
    std::string rule;
    for (std::size_t c = 0; c < widths.size(); ++c) {
        if (c) rule += "  ";
        rule += std::string(widths[c], '-');
    }
    out += rule + "\n";
    for (const auto& row : rows) emit(row);
    return out;
}

std::string confusion_table(const FeatureSchema& schema, const ConfusionMatrix& cm) {
    std::vector<std::string> names;
    std::size_t name_width = std::string("actual \\ predicted").size();
    for (int id : cm.class_ids) {
        names.push_back(schema.class_display_name(id));
        name_width = std::max(name_width, names.back().size());
    }
    std::vector<std::size_t> widths(cm.size());
    for (std::size_t c = 0; c < cm.size(); ++c) {
        widths[c] = names[c].size();
        for (std::size_t r = 0; r < cm.size(); ++r)
            widths[c] = std::max(widths[c], std::to_string(cm.at(r, c)).size());
    }

    std::string out;
    std::string header = "actual \\ predicted";
    pad_to(header, name_width);
    for (std::size_t c = 0; c < cm.size(); ++c) {
        std::string cell = names[c];
        std::string padded(widths[c] - cell.size(), ' ');
        header += "  " + padded + cell;
    }
    out += header + "\n";
    for (std::size_t r = 0; r < cm.size(); ++r) {
        std::string line = names[r];
        pad_to(line, name_width);
        for (std::size_t c = 0; c < cm.size(); ++c) {
            const std::string cell = std::to_string(cm.at(r, c));
            std::string padded(widths[c] - cell.size(), ' ');
            line += "  " + padded + cell;
        }
        out += line + "\n";
    }
    return out;
}

}  // namespace

std::string render_report(const FeatureSchema& schema, const ParetoFront& front,
                          const Evaluation& eval) {
    std::string out;
    out += std::string(kToolVersion) + " run report\n";
    out += "==========================\n\n";
    out += "model: " + front.model_token + "\n";
    out += "dataset hash: " + hash_hex(front.dataset_hash) + "\n";
    const GaConfig& cfg = front.config;
    out += "ga: pop_size=" + std::to_string(cfg.pop_size) +
           " generations=" + std::to_string(cfg.max_generations) +
           " crossover_rate=" + format_double(cfg.crossover_rate) +
           " mutation_rate=" + format_double(cfg.mutation_rate) +
           " seed=" + std::to_string(cfg.seed) + "\n";
    out += "classifier: " + eval.classifier + " (" + std::to_string(eval.folds) +
           "-fold cross-validation, seed " + std::to_string(eval.seed) + ")\n\n";

    out += "Pareto front (" + std::to_string(front.members.size()) + " subsets)\n";
    out += "index  size  f_sel  f_unsel  f_disp  cv_mean_acc  cv_min_acc\n";
    std::size_t max_len = 0, min_len = std::numeric_limits<std::size_t>::max(), total_len = 0;
    for (std::size_t i = 0; i < eval.subsets.size(); ++i) {
        const SubsetEvaluation& s = eval.subsets[i];
        const ObjectiveVector& o = front.members[i].objectives;
        max_len = std::max(max_len, s.selected.size());
        min_len = std::min(min_len, s.selected.size());
        total_len += s.selected.size();
        out += std::to_string(i) + "  " + std::to_string(s.selected.size()) + "  " +
               format_fixed(o.selected_dissimilarity, 4) + "  " +
               format_fixed(o.unselected_coverage, 4) + "  " + format_fixed(o.dispersion, 4);
        if (s.error.empty())
            out += "  " + percent(s.mean_accuracy) + "  " + percent(s.min_accuracy);
        else
            out += "  failed: " + s.error;
        out += "\n";
    }
    out += "subset length max/min/avg: " + std::to_string(max_len) + "/" +
           std::to_string(min_len) + "/" +
           format_fixed(static_cast<double>(total_len) /
                            static_cast<double>(eval.subsets.size()),
                        1) +
           "\n\n";

    const SubsetEvaluation& best = eval.subsets[eval.best_index];
    out += "best subset (front index " + std::to_string(eval.best_index) + ", " +
           std::to_string(best.selected.size()) + " features)\n";
    out += "bits: " + best.chromosome.to_string() + "\n";
    out += "features:";
    for (std::size_t i : best.selected) {
        out += " " + std::to_string(i);
        if (i < schema.features.size()) out += ":" + schema.features[i].name;
    }
    out += "\n\n";

    out += "cross-validated metrics, best subset (percent)\n";
    out += metric_table(schema, eval.best_metrics);
    out += "\nconfusion matrix, pooled over validation folds\n";
    out += confusion_table(schema, eval.best_confusion);

    if (eval.test_metrics && eval.test_confusion) {
        out += "\nheld-out test metrics (percent)\n";
        out += metric_table(schema, *eval.test_metrics);
        out += "\nheld-out test confusion matrix\n";
        out += confusion_table(schema, *eval.test_confusion);
    }

    out += "\nrun artifacts: " + std::string(kEncodedCsv) + ", " + kSidecarJson + ", " +
           kFrontJson + ", " + kTraceCsv + ", " + kEvaluationJson + ", " + kScatterCsv + ", " +
           kReportTxt + ", " + kManifestJson + "\n";
    return out;
}

PhaseOutcome cmd_report(const ReportOptions& opt, Warnings*) {
    PhaseTimer timer;
    require_artifact(opt.run_dir, kFrontJson, "select");
    require_artifact(opt.run_dir, kTraceCsv, "select");
    const EncodedData encoded = load_encoded(opt.run_dir);
    const ParetoFront front = load_front(join_path(opt.run_dir, kFrontJson));
    const Evaluation eval = load_evaluation(opt.run_dir);
    if (eval.subsets.size() != front.members.size())
        throw std::runtime_error(opt.run_dir +
                                 ": evaluation.json does not match front.json (sizes differ)");

    std::string scatter;
    for (const auto& member : front.members) {
        scatter += format_double(member.objectives.selected_dissimilarity) + "," +
                   format_double(member.objectives.unselected_coverage) + "," +
                   format_double(member.objectives.dispersion) + "\n";
    }
    write_file(join_path(opt.run_dir, kScatterCsv), scatter);
    write_file(join_path(opt.run_dir, kReportTxt), render_report(encoded.schema, front, eval));

    PhaseOutcome outcome;
    outcome.run_dir = opt.run_dir;
    outcome.files = {kReportTxt, kScatterCsv};
    json entry;
    entry["config"] = json::object();
    entry["front_size"] = front.members.size();
    update_manifest(opt.run_dir, "report", std::move(entry), outcome.files, timer.elapsed_ms());
    outcome.files.push_back(kManifestJson);
    return outcome;
}

}  // namespace idsfs
