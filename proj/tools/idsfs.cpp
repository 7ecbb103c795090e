#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "idsfs/pipeline.hpp"

namespace {

void print_outcome(const idsfs::PhaseOutcome& outcome, const idsfs::Warnings& warnings) {
    for (const auto& message : warnings.messages())
        std::cerr << "warning: " << message << '\n';
    for (const auto& file : outcome.files)
        std::cout << outcome.run_dir << "/" << file << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unsupervised multi-objective feature selection for intrusion detection"};
    app.set_version_flag("--version", std::string(idsfs::kToolVersion));
    app.require_subcommand(1);

    idsfs::PreprocessOptions pre;
    auto* preprocess = app.add_subcommand(
        "preprocess", "Encode a raw CSV dataset into numeric form plus a JSON sidecar");
    preprocess->add_option("--data", pre.data_path, "raw CSV file")->required();
    preprocess->add_option("--schema", pre.schema_path, "JSON schema file")->required();
    preprocess->add_option("--out", pre.out_dir, "run directory to create")->required();

    idsfs::SelectOptions sel;
    std::string crossover_kind = "single_point";
    auto* select = app.add_subcommand(
        "select", "Evolve a Pareto front of feature subsets over a preprocessed run directory");
    select->add_option("--data", sel.run_dir, "run directory from preprocess")->required();
    select->add_option("--model", sel.model_token, "objective model token")
        ->default_val(sel.model_token)
        ->check(CLI::IsMember(idsfs::ObjectiveModel::tokens()));
    select->add_option("--pop", sel.ga.pop_size, "population size")->default_val(sel.ga.pop_size);
    select->add_option("--gens", sel.ga.max_generations, "generations")
        ->default_val(sel.ga.max_generations);
    select->add_option("--cx", sel.ga.crossover_rate, "crossover rate")
        ->default_val(sel.ga.crossover_rate);
    select->add_option("--mut", sel.ga.mutation_rate, "per-bit mutation rate")
        ->default_val(sel.ga.mutation_rate);
    select->add_option("--seed", sel.ga.seed, "master seed")->default_val(sel.ga.seed);
    select->add_option("--bins", sel.bins, "histogram bins for entropy/MI")
        ->default_val(sel.bins);
    select->add_option("--tournament", sel.ga.tournament_size, "tournament size")
        ->default_val(sel.ga.tournament_size);
    select->add_option("--crossover", crossover_kind, "crossover operator")
        ->default_val(crossover_kind)
        ->check(CLI::IsMember({"single_point", "uniform"}));

    idsfs::EvaluateOptions ev;
    auto* evaluate = app.add_subcommand(
        "evaluate", "Cross-validate every front subset and pick the best one");
    evaluate->add_option("--front", ev.front_path, "front.json from select")->required();
    evaluate->add_option("--classifier", ev.classifier, "classifier token (dtree, knn5)")
        ->default_val(ev.classifier);
    evaluate->add_option("--folds", ev.folds, "cross-validation folds")->default_val(ev.folds);
    evaluate->add_option("--seed", ev.seed, "fold assignment seed")->default_val(ev.seed);
    evaluate->add_option("--test", ev.test_data_path,
                         "optional held-out raw CSV, scaled with training statistics");

    idsfs::ReportOptions rep;
    auto* report = app.add_subcommand(
        "report", "Render the human-readable summary and the scatter-plot data");
    report->add_option("--run", rep.run_dir, "run directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        idsfs::Warnings warnings;
        if (*preprocess) {
            print_outcome(idsfs::cmd_preprocess(pre, &warnings), warnings);
        } else if (*select) {
            sel.ga.crossover_kind = crossover_kind == "uniform"
                                        ? idsfs::GaConfig::Crossover::uniform
                                        : idsfs::GaConfig::Crossover::single_point;
            print_outcome(idsfs::cmd_select(sel, &warnings), warnings);
        } else if (*evaluate) {
            print_outcome(idsfs::cmd_evaluate(ev, &warnings), warnings);
        } else if (*report) {
            print_outcome(idsfs::cmd_report(rep, &warnings), warnings);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
