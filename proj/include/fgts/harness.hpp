#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fgts/config.hpp"
#include "fgts/report.hpp"

namespace fgts {

/// Scores in the order of the manifest records.
struct ScoredRecord {
    std::string sample_id;
    ScoredSample sample;
};

std::string scores_csv(const std::vector<ScoredRecord>& scores);
std::vector<ScoredRecord> parse_scores_csv(std::string_view text);

/// Ranks the reference split of a manifest.
TokenRanking rank_reference(const SampleManifest& manifest, const TokenStrategy& scope, double eps);

/// Fits a protocol on the reference split using the given token rows.
Model fit_reference(const SampleManifest& manifest, std::vector<std::size_t> tokens,
                    const ExperimentConfig::Protocol& protocol);

/// Scores every record of `split` with the model.
std::vector<ScoredRecord> classify(const SampleManifest& manifest, const Model& model, Split split);

/// Manifests -> ranking -> model -> scores -> per-generator report. Stage
/// artifacts are cached by content hash and copied into cfg.output_dir along
/// with report.csv and report.md. Failures throw StageError.
EvalReport run_experiment(const ExperimentConfig& cfg);

/// All, CLS, REG, Patch, CLS+REG, CLS+Patch, each averaging every token of
/// the strategy under the configured protocol.
std::vector<EvalReport> token_strategy_sweep(const ExperimentConfig& cfg);

struct TopKPoint {
    std::size_t k = 0;
    EvalReport fisher;
    EvalReport random;  // mean over cfg.selection.random_seeds seeds
};

std::vector<TopKPoint> topk_sweep(const ExperimentConfig& cfg, const std::vector<std::size_t>& ks);

struct RobustnessRow {
    std::string label;  // "Clean" or the perturbation label
    EvalReport report;
};

/// Clean baseline followed by one report per perturbation, in the given order.
/// Perturbed features come from cfg.robustness.eval_manifests or, failing that,
/// from running the bridge command on perturbed copies of the eval images.
std::vector<RobustnessRow> robustness_sweep(const ExperimentConfig& cfg, const std::vector<PerturbSpec>& specs);

/// Row labels of the token-strategy table, e.g. "Patch (196 tokens)".
std::string strategy_table_label(const TokenStrategy& strategy, const TokenLayout& layout);

}  // namespace fgts
