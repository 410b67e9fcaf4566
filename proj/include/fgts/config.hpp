#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fgts/classifiers.hpp"
#include "fgts/feature_store.hpp"
#include "fgts/fgts.hpp"
#include "fgts/perturb.hpp"

namespace fgts {

struct ExperimentConfig {
    std::filesystem::path reference_manifest;
    std::filesystem::path eval_manifest;  // empty: use the reference manifest's eval split
    std::optional<std::filesystem::path> features_dir;       // base for relative feature paths
    std::optional<std::filesystem::path> eval_features_dir;  // overrides features_dir for the eval manifest

    TokenStrategy token_strategy = TokenStrategy::of(TokenStrategy::Kind::patch);

    struct Selection {
        std::size_t k = kDefaultK;  // 0: average every token of the strategy, no ranking
        SelectionConfig::Method method = SelectionConfig::Method::fisher_topk;
        std::uint64_t seed = 0;
        std::size_t random_seeds = 5;  // random_k runs averaged over seed, seed+1, ...
        double eps = kDefaultFisherEps;
    } selection;

    struct Protocol {
        std::string name = "centroid";  // centroid | probe
        TrainingMeta training;
        bool normalize_input = true;
    } protocol;

    struct Robustness {
        std::vector<PerturbSpec> specs;
        std::map<std::string, std::filesystem::path> eval_manifests;  // canonical spec -> pre-extracted manifest
        std::string bridge_command;  // "{manifest}" and "{out}" are substituted
        std::uint64_t seed = 0;
    } robustness;

    std::filesystem::path output_dir = "fgts-out";
    std::filesystem::path cache_dir;  // empty: <output_dir>/cache
    std::string label;                // method name in tables; derived when empty

    std::filesystem::path effective_cache_dir() const {
        return cache_dir.empty() ? output_dir / "cache" : cache_dir;
    }
    std::string method_label() const;
};

/// Builds a config from a JSON tree. Relative paths resolve against `base_dir`.
/// A top-level "seed" is the default for every seed left unset.
ExperimentConfig config_from_json(const nlohmann::json& tree, const std::filesystem::path& base_dir = {});
nlohmann::json load_config_tree(const std::filesystem::path& path);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies "a.b.c=value" to the tree. The value is parsed as JSON when possible,
/// otherwise stored as a string.
void apply_override(nlohmann::json& tree, std::string_view assignment);

/// Location-independent canonical form used for fingerprints: no paths.
nlohmann::ordered_json canonical_parameters(const ExperimentConfig& cfg);

}  // namespace fgts
