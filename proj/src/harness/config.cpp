#include "fgts/config.hpp"

#include <fmt/format.h>

#include <fstream>

#include "fgts/error.hpp"

namespace fgts {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(fmt::format("config: bad value for \"{}\": {}", key, e.what()));
    }
}

const json& section(const json& tree, const char* key) {
    static const json empty = json::object();
    const auto it = tree.find(key);
    if (it == tree.end()) return empty;
    if (!it->is_object()) throw ValidationError(fmt::format("config: \"{}\" must be an object", key));
    return *it;
}

}  // namespace

std::string ExperimentConfig::method_label() const {
    if (!label.empty()) return label;
    std::string sel = selection.k == 0 ? "mean" : fmt::format("{}-{}", to_string(selection.method), selection.k);
    return fmt::format("FGTS ({}, {}, {})", protocol.name, token_strategy.name(), sel);
}

ExperimentConfig config_from_json(const json& tree, const fs::path& base_dir) {
    if (!tree.is_object()) throw ValidationError("config: expected a JSON object");
    ExperimentConfig cfg;
    const auto global_seed = get_or<std::uint64_t>(tree, "seed", 0);

    const auto ref = get_or<std::string>(tree, "reference_manifest", "");
    if (ref.empty()) throw ValidationError("config: \"reference_manifest\" is required");
    cfg.reference_manifest = resolve(base_dir, ref);
    if (const auto ev = get_or<std::string>(tree, "eval_manifest", ""); !ev.empty())
        cfg.eval_manifest = resolve(base_dir, ev);
    if (const auto fd = get_or<std::string>(tree, "features_dir", ""); !fd.empty())
        cfg.features_dir = resolve(base_dir, fd);
    if (const auto fd = get_or<std::string>(tree, "eval_features_dir", ""); !fd.empty())
        cfg.eval_features_dir = resolve(base_dir, fd);
    cfg.token_strategy = TokenStrategy::parse(get_or<std::string>(tree, "token_strategy", "patch"));

    const json& sel = section(tree, "selection");
    cfg.selection.k = get_or<std::size_t>(sel, "k", kDefaultK);
    cfg.selection.method = parse_selection_method(get_or<std::string>(sel, "method", "fisher"));
    cfg.selection.seed = get_or<std::uint64_t>(sel, "seed", global_seed);
    cfg.selection.random_seeds = get_or<std::size_t>(sel, "random_seeds", 5);
    cfg.selection.eps = get_or<double>(sel, "eps", kDefaultFisherEps);
    if (cfg.selection.random_seeds == 0) throw ValidationError("config: selection.random_seeds must be >= 1");

    const json& proto = section(tree, "protocol");
    cfg.protocol.name = get_or<std::string>(proto, "name", "centroid");
    if (cfg.protocol.name != "centroid" && cfg.protocol.name != "probe")
        throw ValidationError("config: protocol.name must be centroid or probe");
    cfg.protocol.normalize_input = get_or<bool>(proto, "normalize_input", true);
    auto& tm = cfg.protocol.training;
    tm.epochs = get_or<std::size_t>(proto, "epochs", tm.epochs);
    tm.lr = get_or<double>(proto, "lr", tm.lr);
    tm.batch_size = get_or<std::size_t>(proto, "batch_size", tm.batch_size);
    tm.seed = get_or<std::uint64_t>(proto, "seed", global_seed);
    tm.beta1 = get_or<double>(proto, "beta1", tm.beta1);
    tm.beta2 = get_or<double>(proto, "beta2", tm.beta2);
    tm.adam_eps = get_or<double>(proto, "adam_eps", tm.adam_eps);

    const json& rob = section(tree, "robustness");
    for (const auto& s : get_or<std::vector<std::string>>(rob, "specs", {}))
        cfg.robustness.specs.push_back(PerturbSpec::parse(s));
    for (const auto& [spec, path] : get_or<std::map<std::string, std::string>>(rob, "eval_manifests", {}))
        cfg.robustness.eval_manifests[PerturbSpec::parse(spec).canonical()] = resolve(base_dir, path);
    cfg.robustness.bridge_command = get_or<std::string>(rob, "bridge_command", "");
    cfg.robustness.seed = get_or<std::uint64_t>(rob, "seed", global_seed);

    cfg.output_dir = resolve(base_dir, get_or<std::string>(tree, "output_dir", "fgts-out"));
    if (const auto cd = get_or<std::string>(tree, "cache_dir", ""); !cd.empty()) cfg.cache_dir = resolve(base_dir, cd);
    cfg.label = get_or<std::string>(tree, "label", "");
    return cfg;
}

json load_config_tree(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config " + path.string());
    try {
        return json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ValidationError("config " + path.string() + ": " + e.what());
    }
}

ExperimentConfig load_config(const fs::path& path) {
    return config_from_json(load_config_tree(path), path.parent_path());
}

void apply_override(json& tree, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0)
        throw ValidationError("override \"" + std::string(assignment) + "\" must look like key.path=value");
    const std::string key(assignment.substr(0, eq));
    const std::string raw(assignment.substr(eq + 1));

    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }

    json* node = &tree;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ValidationError("override key \"" + key + "\" has an empty component");
        if (!node->is_object()) *node = json::object();
        if (dot == std::string::npos) {
            (*node)[part] = std::move(value);
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

ordered_json canonical_parameters(const ExperimentConfig& cfg) {
    ordered_json j;
    j["token_strategy"] = cfg.token_strategy.name();
    j["selection"] = {{"k", cfg.selection.k},
                      {"method", to_string(cfg.selection.method)},
                      {"seed", cfg.selection.seed},
                      {"random_seeds", cfg.selection.random_seeds},
                      {"eps", cfg.selection.eps}};
    const auto& tm = cfg.protocol.training;
    j["protocol"] = {{"name", cfg.protocol.name},     {"normalize_input", cfg.protocol.normalize_input},
                     {"epochs", tm.epochs},           {"lr", tm.lr},
                     {"batch_size", tm.batch_size},   {"seed", tm.seed},
                     {"beta1", tm.beta1},             {"beta2", tm.beta2},
                     {"adam_eps", tm.adam_eps}};
    j["label"] = cfg.method_label();
    return j;
}

}  // namespace fgts
