#include <cctype>
#include <cstdlib>

#include <fmt/format.h>

#include "experiment_detail.hpp"
#include "fgts/error.hpp"
#include "fgts/hashing.hpp"

namespace fgts {

namespace fs = std::filesystem;

std::string strategy_table_label(const TokenStrategy& strategy, const TokenLayout& layout) {
    using K = TokenStrategy::Kind;
    std::string name;
    switch (strategy.kind) {
        case K::all: name = "All"; break;
        case K::cls: name = "CLS"; break;
        case K::reg: name = "REG"; break;
        case K::patch: name = "Patch"; break;
        case K::cls_reg: name = "CLS+REG"; break;
        case K::cls_patch: name = "CLS+Patch"; break;
        case K::indices: name = "Indices"; break;
    }
    const std::size_t n = strategy.rows(layout).size();
    return fmt::format("{} ({} token{})", name, n, n == 1 ? "" : "s");
}

namespace {

std::string slug(std::string_view text) {
    std::string out;
    for (const char c : text) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    return out;
}

std::string sweep_fingerprint(std::string_view sweep, const ExperimentConfig& cfg, std::string_view extra) {
    Sha256 h;
    h.field(sweep).field(canonical_parameters(cfg).dump()).field(extra);
    h.field(sha256_file(cfg.reference_manifest));
    if (!cfg.eval_manifest.empty()) h.field(sha256_file(cfg.eval_manifest));
    return h.hex_digest();
}

TokenLayout reference_layout(const ExperimentConfig& cfg) {
    return detail::in_stage("load", [&] { return load_manifest(cfg.reference_manifest, cfg.features_dir).layout; });
}

}  // namespace

std::vector<EvalReport> token_strategy_sweep(const ExperimentConfig& cfg) {
    using K = TokenStrategy::Kind;
    const TokenLayout layout = reference_layout(cfg);
    const std::string parent = sweep_fingerprint("sweep-tokens/v1", cfg, "");

    std::vector<EvalReport> reports;
    std::vector<std::pair<std::string, EvalReport>> rows;
    for (const K kind : {K::all, K::cls, K::reg, K::patch, K::cls_reg, K::cls_patch}) {
        ExperimentConfig sub = cfg;
        sub.token_strategy = TokenStrategy::of(kind);
        sub.selection.k = 0;
        sub.label = strategy_table_label(sub.token_strategy, layout);
        sub.output_dir = cfg.output_dir / "tokens" / slug(sub.token_strategy.name());
        sub.cache_dir = cfg.effective_cache_dir();
        if (sub.token_strategy.rows(layout).empty()) continue;  // e.g. no register tokens
        reports.push_back(detail::run_experiment(sub, parent));
        rows.emplace_back(sub.label, reports.back());
    }

    detail::in_stage("report", [&] {
        write_text(cfg.output_dir / "tokens.md",
                   fmt::format("Sweep fingerprint: `{}`\n\n{}\n{}", parent, accuracy_table_markdown(reports),
                               summary_table_markdown(rows, "Tokens")));
        write_text(cfg.output_dir / "tokens.csv", summary_table_csv(rows, "tokens"));
    });
    return reports;
}

std::vector<TopKPoint> topk_sweep(const ExperimentConfig& cfg, const std::vector<std::size_t>& ks) {
    if (ks.empty()) throw ValidationError("top-K sweep needs at least one K");
    const TokenLayout layout = reference_layout(cfg);
    const std::size_t available = cfg.token_strategy.rows(layout).size();
    for (const std::size_t k : ks)
        if (k == 0 || k > available)
            throw ValidationError(fmt::format("K={} out of range [1, {}]", k, available));

    std::string ks_text;
    for (const std::size_t k : ks) ks_text += std::to_string(k) + ",";
    const std::string parent = sweep_fingerprint("sweep-topk/v1", cfg, ks_text);

    std::vector<TopKPoint> points;
    for (const std::size_t k : ks) {
        TopKPoint p;
        p.k = k;
        for (const auto method : {SelectionConfig::Method::fisher_topk, SelectionConfig::Method::random_k}) {
            ExperimentConfig sub = cfg;
            sub.selection.k = k;
            sub.selection.method = method;
            sub.label.clear();
            sub.output_dir = cfg.output_dir / "topk" / fmt::format("k{}-{}", k, to_string(method));
            sub.cache_dir = cfg.effective_cache_dir();
            (method == SelectionConfig::Method::fisher_topk ? p.fisher : p.random) = detail::run_experiment(sub, parent);
        }
        points.push_back(std::move(p));
    }

    detail::in_stage("report", [&] {
        std::string md = fmt::format("Sweep fingerprint: `{}`\n\n", parent);
        md += "| K | Fisher Acc | Random Acc | Gap | Fisher AUC | Random AUC | Fisher AP | Random AP |\n"
              "|---:|---:|---:|---:|---:|---:|---:|---:|\n";
        std::string csv = "k,fisher_acc,random_acc,gap,fisher_auc,random_auc,fisher_ap,random_ap\n";
        for (const auto& p : points) {
            const auto& f = p.fisher.metrics.aggregate;
            const auto& r = p.random.metrics.aggregate;
            md += fmt::format("| {} | {:.4f} | {:.4f} | {:+.4f} | {:.4f} | {:.4f} | {:.4f} | {:.4f} |\n", p.k, f.acc,
                              r.acc, f.acc - r.acc, f.auc, r.auc, f.ap, r.ap);
            csv += fmt::format("{},{},{},{},{},{},{},{}\n", p.k, format_metric(f.acc), format_metric(r.acc),
                               format_metric(f.acc - r.acc), format_metric(f.auc), format_metric(r.auc),
                               format_metric(f.ap), format_metric(r.ap));
        }
        write_text(cfg.output_dir / "topk.md", md);
        write_text(cfg.output_dir / "topk.csv", csv);
    });
    return points;
}

namespace {

std::string substitute(std::string command, std::string_view token, const std::string& value) {
    for (std::size_t pos; (pos = command.find(token)) != std::string::npos;)
        command.replace(pos, token.size(), value);
    return command;
}

// Writes perturbed copies of the eval images, runs the bridge on them and
// returns the manifest the bridge produced.
fs::path extract_perturbed(const ExperimentConfig& cfg, const PerturbSpec& spec, const fs::path& work) {
    const SampleManifest clean = load_manifest(cfg.eval_manifest.empty() ? cfg.reference_manifest : cfg.eval_manifest,
                                               cfg.eval_features_dir ? cfg.eval_features_dir : cfg.features_dir);
    fs::create_directories(work / "images");

    SampleManifest request = clean;
    request.records.clear();
    request.base_dir = work;
    for (const auto& r : clean.records) {
        if (r.split != Split::eval) continue;
        const auto image = clean.image_file(r);
        if (!image) throw ValidationError("record " + r.sample_id + " has no image_path");
        ImageBuffer img = load_image(*image);
        if (img.width != kStandardSize || img.height != kStandardSize)
            img = resize_bilinear(img, kStandardSize, kStandardSize);
        const fs::path out_image = work / "images" / (slug(r.sample_id) + ".png");
        save_png(apply_perturbation(img, spec, derive_seed(cfg.robustness.seed, r.sample_id)), out_image);

        SampleRecord rec = r;
        rec.image_path = fs::absolute(out_image);
        rec.feature_path = fs::path("features") / (slug(r.sample_id) + ".fgts");
        request.records.push_back(std::move(rec));
    }
    const fs::path request_path = work / "request.jsonl";
    write_manifest(request, request_path);

    const fs::path out_dir = work / "bridge";
    fs::create_directories(out_dir);
    std::string command = substitute(cfg.robustness.bridge_command, "{manifest}", request_path.string());
    command = substitute(command, "{out}", out_dir.string());
    if (const int rc = std::system(command.c_str()); rc != 0)
        throw StageError("bridge", fmt::format("command exited with status {}: {}", rc, command));
    const fs::path produced = out_dir / "manifest.jsonl";
    if (!fs::exists(produced)) throw StageError("bridge", "no manifest.jsonl in " + out_dir.string());
    return produced;
}

}  // namespace

std::vector<RobustnessRow> robustness_sweep(const ExperimentConfig& cfg, const std::vector<PerturbSpec>& specs) {
    std::string spec_text;
    for (const auto& s : specs) {
        s.validate();
        spec_text += s.canonical() + ";";
    }
    const std::string parent = sweep_fingerprint("sweep-robustness/v1", cfg, spec_text);

    auto run = [&](ExperimentConfig sub, const std::string& name, const std::string& dir) {
        sub.label = cfg.label;
        sub.output_dir = cfg.output_dir / "robustness" / dir;
        sub.cache_dir = cfg.effective_cache_dir();
        return RobustnessRow{name, detail::run_experiment(sub, parent)};
    };

    std::vector<RobustnessRow> rows;
    rows.push_back(run(cfg, "Clean", "clean"));
    for (const auto& spec : specs) {
        const std::string dir = slug(spec.canonical());
        fs::path manifest;
        if (const auto it = cfg.robustness.eval_manifests.find(spec.canonical());
            it != cfg.robustness.eval_manifests.end()) {
            manifest = it->second;
        } else if (!cfg.robustness.bridge_command.empty()) {
            manifest = detail::in_stage("bridge", [&] {
                return extract_perturbed(cfg, spec, cfg.output_dir / "robustness" / dir / "extract");
            });
        } else {
            throw StageError("bridge", "bridge unavailable and no precomputed features for " + spec.canonical());
        }
        ExperimentConfig sub = cfg;
        sub.eval_manifest = manifest;
        sub.eval_features_dir = manifest.parent_path();
        rows.push_back(run(sub, spec.label(), dir));
    }

    detail::in_stage("report", [&] {
        std::vector<std::pair<std::string, EvalReport>> table;
        for (const auto& r : rows) table.emplace_back(r.label, r.report);
        write_text(cfg.output_dir / "robustness.md",
                   fmt::format("Sweep fingerprint: `{}`\n\n{}", parent, summary_table_markdown(table, "Condition")));
        write_text(cfg.output_dir / "robustness.csv", summary_table_csv(table, "condition"));
    });
    return rows;
}

}  // namespace fgts
