#include <sstream>

#include <fmt/format.h>

#include "cache.hpp"
#include "experiment_detail.hpp"
#include "fgts/error.hpp"
#include "fgts/hashing.hpp"

namespace fgts {

namespace fs = std::filesystem;

std::string scores_csv(const std::vector<ScoredRecord>& scores) {
    std::string out = "sample_id,generator,label,score\n";
    for (const auto& s : scores)
        out += fmt::format("{},{},{},{}\n", s.sample_id, s.sample.generator, to_string(s.sample.label),
                           format_metric(s.sample.score));
    return out;
}

std::vector<ScoredRecord> parse_scores_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != "sample_id,generator,label,score")
        throw ValidationError("scores CSV: unexpected header");
    std::vector<ScoredRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1)
            f.push_back(line.substr(start, pos - start));
        f.push_back(line.substr(start));
        if (f.size() != 4) throw ValidationError("scores CSV: expected 4 fields in \"" + line + "\"");
        std::size_t used = 0;
        const double score = std::stod(f[3], &used);
        if (used != f[3].size()) throw ValidationError("scores CSV: bad score \"" + f[3] + "\"");
        out.push_back({f[0], ScoredSample{score, parse_label(f[2]), f[1]}});
    }
    return out;
}

TokenRanking rank_reference(const SampleManifest& manifest, const TokenStrategy& scope, double eps) {
    ClassStatsAccumulator acc(manifest.layout, manifest.dim, scope);
    for (const auto& r : manifest.records)
        if (r.split == Split::reference) acc.add(manifest.load_features(r), r.label);
    return fisher_scores(acc.finish(), eps);
}

Model fit_reference(const SampleManifest& manifest, std::vector<std::size_t> tokens,
                    const ExperimentConfig::Protocol& protocol) {
    std::vector<Embedding> embeddings;
    std::vector<Label> labels;
    for (const auto& r : manifest.records) {
        if (r.split != Split::reference) continue;
        embeddings.push_back(aggregate(manifest.load_features(r), tokens));
        labels.push_back(r.label);
    }
    if (protocol.name == "centroid") return fit_centroids(embeddings, labels, std::move(tokens));
    if (protocol.name == "probe") {
        LinearProbe probe = fit_probe(embeddings, labels, protocol.training, protocol.normalize_input);
        probe.k = tokens.size();
        probe.token_indices = std::move(tokens);
        return probe;
    }
    throw ValidationError("unknown protocol \"" + protocol.name + "\"");
}

std::vector<ScoredRecord> classify(const SampleManifest& manifest, const Model& model, Split split) {
    const auto& tokens = model_tokens(model);
    if (tokens.empty()) throw ValidationError("model has no token indices");
    std::vector<ScoredRecord> out;
    for (const auto& r : manifest.records) {
        if (r.split != split) continue;
        const Prediction p = predict(model, aggregate(manifest.load_features(r), tokens));
        out.push_back({r.sample_id, ScoredSample{p.score, r.label, r.generator}});
    }
    return out;
}

namespace detail {

namespace {

std::string digest_records(const SampleManifest& m, Split split) {
    Sha256 h;
    h.field(describe(m.layout)).field(std::to_string(m.dim));
    for (const auto& r : m.records) {
        if (r.split != split) continue;
        h.field(r.sample_id).field(to_string(r.label)).field(r.generator).field(sha256_file(m.feature_file(r)));
    }
    return h.hex_digest();
}

std::string join(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

struct Inputs {
    SampleManifest reference;
    SampleManifest eval;
    std::string reference_digest;
    std::string eval_digest;
    std::size_t n_eval = 0;
};

Inputs load_inputs(const ExperimentConfig& cfg) {
    return in_stage("load", [&] {
        Inputs in;
        in.reference = load_manifest(cfg.reference_manifest, cfg.features_dir);
        const auto eval_dir = cfg.eval_features_dir ? cfg.eval_features_dir : cfg.features_dir;
        in.eval = cfg.eval_manifest.empty() ? load_manifest(cfg.reference_manifest, eval_dir)
                                            : load_manifest(cfg.eval_manifest, eval_dir);
        if (in.eval.layout != in.reference.layout || in.eval.dim != in.reference.dim)
            throw ValidationError("layout mismatch between reference and eval manifests");
        if (in.reference.with_split(Split::reference).empty()) throw ValidationError("no reference samples");
        in.n_eval = in.eval.with_split(Split::eval).size();
        if (in.n_eval == 0) throw ValidationError("no eval samples");
        in.reference_digest = digest_records(in.reference, Split::reference);
        in.eval_digest = digest_records(in.eval, Split::eval);
        return in;
    });
}

std::string protocol_key(const ExperimentConfig::Protocol& p) {
    if (p.name == "centroid") return "centroid";
    const auto& t = p.training;
    return fmt::format("probe|{}|{}|{}|{}|{}|{}|{}|{}", p.normalize_input, t.epochs, t.lr, t.batch_size, t.seed,
                       t.beta1, t.beta2, t.adam_eps);
}

EvalReport run_single(const ExperimentConfig& cfg, const Inputs& in, const std::string& parent) {
    const StageCache cache(cfg.effective_cache_dir());

    std::string ranking_json;
    std::vector<std::size_t> tokens;
    if (cfg.selection.k == 0) {
        tokens = in_stage("select", [&] {
            auto rows = cfg.token_strategy.rows(in.reference.layout);
            if (rows.empty()) throw ValidationError("token strategy \"" + cfg.token_strategy.name() + "\" selects no tokens");
            return rows;
        });
    } else {
        const std::string key = Sha256()
                                    .field("rank/v1")
                                    .field(cfg.token_strategy.name())
                                    .field(fmt::format("{}", cfg.selection.eps))
                                    .field(in.reference_digest)
                                    .hex_digest();
        ranking_json = in_stage("rank", [&] {
            if (auto hit = cache.get("rank", key, ".json")) return *hit;
            const std::string fresh = ranking_to_json(rank_reference(in.reference, cfg.token_strategy, cfg.selection.eps));
            cache.put("rank", key, ".json", fresh);
            return fresh;
        });
        tokens = in_stage("select", [&] {
            const TokenRanking ranking = ranking_from_json(ranking_json);
            return select_top_k(ranking, {cfg.selection.k, cfg.selection.method, cfg.selection.seed});
        });
    }

    const std::string fit_key =
        Sha256().field("fit/v1").field(in.reference_digest).field(join(tokens)).field(protocol_key(cfg.protocol)).hex_digest();
    const std::string model_json = in_stage("fit", [&] {
        if (auto hit = cache.get("fit", fit_key, ".json")) return *hit;
        const std::string fresh = model_to_json(fit_reference(in.reference, tokens, cfg.protocol));
        cache.put("fit", fit_key, ".json", fresh);
        return fresh;
    });

    const std::string score_key = Sha256().field("score/v1").field(fit_key).field(in.eval_digest).hex_digest();
    const std::string scores_text = in_stage("score", [&] {
        if (auto hit = cache.get("score", score_key, ".csv")) return *hit;
        const std::string fresh = scores_csv(classify(in.eval, model_from_json(model_json), Split::eval));
        cache.put("score", score_key, ".csv", fresh);
        return fresh;
    });

    return in_stage("report", [&] {
        const auto scored = parse_scores_csv(scores_text);
        std::vector<ScoredSample> samples;
        samples.reserve(scored.size());
        for (const auto& s : scored) samples.push_back(s.sample);

        EvalReport report;
        report.label = cfg.method_label();
        report.parent_fingerprint = parent;
        report.strategy = cfg.token_strategy.name();
        report.selection = cfg.selection.k == 0
                               ? std::string("mean of all strategy tokens")
                               : SelectionConfig{cfg.selection.k, cfg.selection.method, cfg.selection.seed}.describe();
        report.protocol = cfg.protocol.name;
        report.n_eval = scored.size();
        report.metrics = group_by_generator(samples);
        report.fingerprint = Sha256()
                                 .field("report/v1")
                                 .field(canonical_parameters(cfg).dump())
                                 .field(in.reference_digest)
                                 .field(in.eval_digest)
                                 .field(ranking_json)
                                 .field(model_json)
                                 .field(scores_text)
                                 .hex_digest();

        fs::create_directories(cfg.output_dir);
        if (!ranking_json.empty()) write_text(cfg.output_dir / "ranking.json", ranking_json);
        write_text(cfg.output_dir / "model.json", model_json);
        write_text(cfg.output_dir / "scores.csv", scores_text);
        write_report(report, cfg.output_dir);
        return report;
    });
}

}  // namespace

EvalReport run_experiment(const ExperimentConfig& cfg, const std::string& parent) {
    const Inputs in = load_inputs(cfg);
    const bool averaged =
        cfg.selection.k > 0 && cfg.selection.method == SelectionConfig::Method::random_k && cfg.selection.random_seeds > 1;
    if (!averaged) return run_single(cfg, in, parent);

    std::vector<EvalReport> runs;
    Sha256 lineage;
    lineage.field("random-mean/v1");
    for (std::size_t i = 0; i < cfg.selection.random_seeds; ++i) {
        ExperimentConfig sub = cfg;
        sub.selection.seed = cfg.selection.seed + i;
        sub.selection.random_seeds = 1;
        sub.output_dir = cfg.output_dir / fmt::format("seed-{}", sub.selection.seed);
        sub.cache_dir = cfg.effective_cache_dir();
        runs.push_back(run_single(sub, in, parent));
        lineage.field(runs.back().fingerprint);
    }
    EvalReport mean = average_reports(runs);
    mean.label = cfg.method_label();
    mean.selection = fmt::format("random-{} (mean over seeds {}..{})", cfg.selection.k, cfg.selection.seed,
                                 cfg.selection.seed + cfg.selection.random_seeds - 1);
    mean.fingerprint = lineage.hex_digest();
    in_stage("report", [&] { write_report(mean, cfg.output_dir); });
    return mean;
}

}  // namespace detail

EvalReport run_experiment(const ExperimentConfig& cfg) { return detail::run_experiment(cfg, ""); }

}  // namespace fgts
