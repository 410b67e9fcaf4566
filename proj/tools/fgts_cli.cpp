// fgts command-line driver. Exit codes: 0 success, 2 validation error, 3 stage failure.

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "fgts/error.hpp"
#include "fgts/harness.hpp"
#include "fgts/hashing.hpp"
#include "fgts/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitStage = 3;

fs::path absolute(const std::string& p) { return fs::absolute(p).lexically_normal(); }

/// Flags shared by every verb that runs an experiment. Each one is an
/// override applied after the config file and before --set.
struct ExperimentFlags {
    std::string config;
    std::vector<std::string> sets;
    std::string reference, eval, features, out, strategy, method, protocol, label, cache;
    std::optional<std::size_t> k;

    void attach(CLI::App& app) {
        app.add_option("--config", config, "JSON config file (comments allowed)");
        app.add_option("--set", sets, "Override any config field: key.path=value");
        app.add_option("--reference-manifest", reference);
        app.add_option("--eval-manifest", eval);
        app.add_option("--features", features, "Base directory for relative feature paths");
        app.add_option("--out", out, "Output directory");
        app.add_option("--strategy", strategy, "all|cls|reg|patch|cls+reg|cls+patch|indices:i,j,..");
        app.add_option("--k", k, "Tokens to select (0: average the whole strategy)");
        app.add_option("--method", method, "fisher|random");
        app.add_option("--protocol", protocol, "centroid|probe");
        app.add_option("--label", label, "Method name in tables");
        app.add_option("--cache", cache, "Stage cache directory");
    }

    fgts::ExperimentConfig build(std::uint64_t seed, bool seed_given) const {
        json tree = json::object();
        fs::path base;
        if (!config.empty()) {
            tree = fgts::load_config_tree(config);
            base = absolute(config).parent_path();
        }
        if (seed_given || !tree.contains("seed")) tree["seed"] = seed;
        auto put = [&](const std::string& key, const std::string& value, bool is_path) {
            if (!value.empty()) fgts::apply_override(tree, key + "=" + json(is_path ? absolute(value).string() : value).dump());
        };
        put("reference_manifest", reference, true);
        put("eval_manifest", eval, true);
        put("features_dir", features, true);
        put("output_dir", out, true);
        put("cache_dir", cache, true);
        put("token_strategy", strategy, false);
        put("selection.method", method, false);
        put("protocol.name", protocol, false);
        put("label", label, false);
        if (k) tree["selection"]["k"] = *k;
        for (const auto& s : sets) fgts::apply_override(tree, s);
        return fgts::config_from_json(tree, base);
    }
};

void print_report(const fgts::EvalReport& r) {
    std::cout << fgts::report_markdown(r);
}

int cmd_validate(const std::string& manifest, const std::string& features) {
    std::optional<fs::path> dir;
    if (!features.empty()) dir = features;
    const auto m = fgts::load_manifest(manifest, dir);
    const auto report = fgts::validate_manifest(m);
    for (const auto& w : report.warnings) std::cout << "warning: " << w << "\n";
    for (const auto& e : report.errors) std::cout << "error: " << e << "\n";
    std::cout << fmt::format("{} files checked, {} errors, {} warnings\n", report.files_checked, report.errors.size(),
                             report.warnings.size());
    return report.ok() ? 0 : kExitValidation;
}

std::vector<double> split_numbers(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string part = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(part, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != part.size()) throw fgts::ValidationError("not a number: \"" + part + "\"");
        out.push_back(v);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

bool is_image(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp";
}

int cmd_perturb(const fgts::PerturbSpec& spec, std::uint64_t seed, const fs::path& in, const fs::path& out) {
    std::vector<fs::path> inputs;
    if (fs::is_directory(in)) {
        for (const auto& e : fs::directory_iterator(in))
            if (e.is_regular_file() && is_image(e.path())) inputs.push_back(e.path());
        std::sort(inputs.begin(), inputs.end());
    } else {
        inputs.push_back(in);
    }
    if (inputs.empty()) throw fgts::ValidationError("no images in " + in.string());
    fs::create_directories(out);
    for (const auto& path : inputs) {
        const std::string stem = path.stem().string();
        const auto img = fgts::apply_perturbation(fgts::load_image(path), spec, fgts::derive_seed(seed, stem));
        if (spec.kind == fgts::PerturbSpec::Kind::jpeg)
            fgts::save_jpeg(img, out / (stem + ".jpg"), spec.quality);
        else
            fgts::save_png(img, out / (stem + ".png"));
    }
    std::cout << fmt::format("{} images written to {}\n", inputs.size(), out.string());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fisher-guided token selection for image forgery analysis"};
    app.require_subcommand(1);
    app.fallthrough();
    std::uint64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "Default for every unset seed");
    seed_opt->capture_default_str();

    // validate
    auto* validate = app.add_subcommand("validate", "Check a manifest and every feature file it names");
    std::string v_manifest, v_features;
    validate->add_option("--manifest", v_manifest)->required();
    validate->add_option("--features", v_features, "Base directory for relative feature paths");

    // rank
    auto* rank = app.add_subcommand("rank", "Fisher-rank tokens on the reference split");
    std::string r_manifest, r_features, r_out = "ranking.json", r_scope = "patch";
    double r_eps = fgts::kDefaultFisherEps;
    rank->add_option("--manifest", r_manifest)->required();
    rank->add_option("--features", r_features);
    rank->add_option("--scope", r_scope, "Token strategy to rank")->capture_default_str();
    rank->add_option("--eps", r_eps)->capture_default_str();
    rank->add_option("--out", r_out)->capture_default_str();

    // fit
    auto* fit = app.add_subcommand("fit", "Fit a protocol on the reference split");
    std::string f_manifest, f_features, f_ranking, f_out = "model.json", f_protocol = "centroid", f_method = "fisher";
    std::size_t f_k = fgts::kDefaultK;
    fgts::TrainingMeta f_meta;
    bool f_raw = false;
    fit->add_option("--manifest", f_manifest)->required();
    fit->add_option("--features", f_features);
    fit->add_option("--ranking", f_ranking)->required();
    fit->add_option("--k", f_k)->capture_default_str();
    fit->add_option("--method", f_method, "fisher|random")->capture_default_str();
    fit->add_option("--protocol", f_protocol, "centroid|probe")->capture_default_str();
    fit->add_option("--epochs", f_meta.epochs)->capture_default_str();
    fit->add_option("--lr", f_meta.lr)->capture_default_str();
    fit->add_option("--batch-size", f_meta.batch_size, "0: full batch")->capture_default_str();
    fit->add_flag("--no-normalize", f_raw, "Feed raw embeddings to the probe");
    fit->add_option("--out", f_out)->capture_default_str();

    // classify
    auto* classify = app.add_subcommand("classify", "Score a manifest split with a fitted model");
    std::string c_manifest, c_features, c_model, c_out = "scores.csv", c_split = "eval";
    classify->add_option("--manifest", c_manifest)->required();
    classify->add_option("--features", c_features);
    classify->add_option("--model", c_model)->required();
    classify->add_option("--split", c_split, "reference|eval")->capture_default_str();
    classify->add_option("--out", c_out)->capture_default_str();

    // eval and sweeps
    ExperimentFlags e_flags, st_flags, sk_flags, sr_flags;
    auto* eval = app.add_subcommand("eval", "Run rank, fit, score and report");
    e_flags.attach(*eval);
    auto* sweep_tokens = app.add_subcommand("sweep-tokens", "Compare All/CLS/REG/Patch/CLS+REG/CLS+Patch");
    st_flags.attach(*sweep_tokens);
    auto* sweep_topk = app.add_subcommand("sweep-topk", "Fisher top-K against random-K");
    sk_flags.attach(*sweep_topk);
    std::vector<std::size_t> ks{10, 20, 30, 50};
    sweep_topk->add_option("--ks", ks, "K values")->delimiter(',')->capture_default_str();
    auto* sweep_rob = app.add_subcommand("sweep-robustness", "Clean baseline plus one run per perturbation");
    sr_flags.attach(*sweep_rob);
    std::vector<std::string> sr_specs;
    bool sr_clean_only = false;
    sweep_rob->add_option("--spec", sr_specs, "Perturbation, e.g. jpeg(70); defaults to the config list");
    std::string sr_bridge;
    sweep_rob->add_option("--bridge-command", sr_bridge, "Extractor command with {manifest} and {out}");
    sweep_rob->add_flag("--clean-only", sr_clean_only, "Run only the clean baseline");

    // perturb
    auto* perturb = app.add_subcommand("perturb", "Apply a perturbation to an image or a directory of images");
    std::string p_kind, p_in, p_out;
    std::string p_params;
    perturb->add_option("--kind", p_kind, "identity|lowpass|highpass|mask|shuffle|cond_a|cond_b|cond_c|gaussian|jpeg|resize")
        ->required();
    perturb->add_option("--param", p_params, "Comma-separated parameters");
    perturb->add_option("--in", p_in)->required();
    perturb->add_option("--out", p_out)->required();

    // spectrum
    auto* spec_cmd = app.add_subcommand("spectrum", "Log-magnitude spectrum as CSV or PNG");
    std::string s_in, s_out;
    spec_cmd->add_option("--in", s_in)->required();
    spec_cmd->add_option("--out", s_out, "*.csv or *.png")->required();

    // report
    auto* report = app.add_subcommand("report", "Print or combine saved reports");
    std::vector<std::string> rep_dirs;
    std::string rep_format = "md";
    report->add_option("reports", rep_dirs, "Report directories or report.csv files")->required();
    report->add_option("--format", rep_format, "md|csv")->check(CLI::IsMember({"md", "csv"}))->capture_default_str();

    // synth
    auto* synth = app.add_subcommand("synth", "Write a synthetic planted-signal benchmark");
    std::string y_out;
    synth->add_option("--out", y_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitValidation;
    }
    const bool seed_given = seed_opt->count() > 0;

    try {
        if (*validate) return cmd_validate(v_manifest, v_features);

        if (*rank) {
            std::optional<fs::path> dir;
            if (!r_features.empty()) dir = r_features;
            const auto m = fgts::load_manifest(r_manifest, dir);
            const auto ranking = fgts::rank_reference(m, fgts::TokenStrategy::parse(r_scope), r_eps);
            fgts::save_ranking(ranking, r_out);
            std::cout << fmt::format("ranked {} tokens; top {}:", ranking.tokens.size(), ranking.k_default);
            for (std::size_t i = 0; i < std::min(ranking.k_default, ranking.sorted_indices.size()); ++i)
                std::cout << " " << ranking.sorted_indices[i];
            std::cout << "\n";
            return 0;
        }

        if (*fit) {
            std::optional<fs::path> dir;
            if (!f_features.empty()) dir = f_features;
            const auto m = fgts::load_manifest(f_manifest, dir);
            const auto ranking = fgts::load_ranking(f_ranking);
            f_meta.seed = seed;
            const auto tokens =
                fgts::select_top_k(ranking, {f_k, fgts::parse_selection_method(f_method), seed});
            fgts::ExperimentConfig::Protocol proto;
            proto.name = f_protocol;
            proto.training = f_meta;
            proto.normalize_input = !f_raw;
            const auto model = fgts::fit_reference(m, tokens, proto);
            fgts::save_model(model, f_out);
            std::cout << fmt::format("{} model on {} tokens written to {}\n", fgts::protocol_name(model), tokens.size(),
                                     f_out);
            return 0;
        }

        if (*classify) {
            std::optional<fs::path> dir;
            if (!c_features.empty()) dir = c_features;
            const auto m = fgts::load_manifest(c_manifest, dir);
            const auto model = fgts::load_model(c_model);
            const fgts::Split split = c_split == "reference" ? fgts::Split::reference
                                      : c_split == "eval"    ? fgts::Split::eval
                                                             : throw fgts::ValidationError("unknown split " + c_split);
            const auto scores = fgts::classify(m, model, split);
            fgts::write_text(c_out, fgts::scores_csv(scores));
            std::cout << fmt::format("{} samples scored into {}\n", scores.size(), c_out);
            return 0;
        }

        if (*eval) {
            print_report(fgts::run_experiment(e_flags.build(seed, seed_given)));
            return 0;
        }

        if (*sweep_tokens) {
            const auto cfg = st_flags.build(seed, seed_given);
            fgts::token_strategy_sweep(cfg);
            std::cout << fgts::read_text(cfg.output_dir / "tokens.md");
            return 0;
        }

        if (*sweep_topk) {
            const auto cfg = sk_flags.build(seed, seed_given);
            fgts::topk_sweep(cfg, ks);
            std::cout << fgts::read_text(cfg.output_dir / "topk.md");
            return 0;
        }

        if (*sweep_rob) {
            if (!sr_bridge.empty()) sr_flags.sets.push_back("robustness.bridge_command=" + json(sr_bridge).dump());
            const auto cfg = sr_flags.build(seed, seed_given);
            std::vector<fgts::PerturbSpec> specs;
            if (!sr_clean_only) {
                for (const auto& s : sr_specs) specs.push_back(fgts::PerturbSpec::parse(s));
                if (specs.empty()) specs = cfg.robustness.specs;
                if (specs.empty()) specs = fgts::default_robustness_specs();
            }
            fgts::robustness_sweep(cfg, specs);
            std::cout << fgts::read_text(cfg.output_dir / "robustness.md");
            return 0;
        }

        if (*perturb) {
            const auto params = p_params.empty() ? std::vector<double>{} : split_numbers(p_params);
            const auto spec = fgts::PerturbSpec::make(p_kind, params);
            spec.validate();
            return cmd_perturb(spec, seed, p_in, p_out);
        }

        if (*spec_cmd) {
            const auto s = fgts::spectrum(fgts::load_image(s_in));
            const std::string ext = fs::path(s_out).extension().string();
            if (ext == ".csv")
                fgts::write_spectrum_csv(s, s_out);
            else if (ext == ".png")
                fgts::write_spectrum_png(s, s_out);
            else
                throw fgts::ValidationError("--out must end in .csv or .png");
            return 0;
        }

        if (*report) {
            std::vector<fgts::EvalReport> reports;
            for (const auto& d : rep_dirs) reports.push_back(fgts::read_report(d));
            if (reports.size() == 1 && rep_format == "md")
                std::cout << fgts::report_markdown(reports.front());
            else
                std::cout << (rep_format == "md" ? fgts::accuracy_table_markdown(reports)
                                                 : fgts::accuracy_table_csv(reports));
            return 0;
        }

        if (*synth) {
            fgts::synth::Benchmark bench;
            bench.signal.seed = seed;
            std::cout << fgts::synth::write_benchmark(bench, y_out).string() << "\n";
            return 0;
        }
    } catch (const fgts::StageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStage;
    } catch (const fgts::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStage;
    }
    return 0;
}
