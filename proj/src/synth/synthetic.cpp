#include "fgts/synth.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "fgts/error.hpp"

namespace fgts::synth {

namespace fs = std::filesystem;

std::vector<std::size_t> planted_tokens(const PlantedSignal& cfg) {
    const std::size_t patches = cfg.layout.patch_count();
    if (cfg.informative > patches) throw ValidationError("more planted tokens than patch tokens");
    std::vector<std::size_t> rows(patches);
    std::iota(rows.begin(), rows.end(), cfg.layout.first_patch());
    std::vector<std::size_t> out;
    std::mt19937_64 rng(cfg.seed);
    std::sample(rows.begin(), rows.end(), std::back_inserter(out), cfg.informative, rng);
    return out;
}

LabeledSet draw(const PlantedSignal& cfg, std::size_t n_real, std::size_t n_fake, std::uint64_t sample_seed,
                const std::string& generator, double strength) {
    const auto planted = planted_tokens(cfg);
    std::vector<char> is_planted(cfg.layout.total(), 0);
    for (std::size_t t : planted) is_planted[t] = 1;

    const double half_gap = 0.5 * cfg.gap_sigma * cfg.sigma;
    std::mt19937_64 rng(sample_seed);
    std::normal_distribution<double> noise(0.0, cfg.sigma);

    LabeledSet set;
    for (std::size_t i = 0; i < n_real + n_fake; ++i) {
        const Label label = i < n_real ? Label::real : Label::fake;
        const double shift = label == Label::real ? half_gap : -half_gap * strength;
        FeatureTensor t(cfg.layout, cfg.dim);
        for (std::size_t tok = 0; tok < cfg.layout.total(); ++tok) {
            const double mean = is_planted[tok] ? shift : 0.0;
            for (float& v : t.row(tok)) v = static_cast<float>(mean + noise(rng));
        }
        set.tensors.push_back(std::move(t));
        set.labels.push_back(label);
        set.generators.emplace_back(label == Label::real ? std::string(kRealGenerator) : generator);
    }
    return set;
}

fs::path write_benchmark(const Benchmark& bench, const fs::path& dir) {
    const auto seen = std::find_if(bench.generators.begin(), bench.generators.end(),
                                   [](const GeneratorSpec& g) { return g.seen; });
    if (seen == bench.generators.end()) throw ValidationError("benchmark needs a seen generator");

    fs::create_directories(dir / "features");
    SampleManifest m;
    m.layout = bench.signal.layout;
    m.dim = bench.signal.dim;
    for (const auto& g : bench.generators) (g.seen ? m.seen_generators : m.unseen_generators).insert(g.name);

    auto emit = [&](const LabeledSet& set, const std::string& prefix, Split split) {
        for (std::size_t i = 0; i < set.tensors.size(); ++i) {
            SampleRecord r;
            r.sample_id = fmt::format("{}-{}-{:05d}", prefix, to_string(set.labels[i]), i);
            r.feature_path = fs::path("features") / (r.sample_id + ".fgts");
            r.label = set.labels[i];
            r.generator = set.generators[i];
            r.split = split;
            write_feature_file(set.tensors[i], dir / r.feature_path);
            m.records.push_back(std::move(r));
        }
    };

    std::uint64_t stream = bench.sample_seed * 1000;
    emit(draw(bench.signal, bench.reference_per_class, bench.reference_per_class, stream++, seen->name, seen->strength),
         "ref", Split::reference);
    emit(draw(bench.signal, bench.eval_real, 0, stream++), "eval", Split::eval);
    for (const auto& g : bench.generators)
        emit(draw(bench.signal, 0, bench.eval_fake_per_generator, stream++, g.name, g.strength), "eval-" + g.name,
             Split::eval);

    const fs::path manifest = dir / "manifest.jsonl";
    write_manifest(m, manifest);
    return manifest;
}

}  // namespace fgts::synth
