#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fgts/feature_store.hpp"

namespace fgts::synth {

/// Gaussian token features where only a planted subset of patch tokens carries
/// a real/fake mean shift. Every other token (including CLS and registers) has
/// the same distribution for both classes.
struct PlantedSignal {
    TokenLayout layout;
    std::size_t dim = 16;
    std::size_t informative = 10;
    double gap_sigma = 3.0;  // class-mean gap on informative tokens, in units of sigma
    double sigma = 1.0;
    std::uint64_t seed = 0;  // picks the planted tokens
};

/// Planted token rows, ascending.
std::vector<std::size_t> planted_tokens(const PlantedSignal& cfg);

struct LabeledSet {
    std::vector<FeatureTensor> tensors;
    std::vector<Label> labels;
    std::vector<std::string> generators;
};

/// Draws `n_real` real then `n_fake` fake samples. `strength` scales the fake
/// shift (1 = full gap).
LabeledSet draw(const PlantedSignal& cfg, std::size_t n_real, std::size_t n_fake, std::uint64_t sample_seed,
                const std::string& generator = "synthetic", double strength = 1.0);

struct GeneratorSpec {
    std::string name;
    double strength = 1.0;
    bool seen = false;
};

struct Benchmark {
    PlantedSignal signal;
    std::size_t reference_per_class = 200;
    std::size_t eval_real = 200;
    std::size_t eval_fake_per_generator = 100;
    std::vector<GeneratorSpec> generators{{"ldm", 1.0, true}, {"unseen-gen", 0.7, false}};
    std::uint64_t sample_seed = 0;
};

/// Writes feature files under `dir/features` and returns the path of
/// `dir/manifest.jsonl`. Reference fakes come from the first seen generator.
std::filesystem::path write_benchmark(const Benchmark& bench, const std::filesystem::path& dir);

}  // namespace fgts::synth
