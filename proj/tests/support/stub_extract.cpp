// Deterministic stand-in for the feature-extraction bridge. Same invocation
// contract: --manifest in.jsonl --out dir, writing dir/manifest.jsonl and one
// feature file per record. Features are patch colour statistics.

#include <cmath>
#include <iostream>

#include <CLI11.hpp>

#include "fgts/feature_store.hpp"
#include "fgts/perturb.hpp"

namespace fs = std::filesystem;
using namespace fgts;

namespace {

constexpr std::size_t kDim = 6;  // per-channel mean, then per-channel std

void stats(const ImageBuffer& img, std::size_t y0, std::size_t x0, std::size_t size, std::span<float> out) {
    const double n = double(size * size);
    for (std::size_t c = 0; c < 3; ++c) {
        double s = 0, s2 = 0;
        for (std::size_t y = y0; y < y0 + size; ++y)
            for (std::size_t x = x0; x < x0 + size; ++x) {
                const double v = img.at(c, y, x);
                s += v;
                s2 += v * v;
            }
        const double mean = s / n;
        out[c] = static_cast<float>(mean);
        out[3 + c] = static_cast<float>(std::sqrt(std::max(0.0, s2 / n - mean * mean)));
    }
}

FeatureTensor extract(ImageBuffer img) {
    if (img.width != kStandardSize || img.height != kStandardSize)
        img = resize_bilinear(img, kStandardSize, kStandardSize);
    const std::size_t grid = kStandardSize / kPatchSize;
    FeatureTensor t(TokenLayout{1, 0, grid, grid}, kDim);
    t.meta = "stub: patch colour statistics";
    stats(img, 0, 0, kStandardSize, t.row(0));
    for (std::size_t p = 0; p < grid * grid; ++p)
        stats(img, p / grid * kPatchSize, p % grid * kPatchSize, kPatchSize, t.row(1 + p));
    return t;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stub feature extractor"};
    std::string manifest_path, out_dir;
    app.add_option("--manifest", manifest_path)->required();
    app.add_option("--out", out_dir)->required();
    CLI11_PARSE(app, argc, argv);

    try {
        const SampleManifest in = load_manifest(manifest_path);
        SampleManifest out;
        out.layout = TokenLayout{1, 0, kStandardSize / kPatchSize, kStandardSize / kPatchSize};
        out.dim = kDim;
        out.seen_generators = in.seen_generators;
        out.unseen_generators = in.unseen_generators;
        out.base_dir = out_dir;
        fs::create_directories(out_dir);
        for (const auto& r : in.records) {
            const auto image = in.image_file(r);
            if (!image) {
                std::cerr << "skipping " << r.sample_id << ": no image_path\n";
                continue;
            }
            SampleRecord rec = r;
            rec.image_path = fs::absolute(*image);
            rec.feature_path = fs::path("features") / (r.sample_id + ".fgts");
            fs::create_directories(fs::path(out_dir) / "features");
            write_feature_file(extract(load_image(*image)), fs::path(out_dir) / rec.feature_path);
            out.records.push_back(std::move(rec));
        }
        write_manifest(out, fs::path(out_dir) / "manifest.jsonl");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
