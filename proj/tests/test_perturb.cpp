#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>

#include "fgts/error.hpp"
#include "fgts/perturb.hpp"
#include "support/gen.hpp"
#include "support/tmpdir.hpp"

using namespace fgts;

namespace {

constexpr std::size_t kN = kStandardSize;
constexpr std::size_t kGrid = kN / kPatchSize;

double max_abs_diff(const ImageBuffer& a, const ImageBuffer& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

double energy(const ImageBuffer& a) {
    double e = 0;
    for (double v : a.data) e += v * v;
    return e;
}

ImageBuffer add(const ImageBuffer& a, const ImageBuffer& b) {
    ImageBuffer out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

std::vector<std::array<double, 3>> pixel_multiset(const ImageBuffer& img) {
    std::vector<std::array<double, 3>> px;
    for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x) px.push_back({img.at(0, y, x), img.at(1, y, x), img.at(2, y, x)});
    std::sort(px.begin(), px.end());
    return px;
}

bool patch_equal(const ImageBuffer& a, std::size_t pa, const ImageBuffer& b, std::size_t pb,
                 std::size_t cols = kGrid, std::size_t cell = kPatchSize) {
    const std::size_t ay = pa / cols * cell, ax = pa % cols * cell, by = pb / cols * cell, bx = pb % cols * cell;
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t y = 0; y < cell; ++y)
            for (std::size_t x = 0; x < cell; ++x)
                if (a.at(c, ay + y, ax + x) != b.at(c, by + y, bx + x)) return false;
    return true;
}

bool patch_flat(const ImageBuffer& img, std::size_t p) {
    const std::size_t y0 = p / kGrid * kPatchSize, x0 = p % kGrid * kPatchSize;
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t y = 0; y < kPatchSize; ++y)
            for (std::size_t x = 0; x < kPatchSize; ++x)
                if (img.at(c, y0 + y, x0 + x) != img.at(c, y0, x0)) return false;
    return true;
}

double channel_mean(const ImageBuffer& img, std::size_t c) {
    double s = 0;
    for (double v : img.plane(c)) s += v;
    return s / static_cast<double>(img.plane_size());
}

ImageBuffer horizontal_sinusoid(std::size_t f) {
    ImageBuffer img(kN, kN);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t y = 0; y < kN; ++y)
            for (std::size_t x = 0; x < kN; ++x)
                img.at(c, y, x) = 0.5 + 0.4 * std::cos(2.0 * std::numbers::pi * double(f * x) / double(kN));
    return img;
}

}  // namespace

TEST_CASE("lowpass examples") {
    test::Gen g(1);
    const auto img = g.image(kN, kN);
    CHECK(max_abs_diff(lowpass(img, 1.0), img) <= 1e-4);
    const ImageBuffer flat(kN, kN, 0.37);
    for (double r : {0.01, 0.1, 0.5, 1.0}) CHECK(max_abs_diff(lowpass(flat, r), flat) <= 1e-12);
    CHECK_THROWS_AS(lowpass(img, 0.0), ValidationError);
    CHECK_THROWS_AS(lowpass(img, 1.5), ValidationError);
}

TEST_CASE("highpass examples") {
    test::Gen g(2);
    const ImageBuffer flat(kN, kN, 0.37);
    CHECK(max_abs_diff(highpass(flat, 0.3), ImageBuffer(kN, kN, 0.0)) <= 1e-12);

    const auto img = g.image(kN, kN);
    ImageBuffer dc_removed = img;
    for (std::size_t c = 0; c < 3; ++c) {
        const double m = channel_mean(img, c);
        for (auto& v : dc_removed.plane(c)) v -= m;
    }
    CHECK(max_abs_diff(highpass(img, 1e-9), dc_removed) <= 1e-4);
}

TEST_CASE("property: LP + HP partitions the image and its energy") {
    test::Gen g(3);
    for (int i = 0; i < 8; ++i) {
        const std::size_t w = 16 * g.size(1, 6), h = 16 * g.size(1, 6);
        const auto img = g.image(w, h);
        const double r = g.uniform(0.01, 1.0);
        const auto lp = lowpass(img, r), hp = highpass(img, r);
        CHECK(max_abs_diff(add(lp, hp), img) <= 1e-4);
        CHECK(std::abs(energy(lp) + energy(hp) - energy(img)) <= 1e-6 * energy(img));
    }
}

TEST_CASE("property: LP error is non-increasing in r") {
    test::Gen g(4);
    const auto img = g.image(64, 48);
    double prev = INFINITY;
    for (double r = 0.05; r <= 1.0 + 1e-12; r += 0.05) {
        ImageBuffer diff = lowpass(img, std::min(r, 1.0));
        for (std::size_t i = 0; i < diff.data.size(); ++i) diff.data[i] -= img.data[i];
        const double e = std::sqrt(energy(diff));
        CHECK(e <= prev + 1e-12);
        prev = e;
    }
}

TEST_CASE("block_lowpass") {
    test::Gen g(5);
    const auto img = g.image(kN, kN);
    CHECK(max_abs_diff(condition_c(img, 0.3, kN), lowpass(img, 0.3)) <= 1e-6);
    CHECK(max_abs_diff(block_lowpass(img, 1.0, 56), img) <= 1e-4);
    CHECK_THROWS_AS(block_lowpass(img, 0.3, 50), ValidationError);
    // Each tile only sees its own pixels.
    auto changed = img;
    changed.at(0, 0, 0) += 1.0;
    const auto a = block_lowpass(img, 0.3, 56), b = block_lowpass(changed, 0.3, 56);
    for (std::size_t y = 0; y < kN; ++y)
        for (std::size_t x = 0; x < kN; ++x)
            if (y >= 56 || x >= 56) REQUIRE(a.at(0, y, x) == b.at(0, y, x));
}

TEST_CASE("random_mask") {
    test::Gen g(6);
    const auto img = g.image(kN, kN);
    CHECK(random_mask(img, 0.0, 1) == img);

    const auto all = random_mask(img, 1.0, 1);
    for (std::size_t p = 0; p < kGrid * kGrid; ++p) CHECK(patch_flat(all, p));
    // Flattening keeps each patch mean, hence the global mean.
    for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(channel_mean(all, c) - channel_mean(img, c)) <= 1e-12);

    const auto half = random_mask(img, 0.5, 9);
    std::size_t flat = 0;
    for (std::size_t p = 0; p < kGrid * kGrid; ++p) flat += patch_flat(half, p);
    CHECK(flat == 98);
    CHECK(mask_patch_indices(196, 0.5, 9).size() == 98);
    for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(channel_mean(half, c) - channel_mean(img, c)) <= 1e-6);
    CHECK_THROWS_AS(random_mask(g.image(100, 100), 0.5, 1), ValidationError);
}

TEST_CASE("local_shuffle") {
    test::Gen g(7);
    const auto img = g.image(kN, kN);
    CHECK(local_shuffle(img, 1, 3) == img);

    const auto out = local_shuffle(img, 4, 3);
    CHECK(out != img);
    CHECK(pixel_multiset(out) == pixel_multiset(img));
    CHECK(local_shuffle(img, 4, 3) == out);
    // Patches stay whole and inside their 4x4 (edge: smaller) neighbourhood.
    for (std::size_t p = 0; p < kGrid * kGrid; ++p) {
        bool found = false;
        for (std::size_t q = 0; q < kGrid * kGrid && !found; ++q)
            found = (p / kGrid) / 4 == (q / kGrid) / 4 && (p % kGrid) / 4 == (q % kGrid) / 4 && patch_equal(out, p, img, q);
        CHECK(found);
    }
}

TEST_CASE("block_shuffle_unit") {
    CHECK(block_shuffle_unit(56) == 14);
    CHECK(block_shuffle_unit(64) == 16);
    CHECK(block_shuffle_unit(224) == 16);
    CHECK(block_shuffle_unit(7) == 7);
}

TEST_CASE("condition A/B/C") {
    test::Gen g(8);
    const auto img = g.image(kN, kN);
    CHECK(condition_a(img, 0.3, 5) == local_shuffle(lowpass(img, 0.3), kGrid, 5));
    CHECK(pixel_multiset(condition_a(img, 1.0, 5)) == pixel_multiset(lowpass(img, 1.0)));

    const auto b = condition_b(img, 1.0, 56, 5);
    CHECK(max_abs_diff(b, shuffle_within_tiles(img, 56, 14, 5)) <= 1e-9);
    CHECK(b == shuffle_within_tiles(block_lowpass(img, 1.0, 56), 56, 14, 5));
    CHECK(condition_c(img, 0.3, 56) == block_lowpass(img, 0.3, 56));
}

TEST_CASE("corruptions: identities") {
    test::Gen g(9);
    const auto img = g.image(kN, kN);
    CHECK(gaussian_noise(img, 0.0, 4) == img);
    CHECK(max_abs_diff(resize_cycle(img, 1.0), img) <= 1e-6);
}

TEST_CASE("gaussian noise std within 5% of sigma/255") {
    const ImageBuffer grey(kN, kN, 0.5);
    const auto noisy = gaussian_noise(grey, 5.0, 0);
    for (std::size_t c = 0; c < 3; ++c) {
        double s = 0, s2 = 0;
        for (double v : noisy.plane(c)) {
            s += v - 0.5;
            s2 += (v - 0.5) * (v - 0.5);
        }
        const double n = double(grey.plane_size());
        const double sd = std::sqrt(s2 / n - (s / n) * (s / n));
        CHECK(std::abs(sd - 5.0 / 255.0) <= 0.05 * 5.0 / 255.0);
    }
}

TEST_CASE("jpeg and resize") {
    test::Gen g(10);
    ImageBuffer img(kN, kN);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t y = 0; y < kN; ++y)
            for (std::size_t x = 0; x < kN; ++x) img.at(c, y, x) = (double(x + y + 40 * c) / 600.0);
    const auto q90 = jpeg_compress(img, 90), q10 = jpeg_compress(img, 10);
    CHECK(q90.width == kN);
    CHECK(max_abs_diff(q90, img) < 0.1);
    CHECK(energy(add(q10, ImageBuffer(kN, kN, 0))) > 0);
    CHECK_THROWS_AS(jpeg_compress(img, 0), ValidationError);
    // Coarser quality loses more.
    auto err = [&](const ImageBuffer& a) {
        ImageBuffer d = a;
        for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] -= img.data[i];
        return energy(d);
    };
    CHECK(err(q10) > err(q90));

    const auto half = resize_cycle(img, 0.5);
    CHECK(half.width == kN);
    CHECK(half.height == kN);
    CHECK(max_abs_diff(half, img) < 0.05);  // smooth ramp survives resampling
    CHECK_THROWS_AS(resize_cycle(img, 1.5), ValidationError);
}

TEST_CASE("spectrum of a constant image is a DC impulse") {
    const auto s = spectrum(ImageBuffer(kN, kN, 0.6));
    REQUIRE(s.width == kN);
    const double dc = s.at(kN / 2, kN / 2);
    CHECK(dc == doctest::Approx(std::log1p(0.6 * kN * kN)));
    for (std::size_t y = 0; y < kN; ++y)
        for (std::size_t x = 0; x < kN; ++x)
            if (y != kN / 2 || x != kN / 2) REQUIRE(s.at(y, x) <= 1e-9);
}

TEST_CASE("spectrum of a horizontal sinusoid peaks at (+/-f, 0)") {
    for (std::size_t f : {3u, 10u, 50u}) {
        const auto s = spectrum(horizontal_sinusoid(f));
        const std::size_t cy = kN / 2, cx = kN / 2;
        const double left = s.at(cy, cx - f), right = s.at(cy, cx + f);
        CHECK(left == doctest::Approx(right).epsilon(1e-9));
        CHECK(right == doctest::Approx(std::log1p(0.2 * kN * kN)).epsilon(1e-9));
        for (std::size_t y = 0; y < kN; ++y)
            for (std::size_t x = 0; x < kN; ++x) {
                const bool peak = y == cy && (x == cx || x == cx - f || x == cx + f);
                if (!peak) REQUIRE(s.at(y, x) <= 1e-6);
            }
    }
}

TEST_CASE("white-noise spectrum is roughly flat") {
    test::Gen g(11);
    const auto s = spectrum(g.image(kN, kN));
    std::vector<double> sum(kN, 0.0);
    std::vector<std::size_t> n(kN, 0);
    for (std::size_t y = 0; y < kN; ++y)
        for (std::size_t x = 0; x < kN; ++x) {
            const double dy = double(y) - kN / 2.0, dx = double(x) - kN / 2.0;
            const auto r = static_cast<std::size_t>(std::lround(std::sqrt(dy * dy + dx * dx)));
            if (r == 0 || r > kN / 2) continue;
            sum[r] += s.at(y, x);
            ++n[r];
        }
    std::vector<double> means;
    for (std::size_t r = 1; r <= kN / 2; ++r) means.push_back(sum[r] / double(n[r]));
    double m = 0, v = 0;
    for (double x : means) m += x;
    m /= double(means.size());
    for (double x : means) v += (x - m) * (x - m);
    CHECK(std::sqrt(v / double(means.size())) / m < 0.2);
}

TEST_CASE("spectrum export") {
    test::TempDir dir;
    const auto s = spectrum(horizontal_sinusoid(4));
    write_spectrum_csv(s, dir.path() / "s.csv");
    write_spectrum_png(s, dir.path() / "s.png");
    const auto png = load_image(dir.path() / "s.png");
    CHECK(png.width == kN);
    CHECK(png.at(0, kN / 2, kN / 2) == 1.0);
    std::ifstream in(dir.path() / "s.csv");
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == kN - 1);
    }
    CHECK(rows == kN);
}

TEST_CASE("8-bit image round trip is exact") {
    test::Gen g(12);
    ImageBuffer img(32, 16);
    for (auto& v : img.data) v = double(g.size(0, 255)) / 255.0;
    test::TempDir dir;
    save_png(img, dir.path() / "a.png");
    CHECK(load_image(dir.path() / "a.png") == img);
    CHECK_THROWS_AS(load_image(dir.path() / "missing.png"), ValidationError);
}

TEST_CASE("perturbation specs") {
    CHECK(PerturbSpec::parse("jpeg(70)").canonical() == "jpeg(70)");
    CHECK(PerturbSpec::parse("jpeg(70)").label() == "JPEG (70)");
    CHECK(PerturbSpec::parse("gaussian(5)").label() == "Gaussian (5)");
    CHECK(PerturbSpec::parse("resize(0.5)").label() == "Resize (0.5)");
    CHECK(PerturbSpec::parse(" cond_b(0.3, 56) ").canonical() == PerturbSpec::parse("cond_b(0.3,56)").canonical());
    for (const char* bad : {"jpeg(0)", "lowpass(0)", "resize(2)", "mask(1.5)", "blur(3)", "jpeg(70", "jpeg()"})
        CHECK_THROWS_AS(PerturbSpec::parse(bad).validate(), ValidationError);
    const auto defaults = default_robustness_specs();
    std::vector<std::string> labels;
    for (const auto& s : defaults) labels.push_back(s.label());
    CHECK(labels == std::vector<std::string>{"Gaussian (5)", "Gaussian (10)", "JPEG (70)", "JPEG (80)",
                                             "Resize (0.5)", "Resize (0.75)"});
    for (const auto& s : defaults) CHECK(PerturbSpec::parse(s.canonical()).canonical() == s.canonical());
}

TEST_CASE("property: seeded ops are bit-reproducible and clamped") {
    test::Gen g(13);
    const auto img = g.image(kN, kN);
    for (const char* text : {"mask(0.5)", "shuffle(4)", "cond_a(0.3)", "cond_b(0.3,56)", "cond_c(0.3,56)",
                             "gaussian(10)", "jpeg(70)", "resize(0.75)", "lowpass(0.2)", "highpass(0.2)"}) {
        const auto spec = PerturbSpec::parse(text);
        const auto a = apply_perturbation(img, spec, 77), b = apply_perturbation(img, spec, 77);
        CHECK(a == b);
        CHECK(std::all_of(a.data.begin(), a.data.end(), [](double v) { return v >= 0.0 && v <= 1.0; }));
    }
    CHECK(apply_perturbation(img, PerturbSpec::parse("identity"), 0) == img);
}
