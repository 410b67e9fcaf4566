#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fgts {

inline constexpr std::size_t kPatchSize = 16;      // ViT-16 tokenization
inline constexpr std::size_t kStandardSize = 224;  // backbone input resolution
inline constexpr std::size_t kDefaultShuffleWindow = 4;
inline constexpr std::size_t kDefaultConditionBlock = 56;

/// Planar RGB image with values nominally in [0, 1]. Operations do not clamp;
/// clamp() is applied once when a pipeline finishes.
struct ImageBuffer {
    static constexpr std::size_t channels = 3;

    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> data;  // [c][y][x]

    ImageBuffer() = default;
    ImageBuffer(std::size_t w, std::size_t h, double value = 0.0)
        : width(w), height(h), data(channels * w * h, value) {}

    std::size_t plane_size() const noexcept { return width * height; }
    double& at(std::size_t c, std::size_t y, std::size_t x) { return data[(c * height + y) * width + x]; }
    double at(std::size_t c, std::size_t y, std::size_t x) const { return data[(c * height + y) * width + x]; }
    std::span<double> plane(std::size_t c) { return {data.data() + c * plane_size(), plane_size()}; }
    std::span<const double> plane(std::size_t c) const { return {data.data() + c * plane_size(), plane_size()}; }

    ImageBuffer& clamp();
    bool operator==(const ImageBuffer&) const = default;
};

// ---------------------------------------------------------------------------
// Ideal frequency filters. The DFT is taken per channel; a frequency (u, v)
// is in the low band when u^2 + v^2 <= (r * R)^2 where R is the largest radial
// frequency of the grid, so r = 1 passes everything and DC is always low.

ImageBuffer lowpass(const ImageBuffer& img, double r);
ImageBuffer highpass(const ImageBuffer& img, double r);
/// Low-pass applied independently to each block x block tile.
ImageBuffer block_lowpass(const ImageBuffer& img, double r, std::size_t block);

// ---------------------------------------------------------------------------
// Patch-level spatial perturbations on the 16 px grid.

/// Indices (row-major over the patch grid) that random_mask would flatten.
std::vector<std::size_t> mask_patch_indices(std::size_t patch_count, double fraction, std::uint64_t seed);
/// Replaces round(fraction * patches) patches with their own per-channel mean.
ImageBuffer random_mask(const ImageBuffer& img, double fraction, std::uint64_t seed);
/// Permutes patches inside window x window neighbourhoods of the patch grid;
/// edge neighbourhoods are smaller and permuted among themselves.
ImageBuffer local_shuffle(const ImageBuffer& img, std::size_t window, std::uint64_t seed);
/// Permutes unit x unit cells inside each tile x tile pixel tile.
ImageBuffer shuffle_within_tiles(const ImageBuffer& img, std::size_t tile, std::size_t unit, std::uint64_t seed);
/// Shuffle cell size used for a block: the largest divisor of `block` not above 16 px.
std::size_t block_shuffle_unit(std::size_t block);

/// Global low-pass, then a full permutation of all patches.
ImageBuffer condition_a(const ImageBuffer& img, double r, std::uint64_t seed);
/// Block-wise low-pass, then shuffling inside each block.
ImageBuffer condition_b(const ImageBuffer& img, double r, std::size_t block, std::uint64_t seed);
/// Block-wise low-pass only.
ImageBuffer condition_c(const ImageBuffer& img, double r, std::size_t block);

// ---------------------------------------------------------------------------
// Robustness corruptions.

/// Adds i.i.d. N(0, (sigma_255 / 255)^2) noise to every channel value.
ImageBuffer gaussian_noise(const ImageBuffer& img, double sigma_255, std::uint64_t seed);
/// Baseline JPEG encode/decode round trip (4:2:0) at the given quality.
ImageBuffer jpeg_compress(const ImageBuffer& img, int quality);
/// Bilinear downsample by `factor`, then bilinear upsample to the original size.
ImageBuffer resize_cycle(const ImageBuffer& img, double factor);
ImageBuffer resize_bilinear(const ImageBuffer& img, std::size_t width, std::size_t height);

// ---------------------------------------------------------------------------
// Spectrum export.

struct Spectrum {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> values;  // row-major, DC at (height / 2, width / 2)

    double at(std::size_t y, std::size_t x) const { return values[y * width + x]; }
};

/// log(1 + |F|) of the centre-shifted DFT, magnitudes averaged over channels.
Spectrum spectrum(const ImageBuffer& img);
void write_spectrum_csv(const Spectrum& s, const std::filesystem::path& path);
void write_spectrum_png(const Spectrum& s, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Image I/O (8-bit on disk).

ImageBuffer load_image(const std::filesystem::path& path);
void save_png(const ImageBuffer& img, const std::filesystem::path& path);
void save_jpeg(const ImageBuffer& img, const std::filesystem::path& path, int quality);

// ---------------------------------------------------------------------------

struct PerturbSpec {
    enum class Kind { identity, lowpass, highpass, mask, shuffle, cond_a, cond_b, cond_c, gaussian, jpeg, resize };

    Kind kind = Kind::identity;
    double r = 1.0;
    double fraction = 0.5;
    std::size_t window = kDefaultShuffleWindow;
    std::size_t block = kDefaultConditionBlock;
    double sigma_255 = 0.0;
    int quality = 100;
    double factor = 1.0;

    /// Parses "kind(p1[,p2])", e.g. "lowpass(0.3)", "cond_b(0.3,56)", "jpeg(70)".
    static PerturbSpec parse(std::string_view text);
    /// Builds a spec from a kind name and its numeric parameters.
    static PerturbSpec make(std::string_view kind, std::span<const double> params);

    void validate() const;
    bool seeded() const noexcept;
    /// Canonical text form accepted by parse().
    std::string canonical() const;
    /// Table label, e.g. "Gaussian (5)".
    std::string label() const;
};

/// Runs the perturbation and clamps the result to [0, 1].
ImageBuffer apply_perturbation(const ImageBuffer& img, const PerturbSpec& spec, std::uint64_t seed);

/// Gaussian(5), Gaussian(10), JPEG(70), JPEG(80), Resize(0.5), Resize(0.75).
std::vector<PerturbSpec> default_robustness_specs();

}  // namespace fgts
