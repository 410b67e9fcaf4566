#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fgts/error.hpp"
#include "fgts/perturb.hpp"

namespace fgts {

namespace {

struct CellGrid {
    std::size_t cell;
    std::size_t rows;
    std::size_t cols;
};

CellGrid cell_grid(const ImageBuffer& img, std::size_t cell) {
    if (cell == 0 || img.width % cell != 0 || img.height % cell != 0)
        throw ValidationError(std::to_string(img.width) + "x" + std::to_string(img.height) +
                              " image is not divisible into " + std::to_string(cell) + " px patches");
    return {cell, img.height / cell, img.width / cell};
}

void copy_cell(const ImageBuffer& src, std::size_t src_index, ImageBuffer& dst, std::size_t dst_index,
               const CellGrid& g) {
    const std::size_t sy = (src_index / g.cols) * g.cell, sx = (src_index % g.cols) * g.cell;
    const std::size_t dy = (dst_index / g.cols) * g.cell, dx = (dst_index % g.cols) * g.cell;
    for (std::size_t c = 0; c < ImageBuffer::channels; ++c)
        for (std::size_t y = 0; y < g.cell; ++y)
            for (std::size_t x = 0; x < g.cell; ++x) dst.at(c, dy + y, dx + x) = src.at(c, sy + y, sx + x);
}

// Permutes cells inside group x group neighbourhoods of the cell grid, visiting
// neighbourhoods row-major with a single RNG stream.
ImageBuffer shuffle_cells(const ImageBuffer& img, const CellGrid& g, std::size_t group, std::uint64_t seed) {
    if (group == 0) throw ValidationError("shuffle window must be positive");
    ImageBuffer out = img;
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> members;
    for (std::size_t by = 0; by < g.rows; by += group) {
        for (std::size_t bx = 0; bx < g.cols; bx += group) {
            members.clear();
            for (std::size_t y = by; y < std::min(by + group, g.rows); ++y)
                for (std::size_t x = bx; x < std::min(bx + group, g.cols); ++x) members.push_back(y * g.cols + x);
            auto sources = members;
            std::shuffle(sources.begin(), sources.end(), rng);
            for (std::size_t i = 0; i < members.size(); ++i) copy_cell(img, sources[i], out, members[i], g);
        }
    }
    return out;
}

}  // namespace

std::vector<std::size_t> mask_patch_indices(std::size_t patch_count, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw ValidationError("mask fraction must be in [0, 1]");
    const auto count = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(patch_count)));
    std::vector<std::size_t> all(patch_count);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<std::size_t> chosen;
    chosen.reserve(count);
    std::mt19937_64 rng(seed);
    std::sample(all.begin(), all.end(), std::back_inserter(chosen), count, rng);
    return chosen;
}

ImageBuffer random_mask(const ImageBuffer& img, double fraction, std::uint64_t seed) {
    const CellGrid g = cell_grid(img, kPatchSize);
    ImageBuffer out = img;
    const double area = static_cast<double>(g.cell * g.cell);
    for (std::size_t p : mask_patch_indices(g.rows * g.cols, fraction, seed)) {
        const std::size_t y0 = (p / g.cols) * g.cell, x0 = (p % g.cols) * g.cell;
        for (std::size_t c = 0; c < ImageBuffer::channels; ++c) {
            double sum = 0.0;
            for (std::size_t y = 0; y < g.cell; ++y)
                for (std::size_t x = 0; x < g.cell; ++x) sum += img.at(c, y0 + y, x0 + x);
            const double mean = sum / area;
            for (std::size_t y = 0; y < g.cell; ++y)
                for (std::size_t x = 0; x < g.cell; ++x) out.at(c, y0 + y, x0 + x) = mean;
        }
    }
    return out;
}

ImageBuffer local_shuffle(const ImageBuffer& img, std::size_t window, std::uint64_t seed) {
    return shuffle_cells(img, cell_grid(img, kPatchSize), window, seed);
}

ImageBuffer shuffle_within_tiles(const ImageBuffer& img, std::size_t tile, std::size_t unit, std::uint64_t seed) {
    if (unit == 0 || tile == 0 || tile % unit != 0)
        throw ValidationError("tile size " + std::to_string(tile) + " is not a multiple of unit " + std::to_string(unit));
    if (img.width % tile != 0 || img.height % tile != 0)
        throw ValidationError("tile size " + std::to_string(tile) + " does not tile the image");
    return shuffle_cells(img, cell_grid(img, unit), tile / unit, seed);
}

std::size_t block_shuffle_unit(std::size_t block) {
    if (block == 0) throw ValidationError("block size must be positive");
    for (std::size_t unit = std::min(block, kPatchSize); unit > 1; --unit)
        if (block % unit == 0) return unit;
    return 1;
}

ImageBuffer condition_a(const ImageBuffer& img, double r, std::uint64_t seed) {
    const CellGrid g = cell_grid(img, kPatchSize);
    return local_shuffle(lowpass(img, r), std::max(g.rows, g.cols), seed);
}

ImageBuffer condition_b(const ImageBuffer& img, double r, std::size_t block, std::uint64_t seed) {
    return shuffle_within_tiles(block_lowpass(img, r, block), block, block_shuffle_unit(block), seed);
}

ImageBuffer condition_c(const ImageBuffer& img, double r, std::size_t block) { return block_lowpass(img, r, block); }

}  // namespace fgts
