#include <cmath>

#include <opencv2/core.hpp>

#include "cv_convert.hpp"
#include "fgts/error.hpp"

namespace fgts {

namespace {

enum class Band { low, high };

void check_ratio(double r) {
    if (!(r > 0.0 && r <= 1.0)) throw ValidationError("cutoff ratio must be in (0, 1]");
}

// Filters one real plane in place with the ideal radial mask.
void filter_plane(cv::Mat& plane, double r, Band band) {
    cv::Mat freq;
    cv::dft(plane, freq, cv::DFT_COMPLEX_OUTPUT);

    const int h = plane.rows, w = plane.cols;
    const double hh = h / 2, hw = w / 2;  // largest |frequency| along each axis
    const double radius_sq = r * r * (hh * hh + hw * hw);
    for (int u = 0; u < h; ++u) {
        const double fu = std::min(u, h - u);
        auto* row = freq.ptr<cv::Vec2d>(u);
        for (int v = 0; v < w; ++v) {
            const double fv = std::min(v, w - v);
            const bool low = fu * fu + fv * fv <= radius_sq;
            if (low != (band == Band::low)) row[v] = cv::Vec2d(0.0, 0.0);
        }
    }
    cv::Mat back;
    cv::idft(freq, back, cv::DFT_SCALE | cv::DFT_REAL_OUTPUT);
    back.copyTo(plane);
}

ImageBuffer filter(const ImageBuffer& img, double r, Band band) {
    check_ratio(r);
    ImageBuffer out = img;
    for (std::size_t c = 0; c < ImageBuffer::channels; ++c) {
        cv::Mat plane = detail::plane_view(out, c);
        filter_plane(plane, r, band);
    }
    return out;
}

}  // namespace

ImageBuffer lowpass(const ImageBuffer& img, double r) { return filter(img, r, Band::low); }

ImageBuffer highpass(const ImageBuffer& img, double r) { return filter(img, r, Band::high); }

ImageBuffer block_lowpass(const ImageBuffer& img, double r, std::size_t block) {
    check_ratio(r);
    if (block == 0 || img.width % block != 0 || img.height % block != 0)
        throw ValidationError("block size " + std::to_string(block) + " does not tile a " +
                              std::to_string(img.width) + "x" + std::to_string(img.height) + " image");
    ImageBuffer out = img;
    const int b = static_cast<int>(block);
    for (std::size_t c = 0; c < ImageBuffer::channels; ++c) {
        cv::Mat plane = detail::plane_view(out, c);
        for (int y = 0; y < plane.rows; y += b) {
            for (int x = 0; x < plane.cols; x += b) {
                cv::Mat tile = plane(cv::Rect(x, y, b, b)).clone();
                filter_plane(tile, r, Band::low);
                tile.copyTo(plane(cv::Rect(x, y, b, b)));
            }
        }
    }
    return out;
}

}  // namespace fgts
