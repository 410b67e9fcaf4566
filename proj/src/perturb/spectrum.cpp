#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "cv_convert.hpp"
#include "fgts/error.hpp"

namespace fgts {

Spectrum spectrum(const ImageBuffer& img) {
    if (img.width == 0 || img.height == 0) throw ValidationError("spectrum: empty image");
    const std::size_t h = img.height, w = img.width;
    std::vector<double> magnitude(h * w, 0.0);
    ImageBuffer src = img;
    for (std::size_t c = 0; c < ImageBuffer::channels; ++c) {
        cv::Mat freq;
        cv::dft(detail::plane_view(src, c), freq, cv::DFT_COMPLEX_OUTPUT);
        for (std::size_t u = 0; u < h; ++u) {
            const auto* row = freq.ptr<cv::Vec2d>(static_cast<int>(u));
            const std::size_t su = (u + h / 2) % h;
            for (std::size_t v = 0; v < w; ++v) {
                const std::size_t sv = (v + w / 2) % w;
                magnitude[su * w + sv] += std::hypot(row[v][0], row[v][1]);
            }
        }
    }
    Spectrum s{w, h, std::move(magnitude)};
    for (double& m : s.values) m = std::log1p(m / static_cast<double>(ImageBuffer::channels));
    return s;
}

void write_spectrum_csv(const Spectrum& s, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
    for (std::size_t y = 0; y < s.height; ++y) {
        for (std::size_t x = 0; x < s.width; ++x) {
            if (x) out << ',';
            out << fmt::format("{}", s.at(y, x));
        }
        out << '\n';
    }
}

void write_spectrum_png(const Spectrum& s, const std::filesystem::path& path) {
    const auto [lo_it, hi_it] = std::minmax_element(s.values.begin(), s.values.end());
    const double lo = *lo_it, span = *hi_it - *lo_it;
    cv::Mat gray(static_cast<int>(s.height), static_cast<int>(s.width), CV_8UC1);
    for (std::size_t y = 0; y < s.height; ++y) {
        auto* row = gray.ptr<unsigned char>(static_cast<int>(y));
        for (std::size_t x = 0; x < s.width; ++x) {
            const double t = span > 0.0 ? (s.at(y, x) - lo) / span : 0.0;
            row[x] = static_cast<unsigned char>(std::lround(t * 255.0));
        }
    }
    if (!cv::imwrite(path.string(), gray)) throw ValidationError("cannot write " + path.string());
}

}  // namespace fgts
