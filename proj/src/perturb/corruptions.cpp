#include <cmath>
#include <random>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "cv_convert.hpp"
#include "fgts/error.hpp"

namespace fgts {

ImageBuffer gaussian_noise(const ImageBuffer& img, double sigma_255, std::uint64_t seed) {
    if (!(sigma_255 >= 0.0) || !std::isfinite(sigma_255)) throw ValidationError("noise sigma must be >= 0");
    ImageBuffer out = img;
    if (sigma_255 == 0.0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma_255 / 255.0);
    for (double& v : out.data) v += noise(rng);
    return out;
}

ImageBuffer jpeg_compress(const ImageBuffer& img, int quality) {
    if (quality < 1 || quality > 100) throw ValidationError("JPEG quality must be in [1, 100]");
    std::vector<unsigned char> encoded;
    if (!cv::imencode(".jpg", detail::to_bgr8(img), encoded, {cv::IMWRITE_JPEG_QUALITY, quality}))
        throw ValidationError("JPEG encoding failed");
    const cv::Mat decoded = cv::imdecode(encoded, cv::IMREAD_COLOR);
    if (decoded.empty()) throw ValidationError("JPEG decoding failed");
    return detail::from_bgr8(decoded);
}

ImageBuffer resize_bilinear(const ImageBuffer& img, std::size_t width, std::size_t height) {
    if (width == 0 || height == 0) throw ValidationError("resize target must be non-empty");
    if (width == img.width && height == img.height) return img;
    ImageBuffer out(width, height);
    ImageBuffer src = img;
    for (std::size_t c = 0; c < ImageBuffer::channels; ++c) {
        cv::Mat dst = detail::plane_view(out, c);
        cv::resize(detail::plane_view(src, c), dst, dst.size(), 0.0, 0.0, cv::INTER_LINEAR);
    }
    return out;
}

ImageBuffer resize_cycle(const ImageBuffer& img, double factor) {
    if (!(factor > 0.0 && factor <= 1.0)) throw ValidationError("resize factor must be in (0, 1]");
    const auto w = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(img.width * factor)));
    const auto h = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(img.height * factor)));
    return resize_bilinear(resize_bilinear(img, w, h), img.width, img.height);
}

}  // namespace fgts
