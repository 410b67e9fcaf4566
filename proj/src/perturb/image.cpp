#include <algorithm>
#include <cmath>

#include <opencv2/imgcodecs.hpp>

#include "cv_convert.hpp"
#include "fgts/error.hpp"

namespace fgts {

ImageBuffer& ImageBuffer::clamp() {
    for (double& v : data) v = std::clamp(v, 0.0, 1.0);
    return *this;
}

namespace detail {

cv::Mat to_bgr8(const ImageBuffer& img) {
    cv::Mat out(static_cast<int>(img.height), static_cast<int>(img.width), CV_8UC3);
    for (std::size_t y = 0; y < img.height; ++y) {
        auto* row = out.ptr<cv::Vec3b>(static_cast<int>(y));
        for (std::size_t x = 0; x < img.width; ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
                const double v = std::clamp(img.at(c, y, x), 0.0, 1.0);
                row[x][2 - c] = static_cast<unsigned char>(std::lround(v * 255.0));
            }
        }
    }
    return out;
}

ImageBuffer from_bgr8(const cv::Mat& bgr) {
    if (bgr.type() != CV_8UC3) throw ValidationError("expected an 8-bit 3-channel image");
    ImageBuffer img(static_cast<std::size_t>(bgr.cols), static_cast<std::size_t>(bgr.rows));
    for (std::size_t y = 0; y < img.height; ++y) {
        const auto* row = bgr.ptr<cv::Vec3b>(static_cast<int>(y));
        for (std::size_t x = 0; x < img.width; ++x)
            for (std::size_t c = 0; c < 3; ++c) img.at(c, y, x) = row[x][2 - c] / 255.0;
    }
    return img;
}

}  // namespace detail

ImageBuffer load_image(const std::filesystem::path& path) {
    const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) throw ValidationError("cannot decode image " + path.string());
    return detail::from_bgr8(bgr);
}

void save_png(const ImageBuffer& img, const std::filesystem::path& path) {
    if (!cv::imwrite(path.string(), detail::to_bgr8(img), {cv::IMWRITE_PNG_COMPRESSION, 6}))
        throw ValidationError("cannot write PNG " + path.string());
}

void save_jpeg(const ImageBuffer& img, const std::filesystem::path& path, int quality) {
    if (!cv::imwrite(path.string(), detail::to_bgr8(img), {cv::IMWRITE_JPEG_QUALITY, quality}))
        throw ValidationError("cannot write JPEG " + path.string());
}

}  // namespace fgts
