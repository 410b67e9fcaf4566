#pragma once

#include <opencv2/core.hpp>

#include "fgts/perturb.hpp"

namespace fgts::detail {

// 8-bit interleaved BGR, values rounded after clamping to [0, 1].
cv::Mat to_bgr8(const ImageBuffer& img);
ImageBuffer from_bgr8(const cv::Mat& bgr);

// Single-channel CV_64F view over one plane; no copy.
inline cv::Mat plane_view(ImageBuffer& img, std::size_t c) {
    return cv::Mat(static_cast<int>(img.height), static_cast<int>(img.width), CV_64F, img.plane(c).data());
}

}  // namespace fgts::detail
