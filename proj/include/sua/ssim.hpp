#pragma once

#include "sua/image.hpp"

namespace sua {

// Mean structural similarity with the standard 11x11 Gaussian window
// (sigma 1.5), K1 = 0.01, K2 = 0.03, dynamic range 1. Windows are evaluated
// at every pixel with reflect-101 borders.
double ssim(const Image& a, const Image& b);

// Per-pixel SSIM map (same windowing).
Image ssim_map(const Image& a, const Image& b);

}  // namespace sua
