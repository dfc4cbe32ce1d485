#pragma once

#include "sua/image.hpp"

// Serial reference kernels. These deliberately avoid OpenMP and, where
// possible, use a different evaluation order than the production kernels, so
// tests can check the parallel implementations against them and the benchmark
// can report speedups.
namespace sua::ref {

Image gaussian_blur(const Image& img, double sigma);

// Same semantics as sua::warp (bilinear, border clamp), plain serial loop.
Image warp_bilinear(const Image& img, const VectorField& field);

// SSIM evaluated window-by-window with a direct 2D accumulation.
double ssim_direct(const Image& a, const Image& b);

}  // namespace sua::ref
