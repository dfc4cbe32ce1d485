#pragma once

#include "sua/image.hpp"

namespace sua {

// reflect-101 index (mirror without repeating the edge sample); n >= 2.
inline int reflect101(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i = ((i % period) + period) % period;
    return i < n ? i : period - i;
}

std::vector<double> gaussian_kernel(double sigma);

// Separable Gaussian blur with reflect-101 borders. sigma == 0 is identity.
Image gaussian_blur(const Image& img, double sigma);

// Bilinear sample with border clamp; (r, c) in pixel coordinates.
double sample_bilinear(const Image& img, double r, double c);

// Halve both dims (floor, min 1) after a light anti-alias blur.
Image downsample2(const Image& img);

// Resize to (h, w) by bilinear interpolation of grid-aligned samples.
Image resize_bilinear(const Image& img, int h, int w);

// Resize a displacement field to (h, w) and scale displacements by the
// geometric size ratio.
VectorField resize_field(const VectorField& f, int h, int w);

// np.gradient-style derivatives: central differences inside, one-sided at the
// borders. Exact on linear ramps including the border rows/columns.
Image gradient_x(const Image& img);
Image gradient_y(const Image& img);

double mean_abs(const std::vector<double>& v);
double max_abs(const std::vector<double>& v);

}  // namespace sua
