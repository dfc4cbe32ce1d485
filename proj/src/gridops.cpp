#include "sua/gridops.hpp"

#include <algorithm>
#include <cmath>

namespace sua {

std::vector<double> gaussian_kernel(double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("gaussian_kernel: sigma must be >= 0");
    if (sigma == 0.0) return {1.0};
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k) v /= sum;
    return k;
}

Image gaussian_blur(const Image& img, double sigma) {
    if (sigma == 0.0) return img;
    const auto k = gaussian_kernel(sigma);
    const int radius = static_cast<int>(k.size() / 2);
    const int h = img.height, w = img.width;

    Image tmp(h, w), out(h, w);
#pragma omp parallel for
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t)
                acc += k[t + radius] * img.at(r, reflect101(c + t, w));
            tmp.at(r, c) = acc;
        }
    }
#pragma omp parallel for
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t)
                acc += k[t + radius] * tmp.at(reflect101(r + t, h), c);
            out.at(r, c) = acc;
        }
    }
    return out;
}

double sample_bilinear(const Image& img, double r, double c) {
    const int h = img.height, w = img.width;
    r = std::min(std::max(r, 0.0), static_cast<double>(h - 1));
    c = std::min(std::max(c, 0.0), static_cast<double>(w - 1));
    const int r0 = std::min(static_cast<int>(r), h - 2 >= 0 ? h - 2 : 0);
    const int c0 = std::min(static_cast<int>(c), w - 2 >= 0 ? w - 2 : 0);
    const int r1 = std::min(r0 + 1, h - 1);
    const int c1 = std::min(c0 + 1, w - 1);
    const double fr = r - r0, fc = c - c0;
    return (1 - fr) * ((1 - fc) * img.at(r0, c0) + fc * img.at(r0, c1)) +
           fr * ((1 - fc) * img.at(r1, c0) + fc * img.at(r1, c1));
}

Image downsample2(const Image& img) {
    const Image s = gaussian_blur(img, 0.8);
    const int h = std::max(1, img.height / 2), w = std::max(1, img.width / 2);
    Image out(h, w);
#pragma omp parallel for
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) out.at(r, c) = s.at(2 * r, 2 * c);
    return out;
}

Image resize_bilinear(const Image& img, int h, int w) {
    if (h <= 0 || w <= 0) throw std::invalid_argument("resize_bilinear: bad dims");
    Image out(h, w);
    const double sr = h > 1 ? static_cast<double>(img.height - 1) / (h - 1) : 0.0;
    const double sc = w > 1 ? static_cast<double>(img.width - 1) / (w - 1) : 0.0;
#pragma omp parallel for
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) out.at(r, c) = sample_bilinear(img, r * sr, c * sc);
    return out;
}

VectorField resize_field(const VectorField& f, int h, int w) {
    Image ix(f.height, f.width), iy(f.height, f.width);
    ix.data = f.dx;
    iy.data = f.dy;
    const Image rx = resize_bilinear(ix, h, w);
    const Image ry = resize_bilinear(iy, h, w);
    const double scale_x = static_cast<double>(w) / f.width;
    const double scale_y = static_cast<double>(h) / f.height;
    VectorField out(h, w);
    for (size_t i = 0; i < out.size(); ++i) {
        out.dx[i] = rx.data[i] * scale_x;
        out.dy[i] = ry.data[i] * scale_y;
    }
    return out;
}

Image gradient_x(const Image& img) {
    const int h = img.height, w = img.width;
    Image out(h, w);
#pragma omp parallel for
    for (int r = 0; r < h; ++r) {
        if (w == 1) { out.at(r, 0) = 0.0; continue; }
        out.at(r, 0) = img.at(r, 1) - img.at(r, 0);
        for (int c = 1; c < w - 1; ++c)
            out.at(r, c) = 0.5 * (img.at(r, c + 1) - img.at(r, c - 1));
        out.at(r, w - 1) = img.at(r, w - 1) - img.at(r, w - 2);
    }
    return out;
}

Image gradient_y(const Image& img) {
    const int h = img.height, w = img.width;
    Image out(h, w);
#pragma omp parallel for
    for (int c = 0; c < w; ++c) {
        if (h == 1) { out.at(0, c) = 0.0; continue; }
        out.at(0, c) = img.at(1, c) - img.at(0, c);
        for (int r = 1; r < h - 1; ++r)
            out.at(r, c) = 0.5 * (img.at(r + 1, c) - img.at(r - 1, c));
        out.at(h - 1, c) = img.at(h - 1, c) - img.at(h - 2, c);
    }
    return out;
}

double mean_abs(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace sua
