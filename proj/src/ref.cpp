#include "sua/ref.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sua/gridops.hpp"

namespace sua::ref {

Image gaussian_blur(const Image& img, double sigma) {
    if (sigma == 0.0) return img;
    const auto k = gaussian_kernel(sigma);
    const int radius = static_cast<int>(k.size() / 2);
    const int h = img.height, w = img.width;
    Image tmp(h, w), out(h, w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t)
                acc += k[t + radius] * img.at(r, reflect101(c + t, w));
            tmp.at(r, c) = acc;
        }
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t)
                acc += k[t + radius] * tmp.at(reflect101(r + t, h), c);
            out.at(r, c) = acc;
        }
    return out;
}

Image warp_bilinear(const Image& img, const VectorField& field) {
    if (img.height != field.height || img.width != field.width)
        throw std::invalid_argument("ref::warp_bilinear: dims differ");
    const int h = img.height, w = img.width;
    Image out(h, w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const size_t i = field.idx(r, c);
            out.at(r, c) = sample_bilinear(img, r + field.dy[i], c + field.dx[i]);
        }
    return out;
}

double ssim_direct(const Image& a, const Image& b) {
    if (!a.same_dims(b)) throw std::invalid_argument("ref::ssim_direct: dims differ");
    constexpr double c1 = 1e-4, c2 = 9e-4, sigma = 1.5;
    constexpr int radius = 5;

    // 2D window built directly (not as an outer product of 1D passes).
    double wts[2 * radius + 1][2 * radius + 1];
    double wsum = 0.0;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
            wts[dy + radius][dx + radius] = std::exp(-0.5 * (dx * dx + dy * dy) / (sigma * sigma));
            wsum += wts[dy + radius][dx + radius];
        }
    for (auto& row : wts)
        for (double& v : row) v /= wsum;

    const int h = a.height, w = a.width;
    double total = 0.0;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            double ma = 0, mb = 0, maa = 0, mbb = 0, mab = 0;
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx) {
                    const double wt = wts[dy + radius][dx + radius];
                    const double va = a.at(reflect101(r + dy, h), reflect101(c + dx, w));
                    const double vb = b.at(reflect101(r + dy, h), reflect101(c + dx, w));
                    ma += wt * va;
                    mb += wt * vb;
                    maa += wt * va * va;
                    mbb += wt * vb * vb;
                    mab += wt * va * vb;
                }
            const double var_a = maa - ma * ma;
            const double var_b = mbb - mb * mb;
            const double cov = mab - ma * mb;
            total += ((2 * ma * mb + c1) * (2 * cov + c2)) /
                     ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
        }
    return total / static_cast<double>(h) / static_cast<double>(w);
}

}  // namespace sua::ref
