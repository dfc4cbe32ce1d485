#include "sua/plots.hpp"

#include <algorithm>
#include <cmath>

#include "sua/diffeo.hpp"

namespace sua {

Image plot_histogram_overlay(const Histogram& a, const Histogram& b, int height) {
    const int w = std::max(a.bins, 64);
    Image img(height, w, 0.0);
    double peak = 1e-12;
    for (double m : a.mass) peak = std::max(peak, m);
    for (double m : b.mass) peak = std::max(peak, m);

    auto draw = [&](const Histogram& h, double shade) {
        for (int bin = 0; bin < h.bins; ++bin) {
            const int c = bin * w / h.bins;
            const int bar = static_cast<int>(std::lround((height - 1) * h.mass[bin] / peak));
            for (int r = 0; r < bar; ++r) {
                double& px = img.at(height - 1 - r, c);
                px = std::max(px, shade);
            }
        }
    };
    draw(a, 0.5);
    draw(b, 1.0);
    return img;
}

Image plot_deformation_grid(const VectorField& field, int spacing) {
    Image lines(field.height, field.width, 0.0);
    for (int r = 0; r < field.height; ++r)
        for (int c = 0; c < field.width; ++c)
            if (r % spacing == 0 || c % spacing == 0) lines.at(r, c) = 1.0;
    return warp(lines, field);
}

Image normalize_grid(const Image& grid) {
    double lo = grid.data[0], hi = grid.data[0];
    for (double v : grid.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    Image out(grid.height, grid.width);
    const double span = hi - lo;
    for (size_t i = 0; i < grid.size(); ++i)
        out.data[i] = span > 0.0 ? (grid.data[i] - lo) / span : 0.5;
    return out;
}

}  // namespace sua
