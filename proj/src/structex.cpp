#include "sua/structex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sua/gridops.hpp"
#include "sua/ssim.hpp"

namespace sua {

double otsu_threshold(const std::vector<std::pair<double, double>>& value_weight) {
    if (value_weight.empty()) throw std::invalid_argument("otsu_threshold: empty input");
    auto sorted = value_weight;
    std::sort(sorted.begin(), sorted.end());

    double total_w = 0.0, total_wv = 0.0;
    for (const auto& [v, w] : sorted) {
        total_w += w;
        total_wv += w * v;
    }

    double best_sigma = -1.0, best_t = sorted.front().first;
    double w0 = 0.0, wv0 = 0.0;
    // Threshold candidates sit at the distinct values; the last split leaves
    // an empty foreground and is skipped.
    for (size_t i = 0; i + 1 < sorted.size(); ++i) {
        w0 += sorted[i].second;
        wv0 += sorted[i].second * sorted[i].first;
        if (sorted[i].first == sorted[i + 1].first) continue;
        const double w1 = total_w - w0;
        const double mu0 = wv0 / w0;
        const double mu1 = (total_wv - wv0) / w1;
        const double sigma_b = (w0 / total_w) * (w1 / total_w) * (mu0 - mu1) * (mu0 - mu1);
        if (sigma_b > best_sigma) {
            best_sigma = sigma_b;
            best_t = sorted[i].first;
        }
    }
    return best_t;
}

Image structure_mask(const ClusterMap& cm) {
    if (cm.region_count < 1) throw std::invalid_argument("structure_mask: empty cluster map");
    Image mask(cm.height, cm.width, 1.0);
    if (cm.region_count == 1) return mask;  // degenerate rule: all-foreground

    std::vector<double> area(cm.region_count, 0.0);
    for (int32_t l : cm.labels) area[l] += 1.0;
    std::vector<std::pair<double, double>> vw(cm.region_count);
    for (int r = 0; r < cm.region_count; ++r) vw[r] = {cm.values[r], area[r]};

    const double t = otsu_threshold(vw);
    for (size_t i = 0; i < cm.labels.size(); ++i)
        mask.data[i] = cm.values[cm.labels[i]] > t ? 1.0 : 0.0;
    return mask;
}

ComposedStructure compose_structure(const Image& mask, const Image& img, double sigma) {
    if (!mask.same_dims(img)) throw std::invalid_argument("compose_structure: dims differ");
    if (sigma < 0.0) throw std::invalid_argument("compose_structure: sigma must be >= 0");

    ComposedStructure cs;
    cs.soft_mask = gaussian_blur(mask, sigma);
    const double peak = *std::max_element(cs.soft_mask.data.begin(), cs.soft_mask.data.end());
    if (peak > 0.0)
        for (double& v : cs.soft_mask.data) v /= peak;

    cs.image = Image(img.height, img.width);
    for (size_t i = 0; i < cs.image.size(); ++i)
        cs.image.data[i] = cs.soft_mask.data[i] * img.data[i];
    return cs;
}

std::pair<int, int> select_pair(const std::vector<ComposedStructure>& src,
                                const std::vector<ComposedStructure>& tgt) {
    if (src.empty() || tgt.empty()) throw std::invalid_argument("select_pair: empty candidate list");
    const int ns = static_cast<int>(src.size()), nt = static_cast<int>(tgt.size());
    std::vector<double> scores(static_cast<size_t>(ns) * nt);
#pragma omp parallel for collapse(2)
    for (int i = 0; i < ns; ++i)
        for (int j = 0; j < nt; ++j)
            scores[static_cast<size_t>(i) * nt + j] = ssim(src[i].image, tgt[j].image);

    // Serial scan keeps the lexicographic tie-break schedule-independent.
    int bi = 0, bj = 0;
    double best = scores[0];
    for (int i = 0; i < ns; ++i)
        for (int j = 0; j < nt; ++j) {
            const double s = scores[static_cast<size_t>(i) * nt + j];
            if (s > best) {
                best = s;
                bi = i;
                bj = j;
            }
        }
    return {bi, bj};
}

}  // namespace sua
