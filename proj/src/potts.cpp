#include "sua/potts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sua {

namespace {

struct UnionFind {
    std::vector<int32_t> parent;
    explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int32_t find(int32_t a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }
    void unite(int32_t a, int32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

// Compact labels to 0..R-1 in row-major first-occurrence order.
int compact_labels(std::vector<int32_t>& labels) {
    std::vector<int32_t> remap(labels.size(), -1);
    int next = 0;
    for (auto& l : labels) {
        if (remap[l] < 0) remap[l] = next++;
        l = remap[l];
    }
    return next;
}

// Connected components (4-neighbor) of near-equal values.
std::vector<int32_t> eps_components(const Image& z, double eps, int& region_count) {
    const int h = z.height, w = z.width;
    UnionFind uf(z.size());
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const size_t i = static_cast<size_t>(r) * w + c;
            if (c + 1 < w && std::abs(z.data[i] - z.data[i + 1]) <= eps)
                uf.unite(static_cast<int32_t>(i), static_cast<int32_t>(i + 1));
            if (r + 1 < h && std::abs(z.data[i] - z.data[i + w]) <= eps)
                uf.unite(static_cast<int32_t>(i), static_cast<int32_t>(i + w));
        }
    std::vector<int32_t> labels(z.size());
    for (size_t i = 0; i < labels.size(); ++i) labels[i] = uf.find(static_cast<int32_t>(i));
    region_count = compact_labels(labels);
    return labels;
}

std::vector<double> region_means(const Image& img, const std::vector<int32_t>& labels,
                                 int region_count) {
    std::vector<double> sum(region_count, 0.0);
    std::vector<int> cnt(region_count, 0);
    for (size_t i = 0; i < labels.size(); ++i) {
        sum[labels[i]] += img.data[i];
        ++cnt[labels[i]];
    }
    for (int r = 0; r < region_count; ++r) sum[r] /= cnt[r];
    return sum;
}

ClusterMap labeling_to_map(const Image& img, std::vector<int32_t> labels, int region_count,
                           double gamma) {
    ClusterMap cm;
    cm.height = img.height;
    cm.width = img.width;
    cm.labels = std::move(labels);
    cm.region_count = region_count;
    cm.values = region_means(img, cm.labels, region_count);
    cm.energy = potts_energy(img, cm.labels, region_count, gamma);
    return cm;
}

ClusterMap solve_1d(const Image& img, double gamma) {
    // Degenerate single-row/column input: one exact DP over the scanline.
    const auto sol = potts_1d(img.data, 1.0, gamma);
    std::vector<int32_t> labels(img.size());
    int seg = -1;
    for (size_t i = 0, b = 0; i < labels.size(); ++i) {
        if (b < sol.breaks.size() && sol.breaks[b] == static_cast<int>(i)) {
            ++seg;
            ++b;
        }
        labels[i] = seg;
    }
    return labeling_to_map(img, std::move(labels), static_cast<int>(sol.breaks.size()), gamma);
}

}  // namespace

Potts1dSolution potts_1d(const std::vector<double>& data, double weight, double jump_penalty) {
    const int n = static_cast<int>(data.size());
    if (n == 0) throw std::invalid_argument("potts_1d: empty data");

    std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        s1[i + 1] = s1[i] + data[i];
        s2[i + 1] = s2[i] + data[i] * data[i];
    }
    // weight * sum_{l..r} (x - mean)^2 for the optimal constant x
    auto seg_cost = [&](int l, int r) {
        const double s = s1[r + 1] - s1[l];
        const double q = s2[r + 1] - s2[l];
        return weight * (q - s * s / (r - l + 1));
    };

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> best(n + 1, inf);
    std::vector<int> arg(n + 1, 0);
    best[0] = 0.0;
    for (int r = 0; r < n; ++r) {
        for (int l = 0; l <= r; ++l) {
            const double cand = best[l] + (l > 0 ? jump_penalty : 0.0) + seg_cost(l, r);
            if (cand < best[r + 1]) {
                best[r + 1] = cand;
                arg[r + 1] = l;
            }
        }
    }

    Potts1dSolution sol;
    sol.energy = best[n];
    int r = n;
    while (r > 0) {
        const int l = arg[r];
        sol.breaks.push_back(l);
        sol.values.push_back((s1[r] - s1[l]) / (r - l));
        r = l;
    }
    std::reverse(sol.breaks.begin(), sol.breaks.end());
    std::reverse(sol.values.begin(), sol.values.end());
    return sol;
}

double potts_energy(const Image& img, const std::vector<int32_t>& labels, int region_count,
                    double gamma) {
    const auto means = region_means(img, labels, region_count);
    double data = 0.0;
    long transitions = 0;
    const int h = img.height, w = img.width;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const size_t i = static_cast<size_t>(r) * w + c;
            const double d = means[labels[i]] - img.data[i];
            data += d * d;
            if (c + 1 < w && labels[i] != labels[i + 1]) ++transitions;
            if (r + 1 < h && labels[i] != labels[i + w]) ++transitions;
        }
    return data + gamma * static_cast<double>(transitions);
}

ClusterMap potts_cluster(const Image& img, double gamma) {
    return potts_cluster(img, gamma, PottsConfig{});
}

ClusterMap potts_cluster(const Image& img, double gamma, const PottsConfig& cfg) {
    return potts_cluster_traced(img, gamma, cfg).map;
}

PottsTraced potts_cluster_traced(const Image& img, double gamma, const PottsConfig& cfg) {
    if (gamma < 0.0) throw std::invalid_argument("potts_cluster: gamma must be >= 0");
    if (img.height <= 0 || img.width <= 0) throw std::invalid_argument("potts_cluster: empty image");

    PottsTraced out;
    if (img.height == 1 || img.width == 1) {
        Image line = img;
        const bool transpose = img.width == 1;
        if (transpose) std::swap(line.height, line.width);
        ClusterMap cm = solve_1d(line, gamma);
        cm.height = img.height;
        cm.width = img.width;
        out.map = std::move(cm);
        out.energy_trace.push_back(out.map.energy);
        return out;
    }

    const int h = img.height, w = img.width;
    Image x = img, y = img;
    std::vector<double> dual(img.size(), 0.0);
    double mu = cfg.coupling_init;

    double best_energy = std::numeric_limits<double>::infinity();
    std::vector<int32_t> best_labels;
    int best_regions = 0;

    auto consider = [&](const Image& z) {
        int regions = 0;
        auto labels = eps_components(z, cfg.merge_eps, regions);
        const double e = potts_energy(img, labels, regions, gamma);
        if (e < best_energy) {
            best_energy = e;
            best_labels = std::move(labels);
            best_regions = regions;
        }
    };

    for (int iter = 0; iter < cfg.max_outer; ++iter) {
        const double weight = 0.5 * (1.0 + mu);

        // Row sweep: exact 1D Potts per row against (f + mu*(y - dual/mu)) / (1 + mu).
#pragma omp parallel for
        for (int r = 0; r < h; ++r) {
            std::vector<double> m(w);
            for (int c = 0; c < w; ++c) {
                const size_t i = static_cast<size_t>(r) * w + c;
                const double a = y.data[i] - dual[i] / mu;
                m[c] = (img.data[i] + mu * a) / (1.0 + mu);
            }
            const auto sol = potts_1d(m, weight, gamma);
            int seg = 0;
            for (int c = 0; c < w; ++c) {
                if (seg + 1 < static_cast<int>(sol.breaks.size()) && sol.breaks[seg + 1] == c) ++seg;
                x.data[static_cast<size_t>(r) * w + c] = sol.values[seg];
            }
        }

        // Column sweep.
#pragma omp parallel for
        for (int c = 0; c < w; ++c) {
            std::vector<double> m(h);
            for (int r = 0; r < h; ++r) {
                const size_t i = static_cast<size_t>(r) * w + c;
                const double b = x.data[i] + dual[i] / mu;
                m[r] = (img.data[i] + mu * b) / (1.0 + mu);
            }
            const auto sol = potts_1d(m, weight, gamma);
            int seg = 0;
            for (int r = 0; r < h; ++r) {
                if (seg + 1 < static_cast<int>(sol.breaks.size()) && sol.breaks[seg + 1] == r) ++seg;
                y.data[static_cast<size_t>(r) * w + c] = sol.values[seg];
            }
        }

        for (size_t i = 0; i < dual.size(); ++i) dual[i] += mu * (x.data[i] - y.data[i]);
        mu *= cfg.coupling_growth;

        const double prev = best_energy;
        consider(x);
        consider(y);
        out.energy_trace.push_back(best_energy);
        if (iter > 0 && prev - best_energy < cfg.stop_decrease) break;
    }

    out.map = labeling_to_map(img, std::move(best_labels), best_regions, gamma);
    return out;
}

EdgeSketch edge_sketch(const ClusterMap& cm) {
    EdgeSketch es(cm.height, cm.width);
    for (int r = 0; r < cm.height; ++r)
        for (int c = 0; c < cm.width; ++c) {
            const int32_t l = cm.label_at(r, c);
            if ((c + 1 < cm.width && cm.label_at(r, c + 1) != l) ||
                (r + 1 < cm.height && cm.label_at(r + 1, c) != l))
                es.at(r, c) = 1;
        }
    return es;
}

EdgeSketch label_edges(const SegMask& mask) {
    EdgeSketch es(mask.height, mask.width);
    for (int r = 0; r < mask.height; ++r)
        for (int c = 0; c < mask.width; ++c) {
            const uint16_t l = mask.at(r, c);
            if ((c + 1 < mask.width && mask.at(r, c + 1) != l) ||
                (r + 1 < mask.height && mask.at(r + 1, c) != l))
                es.at(r, c) = 1;
        }
    return es;
}

}  // namespace sua
