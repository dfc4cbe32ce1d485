#pragma once

#include <cstdint>
#include <vector>

#include "sua/config.hpp"
#include "sua/image.hpp"

namespace sua {

// Piecewise-constant labeling minimizing
//   E(u) = ||u - img||^2 + gamma * (# 4-neighbor label transitions).
struct ClusterMap {
    int height = 0;
    int width = 0;
    std::vector<int32_t> labels;   // region index per pixel, row-major
    std::vector<double> values;    // per-region mean intensity
    double energy = 0.0;           // final Potts objective
    int region_count = 0;

    int32_t label_at(int r, int c) const { return labels[static_cast<size_t>(r) * width + c]; }

    Image reconstruction() const {
        Image out(height, width);
        for (size_t i = 0; i < labels.size(); ++i) out.data[i] = values[labels[i]];
        return out;
    }
};

// Exact minimizer of sum_i w*(x_i - data_i)^2 + jump_penalty * (#jumps)
// over piecewise-constant x, via segment DP. Returns the optimal segment
// start indices (ascending) through `breaks` and per-segment means.
struct Potts1dSolution {
    std::vector<int> breaks;       // segment start indices, breaks[0] == 0
    std::vector<double> values;    // per-segment mean
    double energy = 0.0;
};
Potts1dSolution potts_1d(const std::vector<double>& data, double weight, double jump_penalty);

ClusterMap potts_cluster(const Image& img, double gamma);
ClusterMap potts_cluster(const Image& img, double gamma, const PottsConfig& cfg);

struct PottsTraced {
    ClusterMap map;
    std::vector<double> energy_trace;  // best-so-far energy per outer iteration
};
PottsTraced potts_cluster_traced(const Image& img, double gamma, const PottsConfig& cfg);

// True Potts energy of a labeling with per-region means taken from img.
double potts_energy(const Image& img, const std::vector<int32_t>& labels, int region_count,
                    double gamma);

EdgeSketch edge_sketch(const ClusterMap& cm);

// Transition-rule edges of an arbitrary labeling (used after mask warps).
EdgeSketch label_edges(const SegMask& mask);

}  // namespace sua
