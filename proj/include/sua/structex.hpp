#pragma once

#include <utility>
#include <vector>

#include "sua/image.hpp"
#include "sua/potts.hpp"

namespace sua {

// Composed structure image: source intensities under a Gaussian-softened
// binary structure mask. Zero wherever the softened mask is zero.
struct ComposedStructure {
    Image image;      // softened mask * source image
    Image soft_mask;  // blurred mask, renormalized to peak 1
};

// Binary foreground mask from a clustering map: regions whose mean exceeds
// Otsu's threshold over the (area-weighted) region means. A single-region
// map degenerates to all-foreground. Returned as an Image with values {0,1}.
Image structure_mask(const ClusterMap& cm);

// Area-weighted Otsu over a set of (value, weight) pairs; returns the chosen
// threshold (foreground = values strictly above it). Ties pick the smallest
// threshold.
double otsu_threshold(const std::vector<std::pair<double, double>>& value_weight);

ComposedStructure compose_structure(const Image& mask, const Image& img, double sigma);

// argmax of ssim over all (i, j); ties broken lexicographically.
std::pair<int, int> select_pair(const std::vector<ComposedStructure>& src,
                                const std::vector<ComposedStructure>& tgt);

}  // namespace sua
