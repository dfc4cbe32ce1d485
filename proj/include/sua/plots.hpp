#pragma once

#include "sua/image.hpp"
#include "sua/metrics.hpp"

namespace sua {

// Two histograms drawn as bar profiles (gray = first, white = second) on a
// black background.
Image plot_histogram_overlay(const Histogram& a, const Histogram& b, int height = 160);

// Regular gridlines pushed through the deformation.
Image plot_deformation_grid(const VectorField& field, int spacing = 8);

// Linear rescale of an unbounded grid into [0,1] for PNG export.
Image normalize_grid(const Image& grid);

}  // namespace sua
