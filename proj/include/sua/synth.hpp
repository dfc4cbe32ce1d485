#pragma once

#include <string>
#include <vector>

#include "sua/config.hpp"
#include "sua/image.hpp"

namespace sua {

// Two-domain synthetic benchmark. Target items are canonical scenes (layer
// bands or ellipses) rendered with the target intensity profile; source
// items are the same scenes pushed through a known smooth diffeomorphism,
// a monotone affine intensity remap and additive noise, with masks
// transformed consistently. The true warps and the remap are returned as the
// evaluation oracle.
struct SynthOracle {
    std::vector<VectorField> warps;  // one per source item
    double remap_offset = 0.0;
    double remap_slope = 1.0;
};

struct SynthResult {
    Dataset source;
    Dataset target;
    SynthOracle oracle;
};

SynthResult synth_generate(const SynthConfig& spec, uint64_t seed);

// Directory layout: img_%03d.png, mask_%03d.suat, and for sources
// warp_%03d.suat, plus meta.json.
void save_dataset(const Dataset& ds, const std::string& dir,
                  const std::vector<VectorField>* warps = nullptr);
Dataset load_dataset(const std::string& dir);

}  // namespace sua
