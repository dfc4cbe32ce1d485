#pragma once

#include <string>
#include <vector>

#include "sua/config.hpp"
#include "sua/image.hpp"
#include "sua/nn.hpp"

namespace sua {

// Small encoder-decoder pixel classifier: three strided conv blocks down,
// three transpose-conv blocks up with skip concatenations, 1x1 head, softmax
// per pixel. Inputs are zero-padded to a multiple of 8 and cropped back.
struct Segmenter {
    int width = 0;
    int classes = 0;

    nn::Conv2d e1, e2, e3;
    nn::InstanceNorm n1, n2, n3;
    nn::Activation a1{0.2}, a2{0.2}, a3{0.2};
    nn::TConv2d d1, d2, d3;
    nn::InstanceNorm m1, m2, m3;
    nn::Activation r1, r2, r3;
    nn::Conv2d head;

    Segmenter() = default;
    Segmenter(int w, int c, uint64_t seed);

    nn::Tensor forward(const Image& img);       // logits, cropped to input dims
    void backward(const nn::Tensor& d_logits);  // fills parameter gradients
    std::vector<nn::Param*> params();

    void save(const std::string& path) const;
    static Segmenter load(const std::string& path);

    // forward bookkeeping
    int in_h = 0, in_w = 0, pad_h = 0, pad_w = 0;
    nn::Tensor e1_out, e2_out, e3_out;
    int cat2 = 0, cat3 = 0;
};

SegMask segment(Segmenter& s, const Image& img);

struct TrainedSegmenter {
    Segmenter segmenter;
    double train_dice = 0.0;
    std::vector<double> loss_per_epoch;
};

// Per-pixel cross-entropy with Adam; the dataset must carry masks.
TrainedSegmenter train_segmenter(const Dataset& tgt, const SegmenterConfig& cfg, uint64_t seed);

}  // namespace sua
