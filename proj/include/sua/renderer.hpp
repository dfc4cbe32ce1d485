#pragma once

#include <array>
#include <string>
#include <vector>

#include "sua/config.hpp"
#include "sua/image.hpp"
#include "sua/nn.hpp"

namespace sua {

// Residual encoder block: 4x4 conv -> ReLU -> instance norm -> dropout, plus
// a 1x1 strided shortcut. Halves each spatial axis larger than 1.
struct EncBlock {
    nn::Conv2d conv;
    nn::Activation relu;
    nn::InstanceNorm norm;
    nn::Dropout drop;
    nn::Conv2d shortcut;

    void init(const std::string& name, int ic, int oc, Rng& rng);
    nn::Tensor forward(const nn::Tensor& x, bool training, Rng& rng);
    nn::Tensor backward(const nn::Tensor& dout);
};

// Residual decoder block: 4x4 transpose conv -> ReLU -> instance norm ->
// dropout, plus a nearest-upsample + 1x1 conv shortcut. Reaches an explicit
// mirrored target size.
struct DecBlock {
    nn::TConv2d tconv;
    nn::Activation relu;
    nn::InstanceNorm norm;
    nn::Dropout drop;
    nn::Upsample up;
    nn::Conv2d shortcut;

    void init(const std::string& name, int ic, int oc, Rng& rng);
    nn::Tensor forward(const nn::Tensor& x, int th, int tw, bool training, Rng& rng);
    nn::Tensor backward(const nn::Tensor& dout);
};

// 15 residual blocks: 8 encoder (the 8th acting as the bottleneck) and 7
// decoder, with skip concatenations between blocks of matching size, a final
// transpose-conv output layer and sigmoid squashing to [0,1]. Inputs are
// zero-padded so each axis can run its halving schedule (next multiple of
// 2^min(8, ceil(log2(dim)))) and cropped back afterwards.
struct Generator {
    static constexpr int kEnc = 8;
    static constexpr int kDec = 7;

    std::array<EncBlock, kEnc> enc;
    std::array<DecBlock, kDec> dec;
    nn::TConv2d out_layer;
    nn::Sigmoid out_act;
    int width = 0;
    double dropout_rate = 0.5;

    void init(int w, double dropout, Rng& rng);
    Image forward(const Image& structure, bool training, uint64_t seed);
    // dLoss/dOutput in image space; fills parameter gradients.
    void backward(const Image& d_out);
    std::vector<nn::Param*> params();

    // forward bookkeeping
    int in_h = 0, in_w = 0, pad_h = 0, pad_w = 0;
    std::array<nn::Tensor, kEnc> e_out;
    std::array<int, kDec> cat_first;  // channel split points for dec inputs
    int final_cat_first = 0;
};

struct DiscBlock {
    nn::Conv2d conv;
    nn::InstanceNorm norm;
    nn::Activation lrelu{0.2};

    void init(const std::string& name, int ic, int oc, Rng& rng);
    nn::Tensor forward(const nn::Tensor& x);
    nn::Tensor backward(const nn::Tensor& dout);
};

// Four conv blocks (4x4, pad 1, stride 2, instance norm, LeakyReLU 0.2) on
// the (image, structure) channel pair, then a global-average-pooled fully
// connected head with a sigmoid score. Blocks 1-3 expose their
// post-activation maps as style features.
struct Discriminator {
    std::array<DiscBlock, 4> blocks;
    nn::Param fc_w, fc_b;
    nn::Sigmoid score_act;
    int width = 0;

    void init(int w, Rng& rng);
    double forward(const Image& img, const Image& structure);
    // d_score plus optional gradients injected at the three feature taps.
    // Returns the gradient wrt the 2-channel input.
    nn::Tensor backward(double d_score, const std::array<nn::Tensor, 3>* d_feats);
    std::vector<nn::Param*> params();

    std::array<nn::Tensor, 3> feats;  // filled by forward
    nn::Tensor b4_out;
    double gap_den = 1.0;
    double score = 0.0;
};

struct Renderer {
    Generator g;
    Discriminator d;
    int width = 0;
    double dropout_rate = 0.5;

    Renderer() = default;
    Renderer(int w, double dropout, uint64_t seed);
    void save(const std::string& path) const;
    static Renderer load(const std::string& path);
};

Image generator_forward(Renderer& r, const Image& structure, bool training, uint64_t seed);

struct DiscOut {
    double score = 0.0;
    std::array<nn::Tensor, 3> features;
};
DiscOut discriminator_forward(Renderer& r, const Image& img, const Image& structure);

struct GramMatrix {
    int channels = 0;
    std::vector<double> m;  // row-major C x C
    double at(int i, int j) const { return m[static_cast<size_t>(i) * channels + j]; }
};
// Gr_ij = vec(F_i)' vec(F_j); when normalized, divided by C*H*W.
GramMatrix gram(const nn::Tensor& features, bool normalize = true);

struct LossValues {
    double adv_d = 0.0;   // full Eq. 4 value (both expectations)
    double adv_g = 0.0;   // generator term log(1 - D(G(u), u))
    double l1 = 0.0;      // mean absolute error
    double style = 0.0;   // sum of Gram Frobenius differences, layers 1..3
    double total_g = 0.0; // adv_g + lambda1 * l1 + lambda2 * style
};

// Loss values only (eval-mode generator; log arguments floored at 1e-8).
LossValues losses(Renderer& r, const Image& x, const Image& u, const RenderConfig& cfg);

// Fills the discriminator parameter gradients with +dL_adv/dtheta and
// returns L_adv. Gradients are zeroed first.
double adv_loss_and_disc_grads(Renderer& r, const Image& x, const Image& u, const Image& fake);

// Fills the generator parameter gradients with the gradient of
//   w_adv * log(1 - D(G(u),u)) + lambda1 * L1 + lambda2 * L_s
// reusing the stored activations of the given generator forward pass.
LossValues gen_losses_and_grads(Renderer& r, const Image& x, const Image& u, const Image& fake,
                                double w_adv, double lambda1, double lambda2);

double scheduled_lr(const RenderConfig& cfg, int epoch);  // epoch is 1-based

struct EpochLog {
    int epoch = 0;
    double lr = 0.0;
    LossValues mean;
};

struct TrainedRenderer {
    Renderer renderer;
    std::vector<EpochLog> log;
};

// Algorithm: per epoch, one pass over the target items in order; for each,
// the discriminator ascends L_adv and the generator then descends total_G,
// both with Adam (beta1 0.5, beta2 0.999). Structures u_T are the Potts edge
// sketches of the target images, extracted once up front.
TrainedRenderer train_renderer(const Dataset& tgt, const RenderConfig& cfg, uint64_t seed,
                               double potts_gamma);
// Variant with precomputed structures (one per target item).
TrainedRenderer train_renderer(const Dataset& tgt, const std::vector<Image>& structures,
                               const RenderConfig& cfg, uint64_t seed);

std::string loss_log_csv(const std::vector<EpochLog>& log);

// Eval-mode rendering of a warped structure sketch.
Image render(Renderer& r, const Image& warped_structure);

}  // namespace sua
