#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sua/image.hpp"
#include "sua/io.hpp"
#include "sua/rng.hpp"

namespace sua::nn {

struct Tensor {
    int c = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int c_, int h_, int w_, double fill = 0.0)
        : c(c_), h(h_), w(w_), v(static_cast<size_t>(c_) * h_ * w_, fill) {}

    double& at(int ch, int r, int col) {
        return v[(static_cast<size_t>(ch) * h + r) * w + col];
    }
    double at(int ch, int r, int col) const {
        return v[(static_cast<size_t>(ch) * h + r) * w + col];
    }
    double* plane(int ch) { return v.data() + static_cast<size_t>(ch) * h * w; }
    const double* plane(int ch) const { return v.data() + static_cast<size_t>(ch) * h * w; }
    size_t size() const { return v.size(); }
};

Tensor concat_channels(const Tensor& a, const Tensor& b);
void split_channels(const Tensor& d, int c_first, Tensor& da, Tensor& db);

// A learnable tensor with gradient and Adam moments.
struct Param {
    std::string name;
    std::vector<uint32_t> dims;
    std::vector<double> w, g, m, v;

    void init(std::string n, std::vector<uint32_t> d, Rng& rng, double stddev);
    void init_const(std::string n, std::vector<uint32_t> d, double value);
    size_t count() const { return w.size(); }
    void zero_grad() { std::fill(g.begin(), g.end(), 0.0); }
};

struct AdamOpt {
    double beta1 = 0.5, beta2 = 0.999, eps = 1e-8;
    long t = 0;
    // Applies one step at the given rate; gradients are divided by grad_scale
    // (batch accumulation) before use.
    void step(std::vector<Param*>& params, double lr, double grad_scale = 1.0);
};

// Per-axis convolution geometry; strides in {1,2}, independent per axis, with
// possibly asymmetric zero padding.
struct Geom {
    int sh = 1, sw = 1;
    int pt = 0, pb = 0, pl = 0, pr = 0;
    int oh = 0, ow = 0;
};

// Halving geometry for a kxk kernel (k = 4): stride 2 pad 1 while the axis
// size exceeds 1, else stride 1 with (1,2) padding which preserves size.
Geom encoder_geom(int h, int w, int k);
// Transpose-conv geometry reaching exactly (th, tw) from (h, w).
Geom decoder_geom(int h, int w, int th, int tw, int k);

struct Conv2d {
    Param weight;  // [oc, ic, k, k]
    Param bias;    // [oc]
    int ic = 0, oc = 0, k = 0;

    void init(const std::string& name, int in_ch, int out_ch, int kernel, Rng& rng);
    Tensor forward(const Tensor& x, const Geom& g);
    // Returns grad wrt input; accumulates weight/bias grads.
    Tensor backward(const Tensor& dout);

    Tensor x_in;  // stored by forward
    Geom geom;
};

struct TConv2d {
    Param weight;  // [ic, oc, k, k]
    Param bias;    // [oc]
    int ic = 0, oc = 0, k = 0;

    void init(const std::string& name, int in_ch, int out_ch, int kernel, Rng& rng);
    Tensor forward(const Tensor& x, const Geom& g);
    Tensor backward(const Tensor& dout);

    Tensor x_in;
    Geom geom;
};

struct InstanceNorm {
    Param gamma, beta;
    int ch = 0;
    double eps = 1e-5;

    void init(const std::string& name, int channels);
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dout);

    Tensor xhat;
    std::vector<double> istd;
    bool skipped = false;  // spatial size 1: normalization is skipped
    Tensor x_raw;          // kept only when skipped
};

struct Activation {
    double slope = 0.0;  // 0 = ReLU, 0.2 = LeakyReLU

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dout) const;

    Tensor x_in;
};

struct Dropout {
    double rate = 0.5;

    Tensor forward(const Tensor& x, bool training, Rng& rng);
    Tensor backward(const Tensor& dout) const;

    std::vector<double> mask;
    bool active = false;
};

struct Sigmoid {
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dout) const;

    Tensor y;
};

// Nearest-neighbor upsample to an explicit target size (factor 1 or 2 per axis).
struct Upsample {
    Tensor forward(const Tensor& x, int th, int tw);
    Tensor backward(const Tensor& dout) const;

    int ih = 0, iw = 0, th = 0, tw = 0;
};

}  // namespace sua::nn
