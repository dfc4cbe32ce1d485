#include "sua/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sua/metrics.hpp"

namespace sua {

namespace {

int pad8(int d) { return ((d + 7) / 8) * 8; }

nn::Geom same_geom(int h, int w) {
    nn::Geom g;
    g.oh = h;
    g.ow = w;
    return g;
}

}  // namespace

Segmenter::Segmenter(int w, int c, uint64_t seed) : width(w), classes(c) {
    if (w < 1 || c < 2) throw std::invalid_argument("segmenter: bad width/classes");
    Rng rng(seed ^ 0x5e67ULL);
    e1.init("s.e1", 1, w, 4, rng);
    n1.init("s.n1", w);
    e2.init("s.e2", w, 2 * w, 4, rng);
    n2.init("s.n2", 2 * w);
    e3.init("s.e3", 2 * w, 4 * w, 4, rng);
    n3.init("s.n3", 4 * w);
    d1.init("s.d1", 4 * w, 2 * w, 4, rng);
    m1.init("s.m1", 2 * w);
    d2.init("s.d2", 4 * w, w, 4, rng);
    m2.init("s.m2", w);
    d3.init("s.d3", 2 * w, w, 4, rng);
    m3.init("s.m3", w);
    head.init("s.head", w, c, 1, rng);
}

nn::Tensor Segmenter::forward(const Image& img) {
    if (img.height < 8 || img.width < 8)
        throw std::invalid_argument("segmenter: input dims must be >= 8");
    in_h = img.height;
    in_w = img.width;
    pad_h = pad8(in_h);
    pad_w = pad8(in_w);

    nn::Tensor x(1, pad_h, pad_w);
    for (int r = 0; r < in_h; ++r)
        for (int c = 0; c < in_w; ++c) x.at(0, r, c) = img.at(r, c);

    e1_out = a1.forward(n1.forward(e1.forward(x, nn::encoder_geom(pad_h, pad_w, 4))));
    e2_out = a2.forward(n2.forward(e2.forward(e1_out, nn::encoder_geom(e1_out.h, e1_out.w, 4))));
    e3_out = a3.forward(n3.forward(e3.forward(e2_out, nn::encoder_geom(e2_out.h, e2_out.w, 4))));

    nn::Tensor u1 = r1.forward(m1.forward(
        d1.forward(e3_out, nn::decoder_geom(e3_out.h, e3_out.w, e2_out.h, e2_out.w, 4))));
    nn::Tensor c2 = nn::concat_channels(u1, e2_out);
    cat2 = u1.c;
    nn::Tensor u2 = r2.forward(
        m2.forward(d2.forward(c2, nn::decoder_geom(c2.h, c2.w, e1_out.h, e1_out.w, 4))));
    nn::Tensor c3 = nn::concat_channels(u2, e1_out);
    cat3 = u2.c;
    nn::Tensor u3 =
        r3.forward(m3.forward(d3.forward(c3, nn::decoder_geom(c3.h, c3.w, pad_h, pad_w, 4))));

    nn::Tensor logits = head.forward(u3, same_geom(pad_h, pad_w));
    nn::Tensor out(classes, in_h, in_w);
    for (int c = 0; c < classes; ++c)
        for (int r = 0; r < in_h; ++r)
            for (int col = 0; col < in_w; ++col) out.at(c, r, col) = logits.at(c, r, col);
    return out;
}

void Segmenter::backward(const nn::Tensor& d_logits) {
    nn::Tensor dl(classes, pad_h, pad_w);
    for (int c = 0; c < classes; ++c)
        for (int r = 0; r < in_h; ++r)
            for (int col = 0; col < in_w; ++col) dl.at(c, r, col) = d_logits.at(c, r, col);

    nn::Tensor du3 = head.backward(dl);
    nn::Tensor dc3 = d3.backward(m3.backward(r3.backward(du3)));
    nn::Tensor du2, de1_skip;
    nn::split_channels(dc3, cat3, du2, de1_skip);
    nn::Tensor dc2 = d2.backward(m2.backward(r2.backward(du2)));
    nn::Tensor du1, de2_skip;
    nn::split_channels(dc2, cat2, du1, de2_skip);
    nn::Tensor de3 = d1.backward(m1.backward(r1.backward(du1)));

    nn::Tensor de2 = e3.backward(n3.backward(a3.backward(de3)));
    for (size_t i = 0; i < de2.v.size(); ++i) de2.v[i] += de2_skip.v[i];
    nn::Tensor de1 = e2.backward(n2.backward(a2.backward(de2)));
    for (size_t i = 0; i < de1.v.size(); ++i) de1.v[i] += de1_skip.v[i];
    e1.backward(n1.backward(a1.backward(de1)));
}

std::vector<nn::Param*> Segmenter::params() {
    return {&e1.weight, &e1.bias, &n1.gamma, &n1.beta, &e2.weight, &e2.bias, &n2.gamma,
            &n2.beta,   &e3.weight, &e3.bias, &n3.gamma, &n3.beta, &d1.weight, &d1.bias,
            &m1.gamma,  &m1.beta, &d2.weight, &d2.bias, &m2.gamma, &m2.beta, &d3.weight,
            &d3.bias,   &m3.gamma, &m3.beta, &head.weight, &head.bias};
}

void Segmenter::save(const std::string& path) const {
    std::vector<NamedTensor> ts;
    RawTensor meta;
    meta.dims = {2};
    meta.values = {static_cast<float>(width), static_cast<float>(classes)};
    ts.push_back({"meta", meta});
    for (const auto* p : const_cast<Segmenter*>(this)->params()) {
        RawTensor t;
        t.dims = p->dims;
        t.values.assign(p->w.begin(), p->w.end());
        ts.push_back({p->name, t});
    }
    save_archive(path, ts);
}

Segmenter Segmenter::load(const std::string& path) {
    const auto ts = load_archive(path);
    if (ts.empty() || ts.front().name != "meta" || ts.front().tensor.values.size() != 2)
        throw std::runtime_error("segmenter load: missing meta record in " + path);
    Segmenter s(static_cast<int>(ts.front().tensor.values[0]),
                static_cast<int>(ts.front().tensor.values[1]), 0);
    for (auto* p : s.params()) {
        bool found = false;
        for (const auto& nt : ts)
            if (nt.name == p->name) {
                if (nt.tensor.values.size() != p->w.size())
                    throw std::runtime_error("segmenter load: shape mismatch for " + p->name);
                std::copy(nt.tensor.values.begin(), nt.tensor.values.end(), p->w.begin());
                found = true;
                break;
            }
        if (!found) throw std::runtime_error("segmenter load: missing tensor " + p->name);
    }
    return s;
}

SegMask segment(Segmenter& s, const Image& img) {
    const nn::Tensor logits = s.forward(img);
    SegMask mask(img.height, img.width, s.classes);
#pragma omp parallel for
    for (int r = 0; r < img.height; ++r)
        for (int c = 0; c < img.width; ++c) {
            int best = 0;
            double bv = logits.at(0, r, c);
            for (int k = 1; k < s.classes; ++k)
                if (logits.at(k, r, c) > bv) {
                    bv = logits.at(k, r, c);
                    best = k;
                }
            mask.at(r, c) = static_cast<uint16_t>(best);
        }
    return mask;
}

TrainedSegmenter train_segmenter(const Dataset& tgt, const SegmenterConfig& cfg, uint64_t seed) {
    tgt.validate();
    int classes = 0;
    for (const auto& item : tgt.items) {
        if (!item.mask) throw std::invalid_argument("train_segmenter: dataset has unlabeled items");
        classes = std::max(classes, item.mask->classes);
    }

    TrainedSegmenter ts;
    ts.segmenter = Segmenter(cfg.width, classes, seed);
    Segmenter& s = ts.segmenter;
    auto params = s.params();
    nn::AdamOpt adam;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (const auto& item : tgt.items) {
            nn::Tensor logits = s.forward(item.image);
            const int h = logits.h, w = logits.w;
            const double inv_hw = 1.0 / (static_cast<double>(h) * w);

            nn::Tensor dl(classes, h, w);
            double loss = 0.0;
            for (int r = 0; r < h; ++r)
                for (int c = 0; c < w; ++c) {
                    double mx = logits.at(0, r, c);
                    for (int k = 1; k < classes; ++k) mx = std::max(mx, logits.at(k, r, c));
                    double z = 0.0;
                    for (int k = 0; k < classes; ++k) z += std::exp(logits.at(k, r, c) - mx);
                    const int gt = item.mask->at(r, c);
                    loss -= (logits.at(gt, r, c) - mx - std::log(z)) * inv_hw;
                    for (int k = 0; k < classes; ++k) {
                        const double p = std::exp(logits.at(k, r, c) - mx) / z;
                        dl.at(k, r, c) = (p - (k == gt ? 1.0 : 0.0)) * inv_hw;
                    }
                }
            for (auto* p : params) p->zero_grad();
            s.backward(dl);
            adam.step(params, cfg.learning_rate);
            epoch_loss += loss;
        }
        ts.loss_per_epoch.push_back(epoch_loss / static_cast<double>(tgt.items.size()));
    }

    double dice_sum = 0.0;
    for (const auto& item : tgt.items) {
        const SegMask pred = segment(s, item.image);
        SegMask gt = *item.mask;
        gt.classes = classes;
        dice_sum += segmentation_metrics(pred, gt).dice;
    }
    ts.train_dice = dice_sum / static_cast<double>(tgt.items.size());
    return ts;
}

}  // namespace sua
