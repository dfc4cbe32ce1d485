#include "sua/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sua/potts.hpp"

namespace sua {

namespace {

constexpr double kLogFloor = 1e-8;

double safe_log(double x) { return std::log(std::max(x, kLogFloor)); }

int ceil_log2(int d) {
    int k = 0;
    while ((1 << k) < d) ++k;
    return k;
}

int padded_dim(int d) {
    const int k = std::min(8, ceil_log2(d));
    const int block = 1 << k;
    return ((d + block - 1) / block) * block;
}

nn::Tensor image_to_tensor(const Image& img, int ph, int pw) {
    nn::Tensor t(1, ph, pw);
    for (int r = 0; r < img.height; ++r)
        for (int c = 0; c < img.width; ++c) t.at(0, r, c) = img.at(r, c);
    return t;
}

Image tensor_to_image(const nn::Tensor& t, int h, int w) {
    Image img(h, w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) img.at(r, c) = t.at(0, r, c);
    return img;
}

nn::Tensor add(const nn::Tensor& a, const nn::Tensor& b) {
    nn::Tensor out = a;
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += b.v[i];
    return out;
}

}  // namespace

void EncBlock::init(const std::string& name, int ic, int oc, Rng& rng) {
    conv.init(name + ".conv", ic, oc, 4, rng);
    norm.init(name + ".norm", oc);
    shortcut.init(name + ".sc", ic, oc, 1, rng);
}

nn::Tensor EncBlock::forward(const nn::Tensor& x, bool training, Rng& rng) {
    const nn::Geom g = nn::encoder_geom(x.h, x.w, 4);
    nn::Tensor main = drop.forward(norm.forward(relu.forward(conv.forward(x, g))), training, rng);
    nn::Geom sg;
    sg.sh = g.sh;
    sg.sw = g.sw;
    sg.oh = g.oh;
    sg.ow = g.ow;
    return add(main, shortcut.forward(x, sg));
}

nn::Tensor EncBlock::backward(const nn::Tensor& dout) {
    nn::Tensor dx = shortcut.backward(dout);
    nn::Tensor dmain = conv.backward(relu.backward(norm.backward(drop.backward(dout))));
    return add(dx, dmain);
}

void DecBlock::init(const std::string& name, int ic, int oc, Rng& rng) {
    tconv.init(name + ".tconv", ic, oc, 4, rng);
    norm.init(name + ".norm", oc);
    shortcut.init(name + ".sc", ic, oc, 1, rng);
}

nn::Tensor DecBlock::forward(const nn::Tensor& x, int th, int tw, bool training, Rng& rng) {
    const nn::Geom g = nn::decoder_geom(x.h, x.w, th, tw, 4);
    nn::Tensor main = drop.forward(norm.forward(relu.forward(tconv.forward(x, g))), training, rng);
    nn::Geom sg;
    sg.oh = th;
    sg.ow = tw;
    return add(main, shortcut.forward(up.forward(x, th, tw), sg));
}

nn::Tensor DecBlock::backward(const nn::Tensor& dout) {
    nn::Tensor dx = up.backward(shortcut.backward(dout));
    nn::Tensor dmain = tconv.backward(relu.backward(norm.backward(drop.backward(dout))));
    return add(dx, dmain);
}

void Generator::init(int w, double dropout, Rng& rng) {
    width = w;
    dropout_rate = dropout;
    const int half = std::max(1, w / 2);
    const int enc_out[kEnc] = {half, w, 2 * w, 4 * w, 4 * w, 4 * w, 4 * w, 4 * w};
    const int dec_out[kDec] = {4 * w, 4 * w, 4 * w, 4 * w, 2 * w, w, half};

    int ic = 1;
    for (int i = 0; i < kEnc; ++i) {
        enc[i].init("g.enc" + std::to_string(i + 1), ic, enc_out[i], rng);
        enc[i].drop.rate = dropout;
        ic = enc_out[i];
    }
    for (int i = 0; i < kDec; ++i) {
        const int in_ch = i == 0 ? enc_out[kEnc - 1] : dec_out[i - 1] + enc_out[kEnc - 1 - i];
        dec[i].init("g.dec" + std::to_string(i + 1), in_ch, dec_out[i], rng);
        dec[i].drop.rate = dropout;
    }
    out_layer.init("g.out", dec_out[kDec - 1] + enc_out[0], 1, rng);
}

Image Generator::forward(const Image& structure, bool training, uint64_t seed) {
    if (structure.height < 8 || structure.width < 8)
        throw std::invalid_argument("generator: input dims must be >= 8");
    in_h = structure.height;
    in_w = structure.width;
    pad_h = padded_dim(in_h);
    pad_w = padded_dim(in_w);

    Rng rng(seed ^ 0xd1cebeefULL);
    nn::Tensor x = image_to_tensor(structure, pad_h, pad_w);

    for (int i = 0; i < kEnc; ++i) {
        x = enc[i].forward(x, training, rng);
        e_out[i] = x;
    }

    nn::Tensor d = e_out[kEnc - 1];
    for (int i = 0; i < kDec; ++i) {
        // decoder i mirrors encoder output kEnc-2-i (sizes recorded at forward)
        const nn::Tensor& mirror = i + 1 < kEnc ? e_out[kEnc - 2 - i] : e_out[0];
        nn::Tensor in;
        if (i == 0) {
            in = d;
            cat_first[i] = d.c;
        } else {
            cat_first[i] = d.c;
            in = nn::concat_channels(d, e_out[kEnc - 1 - i]);
        }
        d = dec[i].forward(in, mirror.h, mirror.w, training, rng);
    }

    final_cat_first = d.c;
    nn::Tensor head_in = nn::concat_channels(d, e_out[0]);
    const nn::Geom g = nn::decoder_geom(head_in.h, head_in.w, pad_h, pad_w, 4);
    nn::Tensor out = out_act.forward(out_layer.forward(head_in, g));
    return tensor_to_image(out, in_h, in_w);
}

void Generator::backward(const Image& d_out) {
    nn::Tensor dt(1, pad_h, pad_w);
    for (int r = 0; r < in_h; ++r)
        for (int c = 0; c < in_w; ++c) dt.at(0, r, c) = d_out.at(r, c);

    nn::Tensor d = out_layer.backward(out_act.backward(dt));
    std::array<nn::Tensor, kEnc> de{};  // grads flowing into encoder outputs
    nn::Tensor dd;                      // grad flowing into the decoder chain
    {
        nn::Tensor d_skip;
        nn::split_channels(d, final_cat_first, dd, d_skip);
        de[0] = d_skip;
    }
    for (int i = kDec - 1; i >= 0; --i) {
        nn::Tensor din = dec[i].backward(dd);
        if (i == 0) {
            dd = din;
        } else {
            nn::Tensor d_skip;
            nn::split_channels(din, cat_first[i], dd, d_skip);
            de[kEnc - 1 - i] = d_skip;
        }
    }
    // dd now holds the grad wrt e_out[kEnc-1] from the decoder chain.
    nn::Tensor up = dd;
    for (int i = kEnc - 1; i >= 0; --i) {
        if (i < kEnc - 1 && de[i].size() > 0) up = add(up, de[i]);
        up = enc[i].backward(up);
    }
}

std::vector<nn::Param*> Generator::params() {
    std::vector<nn::Param*> ps;
    for (auto& b : enc) {
        ps.push_back(&b.conv.weight);
        ps.push_back(&b.conv.bias);
        ps.push_back(&b.norm.gamma);
        ps.push_back(&b.norm.beta);
        ps.push_back(&b.shortcut.weight);
        ps.push_back(&b.shortcut.bias);
    }
    for (auto& b : dec) {
        ps.push_back(&b.tconv.weight);
        ps.push_back(&b.tconv.bias);
        ps.push_back(&b.norm.gamma);
        ps.push_back(&b.norm.beta);
        ps.push_back(&b.shortcut.weight);
        ps.push_back(&b.shortcut.bias);
    }
    ps.push_back(&out_layer.weight);
    ps.push_back(&out_layer.bias);
    return ps;
}

void DiscBlock::init(const std::string& name, int ic, int oc, Rng& rng) {
    conv.init(name + ".conv", ic, oc, 4, rng);
    norm.init(name + ".norm", oc);
}

nn::Tensor DiscBlock::forward(const nn::Tensor& x) {
    const nn::Geom g = nn::encoder_geom(x.h, x.w, 4);
    return lrelu.forward(norm.forward(conv.forward(x, g)));
}

nn::Tensor DiscBlock::backward(const nn::Tensor& dout) {
    return conv.backward(norm.backward(lrelu.backward(dout)));
}

void Discriminator::init(int w, Rng& rng) {
    width = w;
    const int ch[4] = {w, 2 * w, 4 * w, 4 * w};
    int ic = 2;
    for (int i = 0; i < 4; ++i) {
        blocks[i].init("d.b" + std::to_string(i + 1), ic, ch[i], rng);
        ic = ch[i];
    }
    fc_w.init("d.fc.w", {static_cast<uint32_t>(4 * w)}, rng, 0.02);
    fc_b.init_const("d.fc.b", {1}, 0.0);
}

double Discriminator::forward(const Image& img, const Image& structure) {
    if (!img.same_dims(structure))
        throw std::invalid_argument("discriminator: image/structure dims differ");
    nn::Tensor x(2, img.height, img.width);
    std::copy(img.data.begin(), img.data.end(), x.v.begin());
    std::copy(structure.data.begin(), structure.data.end(),
              x.v.begin() + static_cast<long>(img.size()));

    for (int i = 0; i < 4; ++i) {
        x = blocks[i].forward(x);
        if (i < 3) feats[i] = x;
    }
    b4_out = x;
    gap_den = static_cast<double>(x.h) * x.w;

    double s = fc_b.w[0];
    for (int c = 0; c < x.c; ++c) {
        const double* p = x.plane(c);
        double acc = 0.0;
        for (size_t i = 0; i < static_cast<size_t>(x.h) * x.w; ++i) acc += p[i];
        s += fc_w.w[c] * (acc / gap_den);
    }
    nn::Tensor st(1, 1, 1);
    st.v[0] = s;
    score = score_act.forward(st).v[0];
    return score;
}

nn::Tensor Discriminator::backward(double d_score, const std::array<nn::Tensor, 3>* d_feats) {
    nn::Tensor ds(1, 1, 1);
    ds.v[0] = d_score;
    const double d_logit = score_act.backward(ds).v[0];

    nn::Tensor d4(b4_out.c, b4_out.h, b4_out.w);
    for (int c = 0; c < b4_out.c; ++c) {
        const double* p = b4_out.plane(c);
        double acc = 0.0;
        for (size_t i = 0; i < static_cast<size_t>(b4_out.h) * b4_out.w; ++i) acc += p[i];
        fc_w.g[c] += d_logit * (acc / gap_den);
        const double dv = d_logit * fc_w.w[c] / gap_den;
        double* dp = d4.plane(c);
        for (size_t i = 0; i < static_cast<size_t>(b4_out.h) * b4_out.w; ++i) dp[i] = dv;
    }
    fc_b.g[0] += d_logit;

    nn::Tensor d = blocks[3].backward(d4);
    for (int i = 2; i >= 0; --i) {
        if (d_feats) d = add(d, (*d_feats)[i]);
        d = blocks[i].backward(d);
    }
    return d;
}

std::vector<nn::Param*> Discriminator::params() {
    std::vector<nn::Param*> ps;
    for (auto& b : blocks) {
        ps.push_back(&b.conv.weight);
        ps.push_back(&b.conv.bias);
        ps.push_back(&b.norm.gamma);
        ps.push_back(&b.norm.beta);
    }
    ps.push_back(&fc_w);
    ps.push_back(&fc_b);
    return ps;
}

Renderer::Renderer(int w, double dropout, uint64_t seed) : width(w), dropout_rate(dropout) {
    Rng rng(seed ^ 0x52454e44ULL);
    g.init(w, dropout, rng);
    d.init(w, rng);
}

void Renderer::save(const std::string& path) const {
    std::vector<NamedTensor> ts;
    RawTensor meta;
    meta.dims = {2};
    meta.values = {static_cast<float>(width), static_cast<float>(dropout_rate)};
    ts.push_back({"meta", meta});
    auto dump = [&ts](const nn::Param& p) {
        RawTensor t;
        t.dims = p.dims;
        t.values.assign(p.w.begin(), p.w.end());
        ts.push_back({p.name, t});
    };
    for (const auto* p : const_cast<Renderer*>(this)->g.params()) dump(*p);
    for (const auto* p : const_cast<Renderer*>(this)->d.params()) dump(*p);
    save_archive(path, ts);
}

Renderer Renderer::load(const std::string& path) {
    const auto ts = load_archive(path);
    if (ts.empty() || ts.front().name != "meta" || ts.front().tensor.values.size() != 2)
        throw std::runtime_error("renderer load: missing meta record in " + path);
    const int w = static_cast<int>(ts.front().tensor.values[0]);
    const double dropout = ts.front().tensor.values[1];
    Renderer r(w, dropout, 0);
    auto fill = [&ts, &path](nn::Param& p) {
        for (const auto& nt : ts)
            if (nt.name == p.name) {
                if (nt.tensor.values.size() != p.w.size())
                    throw std::runtime_error("renderer load: shape mismatch for " + p.name +
                                             " in " + path);
                std::copy(nt.tensor.values.begin(), nt.tensor.values.end(), p.w.begin());
                return;
            }
        throw std::runtime_error("renderer load: missing tensor " + p.name + " in " + path);
    };
    for (auto* p : r.g.params()) fill(*p);
    for (auto* p : r.d.params()) fill(*p);
    return r;
}

Image generator_forward(Renderer& r, const Image& structure, bool training, uint64_t seed) {
    return r.g.forward(structure, training, seed);
}

DiscOut discriminator_forward(Renderer& r, const Image& img, const Image& structure) {
    DiscOut out;
    out.score = r.d.forward(img, structure);
    out.features = r.d.feats;
    return out;
}

GramMatrix gram(const nn::Tensor& features, bool normalize) {
    if (features.size() == 0) throw std::invalid_argument("gram: empty feature tensor");
    GramMatrix g;
    g.channels = features.c;
    g.m.assign(static_cast<size_t>(features.c) * features.c, 0.0);
    const size_t hw = static_cast<size_t>(features.h) * features.w;
    const double z = normalize ? static_cast<double>(features.c) * hw : 1.0;
#pragma omp parallel for
    for (int i = 0; i < features.c; ++i) {
        const double* fi = features.plane(i);
        for (int j = i; j < features.c; ++j) {
            const double* fj = features.plane(j);
            double acc = 0.0;
            for (size_t s = 0; s < hw; ++s) acc += fi[s] * fj[s];
            g.m[static_cast<size_t>(i) * features.c + j] = acc / z;
        }
    }
    for (int i = 0; i < features.c; ++i)
        for (int j = 0; j < i; ++j)
            g.m[static_cast<size_t>(i) * features.c + j] =
                g.m[static_cast<size_t>(j) * features.c + i];
    return g;
}

namespace {

double gram_frobenius_diff(const GramMatrix& a, const GramMatrix& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.m.size(); ++i) {
        const double d = a.m[i] - b.m[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double l1_loss(const Image& fake, const Image& x) {
    double acc = 0.0;
    for (size_t i = 0; i < fake.size(); ++i) acc += std::abs(fake.data[i] - x.data[i]);
    return acc / static_cast<double>(fake.size());
}

}  // namespace

LossValues losses(Renderer& r, const Image& x, const Image& u, const RenderConfig& cfg) {
    if (!x.same_dims(u)) throw std::invalid_argument("losses: image/structure dims differ");
    const Image fake = generator_forward(r, u, false, 0);

    const DiscOut real = discriminator_forward(r, x, u);
    std::array<GramMatrix, 3> gr_real;
    for (int l = 0; l < 3; ++l) gr_real[l] = gram(real.features[l]);

    const DiscOut fk = discriminator_forward(r, fake, u);
    LossValues v;
    v.adv_g = safe_log(1.0 - fk.score);
    v.adv_d = v.adv_g + safe_log(real.score);
    v.l1 = l1_loss(fake, x);
    for (int l = 0; l < 3; ++l) v.style += gram_frobenius_diff(gram(fk.features[l]), gr_real[l]);
    v.total_g = v.adv_g + cfg.lambda1 * v.l1 + cfg.lambda2 * v.style;
    return v;
}

double adv_loss_and_disc_grads(Renderer& r, const Image& x, const Image& u, const Image& fake) {
    const double s_f = r.d.forward(fake, u);
    const double dsf = (1.0 - s_f) > kLogFloor ? -1.0 / (1.0 - s_f) : 0.0;
    r.d.backward(dsf, nullptr);

    const double s_r = r.d.forward(x, u);
    const double dsr = s_r > kLogFloor ? 1.0 / s_r : 0.0;
    r.d.backward(dsr, nullptr);
    return safe_log(1.0 - s_f) + safe_log(s_r);
}

LossValues gen_losses_and_grads(Renderer& r, const Image& x, const Image& u, const Image& fake,
                                double w_adv, double lambda1, double lambda2) {
    LossValues v;

    const DiscOut real = discriminator_forward(r, x, u);
    std::array<GramMatrix, 3> gr_real;
    for (int l = 0; l < 3; ++l) gr_real[l] = gram(real.features[l]);

    const double s_f = r.d.forward(fake, u);
    v.adv_g = safe_log(1.0 - s_f);
    v.l1 = l1_loss(fake, x);

    std::array<nn::Tensor, 3> d_feats;
    for (int l = 0; l < 3; ++l) {
        const nn::Tensor& f = r.d.feats[l];
        const GramMatrix gf = gram(f);
        std::vector<double> diff(gf.m.size());
        double norm2 = 0.0;
        for (size_t i = 0; i < diff.size(); ++i) {
            diff[i] = gf.m[i] - gr_real[l].m[i];
            norm2 += diff[i] * diff[i];
        }
        const double norm = std::sqrt(norm2);
        v.style += norm;

        d_feats[l] = nn::Tensor(f.c, f.h, f.w);
        if (norm > 1e-12 && lambda2 != 0.0) {
            const size_t hw = static_cast<size_t>(f.h) * f.w;
            const double z = static_cast<double>(f.c) * hw;
            const double scale = 2.0 * lambda2 / (z * norm);
            // dF_i = scale * sum_j diff_ij * F_j
#pragma omp parallel for
            for (int i = 0; i < f.c; ++i) {
                double* dp = d_feats[l].plane(i);
                for (int j = 0; j < f.c; ++j) {
                    const double a = scale * diff[static_cast<size_t>(i) * f.c + j];
                    if (a == 0.0) continue;
                    const double* fj = f.plane(j);
                    for (size_t s = 0; s < hw; ++s) dp[s] += a * fj[s];
                }
            }
        }
    }

    const double dsf = (w_adv != 0.0 && (1.0 - s_f) > kLogFloor) ? -w_adv / (1.0 - s_f) : 0.0;
    const nn::Tensor d_in = r.d.backward(dsf, &d_feats);

    Image d_img(x.height, x.width);
    const double l1_scale = lambda1 / static_cast<double>(x.size());
    for (size_t i = 0; i < d_img.size(); ++i) {
        const double diff = fake.data[i] - x.data[i];
        const double sgn = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        d_img.data[i] = d_in.v[i] + l1_scale * sgn;
    }
    r.g.backward(d_img);

    v.total_g = w_adv * v.adv_g + lambda1 * v.l1 + lambda2 * v.style;
    return v;
}

double scheduled_lr(const RenderConfig& cfg, int epoch) {
    if (cfg.decay_start >= cfg.epochs || epoch <= cfg.decay_start) return cfg.learning_rate;
    return cfg.learning_rate * static_cast<double>(cfg.epochs - epoch) /
           static_cast<double>(cfg.epochs - cfg.decay_start);
}

TrainedRenderer train_renderer(const Dataset& tgt, const RenderConfig& cfg, uint64_t seed,
                               double potts_gamma) {
    tgt.validate();
    std::vector<Image> structures;
    structures.reserve(tgt.items.size());
    for (const auto& item : tgt.items)
        structures.push_back(edge_sketch(potts_cluster(item.image, potts_gamma)).as_image());
    return train_renderer(tgt, structures, cfg, seed);
}

TrainedRenderer train_renderer(const Dataset& tgt, const std::vector<Image>& structures,
                               const RenderConfig& cfg, uint64_t seed) {
    tgt.validate();
    if (structures.size() != tgt.items.size())
        throw std::invalid_argument("train_renderer: structure count mismatch");

    TrainedRenderer tr;
    tr.renderer = Renderer(cfg.width, cfg.dropout, seed);
    Renderer& r = tr.renderer;

    auto gp = r.g.params();
    auto dp = r.d.params();
    nn::AdamOpt adam_g, adam_d;
    Rng seed_stream(seed ^ 0x7261696eULL);

    const int n = static_cast<int>(tgt.items.size());
    const int batch = std::min(cfg.batch_size, n);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const double lr = scheduled_lr(cfg, epoch);
        LossValues mean;
        for (int start = 0; start < n; start += batch) {
            const int b = std::min(batch, n - start);
            std::vector<uint64_t> seeds(b);
            for (int k = 0; k < b; ++k) seeds[k] = seed_stream.next();

            // discriminator phase: ascend L_adv
            for (auto* p : dp) p->zero_grad();
            double ladv_sum = 0.0;
            for (int k = 0; k < b; ++k) {
                const auto& item = tgt.items[start + k];
                const Image fake = generator_forward(r, structures[start + k], true, seeds[k]);
                ladv_sum += adv_loss_and_disc_grads(r, item.image, structures[start + k], fake);
            }
            adam_d.step(dp, lr, -static_cast<double>(b));  // negative scale: ascent

            // generator phase against the updated discriminator
            for (auto* p : gp) p->zero_grad();
            LossValues bsum;
            for (int k = 0; k < b; ++k) {
                const auto& item = tgt.items[start + k];
                const Image fake = generator_forward(r, structures[start + k], true, seeds[k]);
                const LossValues lv = gen_losses_and_grads(r, item.image, structures[start + k],
                                                           fake, 1.0, cfg.lambda1, cfg.lambda2);
                bsum.adv_g += lv.adv_g;
                bsum.l1 += lv.l1;
                bsum.style += lv.style;
                bsum.total_g += lv.total_g;
            }
            adam_g.step(gp, lr, static_cast<double>(b));
            for (auto* p : dp) p->zero_grad();  // drop grads picked up through D

            mean.adv_d += ladv_sum;
            mean.adv_g += bsum.adv_g;
            mean.l1 += bsum.l1;
            mean.style += bsum.style;
            mean.total_g += bsum.total_g;
        }
        mean.adv_d /= n;
        mean.adv_g /= n;
        mean.l1 /= n;
        mean.style /= n;
        mean.total_g /= n;
        tr.log.push_back({epoch, lr, mean});
    }
    return tr;
}

std::string loss_log_csv(const std::vector<EpochLog>& log) {
    std::string out = "epoch,lr,L_adv_D,L_adv_G,L_1,L_s,total_G\n";
    char buf[256];
    for (const auto& e : log) {
        std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", e.epoch, e.lr,
                      e.mean.adv_d, e.mean.adv_g, e.mean.l1, e.mean.style, e.mean.total_g);
        out += buf;
    }
    return out;
}

Image render(Renderer& r, const Image& warped_structure) {
    return generator_forward(r, warped_structure, false, 0);
}

}  // namespace sua
