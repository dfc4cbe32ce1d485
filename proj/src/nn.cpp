#include "sua/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sua::nn {

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    if (a.h != b.h || a.w != b.w) throw std::invalid_argument("concat_channels: dims differ");
    Tensor out(a.c + b.c, a.h, a.w);
    std::copy(a.v.begin(), a.v.end(), out.v.begin());
    std::copy(b.v.begin(), b.v.end(), out.v.begin() + static_cast<long>(a.v.size()));
    return out;
}

void split_channels(const Tensor& d, int c_first, Tensor& da, Tensor& db) {
    da = Tensor(c_first, d.h, d.w);
    db = Tensor(d.c - c_first, d.h, d.w);
    std::copy(d.v.begin(), d.v.begin() + static_cast<long>(da.v.size()), da.v.begin());
    std::copy(d.v.begin() + static_cast<long>(da.v.size()), d.v.end(), db.v.begin());
}

void Param::init(std::string n, std::vector<uint32_t> d, Rng& rng, double stddev) {
    name = std::move(n);
    dims = std::move(d);
    size_t total = 1;
    for (uint32_t x : dims) total *= x;
    w.resize(total);
    for (double& x : w) x = rng.normal(0.0, stddev);
    g.assign(total, 0.0);
    m.assign(total, 0.0);
    v.assign(total, 0.0);
}

void Param::init_const(std::string n, std::vector<uint32_t> d, double value) {
    name = std::move(n);
    dims = std::move(d);
    size_t total = 1;
    for (uint32_t x : dims) total *= x;
    w.assign(total, value);
    g.assign(total, 0.0);
    m.assign(total, 0.0);
    v.assign(total, 0.0);
}

void AdamOpt::step(std::vector<Param*>& params, double lr, double grad_scale) {
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (Param* p : params) {
#pragma omp parallel for
        for (long i = 0; i < static_cast<long>(p->w.size()); ++i) {
            const double grad = p->g[i] / grad_scale;
            p->m[i] = beta1 * p->m[i] + (1.0 - beta1) * grad;
            p->v[i] = beta2 * p->v[i] + (1.0 - beta2) * grad * grad;
            const double mhat = p->m[i] / bc1;
            const double vhat = p->v[i] / bc2;
            p->w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
        p->zero_grad();
    }
}

Geom encoder_geom(int h, int w, int k) {
    Geom g;
    g.sh = h > 1 ? 2 : 1;
    g.sw = w > 1 ? 2 : 1;
    if (g.sh == 2) {
        g.pt = g.pb = 1;
        g.oh = (h + 2 - k) / 2 + 1;
    } else {
        g.pt = 1;
        g.pb = k - 1 - g.pt;  // same-size for stride 1
        g.oh = h;
    }
    if (g.sw == 2) {
        g.pl = g.pr = 1;
        g.ow = (w + 2 - k) / 2 + 1;
    } else {
        g.pl = 1;
        g.pr = k - 1 - g.pl;
        g.ow = w;
    }
    return g;
}

Geom decoder_geom(int h, int w, int th, int tw, int k) {
    Geom g;
    g.oh = th;
    g.ow = tw;
    g.sh = th > h ? 2 : 1;
    g.sw = tw > w ? 2 : 1;
    const int py = (h - 1) * g.sh + k - th;
    const int px = (w - 1) * g.sw + k - tw;
    if (py < 0 || py > 2 * (k - 1) || px < 0 || px > 2 * (k - 1))
        throw std::invalid_argument("decoder_geom: unreachable target size");
    g.pt = py / 2;
    g.pb = py - g.pt;
    g.pl = px / 2;
    g.pr = px - g.pl;
    return g;
}

void Conv2d::init(const std::string& name, int in_ch, int out_ch, int kernel, Rng& rng) {
    ic = in_ch;
    oc = out_ch;
    k = kernel;
    weight.init(name + ".w",
                {static_cast<uint32_t>(oc), static_cast<uint32_t>(ic), static_cast<uint32_t>(k),
                 static_cast<uint32_t>(k)},
                rng, 0.02);
    bias.init_const(name + ".b", {static_cast<uint32_t>(oc)}, 0.0);
}

Tensor Conv2d::forward(const Tensor& x, const Geom& g) {
    if (x.c != ic) throw std::invalid_argument("Conv2d: channel mismatch");
    x_in = x;
    geom = g;
    Tensor out(oc, g.oh, g.ow);
#pragma omp parallel for
    for (int o = 0; o < oc; ++o) {
        for (int oy = 0; oy < g.oh; ++oy) {
            double* orow = out.plane(o) + static_cast<size_t>(oy) * g.ow;
            for (int ox = 0; ox < g.ow; ++ox) orow[ox] = bias.w[o];
            for (int i = 0; i < ic; ++i) {
                const double* xp = x.plane(i);
                const double* wp =
                    weight.w.data() + ((static_cast<size_t>(o) * ic + i) * k) * k;
                for (int ky = 0; ky < k; ++ky) {
                    const int iy = oy * g.sh + ky - g.pt;
                    if (iy < 0 || iy >= x.h) continue;
                    const double* xrow = xp + static_cast<size_t>(iy) * x.w;
                    const double* wrow = wp + static_cast<size_t>(ky) * k;
                    for (int kx = 0; kx < k; ++kx) {
                        const double wv = wrow[kx];
                        const int base = kx - g.pl;
                        for (int ox = 0; ox < g.ow; ++ox) {
                            const int ix = ox * g.sw + base;
                            if (ix < 0 || ix >= x.w) continue;
                            orow[ox] += wv * xrow[ix];
                        }
                    }
                }
            }
        }
    }
    return out;
}

Tensor Conv2d::backward(const Tensor& dout) {
    const Geom& g = geom;
    Tensor dx(x_in.c, x_in.h, x_in.w);

    // input grads: gather over contributing outputs, one thread per channel row
#pragma omp parallel for collapse(2)
    for (int i = 0; i < ic; ++i) {
        for (int iy = 0; iy < x_in.h; ++iy) {
            double* drow = dx.plane(i) + static_cast<size_t>(iy) * x_in.w;
            for (int o = 0; o < oc; ++o) {
                const double* dop = dout.plane(o);
                const double* wp =
                    weight.w.data() + ((static_cast<size_t>(o) * ic + i) * k) * k;
                for (int ky = 0; ky < k; ++ky) {
                    const int num = iy + g.pt - ky;
                    if (num < 0 || num % g.sh != 0) continue;
                    const int oy = num / g.sh;
                    if (oy >= g.oh) continue;
                    const double* dorow = dop + static_cast<size_t>(oy) * g.ow;
                    const double* wrow = wp + static_cast<size_t>(ky) * k;
                    for (int ix = 0; ix < x_in.w; ++ix) {
                        double acc = 0.0;
                        for (int kx = 0; kx < k; ++kx) {
                            const int nx = ix + g.pl - kx;
                            if (nx < 0 || nx % g.sw != 0) continue;
                            const int ox = nx / g.sw;
                            if (ox >= g.ow) continue;
                            acc += wrow[kx] * dorow[ox];
                        }
                        drow[ix] += acc;
                    }
                }
            }
        }
    }

    // weight/bias grads: one thread per output channel keeps writes private
#pragma omp parallel for
    for (int o = 0; o < oc; ++o) {
        const double* dop = dout.plane(o);
        double bacc = 0.0;
        for (size_t s = 0; s < static_cast<size_t>(g.oh) * g.ow; ++s) bacc += dop[s];
        bias.g[o] += bacc;
        for (int i = 0; i < ic; ++i) {
            const double* xp = x_in.plane(i);
            double* gw = weight.g.data() + ((static_cast<size_t>(o) * ic + i) * k) * k;
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    double acc = 0.0;
                    for (int oy = 0; oy < g.oh; ++oy) {
                        const int iy = oy * g.sh + ky - g.pt;
                        if (iy < 0 || iy >= x_in.h) continue;
                        const double* xrow = xp + static_cast<size_t>(iy) * x_in.w;
                        const double* dorow = dop + static_cast<size_t>(oy) * g.ow;
                        for (int ox = 0; ox < g.ow; ++ox) {
                            const int ix = ox * g.sw + kx - g.pl;
                            if (ix < 0 || ix >= x_in.w) continue;
                            acc += xrow[ix] * dorow[ox];
                        }
                    }
                    gw[static_cast<size_t>(ky) * k + kx] += acc;
                }
            }
        }
    }
    return dx;
}

void TConv2d::init(const std::string& name, int in_ch, int out_ch, int kernel, Rng& rng) {
    ic = in_ch;
    oc = out_ch;
    k = kernel;
    weight.init(name + ".w",
                {static_cast<uint32_t>(ic), static_cast<uint32_t>(oc), static_cast<uint32_t>(k),
                 static_cast<uint32_t>(k)},
                rng, 0.02);
    bias.init_const(name + ".b", {static_cast<uint32_t>(oc)}, 0.0);
}

Tensor TConv2d::forward(const Tensor& x, const Geom& g) {
    if (x.c != ic) throw std::invalid_argument("TConv2d: channel mismatch");
    x_in = x;
    geom = g;
    Tensor out(oc, g.oh, g.ow);
#pragma omp parallel for collapse(2)
    for (int o = 0; o < oc; ++o) {
        for (int oy = 0; oy < g.oh; ++oy) {
            double* orow = out.plane(o) + static_cast<size_t>(oy) * g.ow;
            for (int ox = 0; ox < g.ow; ++ox) {
                double acc = bias.w[o];
                for (int ky = 0; ky < k; ++ky) {
                    const int ny = oy + g.pt - ky;
                    if (ny < 0 || ny % g.sh != 0) continue;
                    const int iy = ny / g.sh;
                    if (iy >= x.h) continue;
                    for (int kx = 0; kx < k; ++kx) {
                        const int nx = ox + g.pl - kx;
                        if (nx < 0 || nx % g.sw != 0) continue;
                        const int ix = nx / g.sw;
                        if (ix >= x.w) continue;
                        for (int i = 0; i < ic; ++i)
                            acc += x.at(i, iy, ix) *
                                   weight.w[((static_cast<size_t>(i) * oc + o) * k + ky) * k + kx];
                    }
                }
                orow[ox] = acc;
            }
        }
    }
    return out;
}

Tensor TConv2d::backward(const Tensor& dout) {
    const Geom& g = geom;
    Tensor dx(ic, x_in.h, x_in.w);

    // input grads: the transpose direction is a plain convolution
#pragma omp parallel for collapse(2)
    for (int i = 0; i < ic; ++i) {
        for (int iy = 0; iy < x_in.h; ++iy) {
            double* drow = dx.plane(i) + static_cast<size_t>(iy) * x_in.w;
            for (int ix = 0; ix < x_in.w; ++ix) {
                double acc = 0.0;
                for (int o = 0; o < oc; ++o) {
                    const double* dop = dout.plane(o);
                    const double* wp =
                        weight.w.data() + ((static_cast<size_t>(i) * oc + o) * k) * k;
                    for (int ky = 0; ky < k; ++ky) {
                        const int oy = iy * g.sh + ky - g.pt;
                        if (oy < 0 || oy >= g.oh) continue;
                        const double* dorow = dop + static_cast<size_t>(oy) * g.ow;
                        const double* wrow = wp + static_cast<size_t>(ky) * k;
                        for (int kx = 0; kx < k; ++kx) {
                            const int ox = ix * g.sw + kx - g.pl;
                            if (ox < 0 || ox >= g.ow) continue;
                            acc += wrow[kx] * dorow[ox];
                        }
                    }
                }
                drow[ix] = acc;
            }
        }
    }

#pragma omp parallel for
    for (int i = 0; i < ic; ++i) {
        const double* xp = x_in.plane(i);
        for (int o = 0; o < oc; ++o) {
            const double* dop = dout.plane(o);
            double* gw = weight.g.data() + ((static_cast<size_t>(i) * oc + o) * k) * k;
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    double acc = 0.0;
                    for (int iy = 0; iy < x_in.h; ++iy) {
                        const int oy = iy * g.sh + ky - g.pt;
                        if (oy < 0 || oy >= g.oh) continue;
                        const double* xrow = xp + static_cast<size_t>(iy) * x_in.w;
                        const double* dorow = dop + static_cast<size_t>(oy) * g.ow;
                        for (int ix = 0; ix < x_in.w; ++ix) {
                            const int ox = ix * g.sw + kx - g.pl;
                            if (ox < 0 || ox >= g.ow) continue;
                            acc += xrow[ix] * dorow[ox];
                        }
                    }
                    gw[static_cast<size_t>(ky) * k + kx] += acc;
                }
        }
    }

    std::vector<double> bacc(oc, 0.0);
    for (int o = 0; o < oc; ++o) {
        const double* dop = dout.plane(o);
        double s = 0.0;
        for (size_t j = 0; j < static_cast<size_t>(g.oh) * g.ow; ++j) s += dop[j];
        bacc[o] = s;
    }
    for (int o = 0; o < oc; ++o) bias.g[o] += bacc[o];
    return dx;
}

void InstanceNorm::init(const std::string& name, int channels) {
    ch = channels;
    gamma.init_const(name + ".gamma", {static_cast<uint32_t>(ch)}, 1.0);
    beta.init_const(name + ".beta", {static_cast<uint32_t>(ch)}, 0.0);
}

Tensor InstanceNorm::forward(const Tensor& x) {
    if (x.c != ch) throw std::invalid_argument("InstanceNorm: channel mismatch");
    const size_t m = static_cast<size_t>(x.h) * x.w;
    skipped = m == 1;
    Tensor out(x.c, x.h, x.w);
    if (skipped) {
        // Zero-variance case: pass through the affine transform only.
        x_raw = x;
        for (int c = 0; c < ch; ++c) out.v[c] = gamma.w[c] * x.v[c] + beta.w[c];
        return out;
    }
    xhat = Tensor(x.c, x.h, x.w);
    istd.assign(ch, 0.0);
#pragma omp parallel for
    for (int c = 0; c < ch; ++c) {
        const double* xp = x.plane(c);
        double mu = 0.0;
        for (size_t i = 0; i < m; ++i) mu += xp[i];
        mu /= static_cast<double>(m);
        double var = 0.0;
        for (size_t i = 0; i < m; ++i) {
            const double d = xp[i] - mu;
            var += d * d;
        }
        var /= static_cast<double>(m);
        const double is = 1.0 / std::sqrt(var + eps);
        istd[c] = is;
        double* hp = xhat.plane(c);
        double* op = out.plane(c);
        for (size_t i = 0; i < m; ++i) {
            hp[i] = (xp[i] - mu) * is;
            op[i] = gamma.w[c] * hp[i] + beta.w[c];
        }
    }
    return out;
}

Tensor InstanceNorm::backward(const Tensor& dout) {
    const size_t m = static_cast<size_t>(dout.h) * dout.w;
    Tensor dx(dout.c, dout.h, dout.w);
    if (skipped) {
        for (int c = 0; c < ch; ++c) {
            gamma.g[c] += dout.v[c] * x_raw.v[c];
            beta.g[c] += dout.v[c];
            dx.v[c] = dout.v[c] * gamma.w[c];
        }
        return dx;
    }
#pragma omp parallel for
    for (int c = 0; c < ch; ++c) {
        const double* dop = dout.plane(c);
        const double* hp = xhat.plane(c);
        double dg = 0.0, db = 0.0, dh_mean = 0.0, dhh_mean = 0.0;
        for (size_t i = 0; i < m; ++i) {
            dg += dop[i] * hp[i];
            db += dop[i];
        }
        gamma.g[c] += dg;
        beta.g[c] += db;
        const double gc = gamma.w[c];
        dh_mean = gc * db / static_cast<double>(m);
        dhh_mean = gc * dg / static_cast<double>(m);
        double* dxp = dx.plane(c);
        for (size_t i = 0; i < m; ++i)
            dxp[i] = istd[c] * (gc * dop[i] - dh_mean - hp[i] * dhh_mean);
    }
    return dx;
}

Tensor Activation::forward(const Tensor& x) {
    x_in = x;
    Tensor out = x;
    for (double& v : out.v)
        if (v < 0.0) v *= slope;
    return out;
}

Tensor Activation::backward(const Tensor& dout) const {
    Tensor dx = dout;
    for (size_t i = 0; i < dx.v.size(); ++i)
        if (x_in.v[i] < 0.0) dx.v[i] *= slope;
    return dx;
}

Tensor Dropout::forward(const Tensor& x, bool training, Rng& rng) {
    active = training && rate > 0.0;
    if (!active) return x;
    mask.resize(x.v.size());
    const double keep = 1.0 - rate;
    Tensor out = x;
    for (size_t i = 0; i < x.v.size(); ++i) {
        mask[i] = rng.uniform() < rate ? 0.0 : 1.0 / keep;
        out.v[i] *= mask[i];
    }
    return out;
}

Tensor Dropout::backward(const Tensor& dout) const {
    if (!active) return dout;
    Tensor dx = dout;
    for (size_t i = 0; i < dx.v.size(); ++i) dx.v[i] *= mask[i];
    return dx;
}

Tensor Sigmoid::forward(const Tensor& x) {
    y = x;
    for (double& v : y.v) v = 1.0 / (1.0 + std::exp(-v));
    return y;
}

Tensor Sigmoid::backward(const Tensor& dout) const {
    Tensor dx = dout;
    for (size_t i = 0; i < dx.v.size(); ++i) dx.v[i] *= y.v[i] * (1.0 - y.v[i]);
    return dx;
}

Tensor Upsample::forward(const Tensor& x, int th_, int tw_) {
    ih = x.h;
    iw = x.w;
    th = th_;
    tw = tw_;
    const int fy = th > ih ? 2 : 1;
    const int fx = tw > iw ? 2 : 1;
    Tensor out(x.c, th, tw);
#pragma omp parallel for
    for (int c = 0; c < x.c; ++c)
        for (int r = 0; r < th; ++r)
            for (int col = 0; col < tw; ++col)
                out.at(c, r, col) = x.at(c, std::min(r / fy, ih - 1), std::min(col / fx, iw - 1));
    return out;
}

Tensor Upsample::backward(const Tensor& dout) const {
    const int fy = th > ih ? 2 : 1;
    const int fx = tw > iw ? 2 : 1;
    Tensor dx(dout.c, ih, iw);
#pragma omp parallel for
    for (int c = 0; c < dout.c; ++c)
        for (int r = 0; r < th; ++r)
            for (int col = 0; col < tw; ++col)
                dx.at(c, std::min(r / fy, ih - 1), std::min(col / fx, iw - 1)) +=
                    dout.at(c, r, col);
    return dx;
}

}  // namespace sua::nn
