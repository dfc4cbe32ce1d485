#include "sua/diffeo.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sua/gridops.hpp"
#include "sua/io.hpp"
#include "sua/potts.hpp"
#include "sua/ssim.hpp"

namespace sua {

namespace {

double max_displacement(const VectorField& f) {
    double m = 0.0;
    for (size_t i = 0; i < f.size(); ++i)
        m = std::max(m, std::hypot(f.dx[i], f.dy[i]));
    return m;
}

void sample_field(const VectorField& f, double r, double c, double& dx, double& dy) {
    const int h = f.height, w = f.width;
    r = std::min(std::max(r, 0.0), static_cast<double>(h - 1));
    c = std::min(std::max(c, 0.0), static_cast<double>(w - 1));
    const int r0 = std::min(static_cast<int>(r), std::max(h - 2, 0));
    const int c0 = std::min(static_cast<int>(c), std::max(w - 2, 0));
    const int r1 = std::min(r0 + 1, h - 1);
    const int c1 = std::min(c0 + 1, w - 1);
    const double fr = r - r0, fc = c - c0;
    const double w00 = (1 - fr) * (1 - fc), w01 = (1 - fr) * fc;
    const double w10 = fr * (1 - fc), w11 = fr * fc;
    const size_t i00 = f.idx(r0, c0), i01 = f.idx(r0, c1);
    const size_t i10 = f.idx(r1, c0), i11 = f.idx(r1, c1);
    dx = w00 * f.dx[i00] + w01 * f.dx[i01] + w10 * f.dx[i10] + w11 * f.dx[i11];
    dy = w00 * f.dy[i00] + w01 * f.dy[i01] + w10 * f.dy[i10] + w11 * f.dy[i11];
}

// outer o inner as displacement fields: d(x) = d_in(x) + d_out(x + d_in(x)).
VectorField compose_fields(const VectorField& outer, const VectorField& inner) {
    if (!outer.same_dims(inner)) throw std::invalid_argument("compose_fields: dims differ");
    VectorField out(outer.height, outer.width);
#pragma omp parallel for
    for (int r = 0; r < outer.height; ++r)
        for (int c = 0; c < outer.width; ++c) {
            const size_t i = outer.idx(r, c);
            double ox, oy;
            sample_field(outer, r + inner.dy[i], c + inner.dx[i], ox, oy);
            out.dx[i] = inner.dx[i] + ox;
            out.dy[i] = inner.dy[i] + oy;
        }
    return out;
}

VectorField scaled(const VectorField& f, double s) {
    VectorField out = f;
    for (size_t i = 0; i < out.size(); ++i) {
        out.dx[i] *= s;
        out.dy[i] *= s;
    }
    return out;
}

double data_energy(const Image& a, const Image& b) {
    double e = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        e += d * d;
    }
    return 0.5 * e;
}

}  // namespace

DiffeoPair integrate(const std::vector<VectorField>& velocities, int steps) {
    if (velocities.empty()) throw std::invalid_argument("integrate: empty velocity list");
    if (steps != static_cast<int>(velocities.size()))
        throw std::invalid_argument("integrate: steps must equal velocity count");
    const int h = velocities.front().height, w = velocities.front().width;
    for (const auto& v : velocities)
        if (v.height != h || v.width != w) throw std::invalid_argument("integrate: dims differ");

    DiffeoPair pair;
    pair.steps = steps;
    pair.velocities = velocities;
    pair.rescale_factors.assign(velocities.size(), 1.0);
    const double n = static_cast<double>(steps);
    for (size_t k = 0; k < pair.velocities.size(); ++k) {
        const double m = max_displacement(pair.velocities[k]) / n;
        if (m > kStepBound) {
            pair.rescale_factors[k] = kStepBound / m;
            pair.velocities[k] = scaled(pair.velocities[k], pair.rescale_factors[k]);
        }
    }

    // forward: factors applied innermost-first, so start from velocities[0].
    VectorField fwd = scaled(pair.velocities[0], 1.0 / n);
    for (int k = 1; k < steps; ++k)
        fwd = compose_fields(scaled(pair.velocities[k], 1.0 / n), fwd);

    // inverse: (Id - v_0/N) o ... o (Id - v_{N-1}/N), innermost-first from the tail.
    VectorField inv = scaled(pair.velocities[steps - 1], -1.0 / n);
    for (int k = steps - 2; k >= 0; --k)
        inv = compose_fields(scaled(pair.velocities[k], -1.0 / n), inv);

    pair.forward = std::move(fwd);
    pair.inverse = std::move(inv);
    return pair;
}

Image warp(const Image& img, const VectorField& field) {
    if (img.height != field.height || img.width != field.width)
        throw std::invalid_argument("warp: dims differ");
    Image out(img.height, img.width);
#pragma omp parallel for
    for (int r = 0; r < img.height; ++r)
        for (int c = 0; c < img.width; ++c) {
            const size_t i = field.idx(r, c);
            out.at(r, c) = sample_bilinear(img, r + field.dy[i], c + field.dx[i]);
        }
    return out;
}

SegMask warp_mask(const SegMask& mask, const VectorField& field) {
    if (mask.height != field.height || mask.width != field.width)
        throw std::invalid_argument("warp_mask: dims differ");
    SegMask out(mask.height, mask.width, mask.classes);

    std::vector<Image> warped;
    warped.reserve(mask.classes);
    for (int cls = 0; cls < mask.classes; ++cls) {
        Image ind(mask.height, mask.width);
        for (size_t i = 0; i < ind.size(); ++i) ind.data[i] = mask.labels[i] == cls ? 1.0 : 0.0;
        warped.push_back(warp(ind, field));
    }

#pragma omp parallel for
    for (long i = 0; i < static_cast<long>(out.labels.size()); ++i) {
        int best = 0;
        double best_v = warped[0].data[i];
        for (int cls = 1; cls < mask.classes; ++cls)
            if (warped[cls].data[i] > best_v) {
                best_v = warped[cls].data[i];
                best = cls;
            }
        out.labels[i] = static_cast<uint16_t>(best);
    }
    return out;
}

Image warp_mask(const Image& mask, const VectorField& field) {
    Image w = warp(mask, field);
    for (double& v : w.data) v = v > 0.5 ? 1.0 : 0.0;
    return w;
}

EdgeSketch warp_mask_to_edges(const Image& mask, const VectorField& field) {
    const Image w = warp_mask(mask, field);
    SegMask labels(w.height, w.width, 2);
    for (size_t i = 0; i < w.data.size(); ++i)
        labels.labels[i] = w.data[i] > 0.5 ? 1 : 0;
    return label_edges(labels);
}

Image jacobian_determinant(const VectorField& field) {
    Image fx(field.height, field.width), fy(field.height, field.width);
    fx.data = field.dx;
    fy.data = field.dy;
    const Image dxdx = gradient_x(fx), dxdy = gradient_y(fx);
    const Image dydx = gradient_x(fy), dydy = gradient_y(fy);
    Image det(field.height, field.width);
#pragma omp parallel for
    for (long i = 0; i < static_cast<long>(det.size()); ++i)
        det.data[i] = (1.0 + dxdx.data[i]) * (1.0 + dydy.data[i]) - dxdy.data[i] * dydx.data[i];
    return det;
}

Registration register_images(const Image& src, const Image& tgt, const AdmmConfig& cfg) {
    if (!src.same_dims(tgt)) throw std::invalid_argument("register_images: dims differ");
    const int h = src.height, w = src.width;

    std::vector<Image> tgt_pyr{tgt};
    for (int s = 1; s < cfg.scales; ++s) {
        if (tgt_pyr.back().height < 8 || tgt_pyr.back().width < 8) break;
        tgt_pyr.push_back(downsample2(tgt_pyr.back()));
    }

    Registration reg;
    reg.ssim_initial = ssim(src, tgt);

    VectorField phi(h, w);
    std::vector<VectorField> increments;  // in solve order
    double cur_ssim = reg.ssim_initial;

    for (int level = static_cast<int>(tgt_pyr.size()) - 1; level >= 0; --level) {
        Image warped = warp(src, phi);
        double prev_energy = data_energy(warped, tgt);
        for (int step = 0; step < cfg.max_steps_per_scale; ++step) {
            Image src_lv = warped;
            for (int s = 0; s < level; ++s) src_lv = downsample2(src_lv);
            const VectorField v = solve_velocity(src_lv, tgt_pyr[level], cfg);

            VectorField inc = level > 0 ? resize_field(v, h, w) : v;
            const double m = max_displacement(inc);
            if (m < 1e-9) break;
            if (m > cfg.step_cap) inc = scaled(inc, cfg.step_cap / m);

            const VectorField cand = compose_fields(phi, inc);  // phi o (Id + inc)
            const Image cand_warped = warp(src, cand);
            const double cand_ssim = ssim(cand_warped, tgt);
            if (cand_ssim < cur_ssim) break;  // non-improving step rejected

            phi = cand;
            warped = cand_warped;
            cur_ssim = cand_ssim;
            increments.push_back(inc);
            const double energy = data_energy(warped, tgt);
            reg.accepted.push_back({level, cur_ssim, energy});
            if (prev_energy - energy < cfg.tolerance * std::max(prev_energy, 1e-12)) break;
            prev_energy = energy;
        }
    }

    std::vector<VectorField> velocities;
    if (increments.empty()) {
        velocities.emplace_back(h, w);  // exact identity
    } else {
        const double n = static_cast<double>(increments.size());
        velocities.reserve(increments.size());
        // integrate applies list entries innermost-first; the greedy chain
        // applies the newest increment innermost, hence the reversal.
        for (auto it = increments.rbegin(); it != increments.rend(); ++it)
            velocities.push_back(scaled(*it, n));
    }
    reg.pair = integrate(velocities, static_cast<int>(velocities.size()));
    reg.ssim_final = cur_ssim;
    return reg;
}

void save_diffeo_pair(const DiffeoPair& pair, const std::string& forward_path,
                      const std::string& inverse_path, const std::string& meta_path,
                      const AdmmConfig& cfg) {
    save_field(pair.forward, forward_path);
    save_field(pair.inverse, inverse_path);
    nlohmann::ordered_json j;
    j["steps"] = pair.steps;
    j["rescale_factors"] = pair.rescale_factors;
    j["config"] = {{"order", cfg.order},
                   {"lambda", cfg.lambda},
                   {"rho", cfg.rho},
                   {"max_iterations", cfg.max_iterations},
                   {"tolerance", cfg.tolerance},
                   {"padding", cfg.padding},
                   {"scales", cfg.scales},
                   {"step_cap", cfg.step_cap},
                   {"max_steps_per_scale", cfg.max_steps_per_scale}};
    write_text_file(meta_path, j.dump(2) + "\n");
}

}  // namespace sua
