#include "sua/synth.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "sua/diffeo.hpp"
#include "sua/gridops.hpp"
#include "sua/io.hpp"
#include "sua/rng.hpp"

namespace sua {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Scene {
    Image intensity;  // clean, blurred plateau image
    SegMask mask;
};

Scene make_bands_scene(int size, int bands, Rng& rng) {
    Scene sc;
    sc.mask = SegMask(size, size, bands + 1);
    Image img(size, size, 0.05);

    const double span = 0.55 * size;                  // vertical extent of the band stack
    const double top0 = 0.18 * size + rng.uniform(-0.04, 0.04) * size;
    std::vector<double> thickness(bands);
    double tsum = 0.0;
    for (int b = 0; b < bands; ++b) {
        thickness[b] = 1.0 + rng.uniform(0.6, 1.4);
        tsum += thickness[b];
    }
    for (double& t : thickness) t *= span / tsum;

    const double amp = size * rng.uniform(0.02, 0.05);
    const double phase = rng.uniform(0.0, 1.0);
    const double tilt = rng.uniform(-0.08, 0.08);

    for (int c = 0; c < size; ++c) {
        const double x = static_cast<double>(c) / size;
        double y = top0 + amp * std::sin(kTwoPi * (x + phase)) + tilt * size * (x - 0.5);
        for (int b = 0; b < bands; ++b) {
            const int r0 = std::clamp(static_cast<int>(std::lround(y)), 0, size - 1);
            const int r1 = std::clamp(static_cast<int>(std::lround(y + thickness[b])), 0, size - 1);
            const double level = 0.30 + 0.60 * b / std::max(1, bands - 1) * 1.0;
            for (int r = r0; r < r1; ++r) {
                img.at(r, c) = std::min(level, 0.90);
                sc.mask.at(r, c) = static_cast<uint16_t>(b + 1);
            }
            y += thickness[b];
        }
    }
    sc.intensity = img;
    return sc;
}

Scene make_ellipses_scene(int size, int count, Rng& rng) {
    Scene sc;
    sc.mask = SegMask(size, size, 2);
    Image img(size, size, 0.05);
    for (int k = 0; k < count; ++k) {
        const double cy = rng.uniform(0.25, 0.75) * size;
        const double cx = rng.uniform(0.25, 0.75) * size;
        const double ay = rng.uniform(0.08, 0.18) * size;
        const double ax = rng.uniform(0.08, 0.18) * size;
        const double level = rng.uniform(0.55, 0.9);
        for (int r = 0; r < size; ++r)
            for (int c = 0; c < size; ++c) {
                const double dy = (r - cy) / ay, dx = (c - cx) / ax;
                if (dy * dy + dx * dx <= 1.0) {
                    img.at(r, c) = level;
                    sc.mask.at(r, c) = 1;
                }
            }
    }
    sc.intensity = img;
    return sc;
}

VectorField make_smooth_warp(int size, double amplitude, Rng& rng) {
    VectorField f(size, size);
    double amp = amplitude;
    const double p1 = rng.uniform(0.0, 1.0), p2 = rng.uniform(0.0, 1.0);
    const double p3 = rng.uniform(0.0, 1.0), p4 = rng.uniform(0.0, 1.0);
    const double sx = rng.uniform() < 0.5 ? 1.0 : -1.0;
    const double sy = rng.uniform() < 0.5 ? 1.0 : -1.0;

    for (int attempt = 0; attempt < 6; ++attempt) {
        for (int r = 0; r < size; ++r)
            for (int c = 0; c < size; ++c) {
                const double x = static_cast<double>(c) / size, y = static_cast<double>(r) / size;
                const size_t i = f.idx(r, c);
                f.dx[i] = sx * amp * std::sin(kTwoPi * (x + p1)) * std::sin(kTwoPi * (y + p2));
                f.dy[i] = sy * amp * std::sin(kTwoPi * (x + p3)) * std::sin(kTwoPi * (y + p4));
            }
        const Image det = jacobian_determinant(f);
        if (*std::min_element(det.data.begin(), det.data.end()) > 0.05) return f;
        amp *= 0.8;  // shrink until safely diffeomorphic
    }
    return f;
}

void finalize(Image& img, double noise, Rng& rng) {
    if (noise > 0.0)
        for (double& v : img.data) v += rng.normal(0.0, noise);
    for (double& v : img.data) v = std::clamp(v, 0.0, 1.0);
    quantize_f32(img);
}

}  // namespace

SynthResult synth_generate(const SynthConfig& spec, uint64_t seed) {
    if (spec.size < 8) throw std::invalid_argument("synth_generate: size must be >= 8");
    if (spec.count_source < 1 || spec.count_target < 1)
        throw std::invalid_argument("synth_generate: counts must be >= 1");
    if (spec.remap_slope <= 0.0) throw std::invalid_argument("synth_generate: remap must be monotone");
    if (spec.family != "bands" && spec.family != "ellipses")
        throw std::invalid_argument("synth_generate: unknown family " + spec.family);

    Rng master(seed ^ 0x53594eULL);
    const int n = std::max(spec.count_source, spec.count_target);

    SynthResult out;
    out.source.role = "source";
    out.target.role = "target";
    out.oracle.remap_offset = spec.remap_offset;
    out.oracle.remap_slope = spec.remap_slope;

    for (int i = 0; i < n; ++i) {
        Rng scene_rng = master.fork(static_cast<uint64_t>(i));
        Scene sc = spec.family == "bands"
                       ? make_bands_scene(spec.size, spec.object_count, scene_rng)
                       : make_ellipses_scene(spec.size, spec.object_count, scene_rng);
        Image clean = gaussian_blur(sc.intensity, 0.7);

        if (i < spec.count_target) {
            DatasetItem item;
            item.image = clean;
            finalize(item.image, spec.noise, scene_rng);
            item.mask = sc.mask;
            out.target.items.push_back(std::move(item));
        }

        if (i < spec.count_source) {
            Rng warp_rng = scene_rng.fork(0x77);
            VectorField psi = spec.warp_amplitude > 0.0
                                  ? make_smooth_warp(spec.size, spec.warp_amplitude, warp_rng)
                                  : VectorField(spec.size, spec.size);
            DatasetItem item;
            item.image = spec.warp_amplitude > 0.0 ? warp(clean, psi) : clean;
            if (spec.remap_offset != 0.0 || spec.remap_slope != 1.0)
                for (double& v : item.image.data) v = spec.remap_offset + spec.remap_slope * v;
            finalize(item.image, spec.noise, scene_rng);
            item.mask = spec.warp_amplitude > 0.0 ? warp_mask(sc.mask, psi) : sc.mask;
            out.source.items.push_back(std::move(item));
            out.oracle.warps.push_back(std::move(psi));
        }
    }
    out.source.validate();
    out.target.validate();
    return out;
}

void save_dataset(const Dataset& ds, const std::string& dir,
                  const std::vector<VectorField>* warps) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    char name[64];
    int classes = 0;
    for (size_t i = 0; i < ds.items.size(); ++i) {
        std::snprintf(name, sizeof(name), "/img_%03zu.png", i);
        save_image(ds.items[i].image, dir + name, ImageFormat::png);
        if (ds.items[i].mask) {
            std::snprintf(name, sizeof(name), "/mask_%03zu.suat", i);
            save_mask(*ds.items[i].mask, dir + name);
            classes = std::max(classes, ds.items[i].mask->classes);
        }
        if (warps && i < warps->size()) {
            std::snprintf(name, sizeof(name), "/warp_%03zu.suat", i);
            save_field((*warps)[i], dir + name);
        }
    }
    nlohmann::ordered_json meta;
    meta["role"] = ds.role;
    meta["count"] = ds.items.size();
    meta["classes"] = classes;
    write_text_file(dir + "/meta.json", meta.dump(2) + "\n");
}

Dataset load_dataset(const std::string& dir) {
    namespace fs = std::filesystem;
    const auto meta = nlohmann::json::parse(read_text_file(dir + "/meta.json"));
    Dataset ds;
    ds.role = meta.value("role", "");
    const size_t count = meta.at("count").get<size_t>();
    const int classes = meta.value("classes", 0);
    char name[64];
    for (size_t i = 0; i < count; ++i) {
        DatasetItem item;
        std::snprintf(name, sizeof(name), "/img_%03zu.png", i);
        item.image = load_image(dir + name);
        std::snprintf(name, sizeof(name), "/mask_%03zu.suat", i);
        if (fs::exists(dir + name)) {
            item.mask = load_mask(dir + name);
            if (classes > item.mask->classes) item.mask->classes = classes;
        }
        ds.items.push_back(std::move(item));
    }
    ds.validate();
    return ds;
}

}  // namespace sua
