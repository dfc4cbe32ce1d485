#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sua {

// 2D scalar grid, row-major. Pipeline images keep values in [0,1]; the same
// carrier is reused for unbounded diagnostic grids (Jacobian maps, derivative
// stacks) where noted.
struct Image {
    int height = 0;
    int width = 0;
    std::vector<double> data;

    Image() = default;
    Image(int h, int w, double fill = 0.0)
        : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {
        if (h <= 0 || w <= 0) throw std::invalid_argument("Image: non-positive dims");
    }

    double& at(int r, int c) { return data[static_cast<size_t>(r) * width + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * width + c]; }
    size_t size() const { return data.size(); }

    bool same_dims(const Image& o) const { return height == o.height && width == o.width; }
};

// Per-pixel displacement from identity, in pixel units. dx moves along
// columns, dy along rows.
struct VectorField {
    int height = 0;
    int width = 0;
    std::vector<double> dx;
    std::vector<double> dy;

    VectorField() = default;
    VectorField(int h, int w)
        : height(h), width(w),
          dx(static_cast<size_t>(h) * w, 0.0),
          dy(static_cast<size_t>(h) * w, 0.0) {
        if (h <= 0 || w <= 0) throw std::invalid_argument("VectorField: non-positive dims");
    }

    size_t idx(int r, int c) const { return static_cast<size_t>(r) * width + c; }
    size_t size() const { return dx.size(); }
    bool same_dims(const VectorField& o) const { return height == o.height && width == o.width; }
};

struct SegMask {
    int height = 0;
    int width = 0;
    int classes = 0;  // labels live in {0..classes-1}
    std::vector<uint16_t> labels;

    SegMask() = default;
    SegMask(int h, int w, int c)
        : height(h), width(w), classes(c), labels(static_cast<size_t>(h) * w, 0) {
        if (h <= 0 || w <= 0 || c <= 0) throw std::invalid_argument("SegMask: bad dims/classes");
    }

    uint16_t& at(int r, int c) { return labels[static_cast<size_t>(r) * width + c]; }
    uint16_t at(int r, int c) const { return labels[static_cast<size_t>(r) * width + c]; }
};

// Binary boundary sketch of a labeling: a pixel is on iff its right or bottom
// 4-neighbor carries a different label.
struct EdgeSketch {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> on;

    EdgeSketch() = default;
    EdgeSketch(int h, int w) : height(h), width(w), on(static_cast<size_t>(h) * w, 0) {}

    uint8_t& at(int r, int c) { return on[static_cast<size_t>(r) * width + c]; }
    uint8_t at(int r, int c) const { return on[static_cast<size_t>(r) * width + c]; }

    Image as_image() const {
        Image img(height, width);
        for (size_t i = 0; i < on.size(); ++i) img.data[i] = on[i] ? 1.0 : 0.0;
        return img;
    }
};

struct DatasetItem {
    Image image;
    std::optional<SegMask> mask;
};

struct Dataset {
    std::vector<DatasetItem> items;
    std::string role;  // "source" or "target"

    void validate() const {
        if (items.empty()) throw std::invalid_argument("Dataset: empty");
        const int h = items.front().image.height, w = items.front().image.width;
        for (const auto& it : items) {
            if (it.image.height != h || it.image.width != w)
                throw std::invalid_argument("Dataset: non-uniform image dims");
            if (it.mask && (it.mask->height != h || it.mask->width != w))
                throw std::invalid_argument("Dataset: mask dims differ from image");
        }
    }
};

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// Snap values to their float32 representation so that the raw on-disk format
// (f32 payload) round-trips bit-exactly.
inline void quantize_f32(Image& img) {
    for (double& v : img.data) v = static_cast<double>(static_cast<float>(v));
}

inline void check_image_range(const Image& img, const char* where) {
    for (double v : img.data) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw std::runtime_error(std::string(where) + ": intensity outside [0,1] or non-finite");
    }
}

}  // namespace sua
