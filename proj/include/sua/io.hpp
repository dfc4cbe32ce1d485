#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sua/image.hpp"

namespace sua {

// Raw tensor interchange (".suat"): magic "SUAT", u32 little-endian rank,
// u32 size per dimension, then the payload row-major. Float tensors carry
// 32-bit IEEE-754 little-endian floats; SegMask files carry u16 labels
// behind the same header.
struct RawTensor {
    std::vector<uint32_t> dims;
    std::vector<float> values;
};

void save_raw(const std::string& path, const RawTensor& t);
RawTensor load_raw(const std::string& path);

// 8-bit grayscale PNG or raw tensor, selected by extension (.png / anything
// else is treated as raw). Loaded values land in [0,1].
Image load_image(const std::string& path);
enum class ImageFormat { png, raw };
void save_image(const Image& img, const std::string& path, ImageFormat fmt);
// Convenience: format from extension.
void save_image(const Image& img, const std::string& path);

VectorField load_field(const std::string& path);
void save_field(const VectorField& f, const std::string& path);

SegMask load_mask(const std::string& path);
void save_mask(const SegMask& m, const std::string& path);

// Weight archive (".suaw"): magic "SUAW", u32 record count, then per record
// a u32 name length, the name bytes, and an embedded raw tensor in the
// format above.
struct NamedTensor {
    std::string name;
    RawTensor tensor;
};

void save_archive(const std::string& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_archive(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace sua
