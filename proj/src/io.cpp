#include "sua/io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sua {

namespace {

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is, const std::string& path) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error("raw load: truncated file " + path);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& os, float v) {
    uint32_t u;
    std::memcpy(&u, &v, 4);
    put_u32(os, u);
}

float get_f32(std::istream& is, const std::string& path) {
    uint32_t u = get_u32(is, path);
    float v;
    std::memcpy(&v, &u, 4);
    return v;
}

void write_header(std::ostream& os, const std::vector<uint32_t>& dims) {
    os.write("SUAT", 4);
    put_u32(os, static_cast<uint32_t>(dims.size()));
    for (uint32_t d : dims) put_u32(os, d);
}

std::vector<uint32_t> read_header(std::istream& is, const std::string& path) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "SUAT", 4) != 0)
        throw std::runtime_error("raw load: bad magic in " + path);
    uint32_t rank = get_u32(is, path);
    if (rank == 0 || rank > 8) throw std::runtime_error("raw load: bad rank in " + path);
    std::vector<uint32_t> dims(rank);
    size_t total = 1;
    for (auto& d : dims) {
        d = get_u32(is, path);
        if (d == 0 || total > (1u << 30) / d)
            throw std::runtime_error("raw load: bad dims in " + path);
        total *= d;
    }
    return dims;
}

bool has_suffix(const std::string& s, const std::string& suf) {
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

struct PngReadCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngReadCloser() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

struct PngWriteCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngWriteCloser() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

Image load_png(const std::string& path) {
    PngReadCloser c;
    c.fp = std::fopen(path.c_str(), "rb");
    if (!c.fp) throw std::runtime_error("load_image: cannot open " + path);

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, c.fp) != 8 || png_sig_cmp(sig, 0, 8))
        throw std::runtime_error("load_image: not a PNG file: " + path);

    c.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!c.png) throw std::runtime_error("load_image: libpng init failed");
    c.info = png_create_info_struct(c.png);
    if (!c.info) throw std::runtime_error("load_image: libpng init failed");
    if (setjmp(png_jmpbuf(c.png)))
        throw std::runtime_error("load_image: PNG decode error in " + path);

    png_init_io(c.png, c.fp);
    png_set_sig_bytes(c.png, 8);
    png_read_info(c.png, c.info);

    const int color = png_get_color_type(c.png, c.info);
    const int depth = png_get_bit_depth(c.png, c.info);
    if (color != PNG_COLOR_TYPE_GRAY || depth != 8)
        throw std::runtime_error("load_image: unsupported format (need 8-bit grayscale PNG): " + path);

    const int w = static_cast<int>(png_get_image_width(c.png, c.info));
    const int h = static_cast<int>(png_get_image_height(c.png, c.info));
    std::vector<unsigned char> row(static_cast<size_t>(w));
    Image img(h, w);
    for (int r = 0; r < h; ++r) {
        png_read_row(c.png, row.data(), nullptr);
        for (int col = 0; col < w; ++col)
            img.at(r, col) = static_cast<double>(static_cast<float>(row[col]) / 255.0f);
    }
    png_read_end(c.png, nullptr);
    return img;
}

void save_png(const Image& img, const std::string& path) {
    PngWriteCloser c;
    c.fp = std::fopen(path.c_str(), "wb");
    if (!c.fp) throw std::runtime_error("save_image: cannot open " + path + " for writing");

    c.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!c.png) throw std::runtime_error("save_image: libpng init failed");
    c.info = png_create_info_struct(c.png);
    if (!c.info) throw std::runtime_error("save_image: libpng init failed");
    if (setjmp(png_jmpbuf(c.png)))
        throw std::runtime_error("save_image: PNG encode error for " + path);

    png_init_io(c.png, c.fp);
    png_set_IHDR(c.png, c.info, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(c.png, c.info);

    std::vector<unsigned char> row(static_cast<size_t>(img.width));
    for (int r = 0; r < img.height; ++r) {
        for (int col = 0; col < img.width; ++col) {
            double v = img.at(r, col);
            v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
            row[col] = static_cast<unsigned char>(std::lround(v * 255.0));
        }
        png_write_row(c.png, row.data());
    }
    png_write_end(c.png, nullptr);
}

}  // namespace

void save_raw(const std::string& path, const RawTensor& t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_raw: cannot open " + path + " for writing");
    write_header(os, t.dims);
    for (float v : t.values) put_f32(os, v);
    if (!os) throw std::runtime_error("save_raw: write failed for " + path);
}

RawTensor load_raw(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_raw: cannot open " + path);
    RawTensor t;
    t.dims = read_header(is, path);
    size_t total = 1;
    for (uint32_t d : t.dims) total *= d;
    t.values.resize(total);
    for (auto& v : t.values) v = get_f32(is, path);
    return t;
}

Image load_image(const std::string& path) {
    Image img;
    if (has_suffix(path, ".png")) {
        img = load_png(path);
    } else {
        RawTensor t = load_raw(path);
        if (t.dims.size() != 2)
            throw std::runtime_error("load_image: raw tensor is not rank-2: " + path);
        img = Image(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]));
        for (size_t i = 0; i < t.values.size(); ++i) img.data[i] = t.values[i];
    }
    check_image_range(img, "load_image");
    return img;
}

void save_image(const Image& img, const std::string& path, ImageFormat fmt) {
    if (img.height <= 0 || img.width <= 0) throw std::invalid_argument("save_image: empty image");
    if (fmt == ImageFormat::png) {
        save_png(img, path);
    } else {
        RawTensor t;
        t.dims = {static_cast<uint32_t>(img.height), static_cast<uint32_t>(img.width)};
        t.values.assign(img.data.begin(), img.data.end());
        save_raw(path, t);
    }
}

void save_image(const Image& img, const std::string& path) {
    save_image(img, path, has_suffix(path, ".png") ? ImageFormat::png : ImageFormat::raw);
}

VectorField load_field(const std::string& path) {
    RawTensor t = load_raw(path);
    if (t.dims.size() != 3 || t.dims[0] != 2)
        throw std::runtime_error("load_field: expected [2,H,W] tensor in " + path);
    VectorField f(static_cast<int>(t.dims[1]), static_cast<int>(t.dims[2]));
    const size_t n = f.size();
    for (size_t i = 0; i < n; ++i) {
        f.dx[i] = t.values[i];
        f.dy[i] = t.values[n + i];
    }
    if (!all_finite(f.dx) || !all_finite(f.dy))
        throw std::runtime_error("load_field: non-finite components in " + path);
    return f;
}

void save_field(const VectorField& f, const std::string& path) {
    RawTensor t;
    t.dims = {2u, static_cast<uint32_t>(f.height), static_cast<uint32_t>(f.width)};
    t.values.resize(2 * f.size());
    for (size_t i = 0; i < f.size(); ++i) {
        t.values[i] = static_cast<float>(f.dx[i]);
        t.values[f.size() + i] = static_cast<float>(f.dy[i]);
    }
    save_raw(path, t);
}

SegMask load_mask(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_mask: cannot open " + path);
    auto dims = read_header(is, path);
    if (dims.size() != 2) throw std::runtime_error("load_mask: expected rank-2 tensor in " + path);
    SegMask m(static_cast<int>(dims[0]), static_cast<int>(dims[1]), 1);
    uint16_t maxLabel = 0;
    for (auto& l : m.labels) {
        unsigned char b[2];
        if (!is.read(reinterpret_cast<char*>(b), 2))
            throw std::runtime_error("load_mask: truncated file " + path);
        l = static_cast<uint16_t>(b[0] | (b[1] << 8));
        maxLabel = std::max(maxLabel, l);
    }
    m.classes = static_cast<int>(maxLabel) + 1;
    return m;
}

void save_mask(const SegMask& m, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_mask: cannot open " + path + " for writing");
    write_header(os, {static_cast<uint32_t>(m.height), static_cast<uint32_t>(m.width)});
    for (uint16_t l : m.labels) {
        unsigned char b[2] = {static_cast<unsigned char>(l & 0xff),
                              static_cast<unsigned char>(l >> 8)};
        os.write(reinterpret_cast<const char*>(b), 2);
    }
    if (!os) throw std::runtime_error("save_mask: write failed for " + path);
}

void save_archive(const std::string& path, const std::vector<NamedTensor>& tensors) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_archive: cannot open " + path + " for writing");
    os.write("SUAW", 4);
    put_u32(os, static_cast<uint32_t>(tensors.size()));
    for (const auto& nt : tensors) {
        put_u32(os, static_cast<uint32_t>(nt.name.size()));
        os.write(nt.name.data(), static_cast<std::streamsize>(nt.name.size()));
        write_header(os, nt.tensor.dims);
        for (float v : nt.tensor.values) put_f32(os, v);
    }
    if (!os) throw std::runtime_error("save_archive: write failed for " + path);
}

std::vector<NamedTensor> load_archive(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_archive: cannot open " + path);
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "SUAW", 4) != 0)
        throw std::runtime_error("load_archive: bad magic in " + path);
    uint32_t count = get_u32(is, path);
    std::vector<NamedTensor> out(count);
    for (auto& nt : out) {
        uint32_t len = get_u32(is, path);
        nt.name.resize(len);
        if (!is.read(nt.name.data(), len))
            throw std::runtime_error("load_archive: truncated file " + path);
        nt.tensor.dims = read_header(is, path);
        size_t total = 1;
        for (uint32_t d : nt.tensor.dims) total *= d;
        nt.tensor.values.resize(total);
        for (auto& v : nt.tensor.values) v = get_f32(is, path);
    }
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_text_file: cannot open " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_text_file: cannot open " + path);
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!os) throw std::runtime_error("write_text_file: write failed for " + path);
}

}  // namespace sua
