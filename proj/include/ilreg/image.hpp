#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "ilreg/error.hpp"

namespace ilreg {

// Rectangular grid of per-pixel real vectors plus a coverage mask.
// Holds both photos (channels=1, values in [0,1]) and model projections
// (channels=4: ambient reflectance, then diffuse reflectance times the unit
// camera-space normal).
struct AttributeImage {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> data;   // row-major, interleaved channels
    std::vector<uint8_t> mask;  // 1 where covered / foreground

    AttributeImage() = default;
    AttributeImage(int w, int h, int c)
        : width(w),
          height(h),
          channels(c),
          data(static_cast<size_t>(w) * h * c, 0.0),
          mask(static_cast<size_t>(w) * h, 0) {}

    size_t pixel_index(int x, int y) const { return static_cast<size_t>(y) * width + x; }

    double at(int x, int y, int c) const {
        return data[pixel_index(x, y) * channels + static_cast<size_t>(c)];
    }
    double& at(int x, int y, int c) {
        return data[pixel_index(x, y) * channels + static_cast<size_t>(c)];
    }

    bool covered(int x, int y) const { return mask[pixel_index(x, y)] != 0; }
    void set_covered(int x, int y, bool v) { mask[pixel_index(x, y)] = v ? 1 : 0; }

    long long covered_count() const {
        long long n = 0;
        for (uint8_t m : mask) n += m != 0;
        return n;
    }

    bool same_dims(const AttributeImage& o) const {
        return width == o.width && height == o.height;
    }
};

// ---------------------------------------------------------------------------
// PGM (P5) photos. 8-bit by default; 16-bit (maxval 65535, big-endian sample
// order per the Netpbm spec) is accepted on read and available on write.
// Intensities map to [0,1] by dividing by maxval. Loaded photos get an
// all-true mask; foreground masks come in as separate mask files.
// ---------------------------------------------------------------------------

namespace detail {

inline int pgm_next_token(std::istream& in, std::string& tok) {
    tok.clear();
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {  // comment to end of line
            while (c != EOF && c != '\n') c = in.get();
            c = in.get();
            continue;
        }
        if (!std::isspace(c)) break;
        c = in.get();
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    return tok.empty() ? EOF : 0;
}

}  // namespace detail

inline AttributeImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string tok;
    if (detail::pgm_next_token(in, tok) == EOF || tok != "P5")
        throw ParseError(path + ": not a P5 PGM file");
    long w = 0, h = 0, maxval = 0;
    auto read_int = [&](long& out) {
        if (detail::pgm_next_token(in, tok) == EOF) throw ParseError(path + ": truncated header");
        try {
            out = std::stol(tok);
        } catch (const std::exception&) {
            throw ParseError(path + ": bad header field '" + tok + "'");
        }
    };
    read_int(w);
    read_int(h);
    read_int(maxval);
    if (w <= 0 || h <= 0) throw ParseError(path + ": invalid dimensions");
    if (maxval != 255 && maxval != 65535)
        throw ParseError(path + ": unsupported maxval " + std::to_string(maxval));

    AttributeImage img(static_cast<int>(w), static_cast<int>(h), 1);
    const size_t count = static_cast<size_t>(w) * static_cast<size_t>(h);
    if (maxval == 255) {
        std::vector<uint8_t> raw(count);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
        if (static_cast<size_t>(in.gcount()) != count) throw ParseError(path + ": truncated pixel data");
        for (size_t i = 0; i < count; ++i) img.data[i] = raw[i] / 255.0;
    } else {
        std::vector<uint8_t> raw(count * 2);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count * 2));
        if (static_cast<size_t>(in.gcount()) != count * 2)
            throw ParseError(path + ": truncated pixel data");
        for (size_t i = 0; i < count; ++i) {
            const unsigned v = (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
            img.data[i] = v / 65535.0;
        }
    }
    std::fill(img.mask.begin(), img.mask.end(), uint8_t{1});
    return img;
}

inline void write_pgm(const AttributeImage& img, const std::string& path, int maxval = 255) {
    if (img.channels != 1) throw ShapeError("write_pgm expects a single-channel image");
    if (maxval != 255 && maxval != 65535) throw ConfigError("write_pgm: maxval must be 255 or 65535");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "P5\n" << img.width << " " << img.height << "\n" << maxval << "\n";
    const size_t count = static_cast<size_t>(img.width) * img.height;
    auto quantize = [&](double v) -> long {
        long iv = std::lround(v * maxval);
        if (iv < 0) iv = 0;
        if (iv > maxval) iv = maxval;
        return iv;
    };
    if (maxval == 255) {
        std::vector<uint8_t> raw(count);
        for (size_t i = 0; i < count; ++i) raw[i] = static_cast<uint8_t>(quantize(img.data[i]));
        out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(count));
    } else {
        std::vector<uint8_t> raw(count * 2);
        for (size_t i = 0; i < count; ++i) {
            const long v = quantize(img.data[i]);
            raw[2 * i] = static_cast<uint8_t>((v >> 8) & 0xff);
            raw[2 * i + 1] = static_cast<uint8_t>(v & 0xff);
        }
        out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(count * 2));
    }
    if (!out) throw IoError("failed writing " + path);
}

// ---------------------------------------------------------------------------
// AIMG attribute-image container, for debugging and golden tests.
// Layout: magic "AIMG1", u32 width/height/channels (little-endian), row-major
// f32 channel data (interleaved), then the mask packed 8 pixels per byte,
// LSB first, row-major.
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u32_le(std::ostream& out, uint32_t v) {
    uint8_t b[4] = {static_cast<uint8_t>(v & 0xff), static_cast<uint8_t>((v >> 8) & 0xff),
                    static_cast<uint8_t>((v >> 16) & 0xff), static_cast<uint8_t>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

inline uint32_t get_u32_le(std::istream& in, const std::string& path) {
    uint8_t b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (in.gcount() != 4) throw ParseError(path + ": truncated AIMG header");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

}  // namespace detail

inline void write_aimg(const AttributeImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write("AIMG1", 5);
    detail::put_u32_le(out, static_cast<uint32_t>(img.width));
    detail::put_u32_le(out, static_cast<uint32_t>(img.height));
    detail::put_u32_le(out, static_cast<uint32_t>(img.channels));
    std::vector<float> f(img.data.size());
    for (size_t i = 0; i < img.data.size(); ++i) f[i] = static_cast<float>(img.data[i]);
    out.write(reinterpret_cast<const char*>(f.data()),
              static_cast<std::streamsize>(f.size() * sizeof(float)));
    const size_t npix = img.mask.size();
    std::vector<uint8_t> packed((npix + 7) / 8, 0);
    for (size_t i = 0; i < npix; ++i)
        if (img.mask[i]) packed[i / 8] |= static_cast<uint8_t>(1u << (i % 8));
    out.write(reinterpret_cast<const char*>(packed.data()),
              static_cast<std::streamsize>(packed.size()));
    if (!out) throw IoError("failed writing " + path);
}

inline AttributeImage read_aimg(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[5];
    in.read(magic, 5);
    if (in.gcount() != 5 || std::memcmp(magic, "AIMG1", 5) != 0)
        throw ParseError(path + ": not an AIMG file");
    const uint32_t w = detail::get_u32_le(in, path);
    const uint32_t h = detail::get_u32_le(in, path);
    const uint32_t c = detail::get_u32_le(in, path);
    if (w == 0 || h == 0 || c == 0 || c > 64)
        throw ParseError(path + ": invalid AIMG dimensions");
    AttributeImage img(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c));
    std::vector<float> f(img.data.size());
    in.read(reinterpret_cast<char*>(f.data()),
            static_cast<std::streamsize>(f.size() * sizeof(float)));
    if (static_cast<size_t>(in.gcount()) != f.size() * sizeof(float))
        throw ParseError(path + ": truncated AIMG channel data");
    for (size_t i = 0; i < f.size(); ++i) img.data[i] = f[i];
    const size_t npix = img.mask.size();
    std::vector<uint8_t> packed((npix + 7) / 8);
    in.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
    if (static_cast<size_t>(in.gcount()) != packed.size())
        throw ParseError(path + ": truncated AIMG mask data");
    for (size_t i = 0; i < npix; ++i)
        img.mask[i] = (packed[i / 8] >> (i % 8)) & 1u;
    return img;
}

}  // namespace ilreg
