#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <zlib.h>

#include "pmmd/core/common.hpp"
#include "pmmd/core/tensor.hpp"

namespace pmmd::io {

// 8-bit interleaved RGB image, row-major.
struct ImageU8 {
    int h = 0, w = 0;
    std::vector<std::uint8_t> data;  // h*w*3

    std::uint8_t& at(int y, int x, int c) {
        return data[(static_cast<std::size_t>(y) * w + x) * 3 + c];
    }
    std::uint8_t at(int y, int x, int c) const {
        return data[(static_cast<std::size_t>(y) * w + x) * 3 + c];
    }
    static ImageU8 make(int h, int w) { return {h, w, std::vector<std::uint8_t>(static_cast<std::size_t>(h) * w * 3, 0)}; }
};

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

inline void put_chunk(std::vector<std::uint8_t>& out, const char type[4],
                      const std::vector<std::uint8_t>& payload) {
    put_u32(out, static_cast<std::uint32_t>(payload.size()));
    const std::size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    const auto crc = crc32(0, out.data() + start, static_cast<uInt>(out.size() - start));
    put_u32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace detail

// Serializes to PNG bytes: 8-bit RGB, no interlace, filter 0 on every row.
// Byte-for-byte deterministic for a given image.
inline std::vector<std::uint8_t> encode_png(const ImageU8& img) {
    PMMD_CHECK(img.h > 0 && img.w > 0, "encode_png: empty image");
    PMMD_CHECK(img.data.size() == static_cast<std::size_t>(img.h) * img.w * 3,
               "encode_png: data size mismatch");
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(img.h) * (1 + static_cast<std::size_t>(img.w) * 3));
    for (int y = 0; y < img.h; ++y) {
        raw.push_back(0);  // filter: none
        const auto* row = img.data.data() + static_cast<std::size_t>(y) * img.w * 3;
        raw.insert(raw.end(), row, row + static_cast<std::size_t>(img.w) * 3);
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(bound);
    const int rc = compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()),
                             Z_BEST_SPEED);
    PMMD_RUNTIME_CHECK(rc == Z_OK, "encode_png: zlib compress failed (", rc, ")");
    compressed.resize(bound);

    std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    std::vector<std::uint8_t> ihdr;
    detail::put_u32(ihdr, static_cast<std::uint32_t>(img.w));
    detail::put_u32(ihdr, static_cast<std::uint32_t>(img.h));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // color type: truecolor
    ihdr.push_back(0);  // compression
    ihdr.push_back(0);  // filter method
    ihdr.push_back(0);  // no interlace
    detail::put_chunk(out, "IHDR", ihdr);
    detail::put_chunk(out, "IDAT", compressed);
    detail::put_chunk(out, "IEND", {});
    return out;
}

inline ImageU8 decode_png(const std::vector<std::uint8_t>& bytes) {
    PMMD_CHECK(bytes.size() > 8 && bytes[0] == 0x89 && bytes[1] == 'P' && bytes[2] == 'N' &&
                   bytes[3] == 'G',
               "decode_png: not a PNG file");
    std::size_t pos = 8;
    int w = 0, h = 0;
    std::vector<std::uint8_t> idat;
    bool saw_ihdr = false, saw_iend = false;
    while (pos + 8 <= bytes.size() && !saw_iend) {
        const std::uint32_t len = detail::get_u32(bytes.data() + pos);
        PMMD_CHECK(pos + 12 + len <= bytes.size(), "decode_png: truncated chunk");
        const char* type = reinterpret_cast<const char*>(bytes.data() + pos + 4);
        const std::uint8_t* payload = bytes.data() + pos + 8;
        if (std::memcmp(type, "IHDR", 4) == 0) {
            PMMD_CHECK(len == 13, "decode_png: bad IHDR");
            w = static_cast<int>(detail::get_u32(payload));
            h = static_cast<int>(detail::get_u32(payload + 4));
            PMMD_CHECK(payload[8] == 8 && payload[9] == 2, "decode_png: only 8-bit RGB supported");
            PMMD_CHECK(payload[12] == 0, "decode_png: interlaced PNG not supported");
            saw_ihdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), payload, payload + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            saw_iend = true;
        }
        pos += 12 + len;
    }
    PMMD_CHECK(saw_ihdr && saw_iend && !idat.empty(), "decode_png: missing chunks");
    PMMD_CHECK(w > 0 && h > 0 && w < (1 << 20) && h < (1 << 20), "decode_png: bad dimensions");

    const std::size_t stride = static_cast<std::size_t>(w) * 3;
    std::vector<std::uint8_t> raw(static_cast<std::size_t>(h) * (stride + 1));
    uLongf raw_len = static_cast<uLongf>(raw.size());
    const int rc = uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size()));
    PMMD_RUNTIME_CHECK(rc == Z_OK && raw_len == raw.size(), "decode_png: zlib inflate failed (", rc,
                       ")");

    ImageU8 img = ImageU8::make(h, w);
    std::vector<std::uint8_t> prev(stride, 0);
    for (int y = 0; y < h; ++y) {
        const std::uint8_t filter = raw[static_cast<std::size_t>(y) * (stride + 1)];
        const std::uint8_t* src = raw.data() + static_cast<std::size_t>(y) * (stride + 1) + 1;
        std::uint8_t* dst = img.data.data() + static_cast<std::size_t>(y) * stride;
        for (std::size_t i = 0; i < stride; ++i) {
            const int a = i >= 3 ? dst[i - 3] : 0;   // left
            const int b = prev[i];                   // up
            const int c = i >= 3 ? prev[i - 3] : 0;  // up-left
            int v = src[i];
            switch (filter) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += b; break;
                case 3: v += (a + b) / 2; break;
                case 4: {  // Paeth
                    const int p = a + b - c;
                    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
                    v += (pa <= pb && pa <= pc) ? a : (pb <= pc ? b : c);
                    break;
                }
                default:
                    PMMD_CHECK(false, "decode_png: unknown filter ", static_cast<int>(filter));
            }
            dst[i] = static_cast<std::uint8_t>(v & 0xff);
        }
        std::copy(dst, dst + stride, prev.begin());
    }
    return img;
}

inline void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary);
    PMMD_RUNTIME_CHECK(f.good(), "cannot open for writing: ", path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    PMMD_RUNTIME_CHECK(f.good(), "write failed: ", path);
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    PMMD_RUNTIME_CHECK(f.good(), "cannot open: ", path);
    const auto n = f.tellg();
    f.seekg(0);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(n));
    f.read(reinterpret_cast<char*>(bytes.data()), n);
    PMMD_RUNTIME_CHECK(f.good(), "read failed: ", path);
    return bytes;
}

inline void write_png(const std::string& path, const ImageU8& img) {
    write_file(path, encode_png(img));
}

inline ImageU8 read_png(const std::string& path) { return decode_png(read_file(path)); }

// --- float tensor <-> byte image conversions -------------------------------
// Tensors are (3, H, W) in [0, 1]; quantization rounds to nearest of 256 levels.

inline ImageU8 tensor_to_image(const Tensor<float>& t) {
    PMMD_CHECK(t.rank() == 3 && t.dim(0) == 3, "tensor_to_image: expected (3,H,W), got ",
               t.shape_str());
    ImageU8 img = ImageU8::make(t.dim(1), t.dim(2));
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < img.h; ++y)
            for (int x = 0; x < img.w; ++x) {
                const float v = std::min(1.0f, std::max(0.0f, t.at(c, y, x)));
                img.at(y, x, c) = static_cast<std::uint8_t>(std::lround(v * 255.0f));
            }
    return img;
}

inline Tensor<float> image_to_tensor(const ImageU8& img) {
    Tensor<float> t({3, img.h, img.w});
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < img.h; ++y)
            for (int x = 0; x < img.w; ++x)
                t.at(c, y, x) = static_cast<float>(img.at(y, x, c)) / 255.0f;
    return t;
}

}  // namespace pmmd::io
