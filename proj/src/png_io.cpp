#include "voscascade/png_io.hpp"

#include <zlib.h>

#include <cstring>
#include <stdexcept>
#include <string>

namespace voscascade::png {

namespace {

constexpr std::array<std::uint8_t, 8> kSignature = {137, 80, 78, 71, 13, 10, 26, 10};

[[noreturn]] void fail(const std::string& reason) {
    throw std::runtime_error("png: " + reason);
}

std::uint32_t read_u32(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                  std::span<const std::uint8_t> data) {
    append_u32(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t type_at = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, out.data() + type_at, static_cast<uInt>(4 + data.size()));
    append_u32(out, static_cast<std::uint32_t>(crc));
}

int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a);
    const int pb = std::abs(p - b);
    const int pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

// Reverses the per-row PNG filters in place. bpp is 1 for every depth
// at or below 8 bits per pixel.
void unfilter_rows(std::uint8_t* data, std::size_t row_bytes, int height) {
    std::vector<std::uint8_t> prev(row_bytes, 0);
    for (int y = 0; y < height; ++y) {
        std::uint8_t* row = data + static_cast<std::size_t>(y) * (row_bytes + 1);
        const std::uint8_t filter = row[0];
        std::uint8_t* cur = row + 1;
        switch (filter) {
            case 0:
                break;
            case 1:  // Sub
                for (std::size_t i = 1; i < row_bytes; ++i) cur[i] += cur[i - 1];
                break;
            case 2:  // Up
                for (std::size_t i = 0; i < row_bytes; ++i) cur[i] += prev[i];
                break;
            case 3:  // Average
                cur[0] += prev[0] / 2;
                for (std::size_t i = 1; i < row_bytes; ++i) {
                    cur[i] += static_cast<std::uint8_t>((cur[i - 1] + prev[i]) / 2);
                }
                break;
            case 4:  // Paeth
                cur[0] += static_cast<std::uint8_t>(paeth(0, prev[0], 0));
                for (std::size_t i = 1; i < row_bytes; ++i) {
                    cur[i] += static_cast<std::uint8_t>(paeth(cur[i - 1], prev[i], prev[i - 1]));
                }
                break;
            default:
                fail("unknown row filter " + std::to_string(filter));
        }
        std::memcpy(prev.data(), cur, row_bytes);
    }
}

}  // namespace

IndexedImage decode_indexed(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kSignature.size() ||
        std::memcmp(bytes.data(), kSignature.data(), kSignature.size()) != 0) {
        fail("not a PNG file");
    }

    std::size_t at = kSignature.size();
    bool saw_ihdr = false;
    bool saw_plte = false;
    bool saw_iend = false;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    int bit_depth = 0;
    std::vector<std::uint8_t> compressed;

    while (at < bytes.size()) {
        if (bytes.size() - at < 12) fail("truncated chunk header");
        const std::uint32_t length = read_u32(bytes.data() + at);
        if (bytes.size() - at - 12 < length) fail("truncated chunk data");
        const std::uint8_t* type = bytes.data() + at + 4;
        const std::uint8_t* data = bytes.data() + at + 8;
        const std::uint32_t stored_crc = read_u32(data + length);
        uLong crc = crc32(0L, Z_NULL, 0);
        crc = crc32(crc, type, length + 4);
        if (static_cast<std::uint32_t>(crc) != stored_crc) fail("chunk CRC mismatch");

        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (length != 13) fail("bad IHDR length");
            width = read_u32(data);
            height = read_u32(data + 4);
            bit_depth = data[8];
            const int color_type = data[9];
            if (width == 0 || height == 0 || width > (1u << 24) || height > (1u << 24)) {
                fail("unreasonable image dimensions");
            }
            if (color_type != 3) {
                fail("not an indexed-palette image (color type " +
                     std::to_string(color_type) + ")");
            }
            if (bit_depth != 1 && bit_depth != 2 && bit_depth != 4 && bit_depth != 8) {
                fail("unsupported palette bit depth " + std::to_string(bit_depth));
            }
            if (data[10] != 0 || data[11] != 0) fail("unsupported compression or filter method");
            if (data[12] != 0) fail("interlaced PNG is not supported");
            saw_ihdr = true;
        } else if (std::memcmp(type, "PLTE", 4) == 0) {
            if (!saw_ihdr) fail("PLTE before IHDR");
            if (length == 0 || length % 3 != 0 || length > 768) fail("bad PLTE length");
            saw_plte = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            if (!saw_ihdr) fail("IDAT before IHDR");
            compressed.insert(compressed.end(), data, data + length);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            saw_iend = true;
            break;
        }
        // Ancillary chunks (tRNS, tEXt, ...) carry nothing we need.
        at += 12 + static_cast<std::size_t>(length);
    }

    if (!saw_ihdr) fail("missing IHDR");
    if (!saw_plte) fail("missing PLTE in indexed-palette image");
    if (!saw_iend) fail("missing IEND");
    if (compressed.empty()) fail("missing IDAT");

    const std::size_t row_bytes =
        (static_cast<std::size_t>(width) * bit_depth + 7) / 8;
    const std::size_t raw_size = (row_bytes + 1) * height;
    std::vector<std::uint8_t> raw(raw_size);
    uLongf out_len = static_cast<uLongf>(raw_size);
    const int rc = uncompress(raw.data(), &out_len, compressed.data(),
                              static_cast<uLong>(compressed.size()));
    if (rc != Z_OK || out_len != raw_size) fail("corrupt image data stream");

    unfilter_rows(raw.data(), row_bytes, static_cast<int>(height));

    IndexedImage img;
    img.width = static_cast<int>(width);
    img.height = static_cast<int>(height);
    img.pixels.resize(static_cast<std::size_t>(width) * height);
    for (std::uint32_t y = 0; y < height; ++y) {
        const std::uint8_t* row = raw.data() + static_cast<std::size_t>(y) * (row_bytes + 1) + 1;
        std::uint8_t* out = img.pixels.data() + static_cast<std::size_t>(y) * width;
        if (bit_depth == 8) {
            std::memcpy(out, row, width);
        } else {
            const int per_byte = 8 / bit_depth;
            const std::uint8_t mask = static_cast<std::uint8_t>((1 << bit_depth) - 1);
            for (std::uint32_t x = 0; x < width; ++x) {
                const std::uint8_t packed = row[x / per_byte];
                const int shift = 8 - bit_depth * (static_cast<int>(x % per_byte) + 1);
                out[x] = static_cast<std::uint8_t>((packed >> shift) & mask);
            }
        }
    }
    return img;
}

std::vector<std::uint8_t> encode_indexed(const IndexedImage& img) {
    if (img.width <= 0 || img.height <= 0 ||
        img.pixels.size() != static_cast<std::size_t>(img.width) * img.height) {
        fail("image dimensions do not match pixel buffer");
    }

    std::vector<std::uint8_t> out(kSignature.begin(), kSignature.end());

    std::array<std::uint8_t, 13> ihdr{};
    ihdr[0] = static_cast<std::uint8_t>(img.width >> 24);
    ihdr[1] = static_cast<std::uint8_t>(img.width >> 16);
    ihdr[2] = static_cast<std::uint8_t>(img.width >> 8);
    ihdr[3] = static_cast<std::uint8_t>(img.width);
    ihdr[4] = static_cast<std::uint8_t>(img.height >> 24);
    ihdr[5] = static_cast<std::uint8_t>(img.height >> 16);
    ihdr[6] = static_cast<std::uint8_t>(img.height >> 8);
    ihdr[7] = static_cast<std::uint8_t>(img.height);
    ihdr[8] = 8;   // bit depth
    ihdr[9] = 3;   // indexed palette
    ihdr[10] = 0;  // deflate
    ihdr[11] = 0;  // adaptive filtering
    ihdr[12] = 0;  // no interlace
    append_chunk(out, "IHDR", ihdr);

    const auto& palette = mask_palette();
    append_chunk(out, "PLTE", std::span<const std::uint8_t>(palette.data(), palette.size()));

    // Filter byte 0 on every row keeps the stream trivially reproducible.
    const std::size_t row_bytes = static_cast<std::size_t>(img.width);
    std::vector<std::uint8_t> raw((row_bytes + 1) * img.height);
    for (int y = 0; y < img.height; ++y) {
        std::uint8_t* row = raw.data() + static_cast<std::size_t>(y) * (row_bytes + 1);
        row[0] = 0;
        std::memcpy(row + 1, img.pixels.data() + static_cast<std::size_t>(y) * row_bytes,
                    row_bytes);
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(bound);
    if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()),
                  Z_DEFAULT_COMPRESSION) != Z_OK) {
        fail("deflate failed");
    }
    compressed.resize(bound);
    append_chunk(out, "IDAT", compressed);
    append_chunk(out, "IEND", {});
    return out;
}

const std::array<std::uint8_t, 768>& mask_palette() {
    static const std::array<std::uint8_t, 768> palette = [] {
        std::array<std::uint8_t, 768> p{};
        for (int index = 0; index < 256; ++index) {
            int c = index;
            std::uint8_t r = 0;
            std::uint8_t g = 0;
            std::uint8_t b = 0;
            for (int bit = 0; bit < 8 && c != 0; ++bit, c >>= 3) {
                r |= static_cast<std::uint8_t>(((c >> 0) & 1) << (7 - bit));
                g |= static_cast<std::uint8_t>(((c >> 1) & 1) << (7 - bit));
                b |= static_cast<std::uint8_t>(((c >> 2) & 1) << (7 - bit));
            }
            p[index * 3 + 0] = r;
            p[index * 3 + 1] = g;
            p[index * 3 + 2] = b;
        }
        return p;
    }();
    return palette;
}

}  // namespace voscascade::png
