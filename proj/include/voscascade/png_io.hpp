#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace voscascade::png {

// Decoded indexed-palette image: one palette index per pixel, row-major.
// Palette colors are presentation only; the index itself is the payload.
struct IndexedImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
};

// Decodes an indexed-palette (color type 3) PNG. Bit depths 1/2/4/8 are
// expanded to one byte per pixel. Any other color type, interlacing, or
// a malformed stream raises std::runtime_error with a reason.
IndexedImage decode_indexed(std::span<const std::uint8_t> bytes);

// Encodes 8-bit indexed-palette PNG bytes with the fixed mask palette.
// Output is byte-deterministic for identical input.
std::vector<std::uint8_t> encode_indexed(const IndexedImage& img);

// 256 RGB triples, the bit-interleaved pseudo-color map used by the
// common VOS annotation tooling (index 0 is black).
const std::array<std::uint8_t, 768>& mask_palette();

}  // namespace voscascade::png
