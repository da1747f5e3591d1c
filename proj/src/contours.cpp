#include "voscascade/contours.hpp"

#include <cstdint>
#include <numeric>
#include <vector>

namespace voscascade {

namespace {

// Flat union-find over the pixel grid, path-halving find.
class PixelSets {
public:
    explicit PixelSets(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::int32_t{0});
    }

    std::int32_t find(std::int32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void merge(std::int32_t a, std::int32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a < b) parent_[b] = a;
        else parent_[a] = b;
    }

private:
    std::vector<std::int32_t> parent_;
};

}  // namespace

ContourStats count_contours(const BinaryMask& m) {
    const int w = m.width();
    const int h = m.height();
    ContourStats stats;
    if (w == 0 || h == 0) return stats;

    const auto bits = m.bits();
    const std::size_t n = bits.size();
    PixelSets sets(n);

    // One scan links each pixel to already-visited neighbours of the same
    // class: W and N for both classes, NW and NE additionally for
    // foreground (8-connectivity); background stays 4-connected.
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const bool fg = bits[i] != 0;
            if (x > 0 && (bits[i - 1] != 0) == fg) sets.merge(i, i - 1);
            if (y > 0 && (bits[i - w] != 0) == fg) sets.merge(i, i - w);
            if (fg && y > 0) {
                if (x > 0 && bits[i - w - 1] != 0) sets.merge(i, i - w - 1);
                if (x + 1 < w && bits[i - w + 1] != 0) sets.merge(i, i - w + 1);
            }
        }
    }

    std::vector<std::uint8_t> root_seen(n, 0);
    std::vector<std::uint8_t> root_on_border(n, 0);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (bits[i] == 0 && (x == 0 || y == 0 || x == w - 1 || y == h - 1)) {
                root_on_border[sets.find(static_cast<std::int32_t>(i))] = 1;
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const std::int32_t root = sets.find(static_cast<std::int32_t>(i));
        if (root_seen[root]) continue;
        root_seen[root] = 1;
        if (bits[i] != 0) {
            ++stats.external_contours;
        } else if (!root_on_border[root]) {
            ++stats.hole_contours;
        }
    }
    stats.total_contours = stats.external_contours + stats.hole_contours;
    return stats;
}

int noise_contour_count(const ContourStats& s, ContourMode mode) {
    return mode == ContourMode::external_only ? s.external_contours : s.total_contours;
}

bool is_high_noise(const BinaryMask& m, int threshold, ContourMode mode) {
    if (threshold < 1) throw std::invalid_argument("noise threshold must be at least 1");
    return noise_contour_count(count_contours(m), mode) > threshold;
}

}  // namespace voscascade
