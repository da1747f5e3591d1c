#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace voscascade {

// One frame's multi-object segmentation. Pixel values are object ids,
// 0 is background, row-major storage. Ids are limited to 255 by the
// 8-bit indexed mask format used across VOS benchmarks; uint8_t storage
// enforces that bound by construction.
class LabelMap {
public:
    LabelMap() = default;
    LabelMap(int width, int height);
    LabelMap(int width, int height, std::vector<std::uint8_t> labels);

    // Checked construction from wider integers (script/JSON/numpy inputs).
    // Throws std::out_of_range if any value is negative or above 255.
    static LabelMap from_values(int width, int height, std::span<const int> values);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::int64_t pixel_count() const noexcept {
        return static_cast<std::int64_t>(width_) * height_;
    }

    std::uint8_t at(int x, int y) const { return labels_[offset(x, y)]; }
    void set(int x, int y, std::uint8_t id) { labels_[offset(x, y)] = id; }

    std::span<const std::uint8_t> labels() const noexcept { return labels_; }
    std::uint8_t* data() noexcept { return labels_.data(); }
    const std::uint8_t* data() const noexcept { return labels_.data(); }

    // Ascending unique nonzero ids present in this frame.
    std::vector<int> present_ids() const;

    bool operator==(const LabelMap&) const = default;

private:
    std::size_t offset(int x, int y) const;

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> labels_;
};

// Single-object foreground membership grid, same storage conventions as
// LabelMap (one byte per pixel, 0 or 1).
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height);
    BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::int64_t pixel_count() const noexcept {
        return static_cast<std::int64_t>(width_) * height_;
    }

    bool test(int x, int y) const { return bits_[offset(x, y)] != 0; }
    void set(int x, int y, bool on) { bits_[offset(x, y)] = on ? 1 : 0; }

    std::span<const std::uint8_t> bits() const noexcept { return bits_; }
    std::uint8_t* data() noexcept { return bits_.data(); }
    const std::uint8_t* data() const noexcept { return bits_.data(); }

    std::int64_t foreground_count() const;
    bool empty_foreground() const { return foreground_count() == 0; }

    bool operator==(const BinaryMask&) const = default;

private:
    std::size_t offset(int x, int y) const;

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

// Ordered mask sequence for one video from one source model. Frame
// indices are strictly increasing but need not be contiguous; all
// frames share one canvas size.
class VideoPrediction {
public:
    struct Frame {
        int index = 0;
        LabelMap map;
        bool operator==(const Frame&) const = default;
    };

    VideoPrediction() = default;
    VideoPrediction(std::string video_id, std::vector<Frame> frames);

    const std::string& video_id() const noexcept { return video_id_; }
    const std::vector<Frame>& frames() const noexcept { return frames_; }
    bool empty() const noexcept { return frames_.empty(); }
    std::size_t frame_count() const noexcept { return frames_.size(); }

    // Canvas size; 0x0 for an empty prediction.
    int width() const noexcept { return frames_.empty() ? 0 : frames_.front().map.width(); }
    int height() const noexcept { return frames_.empty() ? 0 : frames_.front().map.height(); }

    // Frame lookup by index; nullptr when the index is absent.
    const LabelMap* frame_at(int index) const;

    bool operator==(const VideoPrediction&) const = default;

private:
    std::string video_id_;
    std::vector<Frame> frames_;
};

// Union of nonzero object ids over all frames, ascending.
std::vector<int> object_ids(const VideoPrediction& v);

// Foreground of one object id. id must be a real object (nonzero).
BinaryMask binary_mask(const LabelMap& m, int id);

// A mask counts as a valid detection when it has at least min_pixels
// foreground pixels (min_pixels >= 1).
bool is_valid(const BinaryMask& m, std::int64_t min_pixels);

// Intersection-over-union in exact integer arithmetic, divided once.
// Two empty masks agree perfectly: both absent yields 1.0.
double iou(const BinaryMask& a, const BinaryMask& b);

}  // namespace voscascade
