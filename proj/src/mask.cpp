#include "voscascade/mask.hpp"

#include <algorithm>
#include <array>

namespace voscascade {

namespace {

void check_dims(int width, int height) {
    if (width <= 0 || height <= 0) {
        throw std::invalid_argument("mask dimensions must be positive, got " +
                                    std::to_string(width) + "x" + std::to_string(height));
    }
}

}  // namespace

LabelMap::LabelMap(int width, int height)
    : width_(width), height_(height),
      labels_(static_cast<std::size_t>(width) * height, 0) {
    check_dims(width, height);
}

LabelMap::LabelMap(int width, int height, std::vector<std::uint8_t> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
    check_dims(width, height);
    if (labels_.size() != static_cast<std::size_t>(width) * height) {
        throw std::invalid_argument("label grid size does not match " +
                                    std::to_string(width) + "x" + std::to_string(height));
    }
}

LabelMap LabelMap::from_values(int width, int height, std::span<const int> values) {
    check_dims(width, height);
    if (values.size() != static_cast<std::size_t>(width) * height) {
        throw std::invalid_argument("label grid size does not match " +
                                    std::to_string(width) + "x" + std::to_string(height));
    }
    std::vector<std::uint8_t> labels(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < 0 || values[i] > 255) {
            throw std::out_of_range("object identifier " + std::to_string(values[i]) +
                                    " outside the 8-bit palette range 0..255");
        }
        labels[i] = static_cast<std::uint8_t>(values[i]);
    }
    return LabelMap(width, height, std::move(labels));
}

std::size_t LabelMap::offset(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
}

std::vector<int> LabelMap::present_ids() const {
    std::array<bool, 256> seen{};
    for (std::uint8_t v : labels_) seen[v] = true;
    std::vector<int> ids;
    for (int id = 1; id < 256; ++id) {
        if (seen[id]) ids.push_back(id);
    }
    return ids;
}

BinaryMask::BinaryMask(int width, int height)
    : width_(width), height_(height),
      bits_(static_cast<std::size_t>(width) * height, 0) {
    check_dims(width, height);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
    check_dims(width, height);
    if (bits_.size() != static_cast<std::size_t>(width) * height) {
        throw std::invalid_argument("bit grid size does not match " +
                                    std::to_string(width) + "x" + std::to_string(height));
    }
    for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t BinaryMask::offset(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
}

std::int64_t BinaryMask::foreground_count() const {
    std::int64_t n = 0;
    for (std::uint8_t b : bits_) n += b;
    return n;
}

VideoPrediction::VideoPrediction(std::string video_id, std::vector<Frame> frames)
    : video_id_(std::move(video_id)), frames_(std::move(frames)) {
    for (std::size_t i = 0; i < frames_.size(); ++i) {
        if (frames_[i].index < 0) {
            throw std::invalid_argument("negative frame index " +
                                        std::to_string(frames_[i].index) + " in video " + video_id_);
        }
        if (i > 0 && frames_[i].index <= frames_[i - 1].index) {
            throw std::invalid_argument("frame indices not strictly increasing at index " +
                                        std::to_string(frames_[i].index) + " in video " + video_id_);
        }
        if (frames_[i].map.width() != frames_.front().map.width() ||
            frames_[i].map.height() != frames_.front().map.height()) {
            throw std::invalid_argument("frame " + std::to_string(frames_[i].index) +
                                        " dimensions differ from the rest of video " + video_id_);
        }
    }
}

const LabelMap* VideoPrediction::frame_at(int index) const {
    auto it = std::lower_bound(frames_.begin(), frames_.end(), index,
                               [](const Frame& f, int idx) { return f.index < idx; });
    if (it == frames_.end() || it->index != index) return nullptr;
    return &it->map;
}

std::vector<int> object_ids(const VideoPrediction& v) {
    std::array<bool, 256> seen{};
    for (const auto& frame : v.frames()) {
        for (std::uint8_t value : frame.map.labels()) seen[value] = true;
    }
    std::vector<int> ids;
    for (int id = 1; id < 256; ++id) {
        if (seen[id]) ids.push_back(id);
    }
    return ids;
}

BinaryMask binary_mask(const LabelMap& m, int id) {
    if (id == 0) throw std::invalid_argument("background is not an object");
    if (id < 0 || id > 255) {
        throw std::out_of_range("object identifier " + std::to_string(id) +
                                " outside the 8-bit palette range 0..255");
    }
    std::vector<std::uint8_t> bits(m.labels().size());
    const std::uint8_t wanted = static_cast<std::uint8_t>(id);
    const auto labels = m.labels();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        bits[i] = labels[i] == wanted ? 1 : 0;
    }
    return BinaryMask(m.width(), m.height(), std::move(bits));
}

bool is_valid(const BinaryMask& m, std::int64_t min_pixels) {
    if (min_pixels < 1) {
        throw std::invalid_argument("min_pixels must be at least 1");
    }
    return m.foreground_count() >= min_pixels;
}

double iou(const BinaryMask& a, const BinaryMask& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw std::invalid_argument("mask dimension mismatch: " +
                                    std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                                    " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
    }
    std::int64_t inter = 0;
    std::int64_t uni = 0;
    const auto pa = a.bits();
    const auto pb = b.bits();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        inter += pa[i] & pb[i];
        uni += pa[i] | pb[i];
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace voscascade
