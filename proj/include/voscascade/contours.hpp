#pragma once

#include "voscascade/mask.hpp"

namespace voscascade {

// Contour tally for one object on one frame. External contours are the
// closed boundaries of 8-connected foreground components; hole contours
// are the boundaries of 4-connected background pockets fully enclosed
// by foreground (background touching the image border is never a hole).
struct ContourStats {
    int object_id = 0;
    int frame_index = 0;
    int external_contours = 0;
    int hole_contours = 0;
    int total_contours = 0;

    bool operator==(const ContourStats&) const = default;
};

// Whether hole boundaries participate in the noise count. The default
// mirrors hierarchy-producing contour finders (external + holes); the
// alternative counts foreground components only.
enum class ContourMode { with_holes, external_only };

ContourStats count_contours(const BinaryMask& m);

int noise_contour_count(const ContourStats& s, ContourMode mode);

// High-noise test for the wrong-tracking rule: contour count strictly
// above the threshold marks a fragmented, low-quality mask.
bool is_high_noise(const BinaryMask& m, int threshold,
                   ContourMode mode = ContourMode::with_holes);

}  // namespace voscascade
