#pragma once

#include "voscascade/mask.hpp"

#include <map>
#include <span>
#include <utility>
#include <vector>

namespace voscascade {

struct ObjectScore {
    double j = 0.0;
    double f = 0.0;
};

struct FrameObjectScore {
    int frame_index = 0;
    int object_id = 0;
    double j = 0.0;
    double f = 0.0;
};

// Region similarity J, contour accuracy F, and their mean. Aggregates
// are means over object tracks; per_frame carries the raw detail.
struct MetricScores {
    double j_mean = 0.0;
    double f_mean = 0.0;
    double jf = 0.0;
    std::map<int, ObjectScore> per_object;
    std::vector<FrameObjectScore> per_frame;
};

struct ScoreOptions {
    int tolerance_px = -1;           // < 0: ceil(0.008 * image diagonal)
    bool include_first_frame = false;  // first frame is the given prompt
};

// Boundary-matching tolerance used by the standard benchmark protocol.
int default_boundary_tolerance(int width, int height);

// Foreground pixels that touch background through a 4-neighbour or lie
// on the image border.
BinaryMask boundary_pixels(const BinaryMask& m);

// J: plain IoU with the empty-mask conventions of the benchmark tooling
// (both empty -> 1, prediction on an absent object -> 0).
double region_j(const BinaryMask& pred, const BinaryMask& gt);

// F: precision/recall over boundary pixels matched within a Euclidean
// distance tolerance, combined as 2PR/(P+R). Both boundaries empty -> 1.
double boundary_f(const BinaryMask& pred, const BinaryMask& gt, int tolerance_px);

// Per-object J/F averaged over evaluated frames, then averaged over the
// ground-truth object set. Frame index sets and dimensions must match.
MetricScores score_video(const VideoPrediction& pred, const VideoPrediction& gt,
                         const ScoreOptions& options = {});

// Unweighted mean over per-object track scores pooled across videos.
MetricScores aggregate_objects(std::span<const MetricScores> videos);

MetricScores score_dataset(std::span<const std::pair<VideoPrediction, VideoPrediction>> pairs,
                           const ScoreOptions& options = {});

}  // namespace voscascade
