#pragma once

#include "voscascade/contours.hpp"
#include "voscascade/mask.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace voscascade {

enum class Granularity { video, object };
enum class Source { A, B };
enum class RecordKind { agree, miss_a, miss_b, wrong };
enum class DecisionReason { miss_tracking, wrong_tracking_noise, default_source };

// Thresholds of the cascaded decision mechanism. Defaults follow the
// reference configuration: disagreement at IoU <= 0.1, rule activation
// strictly above 10 frames, fragmentation above 6 contours.
struct CascadeParams {
    double iou_threshold = 0.1;
    int miss_frame_threshold = 10;
    int wrong_frame_threshold = 10;
    int contour_noise_threshold = 6;
    std::int64_t min_pixels = 1;
    Granularity granularity = Granularity::video;
    ContourMode contour_mode = ContourMode::with_holes;

    void validate() const;
};

// Per-(frame, object) comparison of the two streams.
//   miss_a  A's mask invalid while B's is valid (and vice versa for miss_b)
//   wrong   both valid but IoU at or below the disagreement threshold
//   agree   everything else
struct DisagreementRecord {
    int frame_index = 0;
    int object_id = 0;
    RecordKind kind = RecordKind::agree;
    double iou = 1.0;

    bool operator==(const DisagreementRecord&) const = default;
};

struct CascadeDecision {
    Source source = Source::A;
    DecisionReason reason = DecisionReason::default_source;
    int miss_count_a = 0;
    int miss_count_b = 0;
    int wrong_count = 0;
    int noise_frames_a = 0;
    int noise_frames_b = 0;

    bool operator==(const CascadeDecision&) const = default;
};

struct ObjectDecision {
    int object_id = 0;
    CascadeDecision decision;

    bool operator==(const ObjectDecision&) const = default;
};

// Everything a fusion run knows about one video: the verdicts, every
// disagreement record, and the parameter snapshot that produced them.
struct FusionReport {
    std::string video_id;
    CascadeParams params;
    CascadeDecision decision;
    std::vector<ObjectDecision> object_decisions;  // object granularity only
    std::vector<DisagreementRecord> records;       // sorted (frame, object)
};

struct FusionResult {
    VideoPrediction fused;
    FusionReport report;
};

// Ascending union of the object ids present in either stream.
std::vector<int> object_ids_union(const VideoPrediction& a, const VideoPrediction& b);

// One record per (frame index in either stream, object id in either
// stream), sorted by (frame, object). A frame absent from one stream is
// that model's empty prediction.
std::vector<DisagreementRecord> classify_frames(const VideoPrediction& a,
                                                const VideoPrediction& b,
                                                const CascadeParams& params);

// Contour statistics for both models on every frame that carries a
// wrong-kind record, for every object appearing in `records`. This is
// the noise evidence consumed by the wrong-tracking rule.
std::pair<std::vector<ContourStats>, std::vector<ContourStats>>
wrong_frame_noise_stats(const VideoPrediction& a, const VideoPrediction& b,
                        std::span<const DisagreementRecord> records,
                        const CascadeParams& params);

// The cascaded rules, in priority order:
//   1. miss tracking: strictly more than miss_frame_threshold distinct
//      frames missed by one model selects the other model outright.
//   2. wrong tracking: strictly more than wrong_frame_threshold distinct
//      disagreement frames selects the model with fewer high-noise
//      frames on those disagreement frames.
//   3. otherwise stream A, the primary model.
// Ties always keep stream A.
CascadeDecision decide(std::span<const DisagreementRecord> records,
                       std::span<const ContourStats> noise_a,
                       std::span<const ContourStats> noise_b,
                       const CascadeParams& params);

// Classification, noise evidence, and decision(s) in one shot, without
// producing a fused stream. Object-level decisions are filled when the
// granularity asks for them.
FusionReport analyze(const VideoPrediction& a, const VideoPrediction& b,
                     const CascadeParams& params);

// Full video-level (or per-object) selection. The fused stream is
// always pixel-identical to one of the inputs per frame and object;
// nothing is ever synthesized.
FusionResult fuse(const VideoPrediction& a, const VideoPrediction& b,
                  const CascadeParams& params);

const char* to_string(Source s);
const char* to_string(RecordKind k);
const char* to_string(DecisionReason r);
const char* to_string(Granularity g);
const char* to_string(ContourMode m);

}  // namespace voscascade
