#include "voscascade/cascade.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <stdexcept>

namespace voscascade {

namespace {

struct FramePixelTallies {
    std::array<std::int64_t, 256> count_a{};
    std::array<std::int64_t, 256> count_b{};
    std::array<std::int64_t, 256> intersection{};
};

// Single pass over a frame pair collects per-id pixel counts and the
// per-id intersection for every object at once.
FramePixelTallies tally_frame(const LabelMap* a, const LabelMap* b) {
    FramePixelTallies t;
    if (a != nullptr && b != nullptr) {
        const auto la = a->labels();
        const auto lb = b->labels();
        for (std::size_t i = 0; i < la.size(); ++i) {
            ++t.count_a[la[i]];
            ++t.count_b[lb[i]];
            if (la[i] == lb[i]) ++t.intersection[la[i]];
        }
    } else if (a != nullptr) {
        for (std::uint8_t v : a->labels()) ++t.count_a[v];
    } else if (b != nullptr) {
        for (std::uint8_t v : b->labels()) ++t.count_b[v];
    }
    return t;
}

std::vector<int> sorted_frame_union(const VideoPrediction& a, const VideoPrediction& b) {
    std::vector<int> indices;
    indices.reserve(a.frame_count() + b.frame_count());
    for (const auto& f : a.frames()) indices.push_back(f.index);
    for (const auto& f : b.frames()) indices.push_back(f.index);
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    return indices;
}

void check_pair(const VideoPrediction& a, const VideoPrediction& b) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("empty inputs: both prediction streams need at least one frame");
    }
    if (a.width() != b.width() || a.height() != b.height()) {
        throw std::invalid_argument("prediction dimension mismatch: " +
                                    std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                                    " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
    }
}

std::vector<int> distinct_frames_with(std::span<const DisagreementRecord> records,
                                      RecordKind kind) {
    std::vector<int> frames;
    for (const auto& r : records) {
        if (r.kind == kind) frames.push_back(r.frame_index);
    }
    std::sort(frames.begin(), frames.end());
    frames.erase(std::unique(frames.begin(), frames.end()), frames.end());
    return frames;
}

ContourStats stats_for(const VideoPrediction& v, int frame_index, int object_id) {
    ContourStats stats;
    if (const LabelMap* map = v.frame_at(frame_index); map != nullptr) {
        stats = count_contours(binary_mask(*map, object_id));
    }
    stats.frame_index = frame_index;
    stats.object_id = object_id;
    return stats;
}

using NoiseLookup = std::map<std::pair<int, int>, int>;

NoiseLookup build_noise_lookup(std::span<const ContourStats> stats, ContourMode mode) {
    NoiseLookup lookup;
    for (const auto& s : stats) {
        lookup[{s.frame_index, s.object_id}] = noise_contour_count(s, mode);
    }
    return lookup;
}

bool frame_is_high_noise(const NoiseLookup& lookup, int frame_index,
                         const std::set<int>& scope, int threshold) {
    for (int object : scope) {
        auto it = lookup.find({frame_index, object});
        if (it != lookup.end() && it->second > threshold) return true;
    }
    return false;
}

}  // namespace

void CascadeParams::validate() const {
    if (iou_threshold < 0.0 || iou_threshold > 1.0) {
        throw std::invalid_argument("iou_threshold must lie in [0, 1]");
    }
    if (miss_frame_threshold < 1 || wrong_frame_threshold < 1 ||
        contour_noise_threshold < 1 || min_pixels < 1) {
        throw std::invalid_argument("cascade thresholds must be at least 1");
    }
}

std::vector<int> object_ids_union(const VideoPrediction& a, const VideoPrediction& b) {
    const std::vector<int> ids_a = object_ids(a);
    const std::vector<int> ids_b = object_ids(b);
    std::vector<int> ids;
    std::set_union(ids_a.begin(), ids_a.end(), ids_b.begin(), ids_b.end(),
                   std::back_inserter(ids));
    return ids;
}

std::vector<DisagreementRecord> classify_frames(const VideoPrediction& a,
                                                const VideoPrediction& b,
                                                const CascadeParams& params) {
    params.validate();
    check_pair(a, b);

    const std::vector<int> frames = sorted_frame_union(a, b);
    const std::vector<int> objects = object_ids_union(a, b);

    std::vector<DisagreementRecord> records;
    records.reserve(frames.size() * objects.size());
    for (int frame : frames) {
        const FramePixelTallies t = tally_frame(a.frame_at(frame), b.frame_at(frame));
        for (int object : objects) {
            const std::int64_t na = t.count_a[object];
            const std::int64_t nb = t.count_b[object];
            const std::int64_t inter = t.intersection[object];
            const std::int64_t uni = na + nb - inter;
            const double overlap = uni == 0 ? 1.0
                                            : static_cast<double>(inter) / static_cast<double>(uni);
            const bool valid_a = na >= params.min_pixels;
            const bool valid_b = nb >= params.min_pixels;

            RecordKind kind = RecordKind::agree;
            if (!valid_a && valid_b) {
                kind = RecordKind::miss_a;
            } else if (valid_a && !valid_b) {
                kind = RecordKind::miss_b;
            } else if (valid_a && valid_b && overlap <= params.iou_threshold) {
                kind = RecordKind::wrong;
            }
            records.push_back({frame, object, kind, overlap});
        }
    }
    return records;
}

std::pair<std::vector<ContourStats>, std::vector<ContourStats>>
wrong_frame_noise_stats(const VideoPrediction& a, const VideoPrediction& b,
                        std::span<const DisagreementRecord> records,
                        const CascadeParams& params) {
    params.validate();
    const std::vector<int> wrong_frames =
        distinct_frames_with(records, RecordKind::wrong);
    std::set<int> scope;
    for (const auto& r : records) scope.insert(r.object_id);

    std::vector<ContourStats> noise_a;
    std::vector<ContourStats> noise_b;
    noise_a.reserve(wrong_frames.size() * scope.size());
    noise_b.reserve(wrong_frames.size() * scope.size());
    for (int frame : wrong_frames) {
        for (int object : scope) {
            noise_a.push_back(stats_for(a, frame, object));
            noise_b.push_back(stats_for(b, frame, object));
        }
    }
    return {std::move(noise_a), std::move(noise_b)};
}

CascadeDecision decide(std::span<const DisagreementRecord> records,
                       std::span<const ContourStats> noise_a,
                       std::span<const ContourStats> noise_b,
                       const CascadeParams& params) {
    params.validate();

    CascadeDecision decision;
    decision.miss_count_a = static_cast<int>(distinct_frames_with(records, RecordKind::miss_a).size());
    decision.miss_count_b = static_cast<int>(distinct_frames_with(records, RecordKind::miss_b).size());
    const std::vector<int> wrong_frames = distinct_frames_with(records, RecordKind::wrong);
    decision.wrong_count = static_cast<int>(wrong_frames.size());

    // Miss tracking outranks everything: pick the stream that keeps
    // producing valid masks, the smaller miss count when both fail.
    if (std::max(decision.miss_count_a, decision.miss_count_b) > params.miss_frame_threshold) {
        decision.source = decision.miss_count_a <= decision.miss_count_b ? Source::A : Source::B;
        decision.reason = DecisionReason::miss_tracking;
        return decision;
    }

    if (decision.wrong_count > params.wrong_frame_threshold) {
        std::set<int> scope;
        for (const auto& r : records) scope.insert(r.object_id);
        const NoiseLookup lookup_a = build_noise_lookup(noise_a, params.contour_mode);
        const NoiseLookup lookup_b = build_noise_lookup(noise_b, params.contour_mode);
        for (int frame : wrong_frames) {
            if (frame_is_high_noise(lookup_a, frame, scope, params.contour_noise_threshold)) {
                ++decision.noise_frames_a;
            }
            if (frame_is_high_noise(lookup_b, frame, scope, params.contour_noise_threshold)) {
                ++decision.noise_frames_b;
            }
        }
        decision.source =
            decision.noise_frames_a <= decision.noise_frames_b ? Source::A : Source::B;
        decision.reason = DecisionReason::wrong_tracking_noise;
        return decision;
    }

    decision.source = Source::A;
    decision.reason = DecisionReason::default_source;
    return decision;
}

namespace {

// Paint each object from its chosen stream, ascending ids, later ids
// overwriting earlier ones where composed objects overlap.
VideoPrediction compose_streams(const VideoPrediction& a, const VideoPrediction& b,
                                const std::vector<ObjectDecision>& choices) {
    const int w = a.width();
    const int h = a.height();
    std::vector<VideoPrediction::Frame> frames;
    for (int frame : sorted_frame_union(a, b)) {
        LabelMap composed(w, h);
        for (const auto& [object, decision] : choices) {
            const VideoPrediction& source = decision.source == Source::A ? a : b;
            const LabelMap* map = source.frame_at(frame);
            if (map == nullptr) continue;
            const auto labels = map->labels();
            const std::uint8_t id = static_cast<std::uint8_t>(object);
            for (std::size_t i = 0; i < labels.size(); ++i) {
                if (labels[i] == id) composed.data()[i] = id;
            }
        }
        frames.push_back({frame, std::move(composed)});
    }
    return VideoPrediction(a.video_id(), std::move(frames));
}

}  // namespace

FusionReport analyze(const VideoPrediction& a, const VideoPrediction& b,
                     const CascadeParams& params) {
    params.validate();
    check_pair(a, b);

    FusionReport report;
    report.video_id = a.video_id();
    report.params = params;
    report.records = classify_frames(a, b, params);
    const auto [noise_a, noise_b] = wrong_frame_noise_stats(a, b, report.records, params);
    report.decision = decide(report.records, noise_a, noise_b, params);

    if (params.granularity == Granularity::object) {
        for (int object : object_ids_union(a, b)) {
            std::vector<DisagreementRecord> object_records;
            for (const auto& r : report.records) {
                if (r.object_id == object) object_records.push_back(r);
            }
            report.object_decisions.push_back(
                {object, decide(object_records, noise_a, noise_b, params)});
        }
    }
    return report;
}

FusionResult fuse(const VideoPrediction& a, const VideoPrediction& b,
                  const CascadeParams& params) {
    FusionReport report = analyze(a, b, params);
    if (params.granularity == Granularity::video) {
        return {report.decision.source == Source::A ? a : b, std::move(report)};
    }
    VideoPrediction fused = compose_streams(a, b, report.object_decisions);
    return {std::move(fused), std::move(report)};
}

const char* to_string(Source s) {
    return s == Source::A ? "A" : "B";
}

const char* to_string(RecordKind k) {
    switch (k) {
        case RecordKind::agree: return "agree";
        case RecordKind::miss_a: return "miss_a";
        case RecordKind::miss_b: return "miss_b";
        case RecordKind::wrong: return "wrong";
    }
    return "agree";
}

const char* to_string(DecisionReason r) {
    switch (r) {
        case DecisionReason::miss_tracking: return "miss_tracking";
        case DecisionReason::wrong_tracking_noise: return "wrong_tracking_noise";
        case DecisionReason::default_source: return "default";
    }
    return "default";
}

const char* to_string(Granularity g) {
    return g == Granularity::video ? "video" : "object";
}

const char* to_string(ContourMode m) {
    return m == ContourMode::with_holes ? "with-holes" : "external-only";
}

}  // namespace voscascade
