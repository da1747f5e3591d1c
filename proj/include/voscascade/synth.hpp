#pragma once

#include "voscascade/mask.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace voscascade::synth {

struct Rect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    bool operator==(const Rect&) const = default;
};

// One object's axis-aligned rectangle per frame. Rectangles keep IoU
// and contour counts analytically checkable, so every generated fixture
// doubles as its own oracle.
struct ObjectScript {
    int id = 0;
    std::vector<Rect> rects;  // exactly one per frame
};

enum class TargetStream { A, B };
enum class InjectionKind { dropout, displacement, fragmentation };

// A failure pattern applied to one object of one stream over an
// inclusive frame range.
//   dropout        erases the object's pixels (miss-tracking material)
//   displacement   translates the shape; default offset width+1 makes
//                  the result provably disjoint from the clean mask
//   fragmentation  replaces the shape with `pieces` separated blocks of
//                  piece_size^2 pixels, one contour each
struct Injection {
    TargetStream target = TargetStream::A;
    InjectionKind kind = InjectionKind::dropout;
    int object_id = 0;
    int frame_begin = 0;
    int frame_end = 0;
    bool has_offset = false;
    int dx = 0;
    int dy = 0;
    int pieces = 0;
    int piece_size = 2;
};

struct FailureScript {
    std::string video_id = "synth";
    int video_length = 0;
    int canvas_width = 0;
    int canvas_height = 0;
    std::uint64_t seed = 0;
    std::vector<ObjectScript> objects;
    std::vector<Injection> injections;

    void validate() const;
};

struct SynthResult {
    VideoPrediction gt;
    VideoPrediction a;
    VideoPrediction b;
};

// Renders ground truth plus both degraded streams. Fully deterministic:
// identical scripts reproduce identical pixel grids.
SynthResult generate(const FailureScript& script);

FailureScript script_from_json(const nlohmann::json& j);
FailureScript load_script(const std::filesystem::path& path);

}  // namespace voscascade::synth
