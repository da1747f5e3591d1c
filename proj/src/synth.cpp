#include "voscascade/synth.hpp"

#include "voscascade/mask_io.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace voscascade::synth {

namespace {

[[noreturn]] void fail(const std::string& reason) {
    throw std::runtime_error("script: " + reason);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rect bounding_box(const std::vector<Rect>& blocks) {
    Rect box = blocks.front();
    int right = box.x + box.width;
    int bottom = box.y + box.height;
    for (const Rect& r : blocks) {
        box.x = std::min(box.x, r.x);
        box.y = std::min(box.y, r.y);
        right = std::max(right, r.x + r.width);
        bottom = std::max(bottom, r.y + r.height);
    }
    box.width = right - box.x;
    box.height = bottom - box.y;
    return box;
}

// The per-(stream, object, frame) shape after injections: a list of
// rectangles, empty when dropped.
std::vector<Rect> shape_for(const FailureScript& script, TargetStream stream,
                            const ObjectScript& object, int frame) {
    std::vector<Rect> blocks = {object.rects[frame]};
    for (const Injection& inj : script.injections) {
        if (inj.target != stream || inj.object_id != object.id) continue;
        if (frame < inj.frame_begin || frame > inj.frame_end) continue;
        switch (inj.kind) {
            case InjectionKind::dropout:
                blocks.clear();
                break;
            case InjectionKind::displacement: {
                if (blocks.empty()) break;
                int dx = inj.dx;
                int dy = inj.dy;
                if (!inj.has_offset) {
                    // Far enough that the displaced and clean masks
                    // cannot overlap at all.
                    dx = bounding_box(blocks).width + 1;
                    dy = 0;
                }
                for (Rect& r : blocks) {
                    r.x += dx;
                    r.y += dy;
                }
                break;
            }
            case InjectionKind::fragmentation: {
                if (blocks.empty()) break;
                const Rect anchor = bounding_box(blocks);
                const int size = inj.piece_size;
                const int stride = size + 2;
                const int columns =
                    static_cast<int>(std::ceil(std::sqrt(static_cast<double>(inj.pieces))));
                blocks.clear();
                for (int piece = 0; piece < inj.pieces; ++piece) {
                    std::uint64_t h = splitmix64(script.seed ^ 0xf1a6u);
                    h = splitmix64(h ^ static_cast<std::uint64_t>(stream == TargetStream::A ? 1 : 2));
                    h = splitmix64(h ^ static_cast<std::uint64_t>(object.id));
                    h = splitmix64(h ^ static_cast<std::uint64_t>(frame));
                    h = splitmix64(h ^ static_cast<std::uint64_t>(piece));
                    const int jx = static_cast<int>(h & 1);
                    const int jy = static_cast<int>((h >> 1) & 1);
                    blocks.push_back({anchor.x + (piece % columns) * stride + jx,
                                      anchor.y + (piece / columns) * stride + jy,
                                      size, size});
                }
                break;
            }
        }
    }
    return blocks;
}

void paint(LabelMap& map, const std::vector<Rect>& blocks, int id) {
    for (const Rect& r : blocks) {
        for (int y = r.y; y < r.y + r.height; ++y) {
            for (int x = r.x; x < r.x + r.width; ++x) {
                map.set(x, y, static_cast<std::uint8_t>(id));
            }
        }
    }
}

void check_in_canvas(const FailureScript& script, const std::vector<Rect>& blocks,
                     const char* stream_name, int object_id, int frame) {
    for (const Rect& r : blocks) {
        if (r.x < 0 || r.y < 0 || r.x + r.width > script.canvas_width ||
            r.y + r.height > script.canvas_height) {
            fail("shape of object " + std::to_string(object_id) + " on frame " +
                 std::to_string(frame) + " of stream " + stream_name +
                 " leaves the canvas");
        }
    }
}

VideoPrediction render(const FailureScript& script, TargetStream stream, const char* name) {
    std::vector<VideoPrediction::Frame> frames;
    frames.reserve(script.video_length);
    for (int frame = 0; frame < script.video_length; ++frame) {
        LabelMap map(script.canvas_width, script.canvas_height);
        for (const ObjectScript& object : script.objects) {
            const std::vector<Rect> blocks = shape_for(script, stream, object, frame);
            check_in_canvas(script, blocks, name, object.id, frame);
            paint(map, blocks, object.id);
        }
        frames.push_back({frame, std::move(map)});
    }
    return VideoPrediction(script.video_id, std::move(frames));
}

Rect rect_from_json(const nlohmann::json& j) {
    return Rect{j.at("x").get<int>(), j.at("y").get<int>(),
                j.at("width").get<int>(), j.at("height").get<int>()};
}

}  // namespace

void FailureScript::validate() const {
    if (video_length < 1) fail("video_length must be at least 1");
    if (canvas_width < 1 || canvas_height < 1) fail("canvas must be at least 1x1");
    std::set<int> ids;
    for (const ObjectScript& object : objects) {
        if (object.id < 1 || object.id > 255) {
            fail("object id " + std::to_string(object.id) + " outside 1..255");
        }
        if (!ids.insert(object.id).second) {
            fail("duplicate object id " + std::to_string(object.id));
        }
        if (static_cast<int>(object.rects.size()) != video_length) {
            fail("object " + std::to_string(object.id) + " has " +
                 std::to_string(object.rects.size()) + " rectangles for " +
                 std::to_string(video_length) + " frames");
        }
        for (int frame = 0; frame < video_length; ++frame) {
            const Rect& r = object.rects[frame];
            if (r.width < 1 || r.height < 1) {
                fail("object " + std::to_string(object.id) + " has an empty rectangle on frame " +
                     std::to_string(frame));
            }
            if (r.x < 0 || r.y < 0 || r.x + r.width > canvas_width ||
                r.y + r.height > canvas_height) {
                fail("out-of-canvas trajectory: object " + std::to_string(object.id) +
                     " frame " + std::to_string(frame));
            }
        }
    }
    for (const Injection& inj : injections) {
        if (!ids.contains(inj.object_id)) {
            fail("injection references unknown object " + std::to_string(inj.object_id));
        }
        if (inj.frame_begin < 0 || inj.frame_end >= video_length ||
            inj.frame_begin > inj.frame_end) {
            fail("injection frame range " + std::to_string(inj.frame_begin) + ".." +
                 std::to_string(inj.frame_end) + " outside 0.." +
                 std::to_string(video_length - 1));
        }
        if (inj.kind == InjectionKind::fragmentation) {
            if (inj.pieces < 1) fail("fragmentation needs at least 1 piece");
            if (inj.piece_size < 1) fail("fragmentation piece_size must be at least 1");
        }
    }
}

SynthResult generate(const FailureScript& script) {
    script.validate();
    FailureScript clean = script;
    clean.injections.clear();

    SynthResult result;
    result.gt = render(clean, TargetStream::A, "gt");
    result.a = render(script, TargetStream::A, "A");
    result.b = render(script, TargetStream::B, "B");
    return result;
}

FailureScript script_from_json(const nlohmann::json& j) {
    FailureScript script;
    script.video_id = j.value("video_id", std::string("synth"));
    script.video_length = j.at("video_length").get<int>();
    script.canvas_width = j.at("canvas").at("width").get<int>();
    script.canvas_height = j.at("canvas").at("height").get<int>();
    script.seed = j.value("seed", std::uint64_t{0});

    for (const auto& obj : j.value("objects", nlohmann::json::array())) {
        ObjectScript object;
        object.id = obj.at("id").get<int>();
        if (obj.contains("rects")) {
            for (const auto& r : obj.at("rects")) object.rects.push_back(rect_from_json(r));
        } else {
            const Rect start = rect_from_json(obj.at("start"));
            int dx = 0;
            int dy = 0;
            if (obj.contains("velocity")) {
                dx = obj.at("velocity").value("dx", 0);
                dy = obj.at("velocity").value("dy", 0);
            }
            for (int frame = 0; frame < script.video_length; ++frame) {
                object.rects.push_back(
                    {start.x + frame * dx, start.y + frame * dy, start.width, start.height});
            }
        }
        script.objects.push_back(std::move(object));
    }

    for (const auto& inj : j.value("injections", nlohmann::json::array())) {
        Injection injection;
        const std::string target = inj.at("target").get<std::string>();
        if (target == "A") injection.target = TargetStream::A;
        else if (target == "B") injection.target = TargetStream::B;
        else fail("injection target must be \"A\" or \"B\", got \"" + target + "\"");

        const std::string kind = inj.at("kind").get<std::string>();
        if (kind == "dropout") injection.kind = InjectionKind::dropout;
        else if (kind == "displacement") injection.kind = InjectionKind::displacement;
        else if (kind == "fragmentation") injection.kind = InjectionKind::fragmentation;
        else fail("unknown injection kind \"" + kind + "\"");

        injection.object_id = inj.at("object").get<int>();
        injection.frame_begin = inj.at("frames").at("begin").get<int>();
        injection.frame_end = inj.at("frames").at("end").get<int>();
        if (inj.contains("offset")) {
            injection.has_offset = true;
            injection.dx = inj.at("offset").value("dx", 0);
            injection.dy = inj.at("offset").value("dy", 0);
        }
        injection.pieces = inj.value("pieces", 0);
        injection.piece_size = inj.value("piece_size", 2);
        script.injections.push_back(injection);
    }

    script.validate();
    return script;
}

FailureScript load_script(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = read_file_bytes(path);
    const nlohmann::json parsed =
        nlohmann::json::parse(bytes.begin(), bytes.end());  // throws with byte position
    return script_from_json(parsed);
}

}  // namespace voscascade::synth
