#include "voscascade/manifest.hpp"

#include "voscascade/mask.hpp"
#include "voscascade/mask_io.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace voscascade {

namespace {

std::vector<std::string> video_dirs(const fs::path& root) {
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) ids.push_back(entry.path().filename().string());
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

// Structural validation only: decodable, consistent, and for pseudo
// labels gap-free frame coverage. Mask content is never judged.
bool validate_sequence(const fs::path& root, const std::string& video_id, SourceTag source,
                       ManifestEntry& entry, std::string& message) {
    VideoPrediction v;
    try {
        v = read_sequence({root, video_id});
    } catch (const std::exception& e) {
        message = e.what();
        return false;
    }
    if (source == SourceTag::pseudo) {
        const auto& frames = v.frames();
        for (std::size_t i = 1; i < frames.size(); ++i) {
            if (frames[i].index != frames[i - 1].index + 1) {
                message = "missing frame mask between " + std::to_string(frames[i - 1].index) +
                          " and " + std::to_string(frames[i].index) + " in " +
                          (root / video_id).string();
                return false;
            }
        }
    }
    entry.video_id = video_id;
    entry.masks_dir = root / video_id;
    entry.source = source;
    entry.frame_count = static_cast<int>(v.frame_count());
    entry.object_count = static_cast<int>(object_ids(v).size());
    const fs::path frames_dir = root.parent_path() / "JPEGImages" / video_id;
    if (fs::is_directory(frames_dir)) entry.frames_dir = frames_dir;
    return true;
}

void scan_root(const fs::path& root, SourceTag source, DatasetManifest& manifest) {
    for (const std::string& video_id : video_dirs(root)) {
        ManifestEntry entry;
        std::string message;
        if (validate_sequence(root, video_id, source, entry, message)) {
            manifest.entries.push_back(std::move(entry));
        } else {
            manifest.failures.push_back({video_id, source, message});
        }
    }
}

SourceCounts count_source(const DatasetManifest& m, SourceTag source) {
    SourceCounts counts;
    for (const auto& entry : m.entries) {
        if (entry.source != source) continue;
        ++counts.videos;
        const VideoPrediction v =
            read_sequence({entry.masks_dir.parent_path(), entry.video_id});
        counts.objects += static_cast<int>(object_ids(v).size());
        for (const auto& frame : v.frames()) {
            counts.masks += static_cast<std::int64_t>(frame.map.present_ids().size());
        }
    }
    return counts;
}

nlohmann::ordered_json counts_to_json(const SourceCounts& c) {
    return nlohmann::ordered_json{
        {"videos", c.videos}, {"objects", c.objects}, {"masks", c.masks}};
}

}  // namespace

DatasetManifest build_manifest(const fs::path& annotated_root, const fs::path& pseudo_root) {
    if (!fs::is_directory(annotated_root)) {
        throw std::runtime_error("annotated root not found: " + annotated_root.string());
    }
    if (!fs::is_directory(pseudo_root)) {
        throw std::runtime_error("pseudo root not found: " + pseudo_root.string());
    }

    const std::vector<std::string> annotated_ids = video_dirs(annotated_root);
    const std::vector<std::string> pseudo_ids = video_dirs(pseudo_root);
    std::vector<std::string> collisions;
    std::set_intersection(annotated_ids.begin(), annotated_ids.end(),
                          pseudo_ids.begin(), pseudo_ids.end(),
                          std::back_inserter(collisions));
    if (!collisions.empty()) {
        std::ostringstream msg;
        msg << "video_id collision between annotated and pseudo roots:";
        for (const std::string& id : collisions) msg << " " << id;
        throw std::runtime_error(msg.str());
    }

    DatasetManifest manifest;
    scan_root(annotated_root, SourceTag::annotated, manifest);
    scan_root(pseudo_root, SourceTag::pseudo, manifest);
    std::sort(manifest.entries.begin(), manifest.entries.end(),
              [](const ManifestEntry& lhs, const ManifestEntry& rhs) {
                  return std::tie(lhs.source, lhs.video_id) < std::tie(rhs.source, rhs.video_id);
              });
    return manifest;
}

ManifestStats manifest_stats(const DatasetManifest& m) {
    ManifestStats stats;
    stats.annotated = count_source(m, SourceTag::annotated);
    stats.pseudo = count_source(m, SourceTag::pseudo);
    stats.total.videos = stats.annotated.videos + stats.pseudo.videos;
    stats.total.objects = stats.annotated.objects + stats.pseudo.objects;
    stats.total.masks = stats.annotated.masks + stats.pseudo.masks;
    return stats;
}

void write_manifest(const DatasetManifest& m, const fs::path& jsonl_path) {
    std::string lines;
    for (const auto& entry : m.entries) {
        const nlohmann::ordered_json j{
            {"video_id", entry.video_id},
            {"frames_dir", entry.frames_dir.generic_string()},
            {"masks_dir", entry.masks_dir.generic_string()},
            {"source", to_string(entry.source)},
            {"frame_count", entry.frame_count},
            {"object_count", entry.object_count},
        };
        lines += j.dump();
        lines += "\n";
    }
    write_text_file(jsonl_path, lines);
}

void write_manifest_errors(const DatasetManifest& m, const fs::path& json_path) {
    nlohmann::ordered_json failures = nlohmann::ordered_json::array();
    for (const auto& failure : m.failures) {
        failures.push_back(nlohmann::ordered_json{
            {"video_id", failure.video_id},
            {"source", to_string(failure.source)},
            {"message", failure.message},
        });
    }
    const nlohmann::ordered_json doc{{"schema", 1}, {"failures", std::move(failures)}};
    write_text_file(json_path, dump_json(doc));
}

nlohmann::ordered_json stats_to_json(const ManifestStats& stats) {
    return nlohmann::ordered_json{
        {"annotated", counts_to_json(stats.annotated)},
        {"pseudo", counts_to_json(stats.pseudo)},
        {"total", counts_to_json(stats.total)},
    };
}

const char* to_string(SourceTag tag) {
    return tag == SourceTag::annotated ? "annotated" : "pseudo";
}

}  // namespace voscascade
