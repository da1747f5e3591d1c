#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace voscascade {

enum class SourceTag { annotated, pseudo };

struct ManifestEntry {
    std::string video_id;
    std::filesystem::path frames_dir;  // RGB frames when present beside the masks
    std::filesystem::path masks_dir;
    SourceTag source = SourceTag::annotated;
    int frame_count = 0;
    int object_count = 0;
};

struct SequenceIssue {
    std::string video_id;
    SourceTag source = SourceTag::annotated;
    std::string message;
};

// Merged training inventory: annotated sequences plus model-generated
// pseudo-label sequences, each validated structurally. Pseudo labels are
// taken as-is, no content filtering.
struct DatasetManifest {
    std::vector<ManifestEntry> entries;    // sorted by (source, video_id)
    std::vector<SequenceIssue> failures;   // excluded sequences, with reasons
};

struct SourceCounts {
    int videos = 0;
    int objects = 0;
    std::int64_t masks = 0;  // per-frame object occurrences
};

struct ManifestStats {
    SourceCounts annotated;
    SourceCounts pseudo;
    SourceCounts total;
};

// Scans one video directory per subdirectory of each root. A video id
// appearing under both roots is a hard error; a sequence failing
// validation is excluded and reported. Pseudo sequences must cover
// every frame (no index gaps).
DatasetManifest build_manifest(const std::filesystem::path& annotated_root,
                               const std::filesystem::path& pseudo_root);

ManifestStats manifest_stats(const DatasetManifest& m);

// manifest.jsonl: one JSON entry per line, ready for streaming readers.
void write_manifest(const DatasetManifest& m, const std::filesystem::path& jsonl_path);

// manifest_errors.json: the excluded sequences and why.
void write_manifest_errors(const DatasetManifest& m, const std::filesystem::path& json_path);

nlohmann::ordered_json stats_to_json(const ManifestStats& stats);

const char* to_string(SourceTag tag);

}  // namespace voscascade
