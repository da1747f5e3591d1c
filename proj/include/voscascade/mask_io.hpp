#pragma once

#include "voscascade/cascade.hpp"
#include "voscascade/mask.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace voscascade {

// On-disk layout of one mask sequence: <root>/<video_id>/<stem>.png with
// zero-padded numeric stems, the distribution layout of the common VOS
// benchmarks.
struct SequenceLayout {
    std::filesystem::path root;
    std::string video_id;
    int stem_width = 5;

    std::filesystem::path dir() const { return root / video_id; }
};

// Decodes a full sequence. Frame indices come from the numeric file
// stems, never from listing order. Each failure mode reports the
// offending path: unreadable file, non-indexed image, inconsistent
// dimensions, duplicate or non-numeric stem, empty directory.
VideoPrediction read_sequence(const SequenceLayout& layout);

// One 8-bit indexed-palette PNG per frame; reading the result back
// reproduces the prediction bit-exactly.
void write_sequence(const VideoPrediction& v, const SequenceLayout& layout);

// Report serialization is byte-deterministic: ordered keys, fixed layout.
nlohmann::ordered_json params_to_json(const CascadeParams& p);
nlohmann::ordered_json decision_to_json(const CascadeDecision& d);
nlohmann::ordered_json report_to_json(const FusionReport& r);

std::string dump_json(const nlohmann::ordered_json& j);

void write_report(const FusionReport& r, const std::filesystem::path& path);

// Whole-file helpers shared by the report and manifest writers.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace voscascade
