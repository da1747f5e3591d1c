#include "voscascade/mask_io.hpp"

#include "voscascade/png_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace voscascade {

namespace {

[[noreturn]] void fail(const std::string& reason, const fs::path& path) {
    throw std::runtime_error(reason + ": " + path.string());
}

bool numeric_stem(const std::string& stem) {
    if (stem.empty()) return false;
    return std::all_of(stem.begin(), stem.end(),
                       [](unsigned char c) { return std::isdigit(c) != 0; });
}

std::string frame_file_name(int index, int stem_width) {
    std::string digits = std::to_string(index);
    if (static_cast<int>(digits.size()) < stem_width) {
        digits.insert(0, stem_width - digits.size(), '0');
    }
    return digits + ".png";
}

}  // namespace

VideoPrediction read_sequence(const SequenceLayout& layout) {
    const fs::path dir = layout.dir();
    if (!fs::is_directory(dir)) fail("sequence directory not found", dir);

    std::vector<std::pair<int, fs::path>> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const fs::path& path = entry.path();
        if (path.extension() != ".png") continue;
        const std::string stem = path.stem().string();
        if (!numeric_stem(stem) || stem.size() > 9) {
            fail("frame file stem is not a frame number", path);
        }
        files.emplace_back(std::stoi(stem), path);
    }
    if (files.empty()) fail("no frames found", dir);

    std::sort(files.begin(), files.end());
    for (std::size_t i = 1; i < files.size(); ++i) {
        if (files[i].first == files[i - 1].first) {
            fail("duplicate frame index " + std::to_string(files[i].first),
                 files[i].second);
        }
    }

    std::vector<VideoPrediction::Frame> frames;
    frames.reserve(files.size());
    for (const auto& [index, path] : files) {
        png::IndexedImage img;
        try {
            img = png::decode_indexed(read_file_bytes(path));
        } catch (const std::exception& e) {
            fail(e.what(), path);
        }
        if (!frames.empty() && (img.width != frames.front().map.width() ||
                                img.height != frames.front().map.height())) {
            fail("frame dimensions " + std::to_string(img.width) + "x" +
                     std::to_string(img.height) + " differ from " +
                     std::to_string(frames.front().map.width()) + "x" +
                     std::to_string(frames.front().map.height()),
                 path);
        }
        frames.push_back({index, LabelMap(img.width, img.height, std::move(img.pixels))});
    }
    return VideoPrediction(layout.video_id, std::move(frames));
}

void write_sequence(const VideoPrediction& v, const SequenceLayout& layout) {
    const fs::path dir = layout.dir();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail("cannot create sequence directory", dir);

    for (const auto& frame : v.frames()) {
        png::IndexedImage img;
        img.width = frame.map.width();
        img.height = frame.map.height();
        img.pixels.assign(frame.map.labels().begin(), frame.map.labels().end());
        write_file_bytes(dir / frame_file_name(frame.index, layout.stem_width),
                         png::encode_indexed(img));
    }
}

nlohmann::ordered_json params_to_json(const CascadeParams& p) {
    return nlohmann::ordered_json{
        {"iou_threshold", p.iou_threshold},
        {"miss_frame_threshold", p.miss_frame_threshold},
        {"wrong_frame_threshold", p.wrong_frame_threshold},
        {"contour_noise_threshold", p.contour_noise_threshold},
        {"min_pixels", p.min_pixels},
        {"granularity", to_string(p.granularity)},
        {"contour_mode", to_string(p.contour_mode)},
    };
}

nlohmann::ordered_json decision_to_json(const CascadeDecision& d) {
    return nlohmann::ordered_json{
        {"source", to_string(d.source)},
        {"reason", to_string(d.reason)},
        {"miss_count_a", d.miss_count_a},
        {"miss_count_b", d.miss_count_b},
        {"wrong_count", d.wrong_count},
        {"noise_frames_a", d.noise_frames_a},
        {"noise_frames_b", d.noise_frames_b},
    };
}

nlohmann::ordered_json report_to_json(const FusionReport& r) {
    nlohmann::ordered_json object_decisions = nlohmann::ordered_json::array();
    for (const auto& [object, decision] : r.object_decisions) {
        nlohmann::ordered_json entry{{"object", object}};
        const nlohmann::ordered_json fields = decision_to_json(decision);
        for (const auto& [key, value] : fields.items()) {
            entry[key] = value;
        }
        object_decisions.push_back(std::move(entry));
    }
    nlohmann::ordered_json records = nlohmann::ordered_json::array();
    for (const auto& rec : r.records) {
        records.push_back(nlohmann::ordered_json{
            {"frame", rec.frame_index},
            {"object", rec.object_id},
            {"kind", to_string(rec.kind)},
            {"iou", rec.iou},
        });
    }
    return nlohmann::ordered_json{
        {"schema", 1},
        {"video_id", r.video_id},
        {"parameters", params_to_json(r.params)},
        {"decision", decision_to_json(r.decision)},
        {"object_decisions", std::move(object_decisions)},
        {"records", std::move(records)},
    };
}

std::string dump_json(const nlohmann::ordered_json& j) {
    return j.dump(2) + "\n";
}

void write_report(const FusionReport& r, const fs::path& path) {
    write_text_file(path, dump_json(report_to_json(r)));
}

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open file", path);
    std::vector<std::uint8_t> bytes;
    in.seekg(0, std::ios::end);
    bytes.resize(static_cast<std::size_t>(in.tellg()));
    in.seekg(0, std::ios::beg);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) fail("cannot read file", path);
    return bytes;
}

void write_file_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot open file for writing", path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) fail("cannot write file", path);
}

void write_text_file(const fs::path& path, const std::string& text) {
    write_file_bytes(path, std::span<const std::uint8_t>(
                               reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace voscascade
