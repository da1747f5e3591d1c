#include "voscascade/cascade.hpp"
#include "voscascade/manifest.hpp"
#include "voscascade/mask_io.hpp"
#include "voscascade/metrics.hpp"
#include "voscascade/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace voscascade;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int default_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Fixed-order work distribution: slot i of the result vector always
// belongs to input i, so thread count never affects output bytes.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    threads = std::max(1, std::min<int>(threads, static_cast<int>(count)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& worker : pool) worker.join();
}

std::vector<std::string> list_videos(const fs::path& root) {
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory() && entry.path().filename().string().front() != '.') {
            ids.push_back(entry.path().filename().string());
        }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

void require_dir(const fs::path& path, const std::string& what) {
    if (!fs::is_directory(path)) {
        throw UsageError(what + " is not a directory: " + path.string());
    }
}

void require_parent(const fs::path& path, const std::string& what) {
    const fs::path parent = path.has_parent_path() ? path.parent_path() : fs::path(".");
    if (!fs::is_directory(parent)) {
        throw UsageError("parent directory of " + what + " does not exist: " + parent.string());
    }
}

// Staged write: produce everything under a dot-prefixed sibling, then
// rename into place so a failed video never leaves partial output.
class StagedDir {
public:
    StagedDir(fs::path final_dir)
        : final_(std::move(final_dir)),
          tmp_(final_.parent_path() / ("." + final_.filename().string() + ".tmp")) {
        fs::remove_all(tmp_);
        fs::create_directories(tmp_);
    }

    ~StagedDir() {
        if (!committed_) {
            std::error_code ec;
            fs::remove_all(tmp_, ec);
        }
    }

    const fs::path& path() const { return tmp_; }

    void commit() {
        fs::remove_all(final_);
        fs::rename(tmp_, final_);
        committed_ = true;
    }

private:
    fs::path final_;
    fs::path tmp_;
    bool committed_ = false;
};

void add_cascade_flags(CLI::App* cmd, CascadeParams& params, std::string& granularity,
                       std::string& contour_mode) {
    cmd->add_option("--iou-threshold", params.iou_threshold,
                    "Disagreement when IoU is at or below this value")
        ->capture_default_str();
    cmd->add_option("--miss-frames", params.miss_frame_threshold,
                    "Miss-tracking rule fires strictly above this many missed frames")
        ->capture_default_str();
    cmd->add_option("--wrong-frames", params.wrong_frame_threshold,
                    "Wrong-tracking rule fires strictly above this many disagreement frames")
        ->capture_default_str();
    cmd->add_option("--noise-contours", params.contour_noise_threshold,
                    "High-noise when a mask has strictly more contours than this")
        ->capture_default_str();
    cmd->add_option("--min-pixels", params.min_pixels,
                    "Minimum foreground pixels for a mask to count as valid")
        ->capture_default_str();
    cmd->add_option("--granularity", granularity, "Selection granularity")
        ->check(CLI::IsMember({"video", "object"}))
        ->capture_default_str();
    cmd->add_option("--contours", contour_mode, "Contours counted toward the noise rule")
        ->check(CLI::IsMember({"with-holes", "external-only"}))
        ->capture_default_str();
}

void finish_params(CascadeParams& params, const std::string& granularity,
                   const std::string& contour_mode) {
    params.granularity = granularity == "object" ? Granularity::object : Granularity::video;
    params.contour_mode = contour_mode == "external-only" ? ContourMode::external_only
                                                          : ContourMode::with_holes;
    params.validate();
}

struct VideoOutcome {
    std::string video_id;
    std::string status;  // fused | copied | ok | error
    std::string copied_from;
    std::string message;
    FusionReport report;
    bool has_report = false;
};

int cmd_fuse(const fs::path& a_root, const fs::path& b_root, const fs::path& out_root,
             const CascadeParams& params, int threads) {
    require_dir(a_root, "stream A root");
    require_dir(b_root, "stream B root");
    require_parent(out_root, "output root");
    fs::create_directories(out_root);
    fs::create_directories(out_root / "reports");

    const std::vector<std::string> videos_a = list_videos(a_root);
    const std::vector<std::string> videos_b = list_videos(b_root);
    std::vector<std::string> videos;
    std::set_union(videos_a.begin(), videos_a.end(), videos_b.begin(), videos_b.end(),
                   std::back_inserter(videos));
    if (videos.empty()) throw UsageError("no video directories found under the input roots");

    std::vector<VideoOutcome> outcomes(videos.size());
    parallel_for(videos.size(), threads, [&](std::size_t i) {
        const std::string& video = videos[i];
        VideoOutcome& outcome = outcomes[i];
        outcome.video_id = video;
        const bool in_a = std::binary_search(videos_a.begin(), videos_a.end(), video);
        const bool in_b = std::binary_search(videos_b.begin(), videos_b.end(), video);
        try {
            if (in_a && in_b) {
                const VideoPrediction a = read_sequence({a_root, video});
                const VideoPrediction b = read_sequence({b_root, video});
                FusionResult result = fuse(a, b, params);
                StagedDir staged(out_root / video);
                write_sequence(result.fused, {staged.path().parent_path(),
                                              staged.path().filename().string()});
                staged.commit();
                write_report(result.report, out_root / "reports" / (video + ".json"));
                outcome.status = "fused";
                outcome.report = std::move(result.report);
                outcome.has_report = true;
            } else {
                const fs::path source = (in_a ? a_root : b_root) / video;
                StagedDir staged(out_root / video);
                fs::copy(source, staged.path(),
                         fs::copy_options::recursive | fs::copy_options::overwrite_existing);
                staged.commit();
                outcome.status = "copied";
                outcome.copied_from = in_a ? "A" : "B";
            }
        } catch (const std::exception& e) {
            outcome.status = "error";
            outcome.message = e.what();
        }
    });

    ordered_json video_entries = ordered_json::array();
    int errors = 0;
    for (const VideoOutcome& outcome : outcomes) {
        ordered_json entry{{"video_id", outcome.video_id}, {"status", outcome.status}};
        if (outcome.status == "copied") {
            entry["copied_from"] = outcome.copied_from;
        } else if (outcome.status == "error") {
            entry["message"] = outcome.message;
            ++errors;
            std::cerr << "error: " << outcome.video_id << ": " << outcome.message << "\n";
        } else if (outcome.has_report) {
            entry["decision"] = decision_to_json(outcome.report.decision);
            std::cout << outcome.video_id << ": source=" << to_string(outcome.report.decision.source)
                      << " reason=" << to_string(outcome.report.decision.reason) << "\n";
        }
        video_entries.push_back(std::move(entry));
    }
    const ordered_json summary{{"schema", 1},
                               {"parameters", params_to_json(params)},
                               {"errors", errors},
                               {"videos", std::move(video_entries)}};
    write_text_file(out_root / "fusion_summary.json", dump_json(summary));
    return errors == 0 ? kExitOk : kExitFailure;
}

int cmd_evaluate(const fs::path& pred_root, const fs::path& gt_root, const fs::path& out_path,
                 const ScoreOptions& options, int threads) {
    require_dir(pred_root, "prediction root");
    require_dir(gt_root, "ground-truth root");
    require_parent(out_path, "output file");

    const std::vector<std::string> videos = list_videos(gt_root);
    if (videos.empty()) throw UsageError("no video directories found under " + gt_root.string());

    struct Scored {
        MetricScores scores;
        std::string error;
    };
    std::vector<Scored> results(videos.size());
    parallel_for(videos.size(), threads, [&](std::size_t i) {
        try {
            const VideoPrediction gt = read_sequence({gt_root, videos[i]});
            const VideoPrediction pred = read_sequence({pred_root, videos[i]});
            results[i].scores = score_video(pred, gt, options);
        } catch (const std::exception& e) {
            results[i].error = e.what();
        }
    });

    std::vector<MetricScores> scored;
    ordered_json per_video = ordered_json::object();
    ordered_json per_object = ordered_json::object();
    ordered_json errors = ordered_json::array();
    for (std::size_t i = 0; i < videos.size(); ++i) {
        if (!results[i].error.empty()) {
            errors.push_back(ordered_json{{"video_id", videos[i]}, {"message", results[i].error}});
            std::cerr << "error: " << videos[i] << ": " << results[i].error << "\n";
            continue;
        }
        const MetricScores& s = results[i].scores;
        scored.push_back(s);
        per_video[videos[i]] = ordered_json{{"J", s.j_mean}, {"F", s.f_mean}, {"JF", s.jf}};
        for (const auto& [object, object_score] : s.per_object) {
            per_object[videos[i] + "/" + std::to_string(object)] =
                ordered_json{{"J", object_score.j}, {"F", object_score.f},
                             {"JF", (object_score.j + object_score.f) / 2.0}};
        }
    }

    const MetricScores global = aggregate_objects(scored);
    const ordered_json doc{{"schema", 1},
                           {"global", ordered_json{{"J", global.j_mean},
                                                   {"F", global.f_mean},
                                                   {"JF", global.jf}}},
                           {"per_video", std::move(per_video)},
                           {"per_object", std::move(per_object)},
                           {"errors", std::move(errors)}};
    const std::string text = dump_json(doc);
    std::cout << text;
    write_text_file(out_path, text);
    return doc["errors"].empty() ? kExitOk : kExitFailure;
}

int cmd_diagnose(const fs::path& a_root, const fs::path& b_root, const std::string& only_video,
                 const fs::path& out_path, const CascadeParams& params, int threads) {
    require_dir(a_root, "stream A root");
    require_dir(b_root, "stream B root");
    if (!out_path.empty()) require_parent(out_path, "output file");

    const std::vector<std::string> videos_a = list_videos(a_root);
    const std::vector<std::string> videos_b = list_videos(b_root);
    std::vector<std::string> videos;
    std::set_intersection(videos_a.begin(), videos_a.end(), videos_b.begin(), videos_b.end(),
                          std::back_inserter(videos));
    if (!only_video.empty()) {
        if (!std::binary_search(videos.begin(), videos.end(), only_video)) {
            throw UsageError("video " + only_video + " not present under both roots");
        }
        videos = {only_video};
    }
    if (videos.empty()) throw UsageError("no common video directories under the input roots");

    std::vector<VideoOutcome> outcomes(videos.size());
    parallel_for(videos.size(), threads, [&](std::size_t i) {
        VideoOutcome& outcome = outcomes[i];
        outcome.video_id = videos[i];
        try {
            const VideoPrediction a = read_sequence({a_root, videos[i]});
            const VideoPrediction b = read_sequence({b_root, videos[i]});
            outcome.report = analyze(a, b, params);
            outcome.status = "ok";
            outcome.has_report = true;
        } catch (const std::exception& e) {
            outcome.status = "error";
            outcome.message = e.what();
        }
    });

    ordered_json video_entries = ordered_json::array();
    int errors = 0;
    for (VideoOutcome& outcome : outcomes) {
        if (outcome.has_report) {
            ordered_json entry = report_to_json(outcome.report);
            video_entries.push_back(std::move(entry));
        } else {
            ++errors;
            std::cerr << "error: " << outcome.video_id << ": " << outcome.message << "\n";
            video_entries.push_back(ordered_json{{"video_id", outcome.video_id},
                                                 {"status", "error"},
                                                 {"message", outcome.message}});
        }
    }
    const ordered_json doc{{"schema", 1},
                           {"parameters", params_to_json(params)},
                           {"errors", errors},
                           {"videos", std::move(video_entries)}};
    const std::string text = dump_json(doc);
    std::cout << text;
    if (!out_path.empty()) write_text_file(out_path, text);
    return errors == 0 ? kExitOk : kExitFailure;
}

int cmd_synth(const fs::path& script_path, const fs::path& out_root) {
    if (!fs::is_regular_file(script_path)) {
        throw UsageError("script file not found: " + script_path.string());
    }
    require_parent(out_root, "output root");

    const synth::FailureScript script = synth::load_script(script_path);
    const synth::SynthResult result = synth::generate(script);
    write_sequence(result.gt, {out_root / "gt", script.video_id});
    write_sequence(result.a, {out_root / "predA", script.video_id});
    write_sequence(result.b, {out_root / "predB", script.video_id});
    std::cout << "wrote " << script.video_id << " (" << script.video_length << " frames) under "
              << out_root.string() << "\n";
    return kExitOk;
}

int cmd_manifest(const fs::path& annotated_root, const fs::path& pseudo_root,
                 const fs::path& out_path) {
    require_dir(annotated_root, "annotated root");
    require_dir(pseudo_root, "pseudo root");
    require_parent(out_path, "manifest path");

    const DatasetManifest manifest = build_manifest(annotated_root, pseudo_root);
    write_manifest(manifest, out_path);
    const fs::path errors_path =
        (out_path.has_parent_path() ? out_path.parent_path() : fs::path(".")) /
        "manifest_errors.json";
    write_manifest_errors(manifest, errors_path);

    const ordered_json doc{{"schema", 1},
                           {"entries", manifest.entries.size()},
                           {"excluded", manifest.failures.size()},
                           {"stats", stats_to_json(manifest_stats(manifest))}};
    std::cout << dump_json(doc);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-stream VOS mask fusion and J/F evaluation toolkit.\n"
                 "Stream A is the primary tracker; ties and quiet videos keep A."};
    app.require_subcommand(1);

    std::string a_root, b_root, out_root, pred_root, gt_root, script_path;
    std::string annotated_root, pseudo_root, manifest_out;
    std::string eval_out = "evaluation.json";
    std::string diagnose_out;
    std::string only_video;
    CascadeParams fuse_params;
    CascadeParams diagnose_params;
    std::string fuse_granularity = "video";
    std::string fuse_contours = "with-holes";
    std::string diag_granularity = "video";
    std::string diag_contours = "with-holes";
    ScoreOptions score_options;
    int threads = default_threads();

    CLI::App* fuse_cmd = app.add_subcommand(
        "fuse", "Fuse two prediction streams by the cascaded miss/wrong tracking rules");
    fuse_cmd->add_option("pred_a", a_root, "Root of stream A (primary model) mask sequences")
        ->required();
    fuse_cmd->add_option("pred_b", b_root, "Root of stream B (secondary model) mask sequences")
        ->required();
    fuse_cmd->add_option("out", out_root, "Output root for fused masks and reports")->required();
    add_cascade_flags(fuse_cmd, fuse_params, fuse_granularity, fuse_contours);
    fuse_cmd->add_option("--threads", threads, "Worker threads (default: all cores)")
        ->envname("VOSCASCADE_THREADS");

    CLI::App* eval_cmd =
        app.add_subcommand("evaluate", "Score predictions against ground truth (J, F, J&F)");
    eval_cmd->add_option("pred", pred_root, "Root of predicted mask sequences")->required();
    eval_cmd->add_option("gt", gt_root, "Root of ground-truth mask sequences")->required();
    eval_cmd->add_option("--out", eval_out, "Where to write the score JSON")
        ->capture_default_str();
    eval_cmd->add_option("--tolerance", score_options.tolerance_px,
                         "Boundary match tolerance in pixels (default: 0.8% of the diagonal)");
    eval_cmd->add_flag("--include-first-frame", score_options.include_first_frame,
                       "Score the first frame too (it is the given prompt by default)");
    eval_cmd->add_option("--threads", threads, "Worker threads (default: all cores)")
        ->envname("VOSCASCADE_THREADS");

    CLI::App* diag_cmd = app.add_subcommand(
        "diagnose", "Report disagreement records and decision previews without writing masks");
    diag_cmd->add_option("pred_a", a_root, "Root of stream A mask sequences")->required();
    diag_cmd->add_option("pred_b", b_root, "Root of stream B mask sequences")->required();
    diag_cmd->add_option("--video", only_video, "Restrict to one video id");
    diag_cmd->add_option("--out", diagnose_out, "Also write the JSON report here");
    add_cascade_flags(diag_cmd, diagnose_params, diag_granularity, diag_contours);
    diag_cmd->add_option("--threads", threads, "Worker threads (default: all cores)")
        ->envname("VOSCASCADE_THREADS");

    CLI::App* synth_cmd = app.add_subcommand(
        "synth", "Render a scripted fixture into gt/predA/predB mask directories");
    synth_cmd->add_option("script", script_path, "Failure-script JSON file")->required();
    synth_cmd->add_option("out", out_root, "Output root")->required();

    CLI::App* manifest_cmd = app.add_subcommand(
        "manifest", "Merge annotated and pseudo-label mask roots into a training manifest");
    manifest_cmd->add_option("annotated", annotated_root, "Root of annotated sequences")
        ->required();
    manifest_cmd->add_option("pseudo", pseudo_root, "Root of pseudo-label sequences")->required();
    manifest_cmd->add_option("out", manifest_out, "Path of the manifest.jsonl to write")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (fuse_cmd->parsed()) {
            finish_params(fuse_params, fuse_granularity, fuse_contours);
            return cmd_fuse(a_root, b_root, out_root, fuse_params, threads);
        }
        if (eval_cmd->parsed()) {
            return cmd_evaluate(pred_root, gt_root, eval_out, score_options, threads);
        }
        if (diag_cmd->parsed()) {
            finish_params(diagnose_params, diag_granularity, diag_contours);
            return cmd_diagnose(a_root, b_root, only_video, diagnose_out, diagnose_params,
                                threads);
        }
        if (synth_cmd->parsed()) {
            return cmd_synth(script_path, out_root);
        }
        if (manifest_cmd->parsed()) {
            return cmd_manifest(annotated_root, pseudo_root, manifest_out);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
