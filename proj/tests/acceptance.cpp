// Acceptance suite: every release criterion in one binary, one verdict
// line per criterion. Exits nonzero when anything fails.

#include "voscascade/cascade.hpp"
#include "voscascade/contours.hpp"
#include "voscascade/manifest.hpp"
#include "voscascade/mask_io.hpp"
#include "voscascade/metrics.hpp"
#include "voscascade/synth.hpp"

#include "oracles.hpp"

#include <json.hpp>
#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

namespace fs = std::filesystem;
using namespace voscascade;
using Clock = std::chrono::steady_clock;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& what) {
    if (!condition) throw Failure(what);
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::path("test_tmp") / "acceptance" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd =
        std::string(VOSCASCADE_CLI_PATH) + " " + args + " > /dev/null 2> /dev/null";
    const int rc = std::system(cmd.c_str());
    require(rc != -1, "could not launch the CLI");
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

nlohmann::json parse_file(const fs::path& path) {
    const auto bytes = read_file_bytes(path);
    return nlohmann::json::parse(bytes.begin(), bytes.end());
}

// --- criterion bodies -------------------------------------------------

void iou_oracle() {
    const auto start = Clock::now();
    std::mt19937 rng(101);
    for (int trial = 0; trial < 1000; ++trial) {
        const BinaryMask a = oracles::random_mask(rng);
        const BinaryMask b =
            oracles::random_mask_sized(rng, a.width(), a.height(), 0.35);
        require(iou(a, b) == oracles::brute_iou(a, b),
                "iou diverged from pixel enumeration on trial " + std::to_string(trial));
    }
    require(seconds_since(start) < 5.0, "iou oracle run exceeded 5 seconds");
}

void contour_oracle() {
    std::mt19937 rng(103);
    for (int trial = 0; trial < 1000; ++trial) {
        const BinaryMask m = oracles::random_mask(rng);
        const ContourStats stats = count_contours(m);
        require(stats.external_contours == oracles::flood_components(m),
                "external contours diverged on trial " + std::to_string(trial));
        require(stats.hole_contours == oracles::flood_holes(m),
                "hole contours diverged on trial " + std::to_string(trial));
    }

    BinaryMask square(9, 9);
    for (int y = 1; y < 6; ++y)
        for (int x = 1; x < 6; ++x) square.set(x, y, true);
    require(count_contours(square).total_contours == 1, "filled square must count 1");

    BinaryMask ring(11, 11);
    for (int y = 1; y < 8; ++y)
        for (int x = 1; x < 8; ++x) ring.set(x, y, true);
    for (int y = 3; y < 6; ++y)
        for (int x = 3; x < 6; ++x) ring.set(x, y, false);
    require(count_contours(ring).total_contours == 2, "square with hole must count 2");

    BinaryMask seven(16, 16);
    for (int i = 0; i < 7; ++i) seven.set((i % 8) * 2, (i / 8) * 2, true);
    require(count_contours(seven).total_contours == 7, "7 scattered pixels must count 7");
    require(is_high_noise(seven, 6), "7 contours must be high-noise at threshold 6");

    BinaryMask six(16, 16);
    for (int i = 0; i < 6; ++i) six.set((i % 8) * 2, (i / 8) * 2, true);
    require(!is_high_noise(six, 6), "6 contours must not be high-noise at threshold 6");
}

void boundary_oracle() {
    std::mt19937 rng(107);
    std::uniform_int_distribution<int> tolerance(0, 4);
    for (int trial = 0; trial < 500; ++trial) {
        const BinaryMask pred = oracles::random_mask(rng);
        const BinaryMask gt =
            oracles::random_mask_sized(rng, pred.width(), pred.height(), 0.4);
        const int t = tolerance(rng);
        require(boundary_f(pred, gt, t) == oracles::brute_boundary_f(pred, gt, t),
                "boundary matching diverged from the all-pairs brute force on trial " +
                    std::to_string(trial));
    }
    for (int trial = 0; trial < 100; ++trial) {
        BinaryMask m = oracles::random_mask(rng);
        m.set(m.width() / 2, m.height() / 2, true);  // ensure nonempty
        require(boundary_f(m, m, tolerance(rng)) == 1.0,
                "boundary_f(m, m, t) must be exactly 1");
    }
}

synth::FailureScript cascade_script(int length) {
    synth::FailureScript script;
    script.video_id = "cascade";
    script.video_length = length;
    script.canvas_width = 96;
    script.canvas_height = 48;
    synth::ObjectScript object;
    object.id = 1;
    for (int f = 0; f < length; ++f) object.rects.push_back({6, 10, 12, 10});
    script.objects.push_back(std::move(object));
    return script;
}

void cascade_rules() {
    // (a) 11 missed frames select the stream that kept tracking.
    {
        synth::FailureScript script = cascade_script(20);
        synth::Injection inj;
        inj.target = synth::TargetStream::A;
        inj.kind = synth::InjectionKind::dropout;
        inj.object_id = 1;
        inj.frame_begin = 4;
        inj.frame_end = 14;
        script.injections.push_back(inj);
        const synth::SynthResult r = synth::generate(script);
        const FusionReport report = analyze(r.a, r.b, {});
        require(report.decision.miss_count_a == 11, "(a) expected 11 miss frames");
        require(report.decision.source == Source::B &&
                    report.decision.reason == DecisionReason::miss_tracking,
                "(a) 11 miss-A frames must select B by miss tracking");
    }
    // (b) exactly 10 missed frames stay below the strict threshold.
    {
        synth::FailureScript script = cascade_script(20);
        synth::Injection inj;
        inj.target = synth::TargetStream::A;
        inj.kind = synth::InjectionKind::dropout;
        inj.object_id = 1;
        inj.frame_begin = 4;
        inj.frame_end = 13;
        script.injections.push_back(inj);
        const synth::SynthResult r = synth::generate(script);
        const FusionReport report = analyze(r.a, r.b, {});
        require(report.decision.miss_count_a == 10, "(b) expected exactly 10 miss frames");
        require(report.decision.reason != DecisionReason::miss_tracking,
                "(b) exactly 10 miss frames must not trigger the miss rule");
        require(report.decision.source == Source::A, "(b) fallback must keep A");
    }
    // (c) 11 wrong frames with B fragmented into 8 pieces select A.
    synth::FailureScript wrong_script = cascade_script(20);
    {
        synth::Injection shift;
        shift.target = synth::TargetStream::B;
        shift.kind = synth::InjectionKind::displacement;
        shift.object_id = 1;
        shift.frame_begin = 2;
        shift.frame_end = 12;
        shift.has_offset = true;
        shift.dx = 40;
        wrong_script.injections.push_back(shift);
        synth::Injection frag;
        frag.target = synth::TargetStream::B;
        frag.kind = synth::InjectionKind::fragmentation;
        frag.object_id = 1;
        frag.frame_begin = 2;
        frag.frame_end = 12;
        frag.pieces = 8;
        wrong_script.injections.push_back(frag);
        const synth::SynthResult r = synth::generate(wrong_script);
        const FusionReport report = analyze(r.a, r.b, {});
        require(report.decision.wrong_count == 11, "(c) expected 11 wrong frames");
        require(report.decision.noise_frames_b == 11 && report.decision.noise_frames_a == 0,
                "(c) fragmentation must mark exactly B's frames as high-noise");
        require(report.decision.source == Source::A &&
                    report.decision.reason == DecisionReason::wrong_tracking_noise,
                "(c) the noisier stream must lose the wrong-tracking comparison");
    }
    // (d) priority: perturbing noise statistics cannot move a miss decision.
    {
        synth::FailureScript script = cascade_script(24);
        synth::Injection drop;
        drop.target = synth::TargetStream::A;
        drop.kind = synth::InjectionKind::dropout;
        drop.object_id = 1;
        drop.frame_begin = 0;
        drop.frame_end = 11;
        script.injections.push_back(drop);
        const synth::SynthResult r = synth::generate(script);
        const std::vector<DisagreementRecord> records = classify_frames(r.a, r.b, {});
        const CascadeDecision base = decide(records, {}, {}, {});
        require(base.reason == DecisionReason::miss_tracking, "(d) fixture must fire the miss rule");

        std::mt19937 rng(109);
        std::uniform_int_distribution<int> contours(0, 50);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<ContourStats> noise_a;
            std::vector<ContourStats> noise_b;
            for (int f = 0; f < 24; ++f) {
                noise_a.push_back({1, f, contours(rng), contours(rng), 0});
                noise_a.back().total_contours =
                    noise_a.back().external_contours + noise_a.back().hole_contours;
                noise_b.push_back({1, f, contours(rng), contours(rng), 0});
                noise_b.back().total_contours =
                    noise_b.back().external_contours + noise_b.back().hole_contours;
            }
            const CascadeDecision perturbed = decide(records, noise_a, noise_b, {});
            require(perturbed.source == base.source && perturbed.reason == base.reason,
                    "(d) noise statistics changed a miss-tracking decision");
        }
    }
    // (e) full agreement keeps the primary stream by default.
    {
        const synth::SynthResult r = synth::generate(cascade_script(20));
        const FusionResult result = fuse(r.a, r.b, {});
        require(result.report.decision.source == Source::A &&
                    result.report.decision.reason == DecisionReason::default_source,
                "(e) agreeing streams must keep A with the default reason");
        require(result.fused == r.a, "(e) fused output must equal stream A exactly");
    }
}

void metric_identities() {
    synth::FailureScript script = cascade_script(20);
    synth::ObjectScript second;
    second.id = 2;
    for (int f = 0; f < 20; ++f) second.rects.push_back({60, 20, 8, 8});
    script.objects.push_back(second);

    const synth::SynthResult clean = synth::generate(script);
    const MetricScores perfect = score_video(clean.gt, clean.gt);
    require(perfect.j_mean == 1.0 && perfect.f_mean == 1.0 && perfect.jf == 1.0,
            "pred == gt must score exactly 1.0 on J, F and J&F");

    synth::Injection drop;
    drop.target = synth::TargetStream::A;
    drop.kind = synth::InjectionKind::dropout;
    drop.object_id = 2;
    drop.frame_begin = 0;
    drop.frame_end = 19;
    script.injections.push_back(drop);
    const synth::SynthResult missing = synth::generate(script);
    const MetricScores half = score_video(missing.a, missing.gt);
    require(half.per_object.at(1).j == 1.0 && half.per_object.at(2).j == 0.0,
            "object 1 must stay perfect while object 2 is fully missed");
    require(half.jf == 0.5, "one missed object of two must average to exactly 0.5");
}

void io_roundtrip() {
    const fs::path root = fresh_dir("roundtrip");
    std::mt19937 rng(113);
    std::uniform_int_distribution<int> side(1, 20);
    std::uniform_int_distribution<int> frames(1, 5);
    std::uniform_int_distribution<int> value(0, 255);
    for (int i = 0; i < 50; ++i) {
        const int w = side(rng);
        const int h = side(rng);
        const int n = frames(rng);
        std::vector<VideoPrediction::Frame> sequence;
        for (int f = 0; f < n; ++f) {
            LabelMap map(w, h);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    map.set(x, y, static_cast<std::uint8_t>(value(rng)));
            sequence.push_back({f, std::move(map)});
        }
        const VideoPrediction v("video" + std::to_string(i), std::move(sequence));
        write_sequence(v, {root, v.video_id()});
        require(read_sequence({root, v.video_id()}) == v,
                "write/read round-trip altered " + v.video_id());
    }

    // Report serialization must not depend on when or where it runs.
    synth::FailureScript script = cascade_script(16);
    synth::Injection drop;
    drop.target = synth::TargetStream::A;
    drop.kind = synth::InjectionKind::dropout;
    drop.object_id = 1;
    drop.frame_begin = 1;
    drop.frame_end = 13;
    script.injections.push_back(drop);
    const synth::SynthResult r = synth::generate(script);
    const FusionReport report = analyze(r.a, r.b, {});
    write_report(report, root / "first.json");
    write_report(report, root / "second.json");
    require(read_file_bytes(root / "first.json") == read_file_bytes(root / "second.json"),
            "identical reports serialized to different bytes");
}

void end_to_end() {
    const auto start = Clock::now();
    const fs::path dir = fresh_dir("end_to_end");

    // Video 1: stream A drops the object for 12 frames, B is clean.
    // Video 2: stream B goes wrong (displaced + shattered) for 11
    // frames, A is clean. The cascade should recover ground truth
    // exactly while each single stream stays imperfect.
    const std::string miss_script = R"({
        "video_id": "v_miss",
        "video_length": 20,
        "canvas": {"width": 96, "height": 48},
        "objects": [{"id": 1, "start": {"x": 6, "y": 10, "width": 12, "height": 10}}],
        "injections": [
            {"target": "A", "kind": "dropout", "object": 1,
             "frames": {"begin": 4, "end": 15}}
        ]
    })";
    const std::string wrong_script = R"({
        "video_id": "v_wrong",
        "video_length": 20,
        "canvas": {"width": 96, "height": 48},
        "objects": [{"id": 1, "start": {"x": 6, "y": 10, "width": 12, "height": 10}}],
        "injections": [
            {"target": "B", "kind": "displacement", "object": 1,
             "frames": {"begin": 2, "end": 12}, "offset": {"dx": 40, "dy": 0}},
            {"target": "B", "kind": "fragmentation", "object": 1,
             "frames": {"begin": 2, "end": 12}, "pieces": 8}
        ]
    })";
    std::ofstream(dir / "miss.json") << miss_script;
    std::ofstream(dir / "wrong.json") << wrong_script;

    require(run_cli("synth " + (dir / "miss.json").string() + " " + (dir / "d1").string()) == 0,
            "synth failed on the miss fixture");
    require(run_cli("synth " + (dir / "wrong.json").string() + " " + (dir / "d2").string()) == 0,
            "synth failed on the wrong fixture");

    // Assemble one dataset from both scripted videos.
    for (const char* split : {"gt", "predA", "predB"}) {
        fs::create_directories(dir / "data" / split);
        fs::rename(dir / "d1" / split / "v_miss", dir / "data" / split / "v_miss");
        fs::rename(dir / "d2" / split / "v_wrong", dir / "data" / split / "v_wrong");
    }

    const std::string gt = (dir / "data" / "gt").string();
    const std::string pred_a = (dir / "data" / "predA").string();
    const std::string pred_b = (dir / "data" / "predB").string();

    require(run_cli("fuse " + pred_a + " " + pred_b + " " + (dir / "fused").string()) == 0,
            "fuse failed");
    require(run_cli("evaluate " + (dir / "fused").string() + " " + gt + " --out " +
                    (dir / "eval_fused.json").string()) == 0,
            "evaluate failed on the fused stream");
    require(run_cli("evaluate " + pred_a + " " + gt + " --out " +
                    (dir / "eval_a.json").string()) == 0,
            "evaluate failed on stream A");
    require(run_cli("evaluate " + pred_b + " " + gt + " --out " +
                    (dir / "eval_b.json").string()) == 0,
            "evaluate failed on stream B");

    const double jf_fused = parse_file(dir / "eval_fused.json")["global"]["JF"].get<double>();
    const double jf_a = parse_file(dir / "eval_a.json")["global"]["JF"].get<double>();
    const double jf_b = parse_file(dir / "eval_b.json")["global"]["JF"].get<double>();

    std::ostringstream detail;
    detail << "JF fused=" << jf_fused << " A=" << jf_a << " B=" << jf_b;
    require(jf_fused > jf_a, "fused must strictly beat stream A alone (" + detail.str() + ")");
    require(jf_fused > jf_b, "fused must strictly beat stream B alone (" + detail.str() + ")");
    require(seconds_since(start) < 60.0, "end-to-end pipeline exceeded 60 seconds");
}

void manifest_checks() {
    const fs::path dir = fresh_dir("manifest");
    const fs::path annotated = dir / "annotated";
    const fs::path pseudo = dir / "pseudo";

    auto write_video = [](const fs::path& root, const std::string& id, int frames,
                          int objects) {
        std::vector<VideoPrediction::Frame> sequence;
        for (int i = 0; i < frames; ++i) {
            LabelMap map(20, 10);
            for (int object = 1; object <= objects; ++object) {
                for (int y = 1; y < 4; ++y)
                    for (int x = object * 4; x < object * 4 + 3; ++x)
                        map.set(x, y, static_cast<std::uint8_t>(object));
            }
            sequence.push_back({i, std::move(map)});
        }
        write_sequence(VideoPrediction(id, std::move(sequence)), {root, id});
    };

    write_video(annotated, "train_a", 4, 2);
    write_video(annotated, "train_b", 3, 1);
    write_video(pseudo, "test_a", 5, 2);
    write_video(pseudo, "test_b", 2, 1);
    write_video(pseudo, "test_c", 3, 3);

    const DatasetManifest manifest = build_manifest(annotated, pseudo);
    require(manifest.entries.size() == 5, "expected 5 manifest entries");
    const ManifestStats stats = manifest_stats(manifest);
    require(stats.annotated.videos == 2 && stats.pseudo.videos == 3,
            "per-source video counts are wrong");
    require(stats.annotated.objects == 3 && stats.pseudo.objects == 6,
            "per-source object counts are wrong");
    require(stats.annotated.masks == 4 * 2 + 3 * 1 && stats.pseudo.masks == 5 * 2 + 2 * 1 + 3 * 3,
            "per-source mask counts are wrong");

    write_video(pseudo, "train_a", 2, 1);  // collide with the annotated root
    bool collided = false;
    try {
        build_manifest(annotated, pseudo);
    } catch (const std::exception& e) {
        collided = std::string(e.what()).find("train_a") != std::string::npos;
    }
    require(collided, "video_id collision must fail fast and name the id");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
        {"IoU oracle: 1000 random pairs match pixel enumeration exactly, < 5 s", iou_oracle},
        {"Contour oracle: 1000 random grids + fixed fixtures match flood fill", contour_oracle},
        {"Boundary-F oracle: 500 random masks match the all-pairs brute force", boundary_oracle},
        {"Cascade rule suite on scripted fixtures (miss, strictness, noise, priority, default)",
         cascade_rules},
        {"Metric identities: perfect prediction scores 1.0; half-missed scores 0.5",
         metric_identities},
        {"I/O round-trip: 50 random videos bit-exact; reports byte-deterministic", io_roundtrip},
        {"End-to-end synth/fuse/evaluate beats both single streams, < 60 s", end_to_end},
        {"Manifest: per-source counts exact; id collisions fail fast", manifest_checks},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        try {
            criteria[i].second();
            std::cout << "[PASS] " << i + 1 << ". " << criteria[i].first << "\n";
        } catch (const std::exception& e) {
            ++failed;
            std::cout << "[FAIL] " << i + 1 << ". " << criteria[i].first << ": " << e.what()
                      << "\n";
        }
    }
    if (failed != 0) {
        std::cout << failed << " of " << criteria.size() << " acceptance criteria failed\n";
        return 1;
    }
    std::cout << "all " << criteria.size() << " acceptance criteria passed\n";
    return 0;
}
