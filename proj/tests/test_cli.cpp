#include "voscascade/mask_io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using voscascade::read_file_bytes;

namespace {

const char* kCli = VOSCASCADE_CLI_PATH;

int run(const std::string& args, const fs::path& stdout_to = {}) {
    std::string cmd = std::string(kCli) + " " + args;
    if (!stdout_to.empty()) {
        cmd += " > " + stdout_to.string();
    } else {
        cmd += " > /dev/null";
    }
    cmd += " 2> /dev/null";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::path("test_tmp") / "cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_miss_script(const fs::path& path, const std::string& video_id = "clip") {
    // A loses the object for 12 of 20 frames; B stays clean.
    const std::string script = R"({
        "video_id": ")" + video_id + R"(",
        "video_length": 20,
        "canvas": {"width": 64, "height": 40},
        "seed": 11,
        "objects": [
            {"id": 1, "start": {"x": 5, "y": 8, "width": 10, "height": 9},
             "velocity": {"dx": 1, "dy": 0}}
        ],
        "injections": [
            {"target": "A", "kind": "dropout", "object": 1,
             "frames": {"begin": 4, "end": 15}}
        ]
    })";
    std::ofstream(path) << script;
}

nlohmann::json parse_file(const fs::path& path) {
    const auto bytes = read_file_bytes(path);
    return nlohmann::json::parse(bytes.begin(), bytes.end());
}

bool dirs_byte_equal(const fs::path& lhs, const fs::path& rhs) {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(lhs)) {
        names.push_back(entry.path().filename().string());
    }
    for (const std::string& name : names) {
        if (!fs::exists(rhs / name)) return false;
        if (read_file_bytes(lhs / name) != read_file_bytes(rhs / name)) return false;
    }
    std::size_t rhs_count = 0;
    for ([[maybe_unused]] const auto& entry : fs::directory_iterator(rhs)) ++rhs_count;
    return rhs_count == names.size();
}

}  // namespace

TEST_CASE("synth then fuse recovers the clean stream on a miss fixture") {
    const fs::path dir = fresh_dir("miss_pipeline");
    write_miss_script(dir / "script.json");
    REQUIRE(run("synth " + (dir / "script.json").string() + " " + (dir / "data").string()) == 0);
    CHECK(fs::is_directory(dir / "data" / "gt" / "clip"));
    CHECK(fs::is_directory(dir / "data" / "predA" / "clip"));
    CHECK(fs::is_directory(dir / "data" / "predB" / "clip"));

    REQUIRE(run("fuse " + (dir / "data" / "predA").string() + " " +
                (dir / "data" / "predB").string() + " " + (dir / "fused").string()) == 0);

    const auto summary = parse_file(dir / "fused" / "fusion_summary.json");
    CHECK(summary["schema"] == 1);
    CHECK(summary["videos"][0]["decision"]["source"] == "B");
    CHECK(summary["videos"][0]["decision"]["reason"] == "miss_tracking");

    const auto report = parse_file(dir / "fused" / "reports" / "clip.json");
    CHECK(report["decision"]["miss_count_a"] == 12);

    CHECK(dirs_byte_equal(dir / "data" / "predB" / "clip", dir / "fused" / "clip"));

    REQUIRE(run("evaluate " + (dir / "fused").string() + " " +
                (dir / "data" / "gt").string() + " --out " + (dir / "eval.json").string()) == 0);
    const auto scores = parse_file(dir / "eval.json");
    CHECK(scores["global"]["JF"] == 1.0);

    REQUIRE(run("evaluate " + (dir / "data" / "predA").string() + " " +
                (dir / "data" / "gt").string() + " --out " + (dir / "evalA.json").string()) == 0);
    CHECK(parse_file(dir / "evalA.json")["global"]["JF"] < 1.0);
}

TEST_CASE("identical roots fuse to byte-identical output with default decisions") {
    const fs::path dir = fresh_dir("identity");
    write_miss_script(dir / "script.json");
    REQUIRE(run("synth " + (dir / "script.json").string() + " " + (dir / "data").string()) == 0);

    const std::string gt = (dir / "data" / "gt").string();
    REQUIRE(run("fuse " + gt + " " + gt + " " + (dir / "fused").string()) == 0);
    CHECK(dirs_byte_equal(dir / "data" / "gt" / "clip", dir / "fused" / "clip"));
    const auto summary = parse_file(dir / "fused" / "fusion_summary.json");
    CHECK(summary["videos"][0]["decision"]["source"] == "A");
    CHECK(summary["videos"][0]["decision"]["reason"] == "default");
}

TEST_CASE("videos present in a single root are copied and flagged") {
    const fs::path dir = fresh_dir("singleton");
    write_miss_script(dir / "script.json", "both");
    REQUIRE(run("synth " + (dir / "script.json").string() + " " + (dir / "data").string()) == 0);
    write_miss_script(dir / "extra.json", "only_a");
    REQUIRE(run("synth " + (dir / "extra.json").string() + " " + (dir / "more").string()) == 0);
    fs::copy(dir / "more" / "predA" / "only_a", dir / "data" / "predA" / "only_a",
             fs::copy_options::recursive);

    REQUIRE(run("fuse " + (dir / "data" / "predA").string() + " " +
                (dir / "data" / "predB").string() + " " + (dir / "fused").string()) == 0);
    const auto summary = parse_file(dir / "fused" / "fusion_summary.json");
    REQUIRE(summary["videos"].size() == 2);
    CHECK(summary["videos"][0]["video_id"] == "both");
    CHECK(summary["videos"][0]["status"] == "fused");
    CHECK(summary["videos"][1]["video_id"] == "only_a");
    CHECK(summary["videos"][1]["status"] == "copied");
    CHECK(summary["videos"][1]["copied_from"] == "A");
    CHECK(dirs_byte_equal(dir / "data" / "predA" / "only_a", dir / "fused" / "only_a"));
}

TEST_CASE("thread count changes nothing about the output bytes") {
    const fs::path dir = fresh_dir("threads");
    write_miss_script(dir / "script.json");
    REQUIRE(run("synth " + (dir / "script.json").string() + " " + (dir / "data").string()) == 0);
    const std::string a = (dir / "data" / "predA").string();
    const std::string b = (dir / "data" / "predB").string();

    REQUIRE(run("fuse " + a + " " + b + " " + (dir / "one").string() + " --threads 1") == 0);
    REQUIRE(run("fuse " + a + " " + b + " " + (dir / "four").string() + " --threads 4") == 0);
    CHECK(read_file_bytes(dir / "one" / "fusion_summary.json") ==
          read_file_bytes(dir / "four" / "fusion_summary.json"));
    CHECK(read_file_bytes(dir / "one" / "reports" / "clip.json") ==
          read_file_bytes(dir / "four" / "reports" / "clip.json"));
    CHECK(dirs_byte_equal(dir / "one" / "clip", dir / "four" / "clip"));
}

TEST_CASE("diagnose previews decisions without writing masks") {
    const fs::path dir = fresh_dir("diagnose");
    write_miss_script(dir / "script.json");
    REQUIRE(run("synth " + (dir / "script.json").string() + " " + (dir / "data").string()) == 0);

    const fs::path out = dir / "diagnose.json";
    REQUIRE(run("diagnose " + (dir / "data" / "predA").string() + " " +
                (dir / "data" / "predB").string() + " --video clip",
                out) == 0);
    const auto doc = parse_file(out);
    REQUIRE(doc["videos"].size() == 1);
    CHECK(doc["videos"][0]["video_id"] == "clip");
    CHECK(doc["videos"][0]["decision"]["source"] == "B");
    CHECK(doc["videos"][0]["records"].size() == 20);
    CHECK_FALSE(fs::exists(dir / "data" / "predA" / "clip" / "fused"));

    CHECK(run("diagnose " + (dir / "data" / "predA").string() + " " +
              (dir / "data" / "predB").string() + " --video nope") == 2);
}

TEST_CASE("usage errors exit with code 2") {
    const fs::path dir = fresh_dir("usage");
    CHECK(run("fuse /nonexistent_a /nonexistent_b " + (dir / "out").string()) == 2);
    CHECK(run("fuse") == 2);
    CHECK(run("definitely-not-a-subcommand") == 2);
    CHECK(run("--help") == 0);

    // Output root under a missing parent directory.
    write_miss_script(dir / "script.json");
    REQUIRE(run("synth " + (dir / "script.json").string() + " " + (dir / "data").string()) == 0);
    CHECK(run("fuse " + (dir / "data" / "predA").string() + " " +
              (dir / "data" / "predB").string() + " " +
              (dir / "no" / "such" / "parent" / "out").string()) == 2);
}

TEST_CASE("content failures exit with code 1") {
    const fs::path dir = fresh_dir("content");
    std::ofstream(dir / "broken.json") << "{ not json";
    CHECK(run("synth " + (dir / "broken.json").string() + " " + (dir / "out").string()) == 1);

    // Manifest collision.
    write_miss_script(dir / "script.json", "same_id");
    REQUIRE(run("synth " + (dir / "script.json").string() + " " + (dir / "data").string()) == 0);
    CHECK(run("manifest " + (dir / "data" / "gt").string() + " " +
              (dir / "data" / "gt").string() + " " + (dir / "manifest.jsonl").string()) == 1);

    // A valid manifest run exits cleanly and writes both documents.
    write_miss_script(dir / "other.json", "other_id");
    REQUIRE(run("synth " + (dir / "other.json").string() + " " + (dir / "more").string()) == 0);
    CHECK(run("manifest " + (dir / "data" / "gt").string() + " " +
              (dir / "more" / "gt").string() + " " + (dir / "manifest.jsonl").string()) == 0);
    CHECK(fs::exists(dir / "manifest.jsonl"));
    CHECK(fs::exists(dir / "manifest_errors.json"));
}

TEST_CASE("the thread env var is honored and per-object granularity runs") {
    const fs::path dir = fresh_dir("env_threads");
    write_miss_script(dir / "script.json");
    REQUIRE(run("synth " + (dir / "script.json").string() + " " + (dir / "data").string()) == 0);
    const std::string a = (dir / "data" / "predA").string();
    const std::string b = (dir / "data" / "predB").string();

    const std::string cmd = "VOSCASCADE_THREADS=2 " + std::string(kCli) + " fuse " + a + " " +
                            b + " " + (dir / "env").string() + " > /dev/null 2> /dev/null";
    const int rc = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(rc));
    CHECK(WEXITSTATUS(rc) == 0);

    REQUIRE(run("fuse " + a + " " + b + " " + (dir / "object").string() +
                " --granularity object") == 0);
    const auto report = parse_file(dir / "object" / "reports" / "clip.json");
    CHECK(report["parameters"]["granularity"] == "object");
    REQUIRE(report["object_decisions"].size() == 1);
    CHECK(report["object_decisions"][0]["object"] == 1);
    CHECK(report["object_decisions"][0]["source"] == "B");
    CHECK(dirs_byte_equal(dir / "env" / "clip", dir / "object" / "clip"));
}

TEST_CASE("fuse survives a corrupt video, reports it, and finishes the rest") {
    const fs::path dir = fresh_dir("fuse_errors");
    write_miss_script(dir / "script.json", "good");
    REQUIRE(run("synth " + (dir / "script.json").string() + " " + (dir / "data").string()) == 0);
    write_miss_script(dir / "bad.json", "broken");
    REQUIRE(run("synth " + (dir / "bad.json").string() + " " + (dir / "more").string()) == 0);
    for (const char* split : {"predA", "predB"}) {
        fs::copy(dir / "more" / split / "broken", dir / "data" / split / "broken",
                 fs::copy_options::recursive);
    }
    std::ofstream(dir / "data" / "predA" / "broken" / "00003.png", std::ios::trunc)
        << "garbage";

    CHECK(run("fuse " + (dir / "data" / "predA").string() + " " +
              (dir / "data" / "predB").string() + " " + (dir / "fused").string()) == 1);
    const auto summary = parse_file(dir / "fused" / "fusion_summary.json");
    CHECK(summary["errors"] == 1);
    CHECK(summary["videos"][0]["video_id"] == "broken");
    CHECK(summary["videos"][0]["status"] == "error");
    CHECK(summary["videos"][1]["status"] == "fused");
    // The failing video leaves no partial mask directory behind.
    CHECK_FALSE(fs::exists(dir / "fused" / "broken"));
    CHECK(fs::is_directory(dir / "fused" / "good"));
}

TEST_CASE("evaluate reports per-video alignment failures with exit 1") {
    const fs::path dir = fresh_dir("eval_errors");
    write_miss_script(dir / "script.json");
    REQUIRE(run("synth " + (dir / "script.json").string() + " " + (dir / "data").string()) == 0);

    // Prediction root lacking the video entirely.
    fs::create_directories(dir / "empty_pred");
    CHECK(run("evaluate " + (dir / "empty_pred").string() + " " +
              (dir / "data" / "gt").string() + " --out " + (dir / "eval.json").string()) == 1);
    const auto doc = parse_file(dir / "eval.json");
    REQUIRE(doc["errors"].size() == 1);
    CHECK(doc["errors"][0]["video_id"] == "clip");
}
