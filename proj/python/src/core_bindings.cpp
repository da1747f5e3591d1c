#include "voscascade/cascade.hpp"
#include "voscascade/contours.hpp"
#include "voscascade/manifest.hpp"
#include "voscascade/mask_io.hpp"
#include "voscascade/metrics.hpp"
#include "voscascade/synth.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace voscascade;

namespace {

using MaskArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

BinaryMask to_binary(const MaskArray& array) {
    if (array.ndim() != 2) throw py::value_error("mask must be a 2-D array");
    const int h = static_cast<int>(array.shape(0));
    const int w = static_cast<int>(array.shape(1));
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(w) * h);
    auto view = array.unchecked<2>();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) bits[static_cast<std::size_t>(y) * w + x] = view(y, x) ? 1 : 0;
    return BinaryMask(w, h, std::move(bits));
}

LabelMap to_label_map(const MaskArray& array) {
    if (array.ndim() != 2) throw py::value_error("label map must be a 2-D array");
    const int h = static_cast<int>(array.shape(0));
    const int w = static_cast<int>(array.shape(1));
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(w) * h);
    auto view = array.unchecked<2>();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) labels[static_cast<std::size_t>(y) * w + x] = view(y, x);
    return LabelMap(w, h, std::move(labels));
}

// [frames, height, width] uint8 stack with frame indices 0..n-1.
VideoPrediction to_video(const MaskArray& stack, const std::string& video_id) {
    if (stack.ndim() != 3) throw py::value_error("prediction stack must be a 3-D array");
    const int n = static_cast<int>(stack.shape(0));
    const int h = static_cast<int>(stack.shape(1));
    const int w = static_cast<int>(stack.shape(2));
    auto view = stack.unchecked<3>();
    std::vector<VideoPrediction::Frame> frames;
    frames.reserve(n);
    for (int f = 0; f < n; ++f) {
        std::vector<std::uint8_t> labels(static_cast<std::size_t>(w) * h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                labels[static_cast<std::size_t>(y) * w + x] = view(f, y, x);
        frames.push_back({f, LabelMap(w, h, std::move(labels))});
    }
    return VideoPrediction(video_id, std::move(frames));
}

py::array_t<std::uint8_t> from_video(const VideoPrediction& v) {
    const int n = static_cast<int>(v.frame_count());
    const int h = v.height();
    const int w = v.width();
    py::array_t<std::uint8_t> stack({n, h, w});
    auto view = stack.mutable_unchecked<3>();
    for (int f = 0; f < n; ++f) {
        const auto labels = v.frames()[f].map.labels();
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                view(f, y, x) = labels[static_cast<std::size_t>(y) * w + x];
    }
    return stack;
}

CascadeParams params_from_kwargs(double iou_threshold, int miss_frames, int wrong_frames,
                                 int noise_contours, std::int64_t min_pixels,
                                 const std::string& granularity,
                                 const std::string& contour_mode) {
    CascadeParams params;
    params.iou_threshold = iou_threshold;
    params.miss_frame_threshold = miss_frames;
    params.wrong_frame_threshold = wrong_frames;
    params.contour_noise_threshold = noise_contours;
    params.min_pixels = min_pixels;
    if (granularity == "object") params.granularity = Granularity::object;
    else if (granularity != "video") throw py::value_error("granularity must be video|object");
    if (contour_mode == "external-only") params.contour_mode = ContourMode::external_only;
    else if (contour_mode != "with-holes")
        throw py::value_error("contour_mode must be with-holes|external-only");
    params.validate();
    return params;
}

py::dict decision_dict(const CascadeDecision& d) {
    py::dict out;
    out["source"] = to_string(d.source);
    out["reason"] = to_string(d.reason);
    out["miss_count_a"] = d.miss_count_a;
    out["miss_count_b"] = d.miss_count_b;
    out["wrong_count"] = d.wrong_count;
    out["noise_frames_a"] = d.noise_frames_a;
    out["noise_frames_b"] = d.noise_frames_b;
    return out;
}

py::dict report_dict(const FusionReport& report) {
    py::dict out;
    out["video_id"] = report.video_id;
    out["decision"] = decision_dict(report.decision);
    py::list object_decisions;
    for (const auto& od : report.object_decisions) {
        py::dict entry = decision_dict(od.decision);
        entry["object"] = od.object_id;
        object_decisions.append(entry);
    }
    out["object_decisions"] = object_decisions;
    py::list records;
    for (const auto& r : report.records) {
        py::dict entry;
        entry["frame"] = r.frame_index;
        entry["object"] = r.object_id;
        entry["kind"] = to_string(r.kind);
        entry["iou"] = r.iou;
        records.append(entry);
    }
    out["records"] = records;
    return out;
}

py::dict scores_dict(const MetricScores& scores) {
    py::dict out;
    out["J"] = scores.j_mean;
    out["F"] = scores.f_mean;
    out["JF"] = scores.jf;
    py::dict per_object;
    for (const auto& [object, s] : scores.per_object) {
        py::dict entry;
        entry["J"] = s.j;
        entry["F"] = s.f;
        per_object[py::int_(object)] = entry;
    }
    out["per_object"] = per_object;
    return out;
}

constexpr const char* kParamDoc = R"(iou_threshold, miss_frames, wrong_frames, noise_contours,
min_pixels, granularity ("video"|"object") and contour_mode
("with-holes"|"external-only") follow the CLI defaults.)";

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Mask fusion cascade and J/F evaluation core";

    m.def(
        "iou",
        [](const MaskArray& a, const MaskArray& b) { return iou(to_binary(a), to_binary(b)); },
        py::arg("a"), py::arg("b"),
        "Intersection-over-union of two 2-D masks; both empty gives 1.0.");

    m.def(
        "is_valid",
        [](const MaskArray& mask, std::int64_t min_pixels) {
            return is_valid(to_binary(mask), min_pixels);
        },
        py::arg("mask"), py::arg("min_pixels") = 1);

    m.def(
        "count_contours",
        [](const MaskArray& mask) {
            const ContourStats stats = count_contours(to_binary(mask));
            py::dict out;
            out["external"] = stats.external_contours;
            out["holes"] = stats.hole_contours;
            out["total"] = stats.total_contours;
            return out;
        },
        py::arg("mask"),
        "External (8-connected) components, enclosed holes, and their sum.");

    m.def(
        "is_high_noise",
        [](const MaskArray& mask, int threshold, const std::string& contour_mode) {
            const ContourMode mode = contour_mode == "external-only"
                                         ? ContourMode::external_only
                                         : ContourMode::with_holes;
            return is_high_noise(to_binary(mask), threshold, mode);
        },
        py::arg("mask"), py::arg("threshold") = 6, py::arg("contour_mode") = "with-holes");

    m.def(
        "region_j",
        [](const MaskArray& pred, const MaskArray& gt) {
            return region_j(to_binary(pred), to_binary(gt));
        },
        py::arg("pred"), py::arg("gt"));

    m.def(
        "boundary_f",
        [](const MaskArray& pred, const MaskArray& gt, int tolerance) {
            const BinaryMask p = to_binary(pred);
            const BinaryMask g = to_binary(gt);
            const int t = tolerance >= 0 ? tolerance
                                         : default_boundary_tolerance(p.width(), p.height());
            return boundary_f(p, g, t);
        },
        py::arg("pred"), py::arg("gt"), py::arg("tolerance") = -1,
        "Boundary F-measure; tolerance < 0 uses 0.8% of the image diagonal.");

    m.def("default_boundary_tolerance", &default_boundary_tolerance, py::arg("width"),
          py::arg("height"));

    m.def(
        "classify_frames",
        [](const MaskArray& a, const MaskArray& b, double iou_threshold, int miss_frames,
           int wrong_frames, int noise_contours, std::int64_t min_pixels,
           const std::string& granularity, const std::string& contour_mode) {
            const CascadeParams params =
                params_from_kwargs(iou_threshold, miss_frames, wrong_frames, noise_contours,
                                   min_pixels, granularity, contour_mode);
            const auto records =
                classify_frames(to_video(a, "a"), to_video(b, "b"), params);
            py::list out;
            for (const auto& r : records) {
                py::dict entry;
                entry["frame"] = r.frame_index;
                entry["object"] = r.object_id;
                entry["kind"] = to_string(r.kind);
                entry["iou"] = r.iou;
                out.append(entry);
            }
            return out;
        },
        py::arg("a"), py::arg("b"), py::arg("iou_threshold") = 0.1, py::arg("miss_frames") = 10,
        py::arg("wrong_frames") = 10, py::arg("noise_contours") = 6, py::arg("min_pixels") = 1,
        py::arg("granularity") = "video", py::arg("contour_mode") = "with-holes", kParamDoc);

    m.def(
        "fuse",
        [](const MaskArray& a, const MaskArray& b, double iou_threshold, int miss_frames,
           int wrong_frames, int noise_contours, std::int64_t min_pixels,
           const std::string& granularity, const std::string& contour_mode) {
            const CascadeParams params =
                params_from_kwargs(iou_threshold, miss_frames, wrong_frames, noise_contours,
                                   min_pixels, granularity, contour_mode);
            const FusionResult result = fuse(to_video(a, "a"), to_video(b, "b"), params);
            return py::make_tuple(from_video(result.fused), report_dict(result.report));
        },
        py::arg("a"), py::arg("b"), py::arg("iou_threshold") = 0.1, py::arg("miss_frames") = 10,
        py::arg("wrong_frames") = 10, py::arg("noise_contours") = 6, py::arg("min_pixels") = 1,
        py::arg("granularity") = "video", py::arg("contour_mode") = "with-holes",
        "Returns (fused_stack, report). The fused stack is selected, never blended.");

    m.def(
        "score_video",
        [](const MaskArray& pred, const MaskArray& gt, int tolerance, bool include_first_frame) {
            ScoreOptions options;
            options.tolerance_px = tolerance;
            options.include_first_frame = include_first_frame;
            return scores_dict(score_video(to_video(pred, "pred"), to_video(gt, "gt"), options));
        },
        py::arg("pred"), py::arg("gt"), py::arg("tolerance") = -1,
        py::arg("include_first_frame") = false,
        "Per-object J/F averaged over evaluated frames; the first frame is the prompt.");

    m.def(
        "read_sequence",
        [](const std::filesystem::path& root, const std::string& video_id) {
            return from_video(read_sequence({root, video_id}));
        },
        py::arg("root"), py::arg("video_id"),
        "Reads <root>/<video_id>/*.png indexed masks into a [frames, h, w] uint8 stack.");

    m.def(
        "write_sequence",
        [](const MaskArray& stack, const std::filesystem::path& root,
           const std::string& video_id) {
            write_sequence(to_video(stack, video_id), {root, video_id});
        },
        py::arg("stack"), py::arg("root"), py::arg("video_id"),
        "Writes a [frames, h, w] uint8 stack as zero-padded indexed-palette PNGs.");

    m.def(
        "generate_fixture",
        [](const std::string& script_json) {
            const synth::FailureScript script =
                synth::script_from_json(nlohmann::json::parse(script_json));
            const synth::SynthResult result = synth::generate(script);
            return py::make_tuple(from_video(result.gt), from_video(result.a),
                                  from_video(result.b));
        },
        py::arg("script_json"),
        "Renders a failure-script JSON string into (gt, a, b) mask stacks.");
}
