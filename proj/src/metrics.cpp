#include "voscascade/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace voscascade {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Felzenszwalb-Huttenlocher lower envelope of parabolas; exact squared
// Euclidean distances as long as they are exactly representable, which
// holds for any realistic image size.
void edt_1d(std::span<const double> f, std::span<double> out,
            std::vector<int>& v, std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    v.assign(n, 0);
    z.assign(n + 1, 0.0);
    int k = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = 1; q < n; ++q) {
        if (f[q] == kInf) continue;
        if (f[v[k]] == kInf) {
            v[k] = q;
            continue;
        }
        double s = ((f[q] + q * static_cast<double>(q)) -
                    (f[v[k]] + v[k] * static_cast<double>(v[k]))) /
                   (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            s = ((f[q] + q * static_cast<double>(q)) -
                 (f[v[k]] + v[k] * static_cast<double>(v[k]))) /
                (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    int k2 = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k2 + 1] < q) ++k2;
        const double d = q - static_cast<double>(v[k2]);
        out[q] = d * d + f[v[k2]];
    }
}

struct Window {
    int x0 = 0;
    int y0 = 0;
    int width = 0;
    int height = 0;
};

// Bounding box of the set pixels, expanded by `pad` and clamped to the
// canvas. Empty mask yields an empty window.
Window padded_box(const BinaryMask& m, int pad) {
    int min_x = m.width();
    int min_y = m.height();
    int max_x = -1;
    int max_y = -1;
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            if (!m.test(x, y)) continue;
            min_x = std::min(min_x, x);
            min_y = std::min(min_y, y);
            max_x = std::max(max_x, x);
            max_y = std::max(max_y, y);
        }
    }
    if (max_x < 0) return {};
    Window w;
    w.x0 = std::max(0, min_x - pad);
    w.y0 = std::max(0, min_y - pad);
    w.width = std::min(m.width() - 1, max_x + pad) - w.x0 + 1;
    w.height = std::min(m.height() - 1, max_y + pad) - w.y0 + 1;
    return w;
}

// Squared Euclidean distance from every window pixel to the nearest set
// pixel of `points`. The transform only depends on the point set, so a
// window covering all set pixels gives exact values inside it.
std::vector<double> squared_edt(const BinaryMask& points, const Window& window) {
    const int w = window.width;
    const int h = window.height;
    std::vector<double> dist(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            dist[static_cast<std::size_t>(y) * w + x] =
                points.test(window.x0 + x, window.y0 + y) ? 0.0 : kInf;
        }
    }

    std::vector<double> line(std::max(w, h));
    std::vector<double> out(std::max(w, h));
    std::vector<int> v;
    std::vector<double> z;

    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) line[y] = dist[static_cast<std::size_t>(y) * w + x];
        edt_1d(std::span<const double>(line.data(), h), std::span<double>(out.data(), h), v, z);
        for (int y = 0; y < h; ++y) dist[static_cast<std::size_t>(y) * w + x] = out[y];
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) line[x] = dist[static_cast<std::size_t>(y) * w + x];
        edt_1d(std::span<const double>(line.data(), w), std::span<double>(out.data(), w), v, z);
        for (int x = 0; x < w; ++x) dist[static_cast<std::size_t>(y) * w + x] = out[x];
    }
    return dist;
}

void check_same_dims(const BinaryMask& a, const BinaryMask& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw std::invalid_argument("mask dimension mismatch: " +
                                    std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                                    " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
    }
}

// Boundary pixels of `from` lying within `tolerance` of some boundary
// pixel of `to`. Any pixel outside the tolerance-padded box around
// `to`'s pixels is farther than the tolerance by construction, so the
// distance transform only needs that window.
std::int64_t matched_within(const BinaryMask& from_boundary, const BinaryMask& to_boundary,
                            std::int64_t tolerance_px) {
    const Window window = padded_box(to_boundary, static_cast<int>(tolerance_px));
    if (window.width == 0) return 0;
    const std::vector<double> sqdist = squared_edt(to_boundary, window);
    const double limit = static_cast<double>(tolerance_px) * static_cast<double>(tolerance_px);
    std::int64_t matched = 0;
    for (int y = 0; y < window.height; ++y) {
        for (int x = 0; x < window.width; ++x) {
            if (!from_boundary.test(window.x0 + x, window.y0 + y)) continue;
            if (sqdist[static_cast<std::size_t>(y) * window.width + x] <= limit) ++matched;
        }
    }
    return matched;
}

}  // namespace

int default_boundary_tolerance(int width, int height) {
    const double diagonal = std::sqrt(static_cast<double>(width) * width +
                                      static_cast<double>(height) * height);
    return static_cast<int>(std::ceil(0.008 * diagonal));
}

BinaryMask boundary_pixels(const BinaryMask& m) {
    const int w = m.width();
    const int h = m.height();
    BinaryMask boundary(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!m.test(x, y)) continue;
            const bool on_border = x == 0 || y == 0 || x == w - 1 || y == h - 1;
            const bool exposed = on_border ||
                                 !m.test(x - 1, y) || !m.test(x + 1, y) ||
                                 !m.test(x, y - 1) || !m.test(x, y + 1);
            if (exposed) boundary.set(x, y, true);
        }
    }
    return boundary;
}

double region_j(const BinaryMask& pred, const BinaryMask& gt) {
    return iou(pred, gt);
}

double boundary_f(const BinaryMask& pred, const BinaryMask& gt, int tolerance_px) {
    check_same_dims(pred, gt);
    if (tolerance_px < 0) throw std::invalid_argument("tolerance must be non-negative");

    const BinaryMask pred_b = boundary_pixels(pred);
    const BinaryMask gt_b = boundary_pixels(gt);
    const std::int64_t n_pred = pred_b.foreground_count();
    const std::int64_t n_gt = gt_b.foreground_count();
    if (n_pred == 0 && n_gt == 0) return 1.0;
    if (n_pred == 0 || n_gt == 0) return 0.0;

    const double precision =
        static_cast<double>(matched_within(pred_b, gt_b, tolerance_px)) / n_pred;
    const double recall =
        static_cast<double>(matched_within(gt_b, pred_b, tolerance_px)) / n_gt;
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

MetricScores score_video(const VideoPrediction& pred, const VideoPrediction& gt,
                         const ScoreOptions& options) {
    if (gt.empty() || pred.empty()) {
        throw std::invalid_argument("cannot score empty predictions for video " + gt.video_id());
    }
    if (pred.width() != gt.width() || pred.height() != gt.height()) {
        throw std::invalid_argument("video " + gt.video_id() + " dimension mismatch: " +
                                    std::to_string(pred.width()) + "x" + std::to_string(pred.height()) +
                                    " vs " + std::to_string(gt.width()) + "x" + std::to_string(gt.height()));
    }
    if (pred.frame_count() != gt.frame_count()) {
        throw std::invalid_argument("video " + gt.video_id() + " frame count mismatch: " +
                                    std::to_string(pred.frame_count()) + " vs " +
                                    std::to_string(gt.frame_count()));
    }
    for (std::size_t i = 0; i < gt.frames().size(); ++i) {
        if (pred.frames()[i].index != gt.frames()[i].index) {
            throw std::invalid_argument("video " + gt.video_id() + " frame index mismatch at " +
                                        std::to_string(gt.frames()[i].index));
        }
    }

    const int tolerance = options.tolerance_px >= 0
                              ? options.tolerance_px
                              : default_boundary_tolerance(gt.width(), gt.height());
    const int first_index = gt.frames().front().index;
    const std::vector<int> objects = object_ids(gt);

    MetricScores scores;
    for (int object : objects) {
        double j_sum = 0.0;
        double f_sum = 0.0;
        std::int64_t evaluated = 0;
        for (const auto& frame : gt.frames()) {
            if (!options.include_first_frame && frame.index == first_index) continue;
            const BinaryMask gt_mask = binary_mask(frame.map, object);
            const BinaryMask pred_mask = binary_mask(*pred.frame_at(frame.index), object);
            const double j = region_j(pred_mask, gt_mask);
            const double f = boundary_f(pred_mask, gt_mask, tolerance);
            j_sum += j;
            f_sum += f;
            ++evaluated;
            scores.per_frame.push_back({frame.index, object, j, f});
        }
        ObjectScore object_score;
        if (evaluated > 0) {
            object_score.j = j_sum / static_cast<double>(evaluated);
            object_score.f = f_sum / static_cast<double>(evaluated);
        } else {
            object_score.j = 1.0;
            object_score.f = 1.0;
        }
        scores.per_object.emplace(object, object_score);
    }

    if (scores.per_object.empty()) {
        // Nothing annotated: vacuous agreement.
        scores.j_mean = scores.f_mean = scores.jf = 1.0;
        return scores;
    }
    for (const auto& [id, object_score] : scores.per_object) {
        scores.j_mean += object_score.j;
        scores.f_mean += object_score.f;
    }
    scores.j_mean /= static_cast<double>(scores.per_object.size());
    scores.f_mean /= static_cast<double>(scores.per_object.size());
    scores.jf = (scores.j_mean + scores.f_mean) / 2.0;
    return scores;
}

MetricScores aggregate_objects(std::span<const MetricScores> videos) {
    MetricScores global;
    std::int64_t objects = 0;
    for (const auto& video : videos) {
        for (const auto& [id, object_score] : video.per_object) {
            global.j_mean += object_score.j;
            global.f_mean += object_score.f;
            ++objects;
        }
    }
    if (objects == 0) {
        global.j_mean = global.f_mean = global.jf = 1.0;
        return global;
    }
    global.j_mean /= static_cast<double>(objects);
    global.f_mean /= static_cast<double>(objects);
    global.jf = (global.j_mean + global.f_mean) / 2.0;
    return global;
}

MetricScores score_dataset(std::span<const std::pair<VideoPrediction, VideoPrediction>> pairs,
                           const ScoreOptions& options) {
    if (pairs.empty()) throw std::invalid_argument("cannot score an empty dataset");
    std::vector<MetricScores> videos;
    videos.reserve(pairs.size());
    for (const auto& [pred, gt] : pairs) {
        videos.push_back(score_video(pred, gt, options));
    }
    return aggregate_objects(videos);
}

}  // namespace voscascade
