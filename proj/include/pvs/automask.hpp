#pragma once

#include "pvs/dataset.hpp"
#include "pvs/oracle.hpp"
#include "pvs/protocols.hpp"

namespace pvs {

/// Grid prompting layout: one full-frame grid plus overlapped-crop passes
/// with denser local grids (points are placed on the full frame; crops only
/// shape where the points fall).
struct GridSpec {
    struct CropPass {
        int crops_per_axis = 2;
        int grid = 16;
    };

    int full_grid = 32;
    std::vector<CropPass> crop_passes{{2, 16}, {4, 4}};
    double overlap = 0.5;  // linear overlap fraction between adjacent crops

    void validate() const {
        if (full_grid < 1) throw std::invalid_argument("GridSpec: full_grid must be >= 1");
        if (overlap < 0.0 || overlap >= 1.0) throw std::invalid_argument("GridSpec: overlap must be in [0,1)");
        for (const auto& p : crop_passes)
            if (p.crops_per_axis < 2 || p.grid < 1)
                throw std::invalid_argument("GridSpec: crop passes need >= 2 crops per axis and a positive grid");
    }
};

/// Closed-form point count before deduplication.
inline long long grid_point_total(const GridSpec& spec = {}) {
    long long total = static_cast<long long>(spec.full_grid) * spec.full_grid;
    for (const auto& p : spec.crop_passes)
        total += static_cast<long long>(p.crops_per_axis) * p.crops_per_axis * p.grid * p.grid;
    return total;
}

struct GridPoints {
    std::vector<Click> points;  // deduplicated, deterministic order
    long long raw_count = 0;    // before deduplication
};

namespace detail {

// cell centers of a g x g grid over [origin, origin + extent)
inline void emit_grid(std::vector<Click>& out, int origin_r, int origin_c, int extent_h, int extent_w, int g) {
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            int r = origin_r + static_cast<int>((i + 0.5) * extent_h / g);
            int c = origin_c + static_cast<int>((j + 0.5) * extent_w / g);
            out.push_back(Click{r, c, Polarity::positive});
        }
}

// crop length for a k-per-axis pass with the given linear overlap
inline int crop_extent(int full, int k, double overlap) {
    double denom = k - (k - 1) * overlap;
    return static_cast<int>(std::ceil(full / denom));
}

}  // namespace detail

/// First-frame click prompts: full-frame grid plus denser grids over the
/// overlapped crops, crop-local points mapped to global coordinates, exact
/// duplicates removed.
inline GridPoints grid_prompts(int h, int w, const GridSpec& spec = {}) {
    spec.validate();
    if (h < spec.full_grid || w < spec.full_grid)
        throw std::invalid_argument("grid_prompts: frame " + std::to_string(h) + "x" + std::to_string(w) +
                                    " is smaller than the " + std::to_string(spec.full_grid) + "-point grid");
    std::vector<Click> raw;
    detail::emit_grid(raw, 0, 0, h, w, spec.full_grid);
    for (const auto& pass : spec.crop_passes) {
        int k = pass.crops_per_axis;
        int ch = detail::crop_extent(h, k, spec.overlap);
        int cw = detail::crop_extent(w, k, spec.overlap);
        if (ch < pass.grid || cw < pass.grid)
            throw std::invalid_argument("grid_prompts: crop smaller than its " + std::to_string(pass.grid) +
                                        "-point grid");
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                // corners anchored, evenly spaced in between
                int r0 = static_cast<int>(std::llround(static_cast<double>(i) * (h - ch) / (k - 1)));
                int c0 = static_cast<int>(std::llround(static_cast<double>(j) * (w - cw) / (k - 1)));
                detail::emit_grid(raw, r0, c0, ch, cw, pass.grid);
            }
        }
    }

    GridPoints out;
    out.raw_count = static_cast<long long>(raw.size());
    std::set<std::pair<int, int>> seen;
    for (const Click& c : raw) {
        if (c.row < 0 || c.row >= h || c.col < 0 || c.col >= w)
            throw std::logic_error("grid_prompts: point fell outside the frame");
        if (seen.insert({c.row, c.col}).second) out.points.push_back(c);
    }
    return out;
}

struct CandidateMasklet {
    Click origin;                 // the grid point that seeded it
    std::vector<RleMask> frames;  // one per video frame
    bool postprocessed = false;

    long long total_area() const {
        long long a = 0;
        for (const auto& f : frames) a += rle_area(f);
        return a;
    }
};

struct AutoMaskletResult {
    std::vector<CandidateMasklet> masklets;
    long long prompts_issued = 0;
    long long empty_dropped = 0;
    long long failures = 0;
};

/// One independent run per grid point: a single positive click on frame 0,
/// then streaming through the video. All-empty masklets are dropped;
/// per-point failures are counted and skipped.
inline AutoMaskletResult generate_candidates(
    const std::function<std::unique_ptr<Segmenter>(const Click&)>& make_segmenter, int video_frames, int height,
    int width, const GridSpec& spec = {}, const EvalConfig& cfg = {}) {
    if (video_frames < 1) throw std::invalid_argument("generate_candidates: video_frames must be >= 1");
    GridPoints grid = grid_prompts(height, width, spec);

    AutoMaskletResult res;
    res.prompts_issued = static_cast<long long>(grid.points.size());
    for (const Click& point : grid.points) {
        try {
            std::unique_ptr<Segmenter> seg = make_segmenter(point);
            detail::Driver drv(*seg, cfg);
            std::vector<Prompt> prompts{Prompt{0, point}};
            CandidateMasklet cand;
            cand.origin = point;
            SelectedOutput out = drv.segment(0, prompts);
            drv.commit(0, out, true, prompts);
            bool any = !out.mask.is_empty();
            cand.frames.push_back(rle_encode(out.mask));
            for (int t = 1; t < video_frames; ++t) {
                SelectedOutput o = drv.segment(t, {});
                drv.commit(t, o, false);
                any |= !o.mask.is_empty();
                cand.frames.push_back(rle_encode(o.mask));
            }
            if (!any) {
                res.empty_dropped++;
                continue;
            }
            res.masklets.push_back(std::move(cand));
        } catch (const std::exception&) {
            res.failures++;
        }
    }
    return res;
}

/// Per-frame post-processing: clear tiny disconnected components, then fill
/// small holes (both under the same pixel threshold).
inline CandidateMasklet postprocess(const CandidateMasklet& masklet, long long min_component_area = 200,
                                    long long max_hole_area = 200) {
    CandidateMasklet out;
    out.origin = masklet.origin;
    out.postprocessed = true;
    for (const RleMask& f : masklet.frames) {
        BinaryMask m = rle_decode(f);
        m = remove_small_components(m, min_component_area);
        m = fill_small_holes(m, max_hole_area);
        out.frames.push_back(rle_encode(m));
    }
    return out;
}

/// Mean per-frame IoU between two masklets (both-empty frames score 1).
inline double masklet_mean_iou(const CandidateMasklet& a, const CandidateMasklet& b) {
    if (a.frames.size() != b.frames.size())
        throw std::invalid_argument("masklet_mean_iou: frame counts differ");
    double sum = 0.0;
    for (std::size_t t = 0; t < a.frames.size(); ++t) sum += rle_iou(a.frames[t], b.frames[t]);
    return sum / static_cast<double>(a.frames.size());
}

/// Greedy keep-first dedup over masklets sorted by total area descending;
/// drops any masklet whose mean per-frame IoU with a kept one reaches the
/// threshold (so threshold 1.0 still collapses exact duplicates). Stands in
/// for the human verification step.
inline std::vector<CandidateMasklet> dedup(std::vector<CandidateMasklet> masklets, double iou_threshold = 0.8) {
    if (iou_threshold <= 0.0 || iou_threshold > 1.0)
        throw std::invalid_argument("dedup: threshold must be in (0,1]");
    std::stable_sort(masklets.begin(), masklets.end(),
                     [](const CandidateMasklet& a, const CandidateMasklet& b) { return a.total_area() > b.total_area(); });
    std::vector<CandidateMasklet> kept;
    for (auto& cand : masklets) {
        bool duplicate = false;
        for (const auto& k : kept)
            if (masklet_mean_iou(cand, k) >= iou_threshold) {
                duplicate = true;
                break;
            }
        if (!duplicate) kept.push_back(std::move(cand));
    }
    return kept;
}

/// Oracle-backed factory for auto-masklet generation: a click claims the
/// object whose frame-0 mask contains it; background clicks get a segmenter
/// that reports absence everywhere (the resulting empty masklet is dropped).
inline std::function<std::unique_ptr<Segmenter>(const Click&)> automask_oracle_factory(const VideoRecord& video,
                                                                                       const OracleConfig& cfg) {
    struct AbsentSegmenter : Segmenter {
        int h, w;
        AbsentSegmenter(int height, int width) : h(height), w(width) {}
        void reset() override {}
        std::vector<MaskCandidate> segment(int, const std::vector<Prompt>&, const ConditioningSet&) override {
            return {MaskCandidate{BinaryMask(h, w), 1.0, 0.0}};
        }
        CommitResult commit(int frame_idx, const SelectedOutput& out, bool is_prompted,
                            const std::vector<Prompt>& prompts) override {
            return detail::make_commit(frame_idx, out, is_prompted, prompts);
        }
    };
    return [&video, cfg](const Click& point) -> std::unique_ptr<Segmenter> {
        for (const auto& [obj_id, ann] : video.objects) {
            auto it = ann.masks.find(0);
            if (it == ann.masks.end()) continue;
            BinaryMask m = rle_decode(it->second);
            if (m.in_bounds(point.row, point.col) && m.at(point.row, point.col))
                return std::make_unique<OracleSegmenter>(video.object_masklet(obj_id), cfg);
        }
        return std::make_unique<AbsentSegmenter>(video.height, video.width);
    };
}

/// Packs kept masklets into the manifest annotation format.
inline VideoRecord masklets_to_video_record(const std::string& video_id, int frames, int height, int width,
                                            const std::vector<CandidateMasklet>& masklets) {
    VideoRecord v;
    v.id = video_id;
    v.frames = frames;
    v.height = height;
    v.width = width;
    for (std::size_t i = 0; i < masklets.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "auto_%04zu", i);
        ObjectAnnotation ann;
        for (std::size_t t = 0; t < masklets[i].frames.size(); ++t)
            if (rle_area(masklets[i].frames[t]) > 0) ann.masks[static_cast<int>(t)] = masklets[i].frames[t];
        v.objects[buf] = std::move(ann);
    }
    return v;
}

}  // namespace pvs
