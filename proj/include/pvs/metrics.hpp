#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pvs/image_ops.hpp"
#include "pvs/mask.hpp"

namespace pvs {

enum class MetricMode { jf, j_only };

/// Region and boundary scores for one frame. In J-only mode (VOST-style
/// scoring) f is absent and jf degenerates to j so aggregation stays uniform.
struct FrameScore {
    double j = 0.0;
    std::optional<double> f;
    double jf = 0.0;

    static FrameScore make(double j_val, std::optional<double> f_val) {
        FrameScore s;
        s.j = j_val;
        s.f = f_val;
        s.jf = f_val ? (j_val + *f_val) / 2.0 : j_val;
        return s;
    }
};

/// Per-masklet scores. Means are arithmetic means over `scored_frames` only;
/// the scored set is kept explicit so exclusion conventions stay auditable.
struct MaskletScore {
    std::vector<int> scored_frames;
    std::vector<FrameScore> frames;  // parallel to scored_frames
    double j_mean = 0.0;
    std::optional<double> f_mean;
    double jf_mean = 0.0;
    MetricMode mode = MetricMode::jf;
};

/// DAVIS-convention default: tolerance scales with the image diagonal.
inline int default_boundary_tol(int height, int width) {
    double diag = std::sqrt(static_cast<double>(height) * height + static_cast<double>(width) * width);
    return static_cast<int>(std::ceil(0.008 * diag));
}

/// Boundary F-measure within a pixel tolerance. Both boundaries empty scores
/// 1.0; exactly one empty scores 0.0.
inline double boundary_f(const BinaryMask& pred, const BinaryMask& gt, int tol) {
    check_same_dims(pred, gt, "boundary_f");
    if (tol < 0) throw std::invalid_argument("boundary_f: tol must be >= 0");
    BinaryMask bp = boundary(pred);
    BinaryMask bg = boundary(gt);
    long long np = bp.area(), ng = bg.area();
    if (np == 0 && ng == 0) return 1.0;
    if (np == 0 || ng == 0) return 0.0;

    double tol2 = static_cast<double>(tol) * tol;
    std::vector<double> d2_gt = squared_distance_to_set(gt.height, gt.width, bg.bits);
    std::vector<double> d2_pred = squared_distance_to_set(pred.height, pred.width, bp.bits);

    long long hit_p = 0, hit_g = 0;
    for (std::size_t i = 0; i < bp.bits.size(); ++i) {
        if (bp.bits[i] && d2_gt[i] <= tol2) ++hit_p;
        if (bg.bits[i] && d2_pred[i] <= tol2) ++hit_g;
    }
    double precision = static_cast<double>(hit_p) / static_cast<double>(np);
    double recall = static_cast<double>(hit_g) / static_cast<double>(ng);
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

inline FrameScore score_frame(const BinaryMask& pred, const BinaryMask& gt, MetricMode mode, int tol) {
    double j = iou(pred, gt);
    if (mode == MetricMode::j_only) return FrameScore::make(j, std::nullopt);
    return FrameScore::make(j, boundary_f(pred, gt, tol));
}

/// Scores a masklet frame by frame, skipping `exclude_prompted` indices.
/// tol < 0 selects the diagonal-scaled default per frame.
inline MaskletScore score_masklet(const std::vector<BinaryMask>& preds, const std::vector<BinaryMask>& gts,
                                  const std::vector<int>& exclude_prompted, MetricMode mode = MetricMode::jf,
                                  int tol = -1) {
    if (preds.size() != gts.size())
        throw std::invalid_argument("score_masklet: pred/gt length mismatch (" + std::to_string(preds.size()) +
                                    " vs " + std::to_string(gts.size()) + ")");
    std::vector<std::uint8_t> excluded(preds.size(), 0);
    for (int e : exclude_prompted)
        if (e >= 0 && static_cast<std::size_t>(e) < excluded.size()) excluded[e] = 1;

    MaskletScore out;
    out.mode = mode;
    double js = 0.0, fs = 0.0, jfs = 0.0;
    for (std::size_t t = 0; t < preds.size(); ++t) {
        if (excluded[t]) continue;
        int frame_tol = tol >= 0 ? tol : default_boundary_tol(gts[t].height, gts[t].width);
        FrameScore s = score_frame(preds[t], gts[t], mode, frame_tol);
        out.scored_frames.push_back(static_cast<int>(t));
        out.frames.push_back(s);
        js += s.j;
        if (s.f) fs += *s.f;
        jfs += s.jf;
    }
    if (out.frames.empty()) throw std::runtime_error("score_masklet: no frames left to score");
    double n = static_cast<double>(out.frames.size());
    out.j_mean = js / n;
    if (mode == MetricMode::jf) out.f_mean = fs / n;
    out.jf_mean = jfs / n;
    return out;
}

/// YouTube-VOS G: mean of the seen/unseen J and F split means.
inline double g_mean(double js, double fs, double ju, double fu) {
    return (js + fs + ju + fu) / 4.0;
}

/// True when the presence sequence contains a 1 -> 0+ -> 1 pattern.
inline bool disappears_and_reappears(const std::vector<std::uint8_t>& presence) {
    bool seen = false, gone = false;
    for (std::uint8_t p : presence) {
        if (p) {
            if (gone) return true;
            seen = true;
        } else if (seen) {
            gone = true;
        }
    }
    return false;
}

/// Percent of masklets that disappear in at least one frame and re-appear.
inline double disappearance_rate_percent(const std::vector<std::vector<std::uint8_t>>& presences) {
    if (presences.empty()) return 0.0;
    long long n = 0;
    for (const auto& p : presences)
        if (disappears_and_reappears(p)) ++n;
    return 100.0 * static_cast<double>(n) / static_cast<double>(presences.size());
}

// Size buckets over reference-mask areas, lower bound inclusive:
// small [1, 32^2), medium [32^2, 96^2), large [96^2, inf).
enum class SizeBucket { small, medium, large };

inline SizeBucket size_bucket(long long area) {
    if (area < 1) throw std::invalid_argument("size_bucket: area must be positive");
    if (area < 32 * 32) return SizeBucket::small;
    if (area < 96 * 96) return SizeBucket::medium;
    return SizeBucket::large;
}

inline const char* size_bucket_name(SizeBucket b) {
    switch (b) {
        case SizeBucket::small: return "small";
        case SizeBucket::medium: return "medium";
        case SizeBucket::large: return "large";
    }
    return "?";
}

struct AlignmentBucketStat {
    long long pairs = 0;
    long long aligned = 0;

    std::optional<double> percent() const {
        if (pairs == 0) return std::nullopt;
        return 100.0 * static_cast<double>(aligned) / static_cast<double>(pairs);
    }
};

struct AlignmentReport {
    AlignmentBucketStat overall;
    AlignmentBucketStat by_bucket[3];  // indexed by SizeBucket

    const AlignmentBucketStat& bucket(SizeBucket b) const { return by_bucket[static_cast<int>(b)]; }
};

/// Fraction of (mask, reference) pairs with IoU strictly above `threshold`,
/// overall and per reference-area size bucket. Pairing by (video, object,
/// frame) is the caller's job; pairs with an empty reference only count
/// toward the overall stat (no bucket for area 0).
inline AlignmentReport alignment_score(const std::vector<std::pair<BinaryMask, BinaryMask>>& pairs,
                                       double threshold = 0.75) {
    AlignmentReport rep;
    for (const auto& [mask, ref] : pairs) {
        bool ok = iou(mask, ref) > threshold;
        rep.overall.pairs++;
        rep.overall.aligned += ok;
        long long ref_area = ref.area();
        if (ref_area >= 1) {
            auto& b = rep.by_bucket[static_cast<int>(size_bucket(ref_area))];
            b.pairs++;
            b.aligned += ok;
        }
    }
    return rep;
}

struct AreaStats {
    std::vector<double> normalized_areas;  // area / (h*w), one per mask
    std::vector<long long> histogram;      // uniform bins over [0, 1]
    double fraction_below_0_1 = 0.0;

    int bins() const { return static_cast<int>(histogram.size()); }
};

/// Distribution of mask areas normalized by frame resolution.
inline AreaStats area_stats(const std::vector<BinaryMask>& masks, int bins = 20) {
    if (bins < 1) throw std::invalid_argument("area_stats: bins must be >= 1");
    AreaStats st;
    st.histogram.assign(bins, 0);
    long long below = 0;
    for (const auto& m : masks) {
        double a = static_cast<double>(m.area()) / (static_cast<double>(m.height) * m.width);
        st.normalized_areas.push_back(a);
        int bin = std::min(bins - 1, static_cast<int>(a * bins));
        st.histogram[bin]++;
        if (a < 0.1) ++below;
    }
    if (!masks.empty())
        st.fraction_below_0_1 = static_cast<double>(below) / static_cast<double>(masks.size());
    return st;
}

}  // namespace pvs
