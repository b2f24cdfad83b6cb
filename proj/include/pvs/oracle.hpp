#pragma once

#include <cmath>
#include <map>

#include "pvs/image_ops.hpp"
#include "pvs/segmenter.hpp"

namespace pvs {

/// Knobs of the ground-truth oracle test double. Corruption shrinks as
/// prompts accumulate: the effective radius is floor(|v| * decay^prompts),
/// which guarantees monotone improvement as interaction goes on.
struct OracleConfig {
    int dilation_px = 0;      // negative erodes instead
    int translation_px = 0;   // column shift
    double drop_prob = 0.0;   // per-frame chance of predicting empty (unprompted frames only)
    int drop_period = 0;      // deterministically drop every period-th frame (0 = off)
    double decay = 1.0;       // corruption multiplier per prompt received on the video
    std::uint64_t seed = 0;
    bool multi_candidate = false;  // also emit a dilated second candidate

    void validate() const {
        if (decay <= 0.0 || decay > 1.0) throw std::invalid_argument("OracleConfig: decay must be in (0,1]");
        if (drop_prob < 0.0 || drop_prob > 1.0)
            throw std::invalid_argument("OracleConfig: drop_prob must be in [0,1]");
    }
};

namespace detail {

// splitmix64; stable per-(seed, frame) uniform so drops replay identically
// across protocol re-runs.
inline double hash01(std::uint64_t seed, std::uint64_t frame) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (frame + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z = z ^ (z >> 31);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Segments by corrupting the ground truth it secretly holds. Any prompt on
/// a frame fixes that frame to the exact ground truth; unprompted frames are
/// dilated/eroded/translated with corruption scaled by decay^(prompts seen
/// so far), and optionally dropped. With zero corruption this is the
/// noiseless identity oracle the acceptance laws rely on.
class OracleSegmenter : public Segmenter {
public:
    OracleSegmenter(std::vector<BinaryMask> gt_masklet, OracleConfig config)
        : gt_(std::move(gt_masklet)), config_(config) {
        config_.validate();
        if (gt_.empty()) throw std::invalid_argument("OracleSegmenter: empty ground-truth masklet");
    }

    void reset() override { prompts_seen_.clear(); }

    int prompt_count() const {
        int total = 0;
        for (const auto& [frame, n] : prompts_seen_) total += n;
        return total;
    }

    std::vector<MaskCandidate> segment(int frame_idx, const std::vector<Prompt>& prompts,
                                       const ConditioningSet& context) override {
        (void)context;  // the oracle conditions on nothing but its secret
        const BinaryMask& gt = gt_at(frame_idx);
        for (const Prompt& p : prompts) validate_prompt(p, gt.height, gt.width);
        if (!prompts.empty()) {
            int& seen = prompts_seen_[frame_idx];
            seen = std::max(seen, static_cast<int>(prompts.size()));
            return {make_prompted(gt, prompts)};
        }
        if (gt.is_empty()) {
            // object absent: report it as such
            return {MaskCandidate{BinaryMask(gt.height, gt.width), 1.0, 0.0}};
        }
        if (dropped(frame_idx)) {
            return {MaskCandidate{BinaryMask(gt.height, gt.width), 0.0, 0.0}};
        }
        BinaryMask pred = corrupt(gt);
        double occ = pred.is_empty() ? 0.0 : 1.0;
        MaskCandidate primary{std::move(pred), 0.0, occ};
        primary.predicted_iou = iou(primary.mask, gt);
        if (config_.multi_candidate) {
            MaskCandidate alt{dilate(primary.mask, 1), 0.6 * primary.predicted_iou, occ};
            return {std::move(primary), std::move(alt)};
        }
        return {std::move(primary)};
    }

    CommitResult commit(int frame_idx, const SelectedOutput& out, bool is_prompted,
                        const std::vector<Prompt>& prompts = {}) override {
        return detail::make_commit(frame_idx, out, is_prompted, prompts);
    }

private:
    const BinaryMask& gt_at(int frame_idx) const {
        if (frame_idx < 0 || static_cast<std::size_t>(frame_idx) >= gt_.size())
            throw std::out_of_range("OracleSegmenter: frame index " + std::to_string(frame_idx) +
                                    " outside masklet of length " + std::to_string(gt_.size()));
        return gt_[static_cast<std::size_t>(frame_idx)];
    }

    MaskCandidate make_prompted(const BinaryMask& gt, const std::vector<Prompt>& prompts) const {
        // a prompted frame is fixed: exact ground truth, with explicit click
        // honoring so the contract holds even for off-ground-truth prompts
        BinaryMask m = gt;
        for (const Prompt& p : prompts) {
            if (p.is_mask()) {
                m = p.mask();
            } else if (p.is_click()) {
                const Click& c = p.click();
                if (m.in_bounds(c.row, c.col)) m.set(c.row, c.col, c.polarity == Polarity::positive);
            }
        }
        double occ = m.is_empty() ? 0.0 : 1.0;
        return MaskCandidate{std::move(m), 1.0, occ};
    }

    bool dropped(int frame_idx) const {
        if (config_.drop_period > 0 && frame_idx % config_.drop_period == config_.drop_period - 1) return true;
        if (config_.drop_prob > 0.0 && detail::hash01(config_.seed, static_cast<std::uint64_t>(frame_idx)) < config_.drop_prob)
            return true;
        return false;
    }

    BinaryMask corrupt(const BinaryMask& gt) const {
        double scale = std::pow(config_.decay, prompt_count());
        int eff_dil = static_cast<int>(std::floor(std::abs(config_.dilation_px) * scale));
        int eff_tr = static_cast<int>(std::floor(std::abs(config_.translation_px) * scale));
        BinaryMask m = gt;
        if (eff_dil > 0) m = config_.dilation_px > 0 ? dilate(m, eff_dil) : erode(m, eff_dil);
        if (eff_tr > 0) m = translate(m, 0, config_.translation_px > 0 ? eff_tr : -eff_tr);
        return m;
    }

    std::vector<BinaryMask> gt_;
    OracleConfig config_;
    std::map<int, int> prompts_seen_;  // frame -> max prompt count observed
};

}  // namespace pvs
