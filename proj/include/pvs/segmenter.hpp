#pragma once

#include <memory>
#include <vector>

#include "pvs/mask.hpp"
#include "pvs/memory_bank.hpp"
#include "pvs/prompts.hpp"

namespace pvs {

/// One of possibly several masks a segmenter proposes for a frame, with its
/// self-assessed quality and the probability that the object is visible.
struct MaskCandidate {
    BinaryMask mask;
    double predicted_iou = 0.0;
    double occlusion_score = 1.0;
};

/// The candidate chosen for propagation, after occlusion gating: when the
/// occlusion score falls below the threshold the committed mask is empty and
/// the occluded flag is set.
struct SelectedOutput {
    BinaryMask mask;
    bool occluded = false;
    double predicted_iou = 0.0;
    double occlusion_score = 1.0;
    std::size_t candidate_index = 0;
};

/// Picks the candidate with the highest predicted IoU (ties go to the lowest
/// index) and applies the occlusion gate.
inline SelectedOutput select_output(const std::vector<MaskCandidate>& candidates,
                                    double occlusion_threshold = 0.5) {
    if (candidates.empty()) throw std::invalid_argument("select_output: no candidates");
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i)
        if (candidates[i].predicted_iou > candidates[best].predicted_iou) best = i;
    const MaskCandidate& chosen = candidates[best];
    SelectedOutput out;
    out.predicted_iou = chosen.predicted_iou;
    out.occlusion_score = chosen.occlusion_score;
    out.candidate_index = best;
    if (chosen.occlusion_score < occlusion_threshold) {
        out.mask = BinaryMask(chosen.mask.height, chosen.mask.width);
        out.occluded = true;
    } else {
        out.mask = chosen.mask;
    }
    return out;
}

struct CommitResult {
    MemoryEntry entry;
    ObjectPointer pointer;
};

/// The contract protocols drive. Implementations must be deterministic given
/// their inputs and seed, and must honor prompts on a prompted frame:
/// positive click pixels inside the output, negative outside, mask prompts
/// reproduced exactly. Instances are single-owner per (object, run).
class Segmenter {
public:
    virtual ~Segmenter() = default;

    /// Clears accumulated state back to construction time.
    virtual void reset() = 0;

    /// Streaming notification that a frame's pixels are available.
    virtual void observe_frame(int frame_idx) { (void)frame_idx; }

    virtual std::vector<MaskCandidate> segment(int frame_idx, const std::vector<Prompt>& prompts,
                                               const ConditioningSet& context) = 0;

    /// Folds the selected output into a memory entry plus object pointer for
    /// the caller to push into its bank.
    virtual CommitResult commit(int frame_idx, const SelectedOutput& out, bool is_prompted,
                                const std::vector<Prompt>& prompts = {}) = 0;
};

namespace detail {

// Shared pointer summary: normalized area, centroid, visibility. Dim 4,
// fixed per bank.
inline ObjectPointer summarize_pointer(int frame_idx, const BinaryMask& mask, bool occluded) {
    double area = static_cast<double>(mask.area());
    double cr = 0.0, cc = 0.0;
    if (area > 0) {
        for (int r = 0; r < mask.height; ++r)
            for (int c = 0; c < mask.width; ++c)
                if (mask.at(r, c)) {
                    cr += r;
                    cc += c;
                }
        cr /= area * mask.height;
        cc /= area * mask.width;
    }
    double norm_area = area / (static_cast<double>(mask.height) * mask.width);
    return ObjectPointer{frame_idx, {norm_area, cr, cc, occluded ? 0.0 : 1.0}};
}

inline CommitResult make_commit(int frame_idx, const SelectedOutput& out, bool is_prompted,
                                const std::vector<Prompt>& prompts) {
    MemoryEntry e;
    e.frame_idx = frame_idx;
    e.mask = rle_encode(out.mask);
    e.occluded = out.occluded;
    e.is_prompted = is_prompted;
    e.prompts = prompts;
    return CommitResult{std::move(e), summarize_pointer(frame_idx, out.mask, out.occluded)};
}

}  // namespace detail

}  // namespace pvs
