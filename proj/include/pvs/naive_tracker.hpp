#pragma once

#include <cmath>
#include <deque>

#include "pvs/image_ops.hpp"
#include "pvs/segmenter.hpp"

namespace pvs {

struct TrackerConfig {
    int search_radius_px = 16;
    double match_error_threshold = 0.5;  // normalized MAD above this reads as occlusion
    int patch_stride = 1;                // subsampling when scoring a candidate offset
    int grow_tolerance = 16;             // intensity tolerance for click/box region growing

    void validate() const {
        if (search_radius_px < 1) throw std::invalid_argument("TrackerConfig: search_radius_px must be >= 1");
        if (patch_stride < 1) throw std::invalid_argument("TrackerConfig: patch_stride must be >= 1");
    }
};

/// Non-neural reference tracker over 8-bit grayscale frames. Prompted
/// frames: mask prompts are reproduced exactly; clicks and boxes grow into
/// the local connected intensity region. Unprompted frames: the most recent
/// non-occluded memory mask is matched by exhaustive integer-translation
/// search over the mask's bounding-box patch; high match error reads as
/// occlusion. Exists to exercise the memory bank and protocols end to end.
class NaiveTracker : public Segmenter {
public:
    NaiveTracker(std::vector<GrayImage> frames, TrackerConfig config)
        : frames_(std::move(frames)), config_(config) {
        config_.validate();
        if (frames_.empty()) throw std::invalid_argument("NaiveTracker: no frames");
    }

    void reset() override {}

    std::vector<MaskCandidate> segment(int frame_idx, const std::vector<Prompt>& prompts,
                                       const ConditioningSet& context) override {
        const GrayImage& frame = frame_at(frame_idx);
        for (const Prompt& p : prompts) validate_prompt(p, frame.height, frame.width);
        if (!prompts.empty()) return {segment_prompted(frame, prompts)};

        const MemoryEntry* memory = latest_usable_memory(context);
        if (!memory)
            throw std::runtime_error("NaiveTracker: frame " + std::to_string(frame_idx) +
                                     " has no prompt and no usable memory");
        return {track_from_memory(frame, *memory)};
    }

    CommitResult commit(int frame_idx, const SelectedOutput& out, bool is_prompted,
                        const std::vector<Prompt>& prompts = {}) override {
        return detail::make_commit(frame_idx, out, is_prompted, prompts);
    }

private:
    const GrayImage& frame_at(int frame_idx) const {
        if (frame_idx < 0 || static_cast<std::size_t>(frame_idx) >= frames_.size())
            throw std::out_of_range("NaiveTracker: frame index out of range");
        return frames_[static_cast<std::size_t>(frame_idx)];
    }

    // flood fill over pixels within grow_tolerance of the seed intensity
    BinaryMask grow_region(const GrayImage& frame, int seed_r, int seed_c) const {
        BinaryMask region(frame.height, frame.width);
        int base = frame.at(seed_r, seed_c);
        std::vector<std::pair<int, int>> stack{{seed_r, seed_c}};
        region.set(seed_r, seed_c);
        static constexpr int dr[] = {-1, -1, -1, 0, 0, 1, 1, 1};
        static constexpr int dc[] = {-1, 0, 1, -1, 1, -1, 0, 1};
        while (!stack.empty()) {
            auto [r, c] = stack.back();
            stack.pop_back();
            for (int k = 0; k < 8; ++k) {
                int nr = r + dr[k], nc = c + dc[k];
                if (!frame.in_bounds(nr, nc) || region.at(nr, nc)) continue;
                if (std::abs(frame.at(nr, nc) - base) <= config_.grow_tolerance) {
                    region.set(nr, nc);
                    stack.push_back({nr, nc});
                }
            }
        }
        return region;
    }

    MaskCandidate segment_prompted(const GrayImage& frame, const std::vector<Prompt>& prompts) const {
        // a mask prompt wins outright
        for (auto it = prompts.rbegin(); it != prompts.rend(); ++it)
            if (it->is_mask()) return MaskCandidate{it->mask(), 1.0, it->mask().is_empty() ? 0.0 : 1.0};

        BinaryMask out(frame.height, frame.width);
        for (const Prompt& p : prompts) {
            if (p.is_click() && p.click().polarity == Polarity::positive) {
                BinaryMask grown = grow_region(frame, p.click().row, p.click().col);
                for (std::size_t i = 0; i < out.bits.size(); ++i) out.bits[i] |= grown.bits[i];
            } else if (p.is_box()) {
                const Box2D& b = p.box();
                int cr = (b.r0 + b.r1 - 1) / 2, cc = (b.c0 + b.c1 - 1) / 2;
                BinaryMask grown = grow_region(frame, cr, cc);
                for (std::size_t i = 0; i < out.bits.size(); ++i) out.bits[i] |= grown.bits[i];
            }
        }
        for (const Prompt& p : prompts) {
            if (p.is_click() && p.click().polarity == Polarity::negative) {
                if (out.at(p.click().row, p.click().col)) {
                    BinaryMask grown = grow_region(frame, p.click().row, p.click().col);
                    for (std::size_t i = 0; i < out.bits.size(); ++i) out.bits[i] &= !grown.bits[i];
                }
            }
        }
        // pixel-level prompt honoring, regardless of what the growth did
        for (const Prompt& p : prompts)
            if (p.is_click()) out.set(p.click().row, p.click().col, p.click().polarity == Polarity::positive);
        double score = out.is_empty() ? 0.0 : 1.0;
        return MaskCandidate{std::move(out), score, score};
    }

    const MemoryEntry* latest_usable_memory(const ConditioningSet& context) const {
        const MemoryEntry* best = nullptr;
        auto consider = [&](const MemoryEntry& e) {
            if (e.occluded || rle_area(e.mask) == 0) return;
            if (!best || e.frame_idx > best->frame_idx) best = &e;
        };
        for (const auto& t : context.recent) consider(t.entry);
        for (const auto& e : context.prompted) consider(e);
        return best;
    }

    MaskCandidate track_from_memory(const GrayImage& frame, const MemoryEntry& memory) const {
        BinaryMask mem_mask = rle_decode(memory.mask);
        const GrayImage& mem_frame = frame_at(memory.frame_idx);
        Box2D bb = tight_box(mem_mask);

        int R = config_.search_radius_px;
        double best_err = -1.0;
        int best_dr = 0, best_dc = 0;
        for (int dr = -R; dr <= R; ++dr) {
            for (int dc = -R; dc <= R; ++dc) {
                if (bb.r0 + dr < 0 || bb.r1 + dr > frame.height || bb.c0 + dc < 0 || bb.c1 + dc > frame.width)
                    continue;
                long long total = 0, count = 0;
                for (int r = bb.r0; r < bb.r1; r += config_.patch_stride) {
                    for (int c = bb.c0; c < bb.c1; c += config_.patch_stride) {
                        total += std::abs(static_cast<int>(frame.at(r + dr, c + dc)) -
                                          static_cast<int>(mem_frame.at(r, c)));
                        ++count;
                    }
                }
                double err = count ? static_cast<double>(total) / (255.0 * count) : 1.0;
                if (best_err < 0.0 || err < best_err) {
                    best_err = err;
                    best_dr = dr;
                    best_dc = dc;
                }
            }
        }
        if (best_err < 0.0) {
            // no in-frame placement at all: treat as occlusion
            return MaskCandidate{BinaryMask(frame.height, frame.width), 0.0, 0.0};
        }
        double occ = best_err > config_.match_error_threshold ? 0.0 : 1.0 - best_err;
        BinaryMask moved = translate(mem_mask, best_dr, best_dc);
        return MaskCandidate{std::move(moved), occ, occ};
    }

    std::vector<GrayImage> frames_;
    TrackerConfig config_;
};

}  // namespace pvs
