#pragma once

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "pvs/distance.hpp"
#include "pvs/image_ops.hpp"
#include "pvs/mask.hpp"

namespace pvs {

enum class Polarity { positive, negative };

struct Click {
    int row = 0;
    int col = 0;
    Polarity polarity = Polarity::positive;

    bool operator==(const Click&) const = default;
};

/// A prompt bound to one frame: a click, a box, or a full mask.
struct Prompt {
    int frame_idx = 0;
    std::variant<Click, Box2D, BinaryMask> payload;

    bool is_click() const { return std::holds_alternative<Click>(payload); }
    bool is_box() const { return std::holds_alternative<Box2D>(payload); }
    bool is_mask() const { return std::holds_alternative<BinaryMask>(payload); }
    const Click& click() const { return std::get<Click>(payload); }
    const Box2D& box() const { return std::get<Box2D>(payload); }
    const BinaryMask& mask() const { return std::get<BinaryMask>(payload); }

    bool operator==(const Prompt&) const = default;
};

struct LoggedPrompt {
    int round = 1;
    Prompt prompt;

    bool operator==(const LoggedPrompt&) const = default;
};

using PromptLog = std::vector<LoggedPrompt>;

/// Checks a prompt against the frame geometry: clicks inside bounds, boxes
/// valid, mask prompts matching the frame size.
inline void validate_prompt(const Prompt& p, int height, int width) {
    if (p.is_click()) {
        const Click& c = p.click();
        if (c.row < 0 || c.row >= height || c.col < 0 || c.col >= width)
            throw std::invalid_argument("prompt: click (" + std::to_string(c.row) + "," + std::to_string(c.col) +
                                        ") outside a " + std::to_string(height) + "x" + std::to_string(width) +
                                        " frame");
    } else if (p.is_box()) {
        if (!p.box().valid_in(height, width)) throw std::invalid_argument("prompt: box out of range");
    } else if (p.mask().height != height || p.mask().width != width) {
        throw std::invalid_argument("prompt: mask dimensions do not match the frame");
    }
}

/// PromptLog invariants: rounds non-decreasing, at most n_click clicks per
/// (round, frame).
inline void validate_prompt_log(const PromptLog& log, int n_click) {
    int last_round = 0;
    std::map<std::pair<int, int>, int> clicks;
    for (const auto& lp : log) {
        if (lp.round < last_round) throw std::invalid_argument("prompt log: rounds must be non-decreasing");
        last_round = lp.round;
        if (lp.prompt.is_click() && ++clicks[{lp.round, lp.prompt.frame_idx}] > n_click)
            throw std::invalid_argument("prompt log: more than " + std::to_string(n_click) +
                                        " clicks on frame " + std::to_string(lp.prompt.frame_idx) + " in round " +
                                        std::to_string(lp.round));
    }
}

enum class PromptKind { click1, click3, click5, box, mask };

inline int clicks_for_kind(PromptKind k) {
    switch (k) {
        case PromptKind::click1: return 1;
        case PromptKind::click3: return 3;
        case PromptKind::click5: return 5;
        default: return 0;
    }
}

namespace detail {

// Row-major argmax with strict comparison: ties resolve to the lowest row,
// then lowest column. Works on squared distances to stay exact.
inline std::pair<int, int> scan_argmax(const std::vector<double>& values, int h, int w) {
    double best = -1.0;
    std::pair<int, int> at{0, 0};
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            double v = values[static_cast<std::size_t>(r) * w + c];
            if (v > best) {
                best = v;
                at = {r, c};
            }
        }
    return at;
}

}  // namespace detail

/// The mask pixel with the largest Euclidean distance to the mask boundary.
inline Click center_click(const BinaryMask& gt) {
    if (gt.is_empty()) throw std::invalid_argument("center_click: mask is empty");
    std::vector<double> d2 = squared_distance_transform(gt);
    auto [r, c] = detail::scan_argmax(d2, gt.height, gt.width);
    return Click{r, c, Polarity::positive};
}

namespace detail {

struct ErrorComponent {
    BinaryMask mask;
    long long area = 0;
    std::size_t first_pixel = 0;  // row-major index, for the scan-order tie-break
    Polarity polarity = Polarity::positive;
};

// False-negative and false-positive regions are labeled separately so every
// component has a single polarity.
inline std::vector<ErrorComponent> error_components(const BinaryMask& pred, const BinaryMask& gt) {
    std::vector<ErrorComponent> comps;
    auto collect = [&](const BinaryMask& region, Polarity pol) {
        ComponentLabels cl = connected_components(region, Connectivity::eight);
        std::vector<std::size_t> first(cl.count(), region.size());
        for (std::size_t i = 0; i < region.size(); ++i)
            if (cl.labels[i] && first[cl.labels[i] - 1] == region.size()) first[cl.labels[i] - 1] = i;
        for (int k = 1; k <= cl.count(); ++k)
            comps.push_back(ErrorComponent{cl.component_mask(k), cl.areas[k - 1], first[k - 1], pol});
    };
    collect(mask_and_not(gt, pred), Polarity::positive);
    collect(mask_and_not(pred, gt), Polarity::negative);
    return comps;
}

inline const ErrorComponent* largest_component(const std::vector<ErrorComponent>& comps) {
    const ErrorComponent* best = nullptr;
    for (const auto& c : comps)
        if (!best || c.area > best->area || (c.area == best->area && c.first_pixel < best->first_pixel))
            best = &c;
    return best;
}

}  // namespace detail

/// Center of the error region: largest connected component of the
/// prediction/ground-truth difference, clicked at its distance-transform
/// center. Positive for missing foreground, negative for spurious.
inline Click correction_click(const BinaryMask& pred, const BinaryMask& gt) {
    check_same_dims(pred, gt, "correction_click");
    auto comps = detail::error_components(pred, gt);
    const auto* target = detail::largest_component(comps);
    if (!target) throw std::invalid_argument("correction_click: prediction already matches ground truth");
    Click c = center_click(target->mask);
    c.polarity = target->polarity;
    return c;
}

/// Up to n correction clicks in one batch. After each click the clicked
/// component is removed from the error region, so the batch spreads across
/// distinct errors; stops early once the error is exhausted.
inline std::vector<Click> correction_clicks(const BinaryMask& pred, const BinaryMask& gt, int n) {
    if (n < 1) throw std::invalid_argument("correction_clicks: n must be >= 1");
    check_same_dims(pred, gt, "correction_clicks");
    std::vector<Click> clicks;
    BinaryMask fn = mask_and_not(gt, pred);
    BinaryMask fp = mask_and_not(pred, gt);
    for (int i = 0; i < n; ++i) {
        BinaryMask cur_pred = fp;  // remaining error, re-expressed as pred/gt pair
        BinaryMask cur_gt = fn;
        auto comps = detail::error_components(cur_pred, cur_gt);
        const auto* target = detail::largest_component(comps);
        if (!target) break;
        Click c = center_click(target->mask);
        c.polarity = target->polarity;
        clicks.push_back(c);
        BinaryMask& pool = target->polarity == Polarity::positive ? fn : fp;
        pool = mask_and_not(pool, target->mask);
    }
    return clicks;
}

/// Callback giving the segmenter's running prediction on the prompted frame
/// for the prompts issued so far; used to place interactive correction
/// clicks.
using SegmentFeedback = std::function<BinaryMask(const std::vector<Prompt>&)>;

/// Builds the first-frame prompt set for a protocol run. Click variants are
/// interactive: the initial click goes at the object center and each later
/// click corrects the running prediction returned by `feedback`.
inline PromptLog first_frame_prompt(const BinaryMask& gt, PromptKind kind, int frame_idx,
                                    const SegmentFeedback& feedback, int round = 1) {
    if (gt.is_empty()) throw std::invalid_argument("first_frame_prompt: ground truth is empty");
    PromptLog log;
    switch (kind) {
        case PromptKind::mask:
            log.push_back({round, Prompt{frame_idx, gt}});
            break;
        case PromptKind::box:
            log.push_back({round, Prompt{frame_idx, tight_box(gt)}});
            break;
        default: {
            int k = clicks_for_kind(kind);
            std::vector<Prompt> issued;
            issued.push_back(Prompt{frame_idx, center_click(gt)});
            for (int i = 1; i < k; ++i) {
                BinaryMask pred = feedback(issued);
                if (pred == gt) break;
                issued.push_back(Prompt{frame_idx, correction_click(pred, gt)});
            }
            for (auto& p : issued) log.push_back({round, std::move(p)});
            break;
        }
    }
    return log;
}

/// Prompt distribution used when simulating interactive training: the
/// ground-truth mask with probability 0.5, a positive click sampled
/// uniformly from the ground-truth foreground with probability 0.25, or the
/// bounding box with probability 0.25.
inline Prompt sample_training_prompt(std::mt19937_64& rng, const BinaryMask& gt, int frame_idx = 0) {
    if (gt.is_empty()) throw std::invalid_argument("sample_training_prompt: ground truth is empty");
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double u = uni(rng);
    if (u < 0.5) return Prompt{frame_idx, gt};
    if (u < 0.75) {
        std::vector<std::size_t> fg;
        for (std::size_t i = 0; i < gt.bits.size(); ++i)
            if (gt.bits[i]) fg.push_back(i);
        std::uniform_int_distribution<std::size_t> pick(0, fg.size() - 1);
        std::size_t idx = fg[pick(rng)];
        return Prompt{frame_idx,
                      Click{static_cast<int>(idx / gt.width), static_cast<int>(idx % gt.width), Polarity::positive}};
    }
    return Prompt{frame_idx, tight_box(gt)};
}

/// Training-time corrective click. With probability `random_click_prob` the
/// click is sampled uniformly from the ground-truth foreground irrespective
/// of the prediction; otherwise it is the center-of-error correction click.
inline Click sample_training_correction(std::mt19937_64& rng, const BinaryMask& pred, const BinaryMask& gt,
                                        double random_click_prob = 0.0) {
    if (random_click_prob > 0.0) {
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        if (uni(rng) < random_click_prob) {
            if (gt.is_empty()) throw std::invalid_argument("sample_training_correction: ground truth is empty");
            std::vector<std::size_t> fg;
            for (std::size_t i = 0; i < gt.bits.size(); ++i)
                if (gt.bits[i]) fg.push_back(i);
            std::uniform_int_distribution<std::size_t> pick(0, fg.size() - 1);
            std::size_t idx = fg[pick(rng)];
            return Click{static_cast<int>(idx / gt.width), static_cast<int>(idx % gt.width), Polarity::positive};
        }
    }
    return correction_click(pred, gt);
}

}  // namespace pvs
