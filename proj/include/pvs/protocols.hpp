#pragma once

#include <functional>
#include <memory>

#include "pvs/dataset.hpp"
#include "pvs/metrics.hpp"
#include "pvs/segmenter.hpp"

namespace pvs {

enum class ProtocolKind { semi_supervised, offline_interactive, online_interactive, image_sa };

inline const char* protocol_name(ProtocolKind p) {
    switch (p) {
        case ProtocolKind::semi_supervised: return "semi";
        case ProtocolKind::offline_interactive: return "offline";
        case ProtocolKind::online_interactive: return "online";
        case ProtocolKind::image_sa: return "image";
    }
    return "?";
}

struct EvalConfig {
    PromptKind prompt_kind = PromptKind::mask;
    int n_click = 3;                  // clicks per prompted frame (interactive protocols)
    int n_frame_max = 8;              // prompted-frame budget
    double online_pause_iou = 0.75;   // pause threshold for the online protocol
    MetricMode metric_mode = MetricMode::jf;
    bool exclude_prompted = true;     // drop the prompted first frame in semi-supervised scoring
    double occlusion_threshold = 0.5;
    int boundary_tol = -1;            // <0 selects the diagonal-scaled default
    std::uint64_t seed = 0;
    int recent_capacity = 6;
    int prompted_capacity = 8;

    void validate() const {
        if (n_click < 1) throw std::invalid_argument("EvalConfig: n_click must be >= 1");
        if (n_frame_max < 1) throw std::invalid_argument("EvalConfig: n_frame_max must be >= 1");
        if (online_pause_iou <= 0.0 || online_pause_iou >= 1.0)
            throw std::invalid_argument("EvalConfig: online pause threshold must be in (0,1)");
    }
};

// --------------------------------------------------------------------------
// Annotation-time model
// --------------------------------------------------------------------------

struct TimeModel {
    double t_loc = 1.0;           // locate the object in a frame
    double t_click = 1.5;         // add one click
    double t_exam_per_300 = 30.0; // examine results, per 300-frame video

    void validate() const {
        if (t_loc <= 0 || t_click <= 0 || t_exam_per_300 <= 0)
            throw std::invalid_argument("TimeModel: all times must be positive");
    }
};

inline double annotation_time_offline(int video_frames, int n_click, int n_frame, const TimeModel& tm = {}) {
    tm.validate();
    if (video_frames < 1 || n_click < 1 || n_frame < 1)
        throw std::invalid_argument("annotation_time: counts must be positive");
    double exam = tm.t_exam_per_300 * (static_cast<double>(video_frames) / 300.0);
    return (exam + tm.t_loc + tm.t_click * n_click) * n_frame;
}

inline double annotation_time_online(int video_frames, int n_click, int n_frame, const TimeModel& tm = {}) {
    tm.validate();
    if (video_frames < 1 || n_click < 1 || n_frame < 1)
        throw std::invalid_argument("annotation_time: counts must be positive");
    double exam = tm.t_exam_per_300 * (static_cast<double>(video_frames) / 300.0);
    return exam + (tm.t_loc + tm.t_click * n_click) * n_frame;
}

// --------------------------------------------------------------------------
// Traces and run results
// --------------------------------------------------------------------------

struct RoundRecord {
    int round = 1;                     // 1-based interaction round
    std::optional<int> prompted_frame; // absent for padded rounds after early convergence
    std::vector<Prompt> prompts;
    std::vector<int> frame_indices;    // frames scored in this record
    std::vector<FrameScore> frame_scores;
    double jf_mean = 0.0;
};

struct InteractionTrace {
    std::vector<RoundRecord> rounds;
    PromptLog prompts;
};

struct RunResult {
    MaskletScore score;
    InteractionTrace trace;
    std::vector<BinaryMask> predictions;  // full video length; frames before start stay empty
    std::vector<bool> occluded;
    std::vector<int> prompted_frames;
    int start_frame = 0;
};

namespace detail {

inline int first_present_frame(const std::vector<BinaryMask>& gt) {
    for (std::size_t t = 0; t < gt.size(); ++t)
        if (!gt[t].is_empty()) return static_cast<int>(t);
    throw std::runtime_error("protocol: object never appears in the video");
}

struct Driver {
    Segmenter& seg;
    MemoryBank bank;
    const EvalConfig& cfg;

    Driver(Segmenter& s, const EvalConfig& c) : seg(s), bank(c.recent_capacity, c.prompted_capacity), cfg(c) {}

    SelectedOutput segment(int frame, const std::vector<Prompt>& prompts) {
        seg.observe_frame(frame);
        return select_output(seg.segment(frame, prompts, bank.context_for(frame)), cfg.occlusion_threshold);
    }

    void commit(int frame, const SelectedOutput& out, bool is_prompted, const std::vector<Prompt>& prompts = {}) {
        CommitResult cr = seg.commit(frame, out, is_prompted, prompts);
        if (is_prompted)
            bank.push_prompted(std::move(cr.entry), std::move(cr.pointer));
        else
            bank.push_unprompted(std::move(cr.entry), std::move(cr.pointer));
    }

    // center click + up to (k-1) interactive corrections against the running
    // first-frame prediction
    std::vector<Prompt> click_batch_initial(const BinaryMask& gt, int frame, int k) {
        std::vector<Prompt> prompts{Prompt{frame, center_click(gt)}};
        for (int i = 1; i < k; ++i) {
            BinaryMask pred = segment(frame, prompts).mask;
            if (pred == gt) break;
            prompts.push_back(Prompt{frame, correction_click(pred, gt)});
        }
        return prompts;
    }

    // up to n correction clicks on a frame with an existing prediction,
    // re-segmenting between clicks
    std::vector<Prompt> click_batch_correction(const BinaryMask& gt, int frame, BinaryMask running_pred, int n) {
        std::vector<Prompt> prompts;
        for (int i = 0; i < n; ++i) {
            if (running_pred == gt) break;
            prompts.push_back(Prompt{frame, correction_click(running_pred, gt)});
            running_pred = segment(frame, prompts).mask;
        }
        return prompts;
    }

    std::vector<Prompt> first_frame_prompts(const BinaryMask& gt, int frame) {
        PromptLog log = first_frame_prompt(gt, cfg.prompt_kind, frame, [&](const std::vector<Prompt>& so_far) {
            return segment(frame, so_far).mask;
        });
        std::vector<Prompt> out;
        for (auto& lp : log) out.push_back(std::move(lp.prompt));
        return out;
    }
};

inline MaskletScore score_run(const std::vector<BinaryMask>& preds, const std::vector<BinaryMask>& gt,
                              int start_frame, bool exclude_start, const EvalConfig& cfg) {
    std::vector<int> exclude;
    for (int t = 0; t < start_frame; ++t) exclude.push_back(t);
    if (exclude_start) exclude.push_back(start_frame);
    return score_masklet(preds, gt, exclude, cfg.metric_mode, cfg.boundary_tol);
}

inline RoundRecord record_round(int round, std::optional<int> prompted_frame, std::vector<Prompt> prompts,
                                const std::vector<BinaryMask>& preds, const std::vector<BinaryMask>& gt,
                                int from_frame, int to_frame, const EvalConfig& cfg) {
    RoundRecord rec;
    rec.round = round;
    rec.prompted_frame = prompted_frame;
    rec.prompts = std::move(prompts);
    double jf_sum = 0.0;
    for (int t = from_frame; t <= to_frame; ++t) {
        int tol = cfg.boundary_tol >= 0 ? cfg.boundary_tol : default_boundary_tol(gt[t].height, gt[t].width);
        FrameScore s = score_frame(preds[t], gt[t], cfg.metric_mode, tol);
        rec.frame_indices.push_back(t);
        jf_sum += s.jf;
        rec.frame_scores.push_back(std::move(s));
    }
    rec.jf_mean = rec.frame_scores.empty() ? 0.0 : jf_sum / static_cast<double>(rec.frame_scores.size());
    return rec;
}

}  // namespace detail

// --------------------------------------------------------------------------
// Semi-supervised VOS: prompts only on the first frame
// --------------------------------------------------------------------------

/// Prompts the first frame where the object is present (videos whose object
/// appears later are re-based to that frame), then streams the rest of the
/// video. Scoring excludes frames before the start and, by convention, the
/// prompted frame itself.
inline RunResult run_semi_supervised(Segmenter& seg, const std::vector<BinaryMask>& gt, const EvalConfig& cfg) {
    cfg.validate();
    if (gt.empty()) throw std::invalid_argument("run_semi_supervised: empty video");
    int L = static_cast<int>(gt.size());
    int s = detail::first_present_frame(gt);

    detail::Driver drv(seg, cfg);
    RunResult res;
    res.start_frame = s;
    res.predictions.assign(L, BinaryMask(gt[0].height, gt[0].width));
    res.occluded.assign(L, false);

    std::vector<Prompt> prompts = drv.first_frame_prompts(gt[s], s);
    SelectedOutput out = drv.segment(s, prompts);
    drv.commit(s, out, true, prompts);
    res.predictions[s] = out.mask;
    res.occluded[s] = out.occluded;
    res.prompted_frames.push_back(s);
    for (const Prompt& p : prompts) res.trace.prompts.push_back({1, p});

    for (int t = s + 1; t < L; ++t) {
        SelectedOutput o = drv.segment(t, {});
        res.predictions[t] = o.mask;
        res.occluded[t] = o.occluded;
        drv.commit(t, o, false);
    }

    res.score = detail::score_run(res.predictions, gt, s, cfg.exclude_prompted, cfg);
    res.trace.rounds.push_back(
        detail::record_round(1, s, std::move(prompts), res.predictions, gt, s, L - 1, cfg));
    return res;
}

// --------------------------------------------------------------------------
// Offline interactive: multiple passes, prompting the worst frame each pass
// --------------------------------------------------------------------------

/// Pass 1 prompts the start frame with n_click clicks; every later pass
/// picks the unprompted frame with the lowest IoU, adds n_click correction
/// clicks there, then resets and re-runs the whole video conditioned on all
/// prompts so far (prompted frames replayed chronologically). The trace
/// always carries n_frame_max rounds; once nothing is left to correct the
/// remaining rounds repeat the final scores.
inline RunResult run_offline_interactive(Segmenter& seg, const std::vector<BinaryMask>& gt, const EvalConfig& cfg) {
    cfg.validate();
    if (gt.empty()) throw std::invalid_argument("run_offline_interactive: empty video");
    int L = static_cast<int>(gt.size());
    int s = detail::first_present_frame(gt);

    detail::Driver drv(seg, cfg);
    RunResult res;
    res.start_frame = s;
    res.predictions.assign(L, BinaryMask(gt[0].height, gt[0].width));
    res.occluded.assign(L, false);

    std::map<int, std::vector<Prompt>> prompted;  // frame -> accumulated prompts

    for (int round = 1; round <= cfg.n_frame_max; ++round) {
        std::optional<int> target;
        std::vector<Prompt> new_prompts;
        if (round == 1) {
            target = s;
            new_prompts = drv.click_batch_initial(gt[s], s, cfg.n_click);
        } else {
            double worst = 2.0;
            for (int t = s; t < L; ++t) {
                if (prompted.count(t)) continue;
                double j = iou(res.predictions[t], gt[t]);
                if (j < worst) {
                    worst = j;
                    target = t;
                }
            }
            if (target && worst < 1.0)
                new_prompts = drv.click_batch_correction(gt[*target], *target, res.predictions[*target], cfg.n_click);
            if (!target || new_prompts.empty()) {
                // nothing left to correct: pad the trace with the settled scores
                res.trace.rounds.push_back(detail::record_round(round, std::nullopt, {}, res.predictions, gt, s,
                                                                L - 1, cfg));
                continue;
            }
        }

        auto& acc = prompted[*target];
        acc.insert(acc.end(), new_prompts.begin(), new_prompts.end());
        res.prompted_frames.push_back(*target);
        for (const Prompt& p : new_prompts) res.trace.prompts.push_back({round, p});

        // full re-run under all prompts received so far: replay prompted
        // frames chronologically, then stream the unprompted remainder
        drv.seg.reset();
        drv.bank.clear();
        for (const auto& [f, ps] : prompted) {
            SelectedOutput out = drv.segment(f, ps);
            drv.commit(f, out, true, ps);
            res.predictions[f] = out.mask;
            res.occluded[f] = out.occluded;
        }
        for (int t = s; t < L; ++t) {
            if (prompted.count(t)) continue;
            SelectedOutput out = drv.segment(t, {});
            drv.commit(t, out, false);
            res.predictions[t] = out.mask;
            res.occluded[t] = out.occluded;
        }

        res.trace.rounds.push_back(
            detail::record_round(round, target, std::move(new_prompts), res.predictions, gt, s, L - 1, cfg));
    }

    res.score = detail::score_run(res.predictions, gt, s, false, cfg);
    return res;
}

// --------------------------------------------------------------------------
// Online interactive: one forward pass, pausing on low-quality frames
// --------------------------------------------------------------------------

/// Streams once; when a frame's IoU drops below the pause threshold and
/// budget remains, n_click corrections are added on that frame and the pass
/// resumes. Frames before a pause are never revisited. The initial prompted
/// frame counts against the n_frame budget.
inline RunResult run_online_interactive(Segmenter& seg, const std::vector<BinaryMask>& gt, const EvalConfig& cfg) {
    cfg.validate();
    if (gt.empty()) throw std::invalid_argument("run_online_interactive: empty video");
    int L = static_cast<int>(gt.size());
    int s = detail::first_present_frame(gt);

    detail::Driver drv(seg, cfg);
    RunResult res;
    res.start_frame = s;
    res.predictions.assign(L, BinaryMask(gt[0].height, gt[0].width));
    res.occluded.assign(L, false);

    std::vector<Prompt> first = drv.click_batch_initial(gt[s], s, cfg.n_click);
    SelectedOutput out = drv.segment(s, first);
    drv.commit(s, out, true, first);
    res.predictions[s] = out.mask;
    res.occluded[s] = out.occluded;
    res.prompted_frames.push_back(s);
    int round = 1;
    for (const Prompt& p : first) res.trace.prompts.push_back({round, p});
    res.trace.rounds.push_back(detail::record_round(round, s, std::move(first), res.predictions, gt, s, s, cfg));

    for (int t = s + 1; t < L; ++t) {
        SelectedOutput o = drv.segment(t, {});
        bool paused = false;
        if (iou(o.mask, gt[t]) < cfg.online_pause_iou &&
            static_cast<int>(res.prompted_frames.size()) < cfg.n_frame_max) {
            paused = true;
            std::vector<Prompt> batch = drv.click_batch_correction(gt[t], t, o.mask, cfg.n_click);
            o = drv.segment(t, batch);
            drv.commit(t, o, true, batch);
            res.prompted_frames.push_back(t);
            ++round;
            for (const Prompt& p : batch) res.trace.prompts.push_back({round, p});
            res.predictions[t] = o.mask;
            res.occluded[t] = o.occluded;
            res.trace.rounds.push_back(
                detail::record_round(round, t, std::move(batch), res.predictions, gt, s, t, cfg));
        }
        if (!paused) {
            drv.commit(t, o, false);
            res.predictions[t] = o.mask;
            res.occluded[t] = o.occluded;
        }
    }

    res.score = detail::score_run(res.predictions, gt, s, false, cfg);
    return res;
}

// --------------------------------------------------------------------------
// Image segmentation: an image is a single-frame video
// --------------------------------------------------------------------------

struct ImageSaResult {
    std::vector<double> instance_ious;
    double miou = 0.0;
};

/// Per-instance independent k-click runs: center click first, then
/// interactive corrections against the running prediction; mean IoU over
/// instances.
inline ImageSaResult run_image_sa(const std::vector<BinaryMask>& instances,
                                  const std::function<std::unique_ptr<Segmenter>(std::size_t)>& make_segmenter,
                                  int k_clicks, const EvalConfig& cfg) {
    cfg.validate();
    if (k_clicks < 1) throw std::invalid_argument("run_image_sa: k_clicks must be >= 1");
    if (instances.empty()) throw std::invalid_argument("run_image_sa: no instances");
    ImageSaResult res;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const BinaryMask& gt = instances[i];
        if (gt.is_empty()) throw std::invalid_argument("run_image_sa: instance " + std::to_string(i) + " is empty");
        std::unique_ptr<Segmenter> seg = make_segmenter(i);
        detail::Driver drv(*seg, cfg);
        std::vector<Prompt> prompts = drv.click_batch_initial(gt, 0, k_clicks);
        BinaryMask pred = drv.segment(0, prompts).mask;
        res.instance_ious.push_back(iou(pred, gt));
    }
    double sum = 0.0;
    for (double v : res.instance_ious) sum += v;
    res.miou = sum / static_cast<double>(res.instance_ious.size());
    return res;
}

}  // namespace pvs
