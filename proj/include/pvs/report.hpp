#pragma once

#include "pvs/naive_tracker.hpp"
#include "pvs/oracle.hpp"
#include "pvs/protocols.hpp"
#include "pvs/version.hpp"

namespace pvs {

enum class GAveraging { per_object, per_category };

struct ObjectResult {
    std::string video_id;
    std::string object_id;
    bool failed = false;
    std::string error;
    std::optional<MaskletScore> score;
    std::vector<double> round_jf;  // interactive protocols: running J&F per round
    std::vector<int> prompted_frames;
    std::optional<double> annotation_time_s;
};

struct SplitMeans {
    double js = 0.0, fs = 0.0, ju = 0.0, fu = 0.0;
    double g = 0.0;
};

struct DatasetReport {
    std::string dataset;
    std::string protocol;
    std::string tool_version = kToolVersion;
    std::uint64_t seed = 0;
    json config;  // embedded for reproducibility

    std::vector<ObjectResult> objects;  // canonical (video_id, object_id) order
    int failed_count = 0;

    // unweighted means over scored objects
    double j_mean = 0.0;
    std::optional<double> f_mean;
    double jf_mean = 0.0;
    std::vector<double> round_jf_mean;        // per-round means across objects
    std::optional<SplitMeans> splits;         // when objects carry seen/unseen tags
    std::optional<SplitMeans> splits_by_category;
};

inline json eval_config_to_json(const EvalConfig& cfg) {
    const char* kind = cfg.prompt_kind == PromptKind::click1   ? "click1"
                       : cfg.prompt_kind == PromptKind::click3 ? "click3"
                       : cfg.prompt_kind == PromptKind::click5 ? "click5"
                       : cfg.prompt_kind == PromptKind::box    ? "box"
                                                               : "mask";
    return json{{"prompt_kind", kind},
                {"n_click", cfg.n_click},
                {"n_frame_max", cfg.n_frame_max},
                {"online_pause_iou", cfg.online_pause_iou},
                {"metric_mode", cfg.metric_mode == MetricMode::jf ? "jf" : "j_only"},
                {"exclude_prompted", cfg.exclude_prompted},
                {"occlusion_threshold", cfg.occlusion_threshold},
                {"boundary_tol", cfg.boundary_tol},
                {"seed", cfg.seed},
                {"recent_capacity", cfg.recent_capacity},
                {"prompted_capacity", cfg.prompted_capacity}};
}

inline PromptKind prompt_kind_from_name(const std::string& name) {
    if (name == "click1") return PromptKind::click1;
    if (name == "click3") return PromptKind::click3;
    if (name == "click5") return PromptKind::click5;
    if (name == "box") return PromptKind::box;
    if (name == "mask") return PromptKind::mask;
    throw std::invalid_argument("unknown prompt kind '" + name + "'");
}

// --------------------------------------------------------------------------
// Dataset execution: one independent (segmenter, bank) pair per object
// --------------------------------------------------------------------------

using SegmenterFactory =
    std::function<std::unique_ptr<Segmenter>(const VideoRecord&, const std::string& object_id)>;

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

/// One oracle per object, holding that object's ground truth. The per-object
/// seed is derived from the base seed and the (video, object) ids so results
/// do not depend on traversal order.
inline SegmenterFactory oracle_factory(const OracleConfig& base) {
    return [base](const VideoRecord& v, const std::string& object_id) -> std::unique_ptr<Segmenter> {
        OracleConfig cfg = base;
        cfg.seed = base.seed ^ detail::fnv1a(v.id + "/" + object_id);
        return std::make_unique<OracleSegmenter>(v.object_masklet(object_id), cfg);
    };
}

/// Template tracker over the video's PGM frames; frames are loaded once per
/// video and shared across that video's objects.
inline SegmenterFactory naive_factory(const TrackerConfig& cfg, const std::string& base_dir = "") {
    auto cache = std::make_shared<std::map<std::string, std::vector<GrayImage>>>();
    return [cfg, base_dir, cache](const VideoRecord& v, const std::string&) -> std::unique_ptr<Segmenter> {
        auto it = cache->find(v.id);
        if (it == cache->end()) it = cache->emplace(v.id, load_video_frames(v, base_dir)).first;
        return std::make_unique<NaiveTracker>(it->second, cfg);
    };
}

namespace detail {

inline void aggregate_report(DatasetReport& rep, const Manifest& manifest, GAveraging g_mode) {
    double js = 0.0, fs = 0.0, jfs = 0.0;
    long long n = 0;
    bool have_f = false;
    std::size_t max_rounds = 0;
    for (const auto& obj : rep.objects) {
        if (obj.failed) {
            rep.failed_count++;
            continue;
        }
        const MaskletScore& s = *obj.score;
        js += s.j_mean;
        jfs += s.jf_mean;
        if (s.f_mean) {
            fs += *s.f_mean;
            have_f = true;
        }
        ++n;
        max_rounds = std::max(max_rounds, obj.round_jf.size());
    }
    if (n > 0) {
        rep.j_mean = js / n;
        rep.jf_mean = jfs / n;
        if (have_f) rep.f_mean = fs / n;
    }

    // per-object round trajectories averaged across objects at each round
    if (max_rounds > 0) {
        rep.round_jf_mean.assign(max_rounds, 0.0);
        std::vector<long long> counts(max_rounds, 0);
        for (const auto& obj : rep.objects) {
            for (std::size_t r = 0; r < obj.round_jf.size(); ++r) {
                rep.round_jf_mean[r] += obj.round_jf[r];
                counts[r]++;
            }
        }
        for (std::size_t r = 0; r < max_rounds; ++r)
            if (counts[r]) rep.round_jf_mean[r] /= static_cast<double>(counts[r]);
    }

    // seen/unseen split means when annotations carry the tags
    struct Acc {
        double j = 0.0, f = 0.0;
        long long n = 0;
    };
    auto find_annotation = [&](const ObjectResult& obj) -> const ObjectAnnotation* {
        for (const auto& v : manifest.videos)
            if (v.id == obj.video_id) {
                auto it = v.objects.find(obj.object_id);
                return it == v.objects.end() ? nullptr : &it->second;
            }
        return nullptr;
    };

    bool any_split = false;
    std::map<std::pair<std::string, std::string>, Acc> by_cat[2];  // (split, category) when per-category
    Acc split_acc[2];
    for (const auto& obj : rep.objects) {
        if (obj.failed) continue;
        const ObjectAnnotation* ann = find_annotation(obj);
        if (!ann || !ann->split) continue;
        any_split = true;
        int k = *ann->split == "seen" ? 0 : 1;
        split_acc[k].j += obj.score->j_mean;
        split_acc[k].f += obj.score->f_mean.value_or(obj.score->j_mean);
        split_acc[k].n++;
        std::string cat = ann->category.value_or("");
        auto& a = by_cat[k][{*ann->split, cat}];
        a.j += obj.score->j_mean;
        a.f += obj.score->f_mean.value_or(obj.score->j_mean);
        a.n++;
    }
    if (any_split && split_acc[0].n > 0 && split_acc[1].n > 0) {
        SplitMeans sm;
        sm.js = split_acc[0].j / split_acc[0].n;
        sm.fs = split_acc[0].f / split_acc[0].n;
        sm.ju = split_acc[1].j / split_acc[1].n;
        sm.fu = split_acc[1].f / split_acc[1].n;
        sm.g = g_mean(sm.js, sm.fs, sm.ju, sm.fu);
        rep.splits = sm;

        // alternative ordering: average per category first, then across
        // categories within each split
        SplitMeans smc;
        double cj[2] = {0, 0}, cf[2] = {0, 0};
        long long cn[2] = {0, 0};
        for (int k = 0; k < 2; ++k)
            for (const auto& [key, a] : by_cat[k]) {
                cj[k] += a.j / a.n;
                cf[k] += a.f / a.n;
                cn[k]++;
            }
        if (cn[0] > 0 && cn[1] > 0) {
            smc.js = cj[0] / cn[0];
            smc.fs = cf[0] / cn[0];
            smc.ju = cj[1] / cn[1];
            smc.fu = cf[1] / cn[1];
            smc.g = g_mean(smc.js, smc.fs, smc.ju, smc.fu);
            if (g_mode == GAveraging::per_category)
                rep.splits = smc;
            else
                rep.splits_by_category = smc;
        }
    }
}

}  // namespace detail

/// Runs one protocol over every (video, object) pair with an independent
/// segmenter and memory bank per object. Per-object failures are recorded in
/// the report rather than aborting the run.
inline DatasetReport run_dataset(const SegmenterFactory& factory, const Manifest& manifest, ProtocolKind protocol,
                                 const EvalConfig& cfg, GAveraging g_mode = GAveraging::per_object) {
    cfg.validate();
    DatasetReport rep;
    rep.dataset = manifest.dataset;
    rep.protocol = protocol_name(protocol);
    rep.seed = cfg.seed;
    rep.config = eval_config_to_json(cfg);

    // canonical order: videos sorted by id, objects sorted within
    std::vector<const VideoRecord*> videos;
    for (const auto& v : manifest.videos) videos.push_back(&v);
    std::sort(videos.begin(), videos.end(),
              [](const VideoRecord* a, const VideoRecord* b) { return a->id < b->id; });

    for (const VideoRecord* v : videos) {
        for (const auto& [obj_id, ann] : v->objects) {
            ObjectResult obj;
            obj.video_id = v->id;
            obj.object_id = obj_id;
            try {
                std::vector<BinaryMask> gt = v->object_masklet(obj_id);
                std::unique_ptr<Segmenter> seg = factory(*v, obj_id);
                if (protocol == ProtocolKind::image_sa) {
                    int k = clicks_for_kind(cfg.prompt_kind);
                    if (k < 1)
                        throw std::invalid_argument("image protocol takes click prompt kinds only");
                    ImageSaResult r = run_image_sa({gt.at(0)}, [&](std::size_t) { return std::move(seg); }, k, cfg);
                    MaskletScore ms;
                    ms.mode = MetricMode::j_only;
                    ms.scored_frames = {0};
                    ms.frames = {FrameScore::make(r.instance_ious[0], std::nullopt)};
                    ms.j_mean = ms.jf_mean = r.miou;
                    obj.score = std::move(ms);
                } else {
                    RunResult run;
                    if (protocol == ProtocolKind::semi_supervised)
                        run = run_semi_supervised(*seg, gt, cfg);
                    else if (protocol == ProtocolKind::offline_interactive)
                        run = run_offline_interactive(*seg, gt, cfg);
                    else
                        run = run_online_interactive(*seg, gt, cfg);
                    obj.score = std::move(run.score);
                    obj.prompted_frames = std::move(run.prompted_frames);
                    if (protocol != ProtocolKind::semi_supervised) {
                        for (const auto& r : run.trace.rounds) obj.round_jf.push_back(r.jf_mean);
                        int n_frames_prompted = static_cast<int>(obj.prompted_frames.size());
                        obj.annotation_time_s = protocol == ProtocolKind::offline_interactive
                                                    ? annotation_time_offline(v->frames, cfg.n_click,
                                                                              std::max(1, n_frames_prompted))
                                                    : annotation_time_online(v->frames, cfg.n_click,
                                                                             std::max(1, n_frames_prompted));
                    }
                }
            } catch (const std::exception& e) {
                obj.failed = true;
                obj.error = e.what();
            }
            rep.objects.push_back(std::move(obj));
        }
    }

    detail::aggregate_report(rep, manifest, g_mode);
    return rep;
}

// --------------------------------------------------------------------------
// Report serialization: schema pvs-report/1
// --------------------------------------------------------------------------

inline constexpr const char* kReportSchema = "pvs-report/1";

inline json report_to_json(const DatasetReport& rep) {
    json objs = json::array();
    for (const auto& o : rep.objects) {
        json jo{{"video", o.video_id}, {"object", o.object_id}, {"failed", o.failed}};
        if (o.failed) {
            jo["error"] = o.error;
        } else {
            const MaskletScore& s = *o.score;
            json frames = json::array();
            for (std::size_t i = 0; i < s.frames.size(); ++i) {
                json jf{{"idx", s.scored_frames[i]}, {"j", s.frames[i].j}, {"jf", s.frames[i].jf}};
                if (s.frames[i].f) jf["f"] = *s.frames[i].f;
                frames.push_back(std::move(jf));
            }
            jo["j"] = s.j_mean;
            if (s.f_mean) jo["f"] = *s.f_mean;
            jo["jf"] = s.jf_mean;
            jo["frames"] = std::move(frames);
            if (!o.round_jf.empty()) jo["round_jf"] = o.round_jf;
            if (!o.prompted_frames.empty()) jo["prompted_frames"] = o.prompted_frames;
            if (o.annotation_time_s) jo["annotation_time_s"] = *o.annotation_time_s;
        }
        objs.push_back(std::move(jo));
    }
    json j{{"schema", kReportSchema},
           {"dataset", rep.dataset},
           {"protocol", rep.protocol},
           {"tool_version", rep.tool_version},
           {"seed", rep.seed},
           {"config", rep.config},
           {"objects", std::move(objs)},
           {"failed_count", rep.failed_count},
           {"means", {{"j", rep.j_mean}, {"jf", rep.jf_mean}}}};
    if (rep.f_mean) j["means"]["f"] = *rep.f_mean;
    if (!rep.round_jf_mean.empty()) j["round_jf_mean"] = rep.round_jf_mean;
    auto split_json = [](const SplitMeans& s) {
        return json{{"j_seen", s.js}, {"f_seen", s.fs}, {"j_unseen", s.ju}, {"f_unseen", s.fu}, {"g", s.g}};
    };
    if (rep.splits) j["splits"] = split_json(*rep.splits);
    if (rep.splits_by_category) j["splits_by_category"] = split_json(*rep.splits_by_category);
    return j;
}

inline DatasetReport report_from_json(const json& j) {
    if (!j.contains("schema") || j.at("schema").get<std::string>() != kReportSchema)
        throw std::runtime_error("report: missing or unknown schema (want \"" + std::string(kReportSchema) + "\")");
    DatasetReport rep;
    rep.dataset = j.at("dataset").get<std::string>();
    rep.protocol = j.at("protocol").get<std::string>();
    rep.tool_version = j.at("tool_version").get<std::string>();
    rep.seed = j.at("seed").get<std::uint64_t>();
    rep.config = j.at("config");
    rep.failed_count = j.at("failed_count").get<int>();
    rep.j_mean = j.at("means").at("j").get<double>();
    rep.jf_mean = j.at("means").at("jf").get<double>();
    if (j.at("means").contains("f")) rep.f_mean = j.at("means").at("f").get<double>();
    if (j.contains("round_jf_mean")) rep.round_jf_mean = j.at("round_jf_mean").get<std::vector<double>>();
    auto split_from = [](const json& js) {
        SplitMeans s;
        s.js = js.at("j_seen").get<double>();
        s.fs = js.at("f_seen").get<double>();
        s.ju = js.at("j_unseen").get<double>();
        s.fu = js.at("f_unseen").get<double>();
        s.g = js.at("g").get<double>();
        return s;
    };
    if (j.contains("splits")) rep.splits = split_from(j.at("splits"));
    if (j.contains("splits_by_category")) rep.splits_by_category = split_from(j.at("splits_by_category"));
    for (const auto& jo : j.at("objects")) {
        ObjectResult o;
        o.video_id = jo.at("video").get<std::string>();
        o.object_id = jo.at("object").get<std::string>();
        o.failed = jo.at("failed").get<bool>();
        if (o.failed) {
            o.error = jo.at("error").get<std::string>();
        } else {
            MaskletScore s;
            s.j_mean = jo.at("j").get<double>();
            s.jf_mean = jo.at("jf").get<double>();
            if (jo.contains("f")) {
                s.f_mean = jo.at("f").get<double>();
                s.mode = MetricMode::jf;
            } else {
                s.mode = MetricMode::j_only;
            }
            for (const auto& jf : jo.at("frames")) {
                s.scored_frames.push_back(jf.at("idx").get<int>());
                std::optional<double> f;
                if (jf.contains("f")) f = jf.at("f").get<double>();
                s.frames.push_back(FrameScore::make(jf.at("j").get<double>(), f));
            }
            o.score = std::move(s);
            if (jo.contains("round_jf")) o.round_jf = jo.at("round_jf").get<std::vector<double>>();
            if (jo.contains("prompted_frames")) o.prompted_frames = jo.at("prompted_frames").get<std::vector<int>>();
            if (jo.contains("annotation_time_s")) o.annotation_time_s = jo.at("annotation_time_s").get<double>();
        }
        rep.objects.push_back(std::move(o));
    }
    return rep;
}

inline void save_report(const DatasetReport& rep, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report '" + path + "'");
    out << report_to_json(rep).dump(2) << "\n";
}

inline DatasetReport load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open report '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("report '" + path + "': " + e.what());
    }
    return report_from_json(j);
}

}  // namespace pvs
