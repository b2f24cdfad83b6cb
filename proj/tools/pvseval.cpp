// pvseval: evaluation toolkit CLI for promptable video segmentation.
//
// Subcommands: eval (semi|offline|online|image), time-model, automask,
// stats, align, validate, synth. All runs are seeded and reports are
// byte-reproducible for a fixed seed.

#include <CLI11.hpp>

#include <iostream>

#include "pvs/automask.hpp"
#include "pvs/report.hpp"

using namespace pvs;

namespace {

struct SegmenterFlags {
    std::string name = "oracle";
    std::string frames_dir;
    OracleConfig oracle;
    TrackerConfig tracker;

    void attach(CLI::App* cmd) {
        cmd->add_option("--segmenter", name, "Segmenter: oracle | naive")->check(CLI::IsMember({"oracle", "naive"}));
        cmd->add_option("--frames-dir", frames_dir, "Base directory for manifest frame paths (naive segmenter)");
        cmd->add_option("--oracle-dilation", oracle.dilation_px, "Oracle corruption radius (negative erodes)");
        cmd->add_option("--oracle-translation", oracle.translation_px, "Oracle column-shift corruption");
        cmd->add_option("--oracle-drop-prob", oracle.drop_prob, "Oracle per-frame drop probability");
        cmd->add_option("--oracle-drop-period", oracle.drop_period, "Oracle drops every period-th frame");
        cmd->add_option("--oracle-decay", oracle.decay, "Corruption multiplier per prompt");
        cmd->add_flag("--oracle-multi", oracle.multi_candidate, "Oracle emits a second, dilated candidate");
        cmd->add_option("--tracker-radius", tracker.search_radius_px, "Tracker translation search radius");
        cmd->add_option("--tracker-occlusion", tracker.match_error_threshold,
                        "Tracker match-error threshold for occlusion");
        cmd->add_option("--tracker-stride", tracker.patch_stride, "Tracker patch sampling stride");
    }

    SegmenterFactory factory(std::uint64_t seed) const {
        if (name == "oracle") {
            OracleConfig cfg = oracle;
            cfg.seed = seed;
            return oracle_factory(cfg);
        }
        return naive_factory(tracker, frames_dir);
    }
};

int run_eval(const std::string& protocol_arg, const std::string& manifest_path, const SegmenterFlags& seg,
             EvalConfig cfg, const std::string& prompt_name, const std::string& metric_name,
             const std::string& g_avg_name, const std::string& out_path, bool lenient) {
    cfg.prompt_kind = prompt_kind_from_name(prompt_name);
    cfg.metric_mode = metric_name == "j" ? MetricMode::j_only : MetricMode::jf;
    ProtocolKind protocol = protocol_arg == "semi"      ? ProtocolKind::semi_supervised
                            : protocol_arg == "offline" ? ProtocolKind::offline_interactive
                            : protocol_arg == "online"  ? ProtocolKind::online_interactive
                                                        : ProtocolKind::image_sa;
    GAveraging g_avg = g_avg_name == "category" ? GAveraging::per_category : GAveraging::per_object;

    Manifest manifest = load_manifest(manifest_path);
    DatasetReport rep = run_dataset(seg.factory(cfg.seed), manifest, protocol, cfg, g_avg);
    if (!out_path.empty()) save_report(rep, out_path);

    std::cout << "dataset: " << rep.dataset << "  protocol: " << rep.protocol << "\n";
    std::cout << "objects: " << rep.objects.size() << "  failed: " << rep.failed_count << "\n";
    if (rep.f_mean)
        std::cout << "J " << rep.j_mean << "  F " << *rep.f_mean << "  J&F " << rep.jf_mean << "\n";
    else
        std::cout << "J " << rep.j_mean << "\n";
    if (!rep.round_jf_mean.empty()) {
        std::cout << "round J&F:";
        for (double v : rep.round_jf_mean) std::cout << " " << v;
        std::cout << "\n";
    }
    if (rep.splits) std::cout << "G " << rep.splits->g << "\n";
    for (const auto& o : rep.objects)
        if (o.failed) std::cerr << "failed: " << o.video_id << "/" << o.object_id << ": " << o.error << "\n";
    return (rep.failed_count > 0 && !lenient) ? 1 : 0;
}

std::vector<DisappearWindow> parse_disappear(const std::vector<std::string>& specs) {
    std::vector<DisappearWindow> out;
    for (const auto& s : specs) {
        DisappearWindow w;
        if (std::sscanf(s.c_str(), "%d:%d:%d:%d", &w.video, &w.object, &w.from, &w.to) != 4)
            throw CLI::ValidationError("--disappear expects video:object:from:to, got '" + s + "'");
        out.push_back(w);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Promptable video segmentation evaluation toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    // ---- eval ----
    auto* eval = app.add_subcommand("eval", "Run an evaluation protocol over a dataset manifest");
    std::string protocol_arg, manifest_path, out_path, prompt_name = "mask", metric_name = "jf",
                              g_avg_name = "object";
    bool lenient = false;
    EvalConfig cfg;
    SegmenterFlags seg;
    eval->add_option("protocol", protocol_arg, "semi | offline | online | image")
        ->required()
        ->check(CLI::IsMember({"semi", "offline", "online", "image"}));
    eval->add_option("--manifest", manifest_path, "Dataset manifest JSON")->required();
    eval->add_option("--out", out_path, "Write the report JSON here");
    eval->add_option("--prompt", prompt_name, "click1 | click3 | click5 | box | mask")
        ->check(CLI::IsMember({"click1", "click3", "click5", "box", "mask"}));
    eval->add_option("--n-click", cfg.n_click, "Clicks per prompted frame (interactive protocols)");
    eval->add_option("--n-frame", cfg.n_frame_max, "Prompted-frame budget");
    eval->add_option("--threshold", cfg.online_pause_iou, "Online pause IoU threshold");
    eval->add_option("--metric", metric_name, "jf | j")->check(CLI::IsMember({"jf", "j"}));
    eval->add_option("--boundary-tol", cfg.boundary_tol, "Boundary tolerance in px (-1: 0.008 * diagonal)");
    eval->add_option("--seed", cfg.seed, "Run seed");
    eval->add_option("--g-averaging", g_avg_name, "object | category (seen/unseen G aggregation)")
        ->check(CLI::IsMember({"object", "category"}));
    eval->add_flag(
        "--include-prompted", [&cfg](std::int64_t) { cfg.exclude_prompted = false; },
        "Score the prompted first frame in semi-supervised mode");
    eval->add_flag("--lenient", lenient, "Exit 0 even when some objects fail");
    seg.attach(eval);

    // ---- time-model ----
    auto* tm_cmd = app.add_subcommand("time-model", "Annotation-time estimate for an interactive session");
    std::string tm_mode = "offline";
    int tm_frames = 300, tm_clicks = 3, tm_rounds = 8;
    TimeModel tm;
    tm_cmd->add_option("--mode", tm_mode, "offline | online")->check(CLI::IsMember({"offline", "online"}));
    tm_cmd->add_option("--frames", tm_frames, "Video length in frames");
    tm_cmd->add_option("--n-click", tm_clicks, "Clicks per prompted frame");
    tm_cmd->add_option("--n-frame", tm_rounds, "Prompted frames (interaction rounds)");
    tm_cmd->add_option("--t-loc", tm.t_loc, "Seconds to locate the object");
    tm_cmd->add_option("--t-click", tm.t_click, "Seconds per click");
    tm_cmd->add_option("--t-exam", tm.t_exam_per_300, "Seconds to examine a 300-frame video");

    // ---- automask ----
    auto* am = app.add_subcommand("automask", "Grid-prompted candidate masklet generation");
    std::string am_manifest, am_video, am_out;
    SegmenterFlags am_seg;
    GridSpec grid;
    long long am_min_area = 200, am_hole_area = 200;
    double am_dedup = 0.8;
    bool am_no_post = false, am_no_crops = false;
    std::uint64_t am_seed = 0;
    am->add_option("--manifest", am_manifest, "Dataset manifest JSON")->required();
    am->add_option("--video", am_video, "Video id to process")->required();
    am->add_option("--out", am_out, "Write the candidate-masklet manifest here")->required();
    am->add_option("--grid", grid.full_grid, "Full-frame grid size");
    am->add_flag("--no-crops", am_no_crops, "Skip the overlapped-crop passes");
    am->add_option("--min-area", am_min_area, "Remove components smaller than this many pixels");
    am->add_option("--hole-area", am_hole_area, "Fill holes smaller than this many pixels");
    am->add_option("--dedup-iou", am_dedup, "Mean-IoU dedup threshold");
    am->add_flag("--no-postprocess", am_no_post, "Skip post-processing");
    am->add_option("--seed", am_seed, "Run seed");
    am_seg.attach(am);

    // ---- stats ----
    auto* stats = app.add_subcommand("stats", "Dataset statistics: disappearance rate, mask areas");
    std::string stats_manifest, stats_out;
    stats->add_option("--manifest", stats_manifest, "Dataset manifest JSON")->required();
    stats->add_option("--out", stats_out, "Write the statistics JSON here");

    // ---- align ----
    auto* align = app.add_subcommand("align", "Mask alignment score against a reference manifest");
    std::string align_manifest, align_ref, align_out;
    double align_threshold = 0.75;
    align->add_option("--manifest", align_manifest, "Evaluated manifest JSON")->required();
    align->add_option("--ref", align_ref, "Reference manifest JSON")->required();
    align->add_option("--threshold", align_threshold, "IoU threshold");
    align->add_option("--out", align_out, "Write the alignment JSON here");

    // ---- validate ----
    auto* validate = app.add_subcommand("validate", "Validate a dataset manifest");
    std::string val_manifest;
    validate->add_option("--manifest", val_manifest, "Dataset manifest JSON")->required();

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "Generate a deterministic synthetic rigid-motion dataset");
    SynthSpec sspec;
    std::string synth_out, pixels_dir;
    std::uint64_t synth_seed = 0;
    std::vector<std::string> disappear_specs;
    synth->add_option("--out", synth_out, "Write the manifest here")->required();
    synth->add_option("--videos", sspec.videos, "Number of videos");
    synth->add_option("--frames", sspec.frames, "Frames per video");
    synth->add_option("--height", sspec.height, "Frame height");
    synth->add_option("--width", sspec.width, "Frame width");
    synth->add_option("--objects", sspec.objects_per_video, "Objects per video");
    synth->add_option("--motion-dr", sspec.motion_dr, "Row motion px/frame");
    synth->add_option("--motion-dc", sspec.motion_dc, "Column motion px/frame");
    synth->add_option("--min-size", sspec.min_object_size, "Minimum object edge length");
    synth->add_option("--max-size", sspec.max_object_size, "Maximum object edge length");
    synth->add_option("--disappear", disappear_specs, "Disappearance window video:object:from:to (repeatable)");
    synth->add_option("--pixels-dir", pixels_dir, "Also render grayscale PGM frames into this directory");
    synth->add_option("--seed", synth_seed, "Generation seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (eval->parsed())
            return run_eval(protocol_arg, manifest_path, seg, cfg, prompt_name, metric_name, g_avg_name, out_path,
                            lenient);

        if (tm_cmd->parsed()) {
            double t = tm_mode == "offline" ? annotation_time_offline(tm_frames, tm_clicks, tm_rounds, tm)
                                            : annotation_time_online(tm_frames, tm_clicks, tm_rounds, tm);
            std::cout << t << "\n";
            return 0;
        }

        if (am->parsed()) {
            Manifest manifest = load_manifest(am_manifest);
            const VideoRecord& video = manifest.video(am_video);
            if (am_no_crops) grid.crop_passes.clear();

            std::function<std::unique_ptr<Segmenter>(const Click&)> factory;
            if (am_seg.name == "oracle") {
                OracleConfig ocfg = am_seg.oracle;
                ocfg.seed = am_seed;
                factory = automask_oracle_factory(video, ocfg);
            } else {
                auto frames = std::make_shared<std::vector<GrayImage>>(load_video_frames(video, am_seg.frames_dir));
                TrackerConfig tcfg = am_seg.tracker;
                factory = [frames, tcfg](const Click&) -> std::unique_ptr<Segmenter> {
                    return std::make_unique<NaiveTracker>(*frames, tcfg);
                };
            }

            EvalConfig run_cfg;
            run_cfg.seed = am_seed;
            AutoMaskletResult res =
                generate_candidates(factory, video.frames, video.height, video.width, grid, run_cfg);
            if (!am_no_post) {
                for (auto& m : res.masklets) m = postprocess(m, am_min_area, am_hole_area);
                std::erase_if(res.masklets, [&res](const CandidateMasklet& m) {
                    bool gone = m.total_area() == 0;
                    if (gone) res.empty_dropped++;
                    return gone;
                });
            }
            std::vector<CandidateMasklet> kept = dedup(std::move(res.masklets), am_dedup);

            Manifest out;
            out.dataset = manifest.dataset + "-auto";
            out.videos.push_back(masklets_to_video_record(video.id, video.frames, video.height, video.width, kept));
            save_manifest(out, am_out);
            std::cout << "prompts " << res.prompts_issued << "  empty " << res.empty_dropped << "  failures "
                      << res.failures << "  kept " << kept.size() << "\n";
            return 0;
        }

        if (stats->parsed()) {
            Manifest manifest = load_manifest(stats_manifest);
            std::vector<std::vector<std::uint8_t>> presences;
            std::vector<BinaryMask> all_masks;
            for (const auto& v : manifest.videos)
                for (const auto& [obj_id, ann] : v.objects) {
                    presences.push_back(v.presence(obj_id));
                    for (const auto& [f, rle] : ann.masks) all_masks.push_back(rle_decode(rle));
                }
            double rate = disappearance_rate_percent(presences);
            AreaStats areas = area_stats(all_masks);
            json j{{"dataset", manifest.dataset},
                   {"masklets", presences.size()},
                   {"masks", all_masks.size()},
                   {"disappearance_rate_percent", rate},
                   {"area_fraction_below_0.1", areas.fraction_below_0_1},
                   {"area_histogram", areas.histogram}};
            if (!stats_out.empty()) {
                std::ofstream out(stats_out);
                out << j.dump(2) << "\n";
            }
            std::cout << "masklets " << presences.size() << "  disappearance " << rate << "%  area<0.1 "
                      << 100.0 * areas.fraction_below_0_1 << "%\n";
            return 0;
        }

        if (align->parsed()) {
            Manifest manifest = load_manifest(align_manifest);
            Manifest ref = load_manifest(align_ref);
            AlignmentReport rep = alignment_score(align_pairs(manifest, ref), align_threshold);
            json j{{"threshold", align_threshold},
                   {"pairs", rep.overall.pairs},
                   {"overall_percent", rep.overall.percent() ? json(*rep.overall.percent()) : json(nullptr)}};
            std::cout << "pairs " << rep.overall.pairs;
            if (rep.overall.percent()) std::cout << "  aligned " << *rep.overall.percent() << "%";
            std::cout << "\n";
            for (SizeBucket b : {SizeBucket::small, SizeBucket::medium, SizeBucket::large}) {
                const auto& st = rep.bucket(b);
                json jb{{"pairs", st.pairs}};
                if (st.percent()) jb["percent"] = *st.percent();
                j["buckets"][size_bucket_name(b)] = jb;
                std::cout << "  " << size_bucket_name(b) << ": " << st.pairs << " pairs";
                if (st.percent()) std::cout << ", " << *st.percent() << "%";
                std::cout << "\n";
            }
            if (!align_out.empty()) {
                std::ofstream out(align_out);
                out << j.dump(2) << "\n";
            }
            return 0;
        }

        if (validate->parsed()) {
            Manifest manifest = load_manifest(val_manifest);
            std::cout << "ok: " << manifest.videos.size() << " videos\n";
            return 0;
        }

        if (synth->parsed()) {
            sspec.disappearance = parse_disappear(disappear_specs);
            SynthDataset ds = synth_dataset(sspec, synth_seed);
            if (!pixels_dir.empty()) attach_rendered_frames(ds, pixels_dir);
            save_manifest(ds.manifest, synth_out);
            std::cout << "wrote " << synth_out << " (" << ds.manifest.videos.size() << " videos)\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
