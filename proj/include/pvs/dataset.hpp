#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "pvs/serialize.hpp"

namespace pvs {

/// Per-object annotation: frame -> RLE mask, empty-by-absence (a frame with
/// no entry means the object is not visible there). Optional split/category
/// tags feed the seen/unseen G aggregation.
struct ObjectAnnotation {
    std::map<int, RleMask> masks;
    std::optional<std::string> split;     // "seen" | "unseen"
    std::optional<std::string> category;

    bool operator==(const ObjectAnnotation&) const = default;
};

struct VideoRecord {
    std::string id;
    int frames = 0;
    int height = 0;
    int width = 0;
    std::vector<std::string> frame_paths;  // empty, or one 8-bit grayscale PGM per frame
    std::map<std::string, ObjectAnnotation> objects;

    bool operator==(const VideoRecord&) const = default;

    /// Dense masklet with empty masks on absent frames.
    std::vector<BinaryMask> object_masklet(const std::string& object_id) const {
        auto it = objects.find(object_id);
        if (it == objects.end()) throw std::invalid_argument("object '" + object_id + "' not in video '" + id + "'");
        std::vector<BinaryMask> out(frames, BinaryMask(height, width));
        for (const auto& [f, rle] : it->second.masks) out[static_cast<std::size_t>(f)] = rle_decode(rle);
        return out;
    }

    std::vector<std::uint8_t> presence(const std::string& object_id) const {
        auto it = objects.find(object_id);
        if (it == objects.end()) throw std::invalid_argument("object '" + object_id + "' not in video '" + id + "'");
        std::vector<std::uint8_t> p(frames, 0);
        for (const auto& [f, rle] : it->second.masks)
            if (rle_area(rle) > 0) p[static_cast<std::size_t>(f)] = 1;
        return p;
    }
};

struct Manifest {
    std::string dataset;
    std::vector<VideoRecord> videos;

    bool operator==(const Manifest&) const = default;

    const VideoRecord& video(const std::string& id) const {
        for (const auto& v : videos)
            if (v.id == id) return v;
        throw std::invalid_argument("video '" + id + "' not in manifest");
    }
};

inline constexpr const char* kManifestSchema = "pvs-manifest/1";

// --------------------------------------------------------------------------
// Validation (eager, with located errors)
// --------------------------------------------------------------------------

inline void validate_manifest(const Manifest& m) {
    std::set<std::string> ids;
    for (const auto& v : m.videos) {
        auto where = [&](const std::string& detail) { return "video '" + v.id + "': " + detail; };
        if (!ids.insert(v.id).second) throw std::runtime_error(where("duplicate video id"));
        if (v.frames < 1) throw std::runtime_error(where("frame count must be >= 1"));
        if (v.height < 1 || v.width < 1) throw std::runtime_error(where("dimensions must be >= 1"));
        if (!v.frame_paths.empty() && static_cast<int>(v.frame_paths.size()) != v.frames)
            throw std::runtime_error(where("frame_paths length " + std::to_string(v.frame_paths.size()) +
                                           " != frame count " + std::to_string(v.frames)));
        for (const auto& [obj_id, ann] : v.objects) {
            for (const auto& [f, rle] : ann.masks) {
                std::string at = "video '" + v.id + "' object '" + obj_id + "' frame " + std::to_string(f);
                if (f < 0 || f >= v.frames) throw std::runtime_error(at + ": frame index out of range");
                if (rle.height != v.height || rle.width != v.width)
                    throw std::runtime_error(at + ": mask is " + std::to_string(rle.height) + "x" +
                                             std::to_string(rle.width) + ", video is " + std::to_string(v.height) +
                                             "x" + std::to_string(v.width));
                try {
                    rle_validate(rle);
                } catch (const std::exception& e) {
                    throw std::runtime_error(at + ": " + e.what());
                }
            }
            if (ann.split && *ann.split != "seen" && *ann.split != "unseen")
                throw std::runtime_error("video '" + v.id + "' object '" + obj_id +
                                         "': split must be \"seen\" or \"unseen\"");
        }
    }
}

// --------------------------------------------------------------------------
// JSON round trip
// --------------------------------------------------------------------------

inline json manifest_to_json(const Manifest& m) {
    json videos = json::array();
    for (const auto& v : m.videos) {
        json objects = json::object();
        for (const auto& [obj_id, ann] : v.objects) {
            json masks = json::object();
            for (const auto& [f, rle] : ann.masks) masks[std::to_string(f)] = rle_to_json(rle);
            json obj{{"masks", std::move(masks)}};
            if (ann.split) obj["split"] = *ann.split;
            if (ann.category) obj["category"] = *ann.category;
            objects[obj_id] = std::move(obj);
        }
        json jv{{"id", v.id},
                {"frames", v.frames},
                {"height", v.height},
                {"width", v.width},
                {"objects", std::move(objects)}};
        if (!v.frame_paths.empty()) jv["frame_paths"] = v.frame_paths;
        videos.push_back(std::move(jv));
    }
    return json{{"schema", kManifestSchema}, {"dataset", m.dataset}, {"videos", std::move(videos)}};
}

inline Manifest manifest_from_json(const json& j) {
    if (!j.contains("schema") || j.at("schema").get<std::string>() != kManifestSchema)
        throw std::runtime_error("manifest: missing or unknown schema (want \"" + std::string(kManifestSchema) + "\")");
    Manifest m;
    m.dataset = j.at("dataset").get<std::string>();
    for (const auto& jv : j.at("videos")) {
        VideoRecord v;
        v.id = jv.at("id").get<std::string>();
        v.frames = jv.at("frames").get<int>();
        v.height = jv.at("height").get<int>();
        v.width = jv.at("width").get<int>();
        if (jv.contains("frame_paths")) v.frame_paths = jv.at("frame_paths").get<std::vector<std::string>>();
        for (const auto& [obj_id, jo] : jv.at("objects").items()) {
            ObjectAnnotation ann;
            for (const auto& [fs, jm] : jo.at("masks").items()) {
                int f = std::stoi(fs);
                try {
                    ann.masks[f] = rle_from_json(jm);
                } catch (const std::exception& e) {
                    throw std::runtime_error("video '" + v.id + "' object '" + obj_id + "' frame " + fs + ": " +
                                             e.what());
                }
            }
            if (jo.contains("split")) ann.split = jo.at("split").get<std::string>();
            if (jo.contains("category")) ann.category = jo.at("category").get<std::string>();
            v.objects[obj_id] = std::move(ann);
        }
        m.videos.push_back(std::move(v));
    }
    validate_manifest(m);
    return m;
}

inline Manifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("manifest '" + path + "': " + e.what());
    }
    return manifest_from_json(j);
}

inline void save_manifest(const Manifest& m, const std::string& path) {
    validate_manifest(m);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest '" + path + "'");
    out << manifest_to_json(m).dump(2) << "\n";
}

// --------------------------------------------------------------------------
// PGM frame pixels (binary P5, 8-bit)
// --------------------------------------------------------------------------

inline void save_pgm(const GrayImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write PGM '" + path + "'");
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

inline GrayImage load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open PGM '" + path + "'");
    std::string magic;
    in >> magic;
    if (magic != "P5") throw std::runtime_error("PGM '" + path + "': expected binary P5");
    int w = 0, h = 0, maxval = 0;
    in >> w >> h >> maxval;
    if (maxval != 255) throw std::runtime_error("PGM '" + path + "': only 8-bit images supported");
    in.get();  // single whitespace after the header
    GrayImage img(h, w);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (!in) throw std::runtime_error("PGM '" + path + "': truncated pixel data");
    return img;
}

inline std::vector<GrayImage> load_video_frames(const VideoRecord& v, const std::string& base_dir = "") {
    if (v.frame_paths.empty())
        throw std::runtime_error("video '" + v.id + "' carries no frame pixels (needed by this segmenter)");
    std::vector<GrayImage> frames;
    for (const auto& p : v.frame_paths) {
        std::filesystem::path full = base_dir.empty() ? std::filesystem::path(p) : std::filesystem::path(base_dir) / p;
        GrayImage img = load_pgm(full.string());
        if (img.height != v.height || img.width != v.width)
            throw std::runtime_error("video '" + v.id + "': frame '" + p + "' is " + std::to_string(img.height) +
                                     "x" + std::to_string(img.width) + ", expected " + std::to_string(v.height) +
                                     "x" + std::to_string(v.width));
        frames.push_back(std::move(img));
    }
    return frames;
}

// --------------------------------------------------------------------------
// Synthetic rigid-motion fixtures
// --------------------------------------------------------------------------

struct DisappearWindow {
    int video = 0;
    int object = 0;
    int from = 0;  // [from, to)
    int to = 0;
};

struct SynthSpec {
    int videos = 1;
    int frames = 10;
    int height = 48;
    int width = 64;
    int objects_per_video = 1;
    int motion_dr = 0;  // px/frame
    int motion_dc = 0;
    std::vector<DisappearWindow> disappearance;
    int min_object_size = 6;
    int max_object_size = 12;
};

struct SynthDataset {
    Manifest manifest;
    std::vector<std::vector<GrayImage>> frames;  // [video][frame]; object 200 on background 50
};

namespace detail {

inline constexpr std::uint8_t kSynthBackground = 50;
inline constexpr std::uint8_t kSynthObject = 200;

}  // namespace detail

/// Deterministic rigid-motion dataset with exact ground truth. Objects are
/// axis-aligned squares in disjoint row bands, all moving at the spec'd
/// per-frame velocity; frames render grayscale for the template tracker.
inline SynthDataset synth_dataset(const SynthSpec& spec, std::uint64_t seed) {
    if (spec.videos < 1 || spec.frames < 1 || spec.objects_per_video < 1)
        throw std::invalid_argument("synth_dataset: counts must be >= 1");
    if (spec.min_object_size < 1 || spec.max_object_size < spec.min_object_size)
        throw std::invalid_argument("synth_dataset: bad object size range");

    std::mt19937_64 rng(seed);
    SynthDataset out;
    out.manifest.dataset = "synthetic";

    int band_h = spec.height / spec.objects_per_video;
    if (band_h < spec.min_object_size)
        throw std::invalid_argument("synth_dataset: height too small for the requested object count");

    for (int vi = 0; vi < spec.videos; ++vi) {
        VideoRecord v;
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "video_%03d", vi);
        v.id = idbuf;
        v.frames = spec.frames;
        v.height = spec.height;
        v.width = spec.width;

        std::vector<std::vector<BinaryMask>> gts;
        for (int oi = 0; oi < spec.objects_per_video; ++oi) {
            std::vector<std::uint8_t> hidden(spec.frames, 0);
            for (const auto& w : spec.disappearance)
                if (w.video == vi && w.object == oi)
                    for (int t = std::max(0, w.from); t < std::min(spec.frames, w.to); ++t) hidden[t] = 1;

            int last_visible = 0;
            for (int t = 0; t < spec.frames; ++t)
                if (!hidden[t]) last_visible = t;

            int max_size = std::min({spec.max_object_size, band_h, spec.width});
            std::uniform_int_distribution<int> size_dist(spec.min_object_size, max_size);
            int size = size_dist(rng);

            // the object must stay inside its band (rows) and the frame
            // (cols) on every visible frame
            auto feasible = [&](int travel, int limit) { return limit - size - std::abs(travel) * last_visible; };
            int row_lo = oi * band_h, row_hi = row_lo + feasible(spec.motion_dr, band_h);
            int col_hi = feasible(spec.motion_dc, spec.width);
            if (row_hi < row_lo || col_hi < 0)
                throw std::runtime_error("synth_dataset: video " + std::to_string(vi) + " object " +
                                         std::to_string(oi) +
                                         " would leave the frame without a declared disappearance window");
            std::uniform_int_distribution<int> row_dist(row_lo, row_hi), col_dist(0, col_hi);
            int r_start = row_dist(rng) + (spec.motion_dr < 0 ? std::abs(spec.motion_dr) * last_visible : 0);
            int c_start = col_dist(rng) + (spec.motion_dc < 0 ? std::abs(spec.motion_dc) * last_visible : 0);

            ObjectAnnotation ann;
            std::vector<BinaryMask> gt(spec.frames, BinaryMask(spec.height, spec.width));
            for (int t = 0; t < spec.frames; ++t) {
                if (hidden[t]) continue;
                int r0 = r_start + spec.motion_dr * t, c0 = c_start + spec.motion_dc * t;
                BinaryMask m(spec.height, spec.width);
                for (int r = r0; r < r0 + size; ++r)
                    for (int c = c0; c < c0 + size; ++c) m.set(r, c);
                gt[t] = m;
                ann.masks[t] = rle_encode(m);
            }
            char obuf[32];
            std::snprintf(obuf, sizeof(obuf), "object_%02d", oi);
            v.objects[obuf] = std::move(ann);
            gts.push_back(std::move(gt));
        }

        std::vector<GrayImage> rendered;
        for (int t = 0; t < spec.frames; ++t) {
            GrayImage img(spec.height, spec.width, detail::kSynthBackground);
            for (const auto& gt : gts)
                for (int r = 0; r < spec.height; ++r)
                    for (int c = 0; c < spec.width; ++c)
                        if (gt[t].at(r, c)) img.set(r, c, detail::kSynthObject);
            rendered.push_back(std::move(img));
        }
        out.frames.push_back(std::move(rendered));
        out.manifest.videos.push_back(std::move(v));
    }
    validate_manifest(out.manifest);
    return out;
}

/// Writes the rendered frames as PGM files under `dir` and records their
/// paths in the manifest (relative to the manifest's directory).
inline void attach_rendered_frames(SynthDataset& ds, const std::string& dir) {
    std::filesystem::create_directories(dir);
    for (std::size_t vi = 0; vi < ds.manifest.videos.size(); ++vi) {
        VideoRecord& v = ds.manifest.videos[vi];
        v.frame_paths.clear();
        for (int t = 0; t < v.frames; ++t) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%s_f%04d.pgm", v.id.c_str(), t);
            std::filesystem::path p = std::filesystem::path(dir) / buf;
            save_pgm(ds.frames[vi][static_cast<std::size_t>(t)], p.string());
            v.frame_paths.push_back(p.string());
        }
    }
}

// --------------------------------------------------------------------------
// Alignment pairing (data-engine quality checks)
// --------------------------------------------------------------------------

/// Pairs every annotated mask in `eval` with its reference by (video,
/// object, frame). A missing reference object is an error; missing reference
/// frames decode as empty (the empty-by-absence convention).
inline std::vector<std::pair<BinaryMask, BinaryMask>> align_pairs(const Manifest& eval, const Manifest& ref) {
    std::vector<std::pair<BinaryMask, BinaryMask>> pairs;
    for (const auto& v : eval.videos) {
        const VideoRecord* rv = nullptr;
        for (const auto& cand : ref.videos)
            if (cand.id == v.id) rv = &cand;
        if (!rv) throw std::runtime_error("align: video '" + v.id + "' has no reference");
        if (rv->height != v.height || rv->width != v.width)
            throw std::runtime_error("align: video '" + v.id + "' dimensions differ from reference");
        for (const auto& [obj_id, ann] : v.objects) {
            auto rit = rv->objects.find(obj_id);
            if (rit == rv->objects.end())
                throw std::runtime_error("align: video '" + v.id + "' object '" + obj_id + "' has no reference");
            for (const auto& [f, rle] : ann.masks) {
                BinaryMask ref_mask(v.height, v.width);
                auto rf = rit->second.masks.find(f);
                if (rf != rit->second.masks.end()) ref_mask = rle_decode(rf->second);
                pairs.push_back({rle_decode(rle), std::move(ref_mask)});
            }
        }
    }
    return pairs;
}

}  // namespace pvs
