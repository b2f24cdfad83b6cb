#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "pvs/dataset.hpp"
#include "pvs/metrics.hpp"

using namespace pvs;

namespace {

Manifest minimal_manifest() {
    Manifest m;
    m.dataset = "tiny";
    VideoRecord v;
    v.id = "v0";
    v.frames = 1;
    v.height = 2;
    v.width = 2;
    ObjectAnnotation ann;
    ann.masks[0] = RleMask{2, 2, {1, 3}};
    v.objects["o0"] = std::move(ann);
    m.videos.push_back(std::move(v));
    return m;
}

std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "pvs_dataset_test";
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("minimal manifest round-trips through JSON") {
    Manifest m = minimal_manifest();
    json j = manifest_to_json(m);
    Manifest back = manifest_from_json(j);
    CHECK(back == m);

    auto path = (temp_dir() / "mini.json").string();
    save_manifest(m, path);
    CHECK(load_manifest(path) == m);
}

TEST_CASE("validation rejects malformed manifests with located errors") {
    SECTION("rle sum mismatch") {
        Manifest m = minimal_manifest();
        m.videos[0].objects["o0"].masks[0].counts = {1, 2};  // sums to 3, not 4
        CHECK_THROWS_WITH(validate_manifest(m),
                          Catch::Matchers::ContainsSubstring("video 'v0' object 'o0' frame 0"));
    }

    SECTION("dimension mismatch") {
        Manifest m = minimal_manifest();
        m.videos[0].objects["o0"].masks[0] = RleMask{3, 2, {6}};
        CHECK_THROWS_WITH(validate_manifest(m), Catch::Matchers::ContainsSubstring("mask is 3x2"));
    }

    SECTION("frame index out of range") {
        Manifest m = minimal_manifest();
        m.videos[0].objects["o0"].masks[5] = RleMask{2, 2, {4}};
        CHECK_THROWS_WITH(validate_manifest(m), Catch::Matchers::ContainsSubstring("frame 5"));
    }

    SECTION("duplicate video id") {
        Manifest m = minimal_manifest();
        m.videos.push_back(m.videos[0]);
        CHECK_THROWS_WITH(validate_manifest(m), Catch::Matchers::ContainsSubstring("duplicate video id"));
    }

    SECTION("single-field mutations of a valid manifest are rejected") {
        // flip one scalar at a time and expect validation to catch each
        Manifest m = minimal_manifest();
        auto mutate_and_check = [&](auto&& f) {
            Manifest bad = m;
            f(bad);
            CHECK_THROWS(validate_manifest(bad));
        };
        mutate_and_check([](Manifest& b) { b.videos[0].frames = 0; });
        mutate_and_check([](Manifest& b) { b.videos[0].height = 0; });
        mutate_and_check([](Manifest& b) { b.videos[0].width = -1; });
        mutate_and_check([](Manifest& b) { b.videos[0].frame_paths = {"a.pgm", "b.pgm"}; });
        mutate_and_check([](Manifest& b) { b.videos[0].objects["o0"].masks[0].counts = {4, 1}; });
        mutate_and_check([](Manifest& b) { b.videos[0].objects["o0"].masks[0].height = 9; });
        mutate_and_check([](Manifest& b) { b.videos[0].objects["o0"].split = "validation"; });
    }
}

TEST_CASE("absent frame entries decode as empty masks") {
    Manifest m = minimal_manifest();
    m.videos[0].frames = 3;
    std::vector<BinaryMask> masklet = m.videos[0].object_masklet("o0");
    REQUIRE(masklet.size() == 3);
    CHECK_FALSE(masklet[0].is_empty());
    CHECK(masklet[1].is_empty());
    CHECK(masklet[2].is_empty());
    CHECK(m.videos[0].presence("o0") == std::vector<std::uint8_t>{1, 0, 0});
}

TEST_CASE("pgm round trip") {
    GrayImage img(5, 7, 50);
    img.set(2, 3, 200);
    img.set(0, 0, 0);
    img.set(4, 6, 255);
    auto path = (temp_dir() / "frame.pgm").string();
    save_pgm(img, path);
    CHECK(load_pgm(path) == img);
}

TEST_CASE("synthetic datasets are deterministic and well-formed") {
    SynthSpec spec;
    spec.videos = 3;
    spec.frames = 8;
    spec.objects_per_video = 2;
    spec.motion_dc = 2;

    SynthDataset a = synth_dataset(spec, 123);
    SynthDataset b = synth_dataset(spec, 123);
    CHECK(manifest_to_json(a.manifest).dump() == manifest_to_json(b.manifest).dump());
    CHECK(a.frames == b.frames);

    SynthDataset c = synth_dataset(spec, 124);
    CHECK(manifest_to_json(a.manifest).dump() != manifest_to_json(c.manifest).dump());

    // rendered pixels agree with the ground truth
    for (std::size_t vi = 0; vi < a.manifest.videos.size(); ++vi) {
        const VideoRecord& v = a.manifest.videos[vi];
        for (const auto& [obj_id, ann] : v.objects) {
            std::vector<BinaryMask> gt = v.object_masklet(obj_id);
            for (int t = 0; t < v.frames; ++t)
                for (int r = 0; r < v.height; ++r)
                    for (int c = 0; c < v.width; ++c)
                        if (gt[t].at(r, c)) REQUIRE(a.frames[vi][t].at(r, c) == 200);
        }
    }
}

TEST_CASE("synthetic disappearance windows produce the declared presence") {
    SynthSpec spec;
    spec.videos = 1;
    spec.frames = 3;
    spec.objects_per_video = 3;
    spec.height = 48;
    spec.disappearance.push_back(DisappearWindow{0, 0, 1, 2});  // object 0: [1,0,1]

    SynthDataset ds = synth_dataset(spec, 7);
    const VideoRecord& v = ds.manifest.videos[0];
    CHECK(v.presence("object_00") == std::vector<std::uint8_t>{1, 0, 1});
    CHECK(v.presence("object_01") == std::vector<std::uint8_t>{1, 1, 1});

    std::vector<std::vector<std::uint8_t>> presences;
    for (const auto& [obj_id, ann] : v.objects) presences.push_back(v.presence(obj_id));
    CHECK_THAT(disappearance_rate_percent(presences), Catch::Matchers::WithinAbs(100.0 / 3.0, 1e-12));

    SynthSpec still;
    still.frames = 4;
    SynthDataset st = synth_dataset(still, 9);
    CHECK(disappearance_rate_percent({st.manifest.videos[0].presence("object_00")}) == 0.0);
}

TEST_CASE("objects that would leave the frame are a generation error") {
    SynthSpec spec;
    spec.frames = 50;
    spec.width = 32;
    spec.motion_dc = 4;  // 196 px of travel in a 32-px frame
    CHECK_THROWS_WITH(synth_dataset(spec, 1), Catch::Matchers::ContainsSubstring("disappearance window"));
}

TEST_CASE("attach_rendered_frames writes loadable pixels") {
    SynthSpec spec;
    spec.videos = 1;
    spec.frames = 3;
    SynthDataset ds = synth_dataset(spec, 55);
    auto dir = (temp_dir() / "pixels").string();
    attach_rendered_frames(ds, dir);
    REQUIRE(ds.manifest.videos[0].frame_paths.size() == 3);
    std::vector<GrayImage> frames = load_video_frames(ds.manifest.videos[0]);
    CHECK(frames == ds.frames[0]);
}

TEST_CASE("align_pairs matches by coordinates and flags missing references") {
    SynthSpec spec;
    spec.videos = 2;
    spec.frames = 4;
    SynthDataset ds = synth_dataset(spec, 77);

    SECTION("self-alignment is perfect") {
        auto pairs = align_pairs(ds.manifest, ds.manifest);
        AlignmentReport rep = alignment_score(pairs, 0.75);
        CHECK(rep.overall.percent() == 100.0);
    }

    SECTION("missing reference object errors with coordinates") {
        Manifest ref = ds.manifest;
        ref.videos[0].objects.clear();
        CHECK_THROWS_WITH(align_pairs(ds.manifest, ref), Catch::Matchers::ContainsSubstring("no reference"));
    }

    SECTION("missing reference frames count as empty, not as errors") {
        Manifest ref = ds.manifest;
        ref.videos[0].objects["object_00"].masks.erase(0);
        auto pairs = align_pairs(ds.manifest, ref);
        AlignmentReport rep = alignment_score(pairs, 0.75);
        CHECK(rep.overall.aligned == rep.overall.pairs - 1);
    }
}
