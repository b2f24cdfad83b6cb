#include <catch2/catch_amalgamated.hpp>

#include "pvs/automask.hpp"
#include "test_util.hpp"

using namespace pvs;

TEST_CASE("grid point totals match the closed form") {
    CHECK(grid_point_total() == 1024 + 4 * 256 + 16 * 16);
    CHECK(grid_point_total() == 2304);

    GridPoints pts = grid_prompts(200, 320);
    CHECK(pts.raw_count == 2304);
    CHECK(static_cast<long long>(pts.points.size()) <= pts.raw_count);

    // all points inside the frame
    for (const Click& c : pts.points) {
        CHECK(c.row >= 0);
        CHECK(c.row < 200);
        CHECK(c.col >= 0);
        CHECK(c.col < 320);
        CHECK(c.polarity == Polarity::positive);
    }
}

TEST_CASE("grid prompts are deterministic and reject tiny frames") {
    GridPoints a = grid_prompts(100, 100);
    GridPoints b = grid_prompts(100, 100);
    CHECK(a.points == b.points);
    CHECK_THROWS_AS(grid_prompts(20, 100), std::invalid_argument);
}

TEST_CASE("crop layout: 2x2 pass on a 100x100 frame with 50% overlap") {
    // crop extent = ceil(100 / 1.5) = 67, anchored at the corners
    CHECK(detail::crop_extent(100, 2, 0.5) == 67);
    CHECK(detail::crop_extent(100, 4, 0.5) == 40);

    // the four 2x2 crops cover the frame: starts at 0 and 33
    GridSpec spec;
    spec.crop_passes = {{2, 16}};
    GridPoints pts = grid_prompts(100, 100, spec);
    CHECK(pts.raw_count == 1024 + 4 * 256);
}

TEST_CASE("generate candidates with the oracle over a synthetic video") {
    SynthSpec sspec;
    sspec.videos = 1;
    sspec.frames = 5;
    sspec.height = 64;
    sspec.width = 64;
    sspec.objects_per_video = 2;
    sspec.min_object_size = 10;
    sspec.max_object_size = 14;
    SynthDataset ds = synth_dataset(sspec, 31);
    const VideoRecord& v = ds.manifest.videos[0];

    GridSpec gspec;
    gspec.full_grid = 16;
    gspec.crop_passes = {};
    AutoMaskletResult res = generate_candidates(automask_oracle_factory(v, OracleConfig{}), v.frames, v.height,
                                                v.width, gspec);
    CHECK(res.prompts_issued == 16 * 16);
    CHECK(res.failures == 0);
    CHECK(res.masklets.size() + res.empty_dropped == static_cast<std::size_t>(res.prompts_issued));
    CHECK(res.masklets.size() <= static_cast<std::size_t>(res.prompts_issued));
    REQUIRE_FALSE(res.masklets.empty());

    // every grid point inside an object reproduces that object's masklet
    for (const auto& cand : res.masklets) {
        bool matched = false;
        for (const auto& [obj_id, ann] : v.objects) {
            std::vector<BinaryMask> gt = v.object_masklet(obj_id);
            if (!gt[0].at(cand.origin.row, cand.origin.col)) continue;
            matched = true;
            for (int t = 0; t < v.frames; ++t) REQUIRE(rle_decode(cand.frames[t]) == gt[t]);
        }
        CHECK(matched);
    }

    // dedup collapses them to one candidate per object
    std::vector<CandidateMasklet> kept = dedup(res.masklets, 0.8);
    CHECK(kept.size() == 2);
}

TEST_CASE("postprocess applies the pixel thresholds exactly at the boundary") {
    // frame with a large object, a 199-px satellite and a 100-px hole
    BinaryMask m(64, 64);
    for (int r = 2; r < 34; ++r)
        for (int c = 2; c < 34; ++c) m.set(r, c);  // 1024 px block
    int holed = 0;
    for (int r = 10; r < 20 && holed < 100; ++r)
        for (int c = 10; c < 20 && holed < 100; ++c) {
            m.set(r, c, 0);
            ++holed;
        }
    int satellite = 0;
    for (int r = 40; r < 60 && satellite < 199; ++r)
        for (int c = 40; c < 60 && satellite < 199; ++c) {
            m.set(r, c);
            ++satellite;
        }

    CandidateMasklet cand;
    cand.origin = Click{3, 3, Polarity::positive};
    cand.frames = {rle_encode(m)};
    CandidateMasklet out = postprocess(cand);
    BinaryMask result = rle_decode(out.frames[0]);

    // satellite (199 < 200) removed, hole (100 < 200) filled
    CHECK(result.at(45, 45) == 0);
    CHECK(result.at(15, 15) == 1);
    CHECK(out.postprocessed);

    // clean masks are unchanged (idempotence)
    CandidateMasklet again = postprocess(out);
    CHECK(again.frames[0] == out.frames[0]);
}

TEST_CASE("postprocess keeps 201-px components and 250-px holes") {
    BinaryMask m(64, 64);
    int satellite = 0;
    for (int r = 40; r < 60 && satellite < 201; ++r)
        for (int c = 40; c < 60 && satellite < 201; ++c) {
            m.set(r, c);
            ++satellite;
        }
    CandidateMasklet cand;
    cand.frames = {rle_encode(m)};
    CHECK(rle_decode(postprocess(cand).frames[0]).area() == 201);

    BinaryMask big(64, 64);
    for (auto& b : big.bits) b = 1;
    int holed = 0;
    for (int r = 10; r < 30 && holed < 250; ++r)
        for (int c = 10; c < 30 && holed < 250; ++c) {
            big.set(r, c, 0);
            ++holed;
        }
    CandidateMasklet cand2;
    cand2.frames = {rle_encode(big)};
    CHECK(rle_decode(postprocess(cand2).frames[0]) == big);
}

TEST_CASE("dedup keeps disjoint masklets and drops near-duplicates") {
    auto make = [](const BinaryMask& m, int row) {
        CandidateMasklet c;
        c.origin = Click{row, 0, Polarity::positive};
        c.frames = {rle_encode(m)};
        return c;
    };
    BinaryMask a(32, 32), b(32, 32);
    for (int r = 0; r < 10; ++r)
        for (int c = 0; c < 10; ++c) a.set(r, c);
    for (int r = 20; r < 30; ++r)
        for (int c = 20; c < 26; ++c) b.set(r, c);

    SECTION("identical masklets collapse") {
        auto kept = dedup({make(a, 0), make(a, 1)}, 0.9);
        CHECK(kept.size() == 1);
    }

    SECTION("disjoint masklets both survive") {
        auto kept = dedup({make(a, 0), make(b, 1)}, 0.9);
        CHECK(kept.size() == 2);
        // output is area-sorted descending
        CHECK(kept[0].total_area() >= kept[1].total_area());
    }

    SECTION("threshold 1.0 keeps everything but exact duplicates") {
        BinaryMask almost = a;
        almost.set(15, 15);
        auto kept = dedup({make(a, 0), make(almost, 1), make(a, 2)}, 1.0);
        CHECK(kept.size() == 2);
    }

    SECTION("no two kept masklets reach the threshold pairwise") {
        std::mt19937_64 rng(3);
        std::vector<CandidateMasklet> cands;
        for (int i = 0; i < 20; ++i)
            cands.push_back(make(pvs::test::random_blob_mask(rng, 32, 32), i));
        auto kept = dedup(cands, 0.5);
        for (std::size_t i = 0; i < kept.size(); ++i)
            for (std::size_t j = i + 1; j < kept.size(); ++j)
                CHECK(masklet_mean_iou(kept[i], kept[j]) < 0.5);
    }
}

TEST_CASE("masklets pack into the manifest annotation format") {
    BinaryMask m(32, 32);
    m.set(5, 5);
    CandidateMasklet c;
    c.frames = {rle_encode(m), rle_encode(BinaryMask(32, 32))};
    VideoRecord v = masklets_to_video_record("vid", 2, 32, 32, {c});
    CHECK(v.objects.size() == 1);
    CHECK(v.objects.count("auto_0000") == 1);
    // empty frames stay absent (empty-by-absence convention)
    CHECK(v.objects["auto_0000"].masks.count(0) == 1);
    CHECK(v.objects["auto_0000"].masks.count(1) == 0);
    Manifest mf;
    mf.dataset = "auto";
    mf.videos.push_back(v);
    validate_manifest(mf);
}
