#include <catch2/catch_amalgamated.hpp>

#include "pvs/oracle.hpp"
#include "test_util.hpp"

using namespace pvs;

namespace {

BinaryMask block_mask(int h, int w, int r0, int c0, int size) {
    BinaryMask m(h, w);
    for (int r = r0; r < r0 + size; ++r)
        for (int c = c0; c < c0 + size; ++c) m.set(r, c);
    return m;
}

}  // namespace

TEST_CASE("select_output picks the highest predicted IoU") {
    BinaryMask m(4, 4);
    m.set(1, 1);
    std::vector<MaskCandidate> cands{{m, 0.3, 1.0}, {m, 0.9, 1.0}, {m, 0.7, 1.0}};
    SelectedOutput out = select_output(cands);
    CHECK(out.candidate_index == 1);
    CHECK(out.predicted_iou == 0.9);
    CHECK_FALSE(out.occluded);

    CHECK(select_output({{m, 0.5, 1.0}}).candidate_index == 0);
    CHECK_THROWS_AS(select_output({}), std::invalid_argument);
}

TEST_CASE("select_output ties break to the lowest index and permutation holds") {
    BinaryMask a(4, 4), b(4, 4);
    a.set(0, 0);
    b.set(1, 1);
    std::vector<MaskCandidate> cands{{a, 0.7, 1.0}, {b, 0.7, 1.0}};
    CHECK(select_output(cands).candidate_index == 0);
    CHECK(select_output(cands).mask == a);
    std::swap(cands[0], cands[1]);
    CHECK(select_output(cands).mask == b);  // still index 0: documented tie-break
}

TEST_CASE("select_output gates on the occlusion score") {
    BinaryMask m(4, 4);
    m.set(2, 2);
    SelectedOutput out = select_output({{m, 0.9, 0.2}});
    CHECK(out.occluded);
    CHECK(out.mask.is_empty());
    CHECK(out.occlusion_score == 0.2);

    // threshold is configurable
    CHECK_FALSE(select_output({{m, 0.9, 0.2}}, 0.1).occluded);
}

TEST_CASE("noiseless oracle returns exact ground truth") {
    BinaryMask gt = block_mask(10, 10, 2, 2, 3);
    OracleSegmenter oracle({gt}, OracleConfig{});
    auto cands = oracle.segment(0, {}, {});
    REQUIRE(cands.size() == 1);
    CHECK(cands[0].mask == gt);
    CHECK(cands[0].predicted_iou == 1.0);
    CHECK(cands[0].occlusion_score == 1.0);
}

TEST_CASE("oracle corruption decays with prompts received") {
    BinaryMask gt = block_mask(16, 16, 5, 5, 5);
    OracleConfig cfg;
    cfg.dilation_px = 2;
    cfg.decay = 0.5;
    OracleSegmenter oracle({gt, gt, gt}, cfg);

    // no prompts yet: dilation radius 2
    auto c0 = oracle.segment(1, {}, {});
    CHECK(c0[0].mask == dilate(gt, 2));
    CHECK(c0[0].predicted_iou == iou(dilate(gt, 2), gt));

    // two prompts on frame 0: effective radius floor(2 * 0.25) = 0 -> exact
    std::vector<Prompt> two{Prompt{0, center_click(gt)}, Prompt{0, center_click(gt)}};
    oracle.segment(0, two, {});
    CHECK(oracle.prompt_count() == 2);
    auto c2 = oracle.segment(1, {}, {});
    CHECK(c2[0].mask == gt);

    // interactive re-segmentation of one growing batch does not double-count
    std::vector<Prompt> three = two;
    three.push_back(Prompt{0, center_click(gt)});
    oracle.segment(0, two, {});
    oracle.segment(0, three, {});
    CHECK(oracle.prompt_count() == 3);

    oracle.reset();
    CHECK(oracle.prompt_count() == 0);
    CHECK(oracle.segment(1, {}, {})[0].mask == dilate(gt, 2));
}

TEST_CASE("any prompt on a frame fixes it to the exact ground truth") {
    BinaryMask gt = block_mask(12, 12, 3, 3, 4);
    OracleConfig cfg;
    cfg.dilation_px = 3;
    OracleSegmenter oracle({gt}, cfg);
    auto cands = oracle.segment(0, {Prompt{0, Click{4, 4, Polarity::positive}}}, {});
    CHECK(cands[0].mask == gt);
    CHECK(cands[0].predicted_iou == 1.0);
}

TEST_CASE("oracle honors clicks and mask prompts bit-exactly") {
    BinaryMask gt = block_mask(12, 12, 3, 3, 4);
    OracleSegmenter oracle({gt}, OracleConfig{});

    // mask prompt reproduced exactly, even off ground truth
    BinaryMask other = block_mask(12, 12, 0, 0, 2);
    CHECK(oracle.segment(0, {Prompt{0, other}}, {})[0].mask == other);

    // positive click inside output, negative outside
    std::mt19937_64 rng(73);
    for (int i = 0; i < 50; ++i) {
        std::uniform_int_distribution<int> pix(0, 11);
        Click pos{pix(rng), pix(rng), Polarity::positive};
        Click neg{pix(rng), pix(rng), Polarity::negative};
        if (pos.row == neg.row && pos.col == neg.col) continue;
        auto out = oracle.segment(0, {Prompt{0, pos}, Prompt{0, neg}}, {})[0].mask;
        CHECK(out.at(pos.row, pos.col) == 1);
        CHECK(out.at(neg.row, neg.col) == 0);
    }
}

TEST_CASE("oracle reports absence on empty ground-truth frames") {
    BinaryMask gt = block_mask(8, 8, 2, 2, 3);
    BinaryMask empty(8, 8);
    OracleSegmenter oracle({gt, empty, gt}, OracleConfig{});
    auto cands = oracle.segment(1, {}, {});
    CHECK(cands[0].mask.is_empty());
    CHECK(cands[0].occlusion_score == 0.0);
    CHECK(cands[0].predicted_iou == 1.0);  // empty prediction vs empty gt

    SelectedOutput sel = select_output(cands);
    CHECK(sel.occluded);
}

TEST_CASE("oracle drop knobs blank unprompted frames only") {
    BinaryMask gt = block_mask(8, 8, 2, 2, 3);
    std::vector<BinaryMask> gts(12, gt);

    SECTION("drop_prob = 1 drops every unprompted frame") {
        OracleConfig cfg;
        cfg.drop_prob = 1.0;
        OracleSegmenter oracle(gts, cfg);
        CHECK(oracle.segment(3, {}, {})[0].mask.is_empty());
        CHECK(oracle.segment(3, {Prompt{3, gt}}, {})[0].mask == gt);
    }

    SECTION("drop_period drops deterministically") {
        OracleConfig cfg;
        cfg.drop_period = 5;
        OracleSegmenter oracle(gts, cfg);
        for (int f = 0; f < 12; ++f) {
            bool dropped = oracle.segment(f, {}, {})[0].mask.is_empty();
            CHECK(dropped == (f % 5 == 4));
        }
    }

    SECTION("drop_prob draws are stable per frame across re-runs") {
        OracleConfig cfg;
        cfg.drop_prob = 0.5;
        cfg.seed = 17;
        OracleSegmenter oracle(gts, cfg);
        std::vector<bool> first, second;
        for (int f = 0; f < 12; ++f) first.push_back(oracle.segment(f, {}, {})[0].mask.is_empty());
        oracle.reset();
        for (int f = 0; f < 12; ++f) second.push_back(oracle.segment(f, {}, {})[0].mask.is_empty());
        CHECK(first == second);
    }
}

TEST_CASE("multi-candidate mode exercises the selection path") {
    BinaryMask gt = block_mask(10, 10, 3, 3, 3);
    OracleConfig cfg;
    cfg.multi_candidate = true;
    OracleSegmenter oracle({gt}, cfg);
    auto cands = oracle.segment(0, {}, {});
    REQUIRE(cands.size() == 2);
    CHECK(cands[0].mask == gt);
    CHECK(cands[0].predicted_iou == 1.0);
    CHECK(cands[1].mask == dilate(gt, 1));
    CHECK(cands[1].predicted_iou == 0.6);
    CHECK(select_output(cands).mask == gt);
}

TEST_CASE("commit builds entries and pointers from the selected output") {
    BinaryMask gt = block_mask(6, 6, 1, 1, 2);
    OracleSegmenter oracle({gt}, OracleConfig{});
    SelectedOutput sel = select_output(oracle.segment(0, {Prompt{0, gt}}, {}));
    CommitResult cr = oracle.commit(0, sel, true, {Prompt{0, gt}});
    CHECK(cr.entry.frame_idx == 0);
    CHECK(cr.entry.is_prompted);
    CHECK(rle_decode(cr.entry.mask) == gt);
    REQUIRE(cr.entry.prompts.size() == 1);
    CHECK(cr.pointer.frame_idx == 0);
    CHECK(cr.pointer.vec.size() == 4);
    CHECK(cr.pointer.vec[0] == Catch::Approx(4.0 / 36.0));
}

TEST_CASE("correction clicks drive the noiseless oracle to ground truth in one round") {
    std::mt19937_64 rng(79);
    for (int i = 0; i < 30; ++i) {
        BinaryMask gt = pvs::test::random_blob_mask(rng, 20, 20);
        if (gt.is_empty()) continue;
        BinaryMask pred = pvs::test::random_blob_mask(rng, 20, 20);
        OracleSegmenter oracle({gt}, OracleConfig{});
        std::vector<Prompt> prompts;
        if (pred == gt) continue;
        for (const Click& c : correction_clicks(pred, gt, 3)) prompts.push_back(Prompt{0, c});
        REQUIRE_FALSE(prompts.empty());
        CHECK(oracle.segment(0, prompts, {})[0].mask == gt);
    }
}
