#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "pvs/memory_bank.hpp"
#include "pvs/serialize.hpp"

using namespace pvs;

namespace {

MemoryEntry entry(int frame, bool prompted = false, bool occluded = false) {
    MemoryEntry e;
    e.frame_idx = frame;
    e.mask = RleMask{2, 2, {4}};
    e.occluded = occluded;
    e.is_prompted = prompted;
    if (prompted) e.prompts.push_back(Prompt{frame, Click{0, 0, Polarity::positive}});
    return e;
}

ObjectPointer pointer(int frame) { return ObjectPointer{frame, {0.5, 0.25, 0.125, double(frame)}}; }

}  // namespace

TEST_CASE("recent FIFO evicts oldest-first at capacity") {
    MemoryBank bank(6, 8);
    for (int f = 0; f < 10; ++f) bank.push_unprompted(entry(f), pointer(f));
    REQUIRE(bank.recent().size() == 6);
    for (int i = 0; i < 6; ++i) CHECK(bank.recent()[i].frame_idx == 4 + i);

    MemoryBank small(6, 8);
    for (int f = 0; f < 3; ++f) small.push_unprompted(entry(f));
    CHECK(small.recent().size() == 3);
}

TEST_CASE("prompted FIFO pins the earliest prompted entry") {
    SECTION("a lone frame-0 prompt is retained for the whole video") {
        MemoryBank bank(6, 8);
        bank.push_prompted(entry(0, true), pointer(0));
        for (int f = 1; f < 200; ++f) bank.push_unprompted(entry(f), pointer(f));
        REQUIRE(bank.prompted().size() == 1);
        CHECK(bank.prompted()[0].frame_idx == 0);
        ConditioningSet ctx = bank.context_for(200);
        REQUIRE(ctx.prompted.size() == 1);
        CHECK(ctx.prompted[0].frame_idx == 0);
    }

    SECTION("M=2 with prompts on frames 0,5,9 keeps {0, 9}") {
        MemoryBank bank(6, 2);
        for (int f : {0, 5, 9}) bank.push_prompted(entry(f, true));
        REQUIRE(bank.prompted().size() == 2);
        CHECK(bank.prompted()[0].frame_idx == 0);
        CHECK(bank.prompted()[1].frame_idx == 9);
    }

    SECTION("under capacity everything is retained") {
        MemoryBank bank(6, 8);
        for (int f : {0, 3, 7}) bank.push_prompted(entry(f, true));
        CHECK(bank.prompted().size() == 3);
    }
}

TEST_CASE("push polarity flags are enforced") {
    MemoryBank bank;
    CHECK_THROWS_AS(bank.push_unprompted(entry(0, true)), std::invalid_argument);
    CHECK_THROWS_AS(bank.push_prompted(entry(0, false)), std::invalid_argument);
}

TEST_CASE("context_for annotates recent entries with temporal positions") {
    MemoryBank bank(6, 8);
    SECTION("empty bank yields an empty set (image as a single-frame video)") {
        CHECK(bank.context_for(0).empty());
    }

    SECTION("temporal positions are current minus frame, newest first") {
        for (int f : {7, 8, 9}) bank.push_unprompted(entry(f));
        ConditioningSet ctx = bank.context_for(10);
        REQUIRE(ctx.recent.size() == 3);
        CHECK(ctx.recent[0].entry.frame_idx == 9);
        CHECK(ctx.recent[0].temporal_position == 1);
        CHECK(ctx.recent[1].temporal_position == 2);
        CHECK(ctx.recent[2].temporal_position == 3);
    }

    SECTION("prompted entries from the future are still returned, ordered by frame") {
        bank.push_prompted(entry(42, true));
        bank.push_prompted(entry(3, true));
        ConditioningSet ctx = bank.context_for(10);
        REQUIRE(ctx.prompted.size() == 2);
        CHECK(ctx.prompted[0].frame_idx == 3);
        CHECK(ctx.prompted[1].frame_idx == 42);  // frame 42 > current 10
    }
}

TEST_CASE("model check against a reference queue over random interleavings") {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_int_distribution<int> cap_n(1, 8), cap_m(1, 8);
        int n = cap_n(rng), m = cap_m(rng);
        MemoryBank bank(n, m);

        std::vector<MemoryEntry> ref_recent, ref_prompted;  // reference model: plain vectors
        std::vector<int> ref_pointers;
        std::bernoulli_distribution is_prompted(0.3), with_pointer(0.7);

        int pushes = 10000 / 20;
        for (int f = 0; f < pushes; ++f) {
            bool prompted = is_prompted(rng);
            bool ptr = with_pointer(rng);
            if (prompted) {
                bank.push_prompted(entry(f, true), ptr ? std::optional(pointer(f)) : std::nullopt);
                ref_prompted.push_back(entry(f, true));
                if (static_cast<int>(ref_prompted.size()) > m) ref_prompted.erase(ref_prompted.begin() + 1);
            } else {
                bank.push_unprompted(entry(f), ptr ? std::optional(pointer(f)) : std::nullopt);
                ref_recent.push_back(entry(f));
                if (static_cast<int>(ref_recent.size()) > n) ref_recent.erase(ref_recent.begin());
            }
            if (ptr) {
                ref_pointers.push_back(f);
                if (static_cast<int>(ref_pointers.size()) > n + m) ref_pointers.erase(ref_pointers.begin());
            }

            // capacity and content invariants after every push
            REQUIRE(static_cast<int>(bank.recent().size()) <= n);
            REQUIRE(static_cast<int>(bank.prompted().size()) <= m);
            REQUIRE(static_cast<int>(bank.pointers().size()) <= n + m);
            REQUIRE(bank.recent().size() == ref_recent.size());
            for (std::size_t i = 0; i < ref_recent.size(); ++i)
                REQUIRE(bank.recent()[i].frame_idx == ref_recent[i].frame_idx);
            REQUIRE(bank.prompted().size() == ref_prompted.size());
            for (std::size_t i = 0; i < ref_prompted.size(); ++i)
                REQUIRE(bank.prompted()[i].frame_idx == ref_prompted[i].frame_idx);
            REQUIRE(bank.pointers().size() == ref_pointers.size());
            for (std::size_t i = 0; i < ref_pointers.size(); ++i)
                REQUIRE(bank.pointers()[i].frame_idx == ref_pointers[i]);

            // pinned-first-prompt survival in every context
            if (!ref_prompted.empty()) {
                ConditioningSet ctx = bank.context_for(f + 1);
                int earliest = ref_prompted.front().frame_idx;
                bool found = false;
                for (const auto& e : ctx.prompted) found |= e.frame_idx == earliest;
                REQUIRE(found);
                // prompted entries never carry a temporal position
                for (const auto& t : ctx.recent) REQUIRE(!t.entry.is_prompted);
            }
        }
    }
}

TEST_CASE("pointer dimensionality is fixed per bank instance") {
    MemoryBank bank(2, 2);
    bank.push_unprompted(entry(0), ObjectPointer{0, {1.0, 2.0}});
    CHECK_THROWS_AS(bank.push_unprompted(entry(1), ObjectPointer{1, {1.0, 2.0, 3.0}}), std::invalid_argument);
}

TEST_CASE("snapshot and restore round-trip byte-exactly") {
    MemoryBank bank(4, 3);
    for (int f = 0; f < 9; ++f) {
        MemoryEntry e = entry(f, f % 3 == 0, f == 5);
        if (f % 2 == 0) e.feature = std::vector<double>{1.5 * f, -0.25, 3.14159};
        if (e.is_prompted)
            bank.push_prompted(std::move(e), pointer(f));
        else
            bank.push_unprompted(std::move(e), pointer(f));
    }
    json snap = bank_snapshot(bank);
    MemoryBank restored = bank_restore(snap);
    CHECK(bank_snapshot(restored).dump() == snap.dump());
    CHECK(restored.recent().size() == bank.recent().size());
    CHECK(restored.prompted().size() == bank.prompted().size());
    CHECK(restored.pointers().size() == bank.pointers().size());

    // restored banks keep evicting with the pinned-first rule
    restored.push_prompted(entry(99, true));
    CHECK(restored.prompted().front().frame_idx == 0);
}
