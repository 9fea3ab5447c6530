#include <algorithm>
#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "lvsim/schedule.hpp"
#include "lvsim/topology.hpp"

using namespace lvsim;

namespace {

const std::vector<LinkId> kNineLinks = {{0, 1}, {2, 1}, {3, 1}, {4, 2},
                                        {5, 3}, {6, 4}, {7, 5}, {8, 5}};

ConflictSets nine_conflicts() {
    return interference_sets(nine_node_fixture().topo, kNineLinks);
}

bool contains(const std::vector<std::string>& haystack, const std::string& needle) {
    return std::any_of(haystack.begin(), haystack.end(), [&](const std::string& s) {
        return s.find(needle) != std::string::npos;
    });
}

}  // namespace

TEST_CASE("half-duplex probe spans every channel of the slot") {
    Schedule s(15, 5);
    s.place({3, 1}, {4, 0});

    // any link touching node 3 or node 1 is blocked anywhere in slot 4
    CHECK(s.check_primary_conflict({4, 0}, {1, 0}));
    CHECK(s.check_primary_conflict({4, 2}, {1, 0}));
    CHECK(s.check_primary_conflict({4, 4}, {3, 8}));
    CHECK(s.check_primary_conflict({4, 3}, {3, 1}));  // a link blocks itself

    // endpoint-disjoint links pass, even on the occupied cell itself
    CHECK_FALSE(s.check_primary_conflict({4, 0}, {6, 4}));
    // other slots are unaffected
    CHECK_FALSE(s.check_primary_conflict({5, 0}, {1, 0}));
    CHECK_FALSE(s.check_primary_conflict({3, 0}, {3, 1}));
}

TEST_CASE("interference probe binds to the exact cell") {
    ConflictSets cs = nine_conflicts();
    Schedule s(15, 5);
    s.place({5, 3}, {2, 1});

    // (4,2) and (5,3) interfere, so sharing (slot 2, ch 1) is flagged...
    CHECK(s.check_secondary_conflict({2, 1}, {4, 2}, cs));
    // ...but another channel of the same slot is fine
    CHECK_FALSE(s.check_secondary_conflict({2, 0}, {4, 2}, cs));
    CHECK_FALSE(s.check_secondary_conflict({2, 4}, {4, 2}, cs));
    // links with no interference coupling may share the cell (spatial reuse)
    CHECK_FALSE(s.check_secondary_conflict({2, 1}, {6, 4}, cs));
}

TEST_CASE("first-fit placement spreads across slots and respects both constraints") {
    ConflictSets cs = nine_conflicts();
    Schedule s(15, 5);
    Rng rng(1);

    auto a = s.add_cells({5, 3}, 3, cs, rng, Knowledge::Global, CellPick::FirstFit);
    CHECK(a == std::vector<Cell>{{0, 0}, {1, 0}, {2, 0}});

    // (4,2) interferes with (5,3): same slot is allowed, same cell is not
    auto b = s.add_cells({4, 2}, 2, cs, rng, Knowledge::Global, CellPick::FirstFit);
    CHECK(b == std::vector<Cell>{{0, 1}, {1, 1}});

    // (3,1) shares node 3 with (5,3), so slots 0..2 are closed to it entirely
    auto c = s.add_cells({3, 1}, 1, cs, rng, Knowledge::Global, CellPick::FirstFit);
    CHECK(c == std::vector<Cell>{{3, 0}});

    CHECK(s.total_allocated() == 6);
    CHECK(s.scan_violations(cs).empty());
}

TEST_CASE("a link holds at most one cell per slot") {
    ConflictSets cs = nine_conflicts();
    Schedule s(15, 5);
    Rng rng(2);

    auto got = s.add_cells({5, 3}, 16, cs, rng, Knowledge::Global, CellPick::FirstFit);
    CHECK(got.size() == 15);
    std::vector<int> slots;
    for (Cell c : got) slots.push_back(c.slot);
    std::sort(slots.begin(), slots.end());
    CHECK(std::adjacent_find(slots.begin(), slots.end()) == slots.end());

    // the slotframe is saturated for this link; further requests land nothing
    CHECK(s.add_cells({5, 3}, 1, cs, rng, Knowledge::Global, CellPick::FirstFit).empty());
    CHECK(s.allocated({5, 3}) == 15);
}

TEST_CASE("deletes release lowest cells first and cap at the allocation") {
    ConflictSets cs = nine_conflicts();
    Schedule s(15, 5);
    Rng rng(3);
    s.add_cells({5, 3}, 5, cs, rng, Knowledge::Global, CellPick::FirstFit);

    auto gone = s.delete_cells({5, 3}, 2, rng, CellPick::FirstFit);
    CHECK(gone == std::vector<Cell>{{0, 0}, {1, 0}});
    CHECK(s.cells_of({5, 3}) == std::vector<Cell>{{2, 0}, {3, 0}, {4, 0}});

    auto rest = s.delete_cells({5, 3}, 10, rng, CellPick::FirstFit);
    CHECK(rest.size() == 3);
    CHECK(s.allocated({5, 3}) == 0);
    CHECK(s.total_allocated() == 0);

    // deleting from a link with no cells is a no-op
    CHECK(s.delete_cells({4, 2}, 1, rng, CellPick::FirstFit).empty());
}

TEST_CASE("local knowledge stacks endpoint-disjoint links, global does not") {
    ConflictSets cs = nine_conflicts();
    Rng rng(4);

    Schedule local(1, 1);
    local.place({5, 3}, {0, 0});
    auto got = local.add_cells({4, 2}, 1, cs, rng, Knowledge::Local, CellPick::FirstFit);
    CHECK(got == std::vector<Cell>{{0, 0}});
    CHECK(local.occupants({0, 0}).size() == 2);
    auto viol = local.scan_violations(cs);
    REQUIRE(viol.size() == 1);
    CHECK(viol[0].find("interference") != std::string::npos);

    // half-duplex still binds locally: both holders border node 5
    CHECK(local.add_cells({8, 5}, 1, cs, rng, Knowledge::Local, CellPick::FirstFit).empty());

    Schedule global(1, 1);
    global.place({5, 3}, {0, 0});
    CHECK(global.add_cells({4, 2}, 1, cs, rng, Knowledge::Global, CellPick::FirstFit).empty());
}

TEST_CASE("random placement is admissible and seed-stable") {
    ConflictSets cs = nine_conflicts();

    auto build = [&](uint64_t seed) {
        Schedule s(15, 5);
        Rng rng(seed);
        for (LinkId l : kNineLinks) s.add_cells(l, 2, cs, rng, Knowledge::Global);
        return s;
    };
    Schedule a = build(12345);
    Schedule b = build(12345);
    CHECK(a.dump() == b.dump());
    CHECK(a.total_allocated() == 16);
    CHECK(a.scan_violations(cs).empty());
}

TEST_CASE("bounded draws are unbiased enough to trust uniform picks") {
    Rng rng(7);
    std::array<int, 5> buckets{};
    for (int i = 0; i < 10000; ++i) ++buckets[rng.next_below(5)];
    for (int b : buckets) {
        CHECK(b > 1800);
        CHECK(b < 2200);
    }
    for (int i = 0; i < 1000; ++i) {
        double d = rng.next_double();
        CHECK(d >= 0.0);
        CHECK(d < 1.0);
    }
}

TEST_CASE("relocation targets cells far below their link's delivery mean") {
    ConflictSets cs = nine_conflicts();
    Schedule s(3, 2);
    s.place({5, 3}, {0, 0});
    s.place({5, 3}, {1, 0});
    s.place({4, 2}, {1, 1});

    CellStats stats;
    stats[{{5, 3}, {0, 0}}] = {90, 88};  // healthy cell, ratio 0.978
    stats[{{5, 3}, {1, 0}}] = {10, 0};   // dead cell, mean(link) - ratio = 0.88
    stats[{{4, 2}, {1, 1}}] = {30, 28};  // at its own mean, untouched

    Rng rng(5);
    int moved = housekeeping(s, stats, cs, rng, Knowledge::Local, CellPick::FirstFit);
    CHECK(moved == 1);
    CHECK(s.allocated({5, 3}) == 2);
    CHECK(s.allocated({4, 2}) == 1);
    // the victim's counting window restarts from scratch
    CHECK(stats.count({{5, 3}, {1, 0}}) == 0);
    CHECK(stats.count({{5, 3}, {0, 0}}) == 1);
    CHECK(s.scan_violations(cs).empty());
}

TEST_CASE("relocation needs a full observation window") {
    ConflictSets cs = nine_conflicts();
    Schedule s(3, 2);
    s.place({5, 3}, {0, 0});
    s.place({5, 3}, {1, 0});

    CellStats stats;
    stats[{{5, 3}, {0, 0}}] = {90, 90};
    stats[{{5, 3}, {1, 0}}] = {9, 0};  // one attempt short of the window

    Rng rng(6);
    CHECK(housekeeping(s, stats, cs, rng, Knowledge::Local, CellPick::FirstFit) == 0);
    CHECK(stats.count({{5, 3}, {1, 0}}) == 1);
}

TEST_CASE("grid and per-link views stay mirror images under churn") {
    ConflictSets cs = nine_conflicts();
    Schedule s(8, 4);
    Rng rng(99);

    for (int op = 0; op < 400; ++op) {
        LinkId link = kNineLinks[rng.next_below(kNineLinks.size())];
        if (rng.bernoulli(0.6)) {
            s.add_cells(link, 1, cs, rng, Knowledge::Global);
        } else {
            s.delete_cells(link, 1, rng);
        }

        // recount the grid from scratch and compare with the per-link index
        std::map<LinkId, int> counted;
        int total = 0;
        for (int t = 0; t < s.slots(); ++t) {
            for (int ch = 0; ch < s.channels(); ++ch) {
                for (LinkId occ : s.occupants({t, ch})) {
                    ++counted[occ];
                    ++total;
                }
            }
        }
        REQUIRE(total == s.total_allocated());
        for (LinkId l : kNineLinks) {
            REQUIRE(counted[l] == s.allocated(l));
            const auto& cells = s.cells_of(l);
            REQUIRE(std::is_sorted(cells.begin(), cells.end()));
        }
        REQUIRE(s.scan_violations(cs).empty());
    }
}

TEST_CASE("local churn can break interference but never half-duplex") {
    ConflictSets cs = nine_conflicts();
    Schedule s(4, 2);
    Rng rng(41);

    bool saw_interference = false;
    for (int op = 0; op < 300; ++op) {
        LinkId link = kNineLinks[rng.next_below(kNineLinks.size())];
        if (rng.bernoulli(0.7)) {
            s.add_cells(link, 1, cs, rng, Knowledge::Local);
        } else {
            s.delete_cells(link, 1, rng);
        }
        auto viol = s.scan_violations(cs);
        saw_interference = saw_interference || contains(viol, "interference");
        REQUIRE_FALSE(contains(viol, "half-duplex"));
    }
    // the cramped grid forces at least one overlap along the way
    CHECK(saw_interference);
}

TEST_CASE("schedule text round-trips and grows to fit") {
    ConflictSets cs = nine_conflicts();
    Schedule s(15, 5);
    Rng rng(8);
    for (LinkId l : kNineLinks) s.add_cells(l, 1, cs, rng, Knowledge::Global);

    Schedule back = Schedule::from_dump(s.dump(), 15, 5);
    CHECK(back.dump() == s.dump());
    CHECK(back.total_allocated() == s.total_allocated());
    CHECK(back.slots() == 15);
    CHECK(back.channels() == 5);

    Schedule grown = Schedule::from_dump("20, 3, 5, 3\n", 15, 5);
    CHECK(grown.slots() == 21);
    CHECK(grown.channels() == 5);
    CHECK(grown.occupants({20, 3}) == std::vector<LinkId>{{5, 3}});

    CHECK(Schedule::from_dump("\n\n", 15, 5).total_allocated() == 0);
    CHECK_THROWS_AS(Schedule::from_dump("3, 0, 5\n", 15, 5), std::invalid_argument);
}
