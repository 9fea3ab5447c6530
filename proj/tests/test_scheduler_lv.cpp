#include <map>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "lvsim/scheduler_lv.hpp"
#include "lvsim/topology.hpp"

using namespace lvsim;

namespace {

const std::vector<LinkId> kNineLinks = {{0, 1}, {2, 1}, {3, 1}, {4, 2},
                                        {5, 3}, {6, 4}, {7, 5}, {8, 5}};

ConflictSets nine_conflicts() {
    return interference_sets(nine_node_fixture().topo, kNineLinks);
}

}  // namespace

TEST_CASE("load indicator is floor(q/p)+1 with the two edge cases") {
    CHECK(compute_load(20, 3) == 7);
    CHECK(compute_load(15, 1) == 16);
    CHECK(compute_load(21, 3) == 8);
    CHECK(compute_load(16, 7) == 3);
    CHECK(compute_load(7, 3) == 3);
    CHECK(compute_load(5, 2) == 3);
    CHECK(compute_load(1, 1) == 2);
    // an empty queue has zero load even with zero cells
    CHECK(compute_load(0, 0) == 0);
    CHECK(compute_load(0, 4) == 0);
    // backlog with no cells: the indicator is undefined, not infinite
    CHECK_FALSE(compute_load(9, 0).has_value());
}

TEST_CASE("interference weight is 1 shared-endpoint, 1/M coupled, 0 otherwise") {
    ConflictSets cs = nine_conflicts();
    CHECK(conflict_weight({2, 1}, {3, 1}, cs, 5) == 1.0);
    CHECK(conflict_weight({5, 3}, {4, 2}, cs, 5) == doctest::Approx(0.2));
    CHECK(conflict_weight({5, 3}, {4, 2}, cs, 16) == doctest::Approx(0.0625));
    CHECK(conflict_weight({4, 2}, {5, 3}, cs, 5) == doctest::Approx(0.2));  // symmetric
    CHECK(conflict_weight({6, 4}, {7, 5}, cs, 5) == 0.0);
}

TEST_CASE("neighbourhood demand sums own+primary queues times M plus coupled queues") {
    ConflictSets cs = nine_conflicts();
    std::map<LinkId, LinkDemand> st;
    st[{2, 1}] = {14, 0};
    st[{0, 1}] = {0, 0};
    st[{3, 1}] = {30, 0};
    st[{4, 2}] = {22, 0};
    st[{6, 4}] = {20, 0};
    st[{7, 5}] = {15, 0};
    st[{8, 5}] = {10, 0};
    st[{5, 3}] = {0, 0};
    // 5*(14 + 0+30+22) + (20+15+10)
    CHECK(weighted_neighborhood_demand({2, 1}, st, cs, 5) == 375);
    // (5,3): primaries (3,1),(7,5),(8,5); coupled (4,2)
    CHECK(weighted_neighborhood_demand({5, 3}, st, cs, 5) == 5 * (0 + 30 + 15 + 10) + 22);
    // missing links count as empty queues
    std::map<LinkId, LinkDemand> sparse;
    sparse[{5, 3}] = {4, 0};
    CHECK(weighted_neighborhood_demand({5, 3}, sparse, cs, 5) == 20);
}

TEST_CASE("the vote equalises load and rounds half up") {
    ConflictSets cs = nine_conflicts();

    // n/D = 14*75 / 375 = 2.8 -> 3
    std::map<LinkId, LinkDemand> st;
    st[{2, 1}] = {14, 0};
    st[{3, 1}] = {30, 0};
    st[{4, 2}] = {22, 0};
    st[{6, 4}] = {20, 0};
    st[{7, 5}] = {15, 0};
    st[{8, 5}] = {10, 0};
    CHECK(compute_u({2, 1}, st, cs, 15, 5) == 3);
    st[{2, 1}].p = 1;  // holdings subtract from the vote
    CHECK(compute_u({2, 1}, st, cs, 15, 5) == 2);

    // n/D = 20*75 / (5*(20+20) + 50) = 6.0 -> 6, minus p = 1
    std::map<LinkId, LinkDemand> st2;
    st2[{5, 3}] = {20, 1};
    st2[{3, 1}] = {20, 0};
    st2[{4, 2}] = {50, 0};
    CHECK(compute_u({5, 3}, st2, cs, 15, 5) == 5);

    // a lone busy link asks for the whole slotframe
    std::map<LinkId, LinkDemand> solo;
    solo[{5, 3}] = {1, 0};
    CHECK(compute_u({5, 3}, solo, cs, 15, 5) == 15);
    solo[{5, 3}].p = 15;
    CHECK(compute_u({5, 3}, solo, cs, 15, 5) == 0);

    CHECK_THROWS_AS(compute_u({7, 5}, solo, cs, 15, 5), std::invalid_argument);
}

TEST_CASE("first scheduling round of the reference network") {
    ConflictSets cs = nine_conflicts();
    std::map<LinkId, LinkDemand> st;
    st[{0, 1}] = {0, 0};
    st[{2, 1}] = {5, 0};
    st[{3, 1}] = {20, 0};
    st[{4, 2}] = {45, 0};
    st[{5, 3}] = {14, 0};
    st[{6, 4}] = {10, 0};
    st[{7, 5}] = {25, 0};
    st[{8, 5}] = {7, 0};

    auto reqs = lv_schedule_frame(st, cs, 15, 5);
    REQUIRE(reqs.size() == 7);  // the idle leaf link stays silent
    const std::vector<std::pair<LinkId, int>> want = {
        {{2, 1}, 1}, {{3, 1}, 7}, {{4, 2}, 11}, {{5, 3}, 3},
        {{6, 4}, 3}, {{7, 5}, 7}, {{8, 5}, 2},
    };
    for (size_t i = 0; i < want.size(); ++i) {
        CAPTURE(i);
        CHECK(reqs[i].link == want[i].first);
        CHECK(reqs[i].action == SixtopRequest::Add);
        CHECK(reqs[i].count == want[i].second);
    }
}

TEST_CASE("idle neighbourhoods release everything, overfed links shed cells") {
    ConflictSets cs = nine_conflicts();

    std::map<LinkId, LinkDemand> idle;
    idle[{5, 3}] = {0, 4};
    auto reqs = lv_schedule_frame(idle, cs, 15, 5);
    REQUIRE(reqs.size() == 1);
    CHECK(reqs[0].link == LinkId{5, 3});
    CHECK(reqs[0].action == SixtopRequest::Delete);
    CHECK(reqs[0].count == 4);

    // an overfed link next to a starved heavy one votes itself down
    std::map<LinkId, LinkDemand> skew;
    skew[{5, 3}] = {1, 10};
    skew[{4, 2}] = {100, 0};
    reqs = lv_schedule_frame(skew, cs, 15, 5);
    REQUIRE(reqs.size() == 2);
    CHECK(reqs[0].link == LinkId{4, 2});
    CHECK(reqs[0].action == SixtopRequest::Add);
    CHECK(reqs[0].count == 15);
    CHECK(reqs[1].link == LinkId{5, 3});
    CHECK(reqs[1].action == SixtopRequest::Delete);
    CHECK(reqs[1].count == 9);

    CHECK(lv_schedule_frame({}, cs, 15, 5).empty());

    // zero queue, zero cells, busy neighbourhood: nothing to say
    std::map<LinkId, LinkDemand> quiet;
    quiet[{2, 1}] = {0, 0};
    quiet[{3, 1}] = {12, 0};
    reqs = lv_schedule_frame(quiet, cs, 15, 5);
    REQUIRE(reqs.size() == 1);
    CHECK(reqs[0].link == LinkId{3, 1});
}

TEST_CASE("votes never ask beyond the slotframe and grow with own demand") {
    ConflictSets cs = nine_conflicts();
    Rng rng(2024);

    for (int round = 0; round < 200; ++round) {
        std::map<LinkId, LinkDemand> st;
        for (LinkId l : kNineLinks)
            st[l] = {static_cast<long>(rng.next_below(101)),
                     static_cast<int>(rng.next_below(16))};
        for (LinkId l : kNineLinks) {
            if (weighted_neighborhood_demand(l, st, cs, 5) == 0) continue;
            int u = compute_u(l, st, cs, 15, 5);
            long share = u + st[l].p;
            REQUIRE(share >= 0);
            REQUIRE(share <= 15);

            // raising this link's own queue never shrinks its share
            std::map<LinkId, LinkDemand> more = st;
            more[l].q += 10;
            int u2 = compute_u(l, more, cs, 15, 5);
            REQUIRE(u2 + more[l].p >= share);
        }
    }
}
