#pragma once

#include <map>
#include <optional>
#include <vector>

#include "lvsim/schedule.hpp"
#include "lvsim/topology.hpp"
#include "lvsim/types.hpp"

namespace lvsim {

// Frame-boundary view of one link, snapshotted before any request is applied
// so every link votes against the same state.
struct LinkDemand {
    long q = 0;  // queued packets
    int p = 0;   // allocated cells
};

// Load indicator x = floor(q/p) + 1.
//   q == 0          -> 0
//   q > 0, p == 0   -> undefined (nullopt): backlog with no way to drain
std::optional<long> compute_load(long q, int p);

// Interference weight between two links: 1 for a shared endpoint, 1/channels
// for channel-coupled interferers, 0 otherwise.
double conflict_weight(const LinkId& a, const LinkId& b, const ConflictSets& cs, int channels);

// Channel-scaled queue mass of a link's interference neighbourhood:
//   D = channels*(q + sum primary q') + sum secondary q'
// (secondary interferers only contend on one of `channels` offsets, hence
// weight 1/channels; scaling by channels keeps the value an exact integer).
// The vote below is undefined while this is zero.
long long weighted_neighborhood_demand(const LinkId& link,
                                       const std::map<LinkId, LinkDemand>& states,
                                       const ConflictSets& cs, int channels);

// Cell-count vote for one link: the allocation that would equalise load
// across its interference neighbourhood, minus what it already holds.
// Exact integer arithmetic, round half up:
//   u = floor((2*q*S*M + D) / (2*D)) - p,  D as above
// Precondition: some queue in the neighbourhood is non-empty (D > 0).
int compute_u(const LinkId& link, const std::map<LinkId, LinkDemand>& states,
              const ConflictSets& cs, int slots, int channels);

// One scheduling round: every link with traffic in its neighbourhood votes
// (positive -> Add, negative -> Delete); a link whose whole neighbourhood is
// idle releases everything it holds. Links are processed in (src, dst) order
// and requests are emitted in that order.
std::vector<SixtopRequest> lv_schedule_frame(const std::map<LinkId, LinkDemand>& states,
                                             const ConflictSets& cs, int slots, int channels);

}  // namespace lvsim
