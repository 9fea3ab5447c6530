#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lvsim/rng.hpp"
#include "lvsim/types.hpp"

namespace lvsim {

struct PropagationModel {
    double tx_power_dbm = 0.0;
    double pl_ref_db = 40.0;          // path loss at 1 m
    double pl_exponent = 2.0;         // 20 dB/decade
    double shadowing_sigma_db = 3.0;  // per-edge lognormal shadowing, truncated +-3 sigma
    double full_rx_dbm = -87.0;       // at or above: pdr = 1
    double sensitivity_dbm = -97.0;   // at or below: pdr = 0 (not neighbors)
};

// Expected pdr is monotone non-increasing in distance: log-distance path loss
// plus one seeded shadowing draw, mapped through a linear waterfall between
// full reception and the sensitivity cutoff.
double link_pdr(double distance_m, const PropagationModel& model, Rng& rng);

class Topology {
  public:
    Topology() = default;
    Topology(int n_nodes, double area_side);

    int n_nodes() const { return static_cast<int>(pos_.size()); }
    double area_side() const { return area_side_; }

    std::pair<double, double> position(NodeId n) const { return pos_[n]; }
    void set_position(NodeId n, double x, double y);

    double distance(NodeId a, NodeId b) const;

    // pdr == 0 removes the edge; otherwise stores it symmetrically
    void set_edge(NodeId a, NodeId b, double pdr);
    double pdr(NodeId a, NodeId b) const;  // 0 when no edge

    // one-hop neighborhood: pdr > 0, ascending node id
    const std::vector<NodeId>& neighbors(NodeId n) const { return nbrs_[n]; }
    std::vector<NodeId> good_neighbors(NodeId n) const;  // pdr > 0.5

    // (a, b, pdr) with a < b, ascending — deterministic iteration order
    std::vector<std::tuple<NodeId, NodeId, double>> edges() const;

  private:
    std::vector<std::pair<double, double>> pos_;
    std::vector<std::vector<NodeId>> nbrs_;
    std::map<std::pair<NodeId, NodeId>, double> edge_pdr_;  // key: (min, max)
    double area_side_ = 0.0;
};

// Uniform placement with a conformity loop: every node must end up with at
// least min_good_neighbors neighbors above pdr 0.5 and (when that bound is
// >= 1) reachable from node 0, the sink, through such edges. Non-conforming
// nodes are re-placed from their own substream; throws after attempt_cap
// re-placements of any single node.
Topology generate_topology(int n_nodes, double area_side, int min_good_neighbors,
                           uint64_t rng_seed, const PropagationModel& model = {},
                           int attempt_cap = 1000);

struct RplTree {
    NodeId sink = 0;
    std::vector<std::vector<NodeId>> parents;  // per node, ordered by (rank, id); empty for sink
    std::vector<double> rank;                  // min cumulative ETX to sink over pdr>0.5 edges

    NodeId preferred(NodeId n) const { return parents[n].front(); }

    // every (child, parent) pair that can carry upstream traffic, lexicographic
    std::vector<LinkId> links() const;
};

// Ranks via shortest cumulative ETX (1/pdr) over the pdr>0.5 subgraph; each
// non-sink node keeps up to max_parents strictly-lower-rank good neighbors.
// Throws listing the first unreachable node.
RplTree build_rpl_tree(const Topology& topo, int max_parents, NodeId sink = 0);

class ConflictSets {
  public:
    struct Entry {
        LinkId link;
        ConflictKind kind;
    };

    // entries sorted by link, primary/secondary classification per entry
    const std::vector<Entry>& of(LinkId l) const;
    bool conflicts(LinkId a, LinkId b) const;
    std::optional<ConflictKind> kind(LinkId a, LinkId b) const;
    const std::vector<LinkId>& all_links() const { return links_; }

    friend ConflictSets interference_sets(const Topology&, const std::vector<LinkId>&);

  private:
    std::vector<LinkId> links_;
    std::map<LinkId, std::vector<Entry>> sets_;
};

// Membership: (l,k) interferes with (i,j) iff they share an endpoint, or
// k is a one-hop neighbor of i, or l is a one-hop neighbor of j (closed
// neighborhoods: a node counts as its own neighbor, so endpoint-sharing links
// always qualify). Primary iff shared endpoint. Symmetric by construction.
ConflictSets interference_sets(const Topology& topo, const std::vector<LinkId>& links);

// Plain-text fixture round-trip. Node lines "id, x, y", edge lines
// "a, b, pdr", separated by "# nodes" / "# edges" headers, plus an optional
// "# sink <id>" directive (default 0).
struct Fixture {
    Topology topo;
    NodeId sink = 0;
};

std::string fixture_to_text(const Topology& topo, NodeId sink);
Fixture fixture_from_text(const std::string& text);
Fixture load_fixture(const std::string& path);
void save_fixture(const std::string& path, const Topology& topo, NodeId sink);

// The nine-node reference network: tree edges at pdr 1.0 rooted at node 1
// (node 0 is a traffic-less leaf of the root), plus the single
// interference-only edge 2-5 at pdr 0.4 that fixes the secondary-conflict
// structure. Used by the replay driver and the golden tests.
Fixture nine_node_fixture();

}  // namespace lvsim
