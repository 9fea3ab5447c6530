#pragma once

#include <map>
#include <string>
#include <vector>

#include "lvsim/rng.hpp"
#include "lvsim/topology.hpp"
#include "lvsim/types.hpp"

namespace lvsim {

struct SixtopRequest {
    enum Action { Add, Delete };
    LinkId link;
    Action action = Add;
    int count = 0;
};

// How much of the grid a requester can see when checking admissibility, and
// how cells are picked among admissible ones.
//  - Global knowledge (strict/replay): all occupants visible; placements never
//    violate the half-duplex or interference constraints.
//  - Local knowledge: only cells involving the requester's own endpoints are
//    visible, so endpoint-disjoint links can land on the same (t, chOf) and
//    collide; housekeeping later relocates the losers.
enum class Knowledge { Global, Local };
// FirstFit = lowest slot then lowest channel, deletes release lowest slots;
// deterministic, used by replay. UniformRandom = seeded uniform choice among
// admissible cells, used by strict/local runs.
enum class CellPick { FirstFit, UniformRandom };

class Schedule {
  public:
    Schedule(int slots, int channels) : S_(slots), M_(channels), grid_(slots * channels) {}

    int slots() const { return S_; }
    int channels() const { return M_; }

    const std::vector<LinkId>& occupants(Cell c) const { return grid_[c.slot * M_ + c.channel]; }
    const std::vector<Cell>& cells_of(LinkId l) const;
    int allocated(LinkId l) const { return static_cast<int>(cells_of(l).size()); }
    int total_allocated() const { return total_; }

    // true iff placing link at cell would give some node two roles in the
    // cell's slot: an occupant anywhere in that slot shares an endpoint
    bool check_primary_conflict(Cell c, LinkId link) const;
    // true iff an occupant of exactly (t, chOf) interferes with link
    // (classified Secondary in the conflict sets)
    bool check_secondary_conflict(Cell c, LinkId link, const ConflictSets& cs) const;

    // Places up to count cells admissible under the given knowledge; returns
    // the cells actually allocated (possibly fewer, possibly none).
    std::vector<Cell> add_cells(LinkId link, int count, const ConflictSets& cs, Rng& rng,
                                Knowledge knowledge = Knowledge::Global,
                                CellPick pick = CellPick::UniformRandom);
    // Removes min(count, allocated) cells; returns them.
    std::vector<Cell> delete_cells(LinkId link, int count, Rng& rng,
                                   CellPick pick = CellPick::UniformRandom);

    // Direct placement used by relocation and tests; no admissibility check.
    void place(LinkId link, Cell c);
    void remove(LinkId link, Cell c);

    // Full-grid scan for half-duplex (same slot, shared endpoint) and
    // interference (same cell, Secondary pair) violations; empty means clean.
    std::vector<std::string> scan_violations(const ConflictSets& cs) const;

    // One line per allocated cell: "t, chOf, src, dst", sorted.
    std::string dump() const;

    // Rebuilds a schedule from dump() output; the grid is sized to the given
    // dimensions, grown if the dump needs more room.
    static Schedule from_dump(const std::string& text, int slots, int channels);

  private:
    bool admissible(Cell c, LinkId link, const ConflictSets& cs, Knowledge knowledge) const;

    int S_;
    int M_;
    int total_ = 0;
    std::vector<std::vector<LinkId>> grid_;
    std::map<LinkId, std::vector<Cell>> per_link_;  // cells kept sorted
};

struct CellCounters {
    long attempts = 0;
    long successes = 0;
};
using CellStats = std::map<std::pair<LinkId, Cell>, CellCounters>;

// Relocates every cell whose delivery ratio over the stats window sits more
// than 0.5 below its link's mean, given at least 10 attempts; each such cell
// is deleted and re-added through the normal admissibility path and its
// counters are dropped. Returns the relocation count.
int housekeeping(Schedule& schedule, CellStats& stats, const ConflictSets& cs, Rng& rng,
                 Knowledge knowledge = Knowledge::Local,
                 CellPick pick = CellPick::UniformRandom);

}  // namespace lvsim
