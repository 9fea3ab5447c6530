#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lvsim/engine.hpp"
#include "lvsim/types.hpp"

namespace lvsim {

// One table entry of the 9-node reference trace: allocation, queue, load
// indicator and vote for one link at one frame boundary. x is undefined
// while the link holds no cells; u is undefined when every queue in the
// link's interference neighbourhood is empty (no vote exists).
struct TraceCell {
    int p = 0;
    long q = 0;
    std::optional<long> x;
    std::optional<int> u;

    bool operator==(const TraceCell&) const = default;
};

using TraceRow = std::array<TraceCell, 7>;

// Column order of the reference table.
const std::array<LinkId, 7>& trace_links();
const std::array<long, 7>& trace_initial_queues();

// The pinned 13-frame reference trace (frames 0..12).
const std::vector<TraceRow>& golden_trace();

// Builds the 9-node fixture engine (S=15, M=5, replay mode, voting
// scheduler), seeds the initial backlog and records one row per frame
// boundary before that boundary's requests are applied.
std::vector<TraceRow> run_replay_trace(int frames = 13);

// Human-readable table, one block per link column group.
std::string format_trace(const std::vector<TraceRow>& rows);

// Differences as "frame F link (s,d): field want .. got .."; empty when equal.
std::vector<std::string> diff_trace(const std::vector<TraceRow>& expected,
                                    const std::vector<TraceRow>& actual);

}  // namespace lvsim
