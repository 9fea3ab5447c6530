#include "lvsim/replay.hpp"

#include <iomanip>
#include <sstream>

#include "lvsim/scheduler_lv.hpp"

namespace lvsim {

const std::array<LinkId, 7>& trace_links() {
    static const std::array<LinkId, 7> links = {
        LinkId{6, 4}, LinkId{3, 1}, LinkId{2, 1}, LinkId{7, 5},
        LinkId{4, 2}, LinkId{8, 5}, LinkId{5, 3},
    };
    return links;
}

const std::array<long, 7>& trace_initial_queues() {
    static const std::array<long, 7> q0 = {10, 20, 5, 25, 45, 7, 14};
    return q0;
}

namespace {

constexpr int kNoX = -1;    // p = 0, load undefined
constexpr int kNoU = -999;  // idle neighbourhood, vote undefined

struct RawCell {
    int p;
    long q;
    int x;
    int u;
};

// 13 frame boundaries x 7 links, column order as trace_links().
constexpr RawCell kGolden[13][7] = {
    {{0, 10, kNoX, 3}, {0, 20, kNoX, 7}, {0, 5, kNoX, 1}, {0, 25, kNoX, 7},
     {0, 45, kNoX, 11}, {0, 7, kNoX, 2}, {0, 14, kNoX, 3}},
    {{3, 7, 3, -1}, {7, 16, 3, -3}, {1, 15, 16, 2}, {7, 18, 3, -2},
     {11, 37, 4, -2}, {2, 5, 3, 0}, {3, 20, 7, 2}},
    {{2, 5, 3, 0}, {4, 17, 5, 0}, {3, 21, 8, 1}, {5, 13, 3, -1},
     {9, 30, 4, -2}, {2, 3, 2, -1}, {5, 22, 5, 0}},
    {{2, 3, 2, -1}, {4, 18, 5, 0}, {4, 24, 7, 1}, {4, 9, 3, -1},
     {7, 25, 4, 0}, {1, 2, 3, 0}, {5, 22, 5, 1}},
    {{1, 2, 3, 0}, {4, 20, 6, 0}, {5, 26, 6, 1}, {3, 6, 3, -1},
     {7, 19, 3, -1}, {1, 1, 2, -1}, {6, 20, 4, 0}},
    {{1, 1, 2, 0}, {4, 22, 6, 1}, {6, 26, 5, 0}, {2, 4, 3, 0},
     {6, 14, 3, -1}, {0, 1, kNoX, 0}, {6, 16, 3, -1}},
    {{1, 0, 1, -1}, {5, 22, 5, 0}, {6, 25, 5, 1}, {2, 2, 2, -1},
     {5, 10, 3, -1}, {0, 1, kNoX, 1}, {5, 13, 3, 0}},
    {{0, 0, kNoX, 0}, {5, 22, 5, 1}, {7, 22, 4, 0}, {1, 1, 2, 0},
     {4, 6, 2, -1}, {1, 0, 1, -1}, {5, 10, 3, -1}},
    {{0, 0, kNoX, 0}, {6, 20, 4, 1}, {7, 18, 3, 0}, {1, 0, 1, -1},
     {3, 3, 2, -1}, {0, 0, kNoX, 0}, {4, 7, 2, 0}},
    {{0, 0, kNoX, 0}, {6, 18, 4, 2}, {7, 13, 2, -1}, {0, 0, kNoX, 0},
     {2, 1, 1, -1}, {0, 0, kNoX, 0}, {4, 3, 1, -2}},
    {{0, 0, kNoX, 0}, {7, 13, 2, 2}, {6, 8, 2, 0}, {0, 0, kNoX, 0},
     {1, 0, 1, -1}, {0, 0, kNoX, 0}, {2, 1, 1, -1}},
    {{0, 0, kNoX, 0}, {8, 6, 1, 3}, {6, 2, 1, -2}, {0, 0, kNoX, 0},
     {0, 0, kNoX, 0}, {0, 0, kNoX, 0}, {1, 0, 1, -1}},
    {{0, 0, kNoX, kNoU}, {11, 0, 1, kNoU}, {4, 0, 1, kNoU}, {0, 0, kNoX, kNoU},
     {0, 0, kNoX, kNoU}, {0, 0, kNoX, kNoU}, {0, 0, kNoX, kNoU}},
};

std::string cell_str(const TraceCell& c) {
    std::ostringstream os;
    os << c.p << '/' << c.q << '/';
    if (c.x)
        os << *c.x;
    else
        os << "NA";
    os << '/';
    if (c.u)
        os << *c.u;
    else
        os << "NA";
    return os.str();
}

}  // namespace

const std::vector<TraceRow>& golden_trace() {
    static const std::vector<TraceRow> rows = [] {
        std::vector<TraceRow> out(13);
        for (int f = 0; f < 13; ++f) {
            for (int c = 0; c < 7; ++c) {
                const RawCell& raw = kGolden[f][c];
                TraceCell cell;
                cell.p = raw.p;
                cell.q = raw.q;
                if (raw.x != kNoX) cell.x = raw.x;
                if (raw.u != kNoU) cell.u = raw.u;
                out[f][c] = cell;
            }
        }
        return out;
    }();
    return rows;
}

std::vector<TraceRow> run_replay_trace(int frames) {
    Fixture fx = nine_node_fixture();
    SimConfig cfg;
    cfg.n_nodes = fx.topo.n_nodes();
    cfg.area_side = fx.topo.area_side();
    cfg.slotframe_length = 15;
    cfg.channels = 5;
    cfg.burst_times.clear();
    cfg.scheduler = SchedulerKind::LV;
    cfg.mode = EngineMode::Replay;
    cfg.cycles_per_run = frames;
    RplTree tree = build_rpl_tree(fx.topo, 1, fx.sink);
    Engine engine(cfg, fx.topo, tree);
    for (std::size_t i = 0; i < trace_links().size(); ++i)
        engine.seed_queue(trace_links()[i], trace_initial_queues()[i]);

    std::vector<TraceRow> rows;
    for (int f = 0; f < frames; ++f) {
        std::map<LinkId, LinkDemand> snap = engine.snapshot();
        TraceRow row;
        for (std::size_t c = 0; c < trace_links().size(); ++c) {
            const LinkId& l = trace_links()[c];
            const LinkDemand& st = snap.at(l);
            TraceCell cell;
            cell.p = st.p;
            cell.q = st.q;
            // The trace prints a load for every link that holds cells, even
            // an idle one (an empty queue over p cells still rounds to 1).
            if (st.p > 0) cell.x = st.q / st.p + 1;
            if (weighted_neighborhood_demand(l, snap, engine.conflicts(), cfg.channels) > 0)
                cell.u = compute_u(l, snap, engine.conflicts(), cfg.slotframe_length, cfg.channels);
            row[c] = cell;
        }
        rows.push_back(row);
        engine.step();
    }
    return rows;
}

std::string format_trace(const std::vector<TraceRow>& rows) {
    std::ostringstream os;
    os << "cells/queue/load/vote per frame (NA = undefined)\n";
    os << std::left << std::setw(6) << "frame";
    for (const LinkId& l : trace_links()) {
        std::ostringstream h;
        h << '(' << l.src << ',' << l.dst << ')';
        os << std::setw(14) << h.str();
    }
    os << '\n';
    for (std::size_t f = 0; f < rows.size(); ++f) {
        os << std::left << std::setw(6) << f;
        for (const TraceCell& c : rows[f]) os << std::setw(14) << cell_str(c);
        os << '\n';
    }
    return os.str();
}

std::vector<std::string> diff_trace(const std::vector<TraceRow>& expected,
                                    const std::vector<TraceRow>& actual) {
    std::vector<std::string> out;
    std::size_t frames = std::max(expected.size(), actual.size());
    for (std::size_t f = 0; f < frames; ++f) {
        if (f >= expected.size() || f >= actual.size()) {
            out.push_back("frame " + std::to_string(f) + ": present on one side only");
            continue;
        }
        for (std::size_t c = 0; c < trace_links().size(); ++c) {
            if (expected[f][c] == actual[f][c]) continue;
            const LinkId& l = trace_links()[c];
            std::ostringstream os;
            os << "frame " << f << " link (" << l.src << ',' << l.dst << "): want "
               << cell_str(expected[f][c]) << " got " << cell_str(actual[f][c]);
            out.push_back(os.str());
        }
    }
    return out;
}

}  // namespace lvsim
