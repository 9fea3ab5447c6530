#include "lvsim/schedule.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>
#include <stdexcept>

namespace lvsim {

const std::vector<Cell>& Schedule::cells_of(LinkId l) const {
    static const std::vector<Cell> empty;
    auto it = per_link_.find(l);
    return it == per_link_.end() ? empty : it->second;
}

bool Schedule::check_primary_conflict(Cell c, LinkId link) const {
    for (int ch = 0; ch < M_; ++ch) {
        for (const LinkId& occ : grid_[c.slot * M_ + ch]) {
            if (shares_endpoint(occ, link)) return true;
        }
    }
    return false;
}

bool Schedule::check_secondary_conflict(Cell c, LinkId link, const ConflictSets& cs) const {
    for (const LinkId& occ : grid_[c.slot * M_ + c.channel]) {
        if (occ == link) continue;
        if (cs.kind(link, occ) == ConflictKind::Secondary) return true;
    }
    return false;
}

bool Schedule::admissible(Cell c, LinkId link, const ConflictSets& cs,
                          Knowledge knowledge) const {
    // Half-duplex: both endpoints know every cell they take part in, so this
    // holds under either knowledge model.
    if (check_primary_conflict(c, link)) return false;
    if (knowledge == Knowledge::Local) {
        // Occupants not involving the requester's endpoints are invisible;
        // any primary-clean cell looks free.
        return true;
    }
    if (check_secondary_conflict(c, link, cs)) return false;
    // Keep one occupant per cell under global knowledge: sharing a cell with
    // an unrelated link is legal but pointless when the whole grid is visible.
    return grid_[c.slot * M_ + c.channel].empty();
}

std::vector<Cell> Schedule::add_cells(LinkId link, int count, const ConflictSets& cs, Rng& rng,
                                      Knowledge knowledge, CellPick pick) {
    std::vector<Cell> placed;
    for (int k = 0; k < count; ++k) {
        // Re-scan each round: every placement blocks its whole slot for this
        // link (it shares endpoints with itself).
        std::vector<Cell> options;
        for (int t = 0; t < S_; ++t) {
            for (int ch = 0; ch < M_; ++ch) {
                Cell c{t, ch};
                if (admissible(c, link, cs, knowledge)) options.push_back(c);
            }
        }
        if (options.empty()) break;
        Cell chosen = pick == CellPick::FirstFit
                          ? options.front()
                          : options[rng.next_below(options.size())];
        place(link, chosen);
        placed.push_back(chosen);
    }
    return placed;
}

std::vector<Cell> Schedule::delete_cells(LinkId link, int count, Rng& rng, CellPick pick) {
    std::vector<Cell> removed;
    auto it = per_link_.find(link);
    if (it == per_link_.end()) return removed;
    int n = std::min<int>(count, static_cast<int>(it->second.size()));
    for (int k = 0; k < n; ++k) {
        const std::vector<Cell>& cells = it->second;
        Cell victim = pick == CellPick::FirstFit ? cells.front()
                                                 : cells[rng.next_below(cells.size())];
        remove(link, victim);
        removed.push_back(victim);
        if (it->second.empty()) break;
    }
    return removed;
}

void Schedule::place(LinkId link, Cell c) {
    if (c.slot < 0 || c.slot >= S_ || c.channel < 0 || c.channel >= M_)
        throw std::out_of_range("cell outside slotframe");
    grid_[c.slot * M_ + c.channel].push_back(link);
    auto& cells = per_link_[link];
    cells.insert(std::upper_bound(cells.begin(), cells.end(), c), c);
    ++total_;
}

void Schedule::remove(LinkId link, Cell c) {
    auto& occ = grid_[c.slot * M_ + c.channel];
    auto oit = std::find(occ.begin(), occ.end(), link);
    if (oit == occ.end()) throw std::invalid_argument("cell not held by link");
    occ.erase(oit);
    auto& cells = per_link_[link];
    cells.erase(std::find(cells.begin(), cells.end(), c));
    if (cells.empty()) per_link_.erase(link);
    --total_;
}

std::vector<std::string> Schedule::scan_violations(const ConflictSets& cs) const {
    std::vector<std::string> out;
    auto describe = [](const LinkId& a, const LinkId& b, Cell c, const char* what) {
        std::ostringstream os;
        os << what << " at slot " << c.slot << " ch " << c.channel << ": (" << a.src << ","
           << a.dst << ") vs (" << b.src << "," << b.dst << ")";
        return os.str();
    };
    for (int t = 0; t < S_; ++t) {
        // gather the slot's occupants across channels for the half-duplex check
        std::vector<std::pair<LinkId, int>> slot_occ;
        for (int ch = 0; ch < M_; ++ch) {
            for (const LinkId& l : grid_[t * M_ + ch]) slot_occ.push_back({l, ch});
        }
        for (size_t i = 0; i < slot_occ.size(); ++i) {
            for (size_t j = i + 1; j < slot_occ.size(); ++j) {
                const auto& [a, cha] = slot_occ[i];
                const auto& [b, chb] = slot_occ[j];
                if (shares_endpoint(a, b))
                    out.push_back(describe(a, b, Cell{t, cha}, "half-duplex violation"));
                else if (cha == chb && cs.kind(a, b) == ConflictKind::Secondary)
                    out.push_back(describe(a, b, Cell{t, cha}, "interference violation"));
            }
        }
    }
    return out;
}

std::string Schedule::dump() const {
    std::vector<std::tuple<int, int, int, int>> rows;
    for (const auto& [link, cells] : per_link_) {
        for (Cell c : cells) rows.push_back({c.slot, c.channel, link.src, link.dst});
    }
    std::sort(rows.begin(), rows.end());
    std::ostringstream os;
    for (const auto& [t, ch, src, dst] : rows)
        os << t << ", " << ch << ", " << src << ", " << dst << "\n";
    return os.str();
}

Schedule Schedule::from_dump(const std::string& text, int slots, int channels) {
    struct Row {
        Cell cell;
        LinkId link;
    };
    std::vector<Row> rows;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        for (char& c : line)
            if (c == ',') c = ' ';
        std::istringstream ls(line);
        Row r;
        if (!(ls >> r.cell.slot >> r.cell.channel >> r.link.src >> r.link.dst)) {
            std::string rest;
            if (!(std::istringstream(line) >> rest))  // blank line: skip
                continue;
            throw std::invalid_argument("schedule dump line " + std::to_string(lineno) +
                                        ": expected 't, chOf, src, dst'");
        }
        rows.push_back(r);
    }
    for (const Row& r : rows) {
        slots = std::max(slots, r.cell.slot + 1);
        channels = std::max(channels, r.cell.channel + 1);
    }
    Schedule s(slots, channels);
    for (const Row& r : rows) s.place(r.link, r.cell);
    return s;
}

int housekeeping(Schedule& schedule, CellStats& stats, const ConflictSets& cs, Rng& rng,
                 Knowledge knowledge, CellPick pick) {
    // Pass 1: decide per link which cells underperform its mean.
    std::map<LinkId, std::pair<long, long>> totals;  // attempts, successes
    for (const auto& [key, c] : stats) {
        totals[key.first].first += c.attempts;
        totals[key.first].second += c.successes;
    }
    std::vector<std::pair<LinkId, Cell>> victims;
    for (const auto& [key, c] : stats) {
        if (c.attempts < 10) continue;
        const auto& [att, succ] = totals[key.first];
        double link_mean = static_cast<double>(succ) / static_cast<double>(att);
        double cell_ratio = static_cast<double>(c.successes) / static_cast<double>(c.attempts);
        if (cell_ratio < link_mean - 0.5) victims.push_back(key);
    }
    // Pass 2: relocate. Deleting first frees the slot so the replacement may
    // legally land back on it if nothing better exists.
    int moved = 0;
    for (const auto& [link, cell] : victims) {
        schedule.remove(link, cell);
        stats.erase({link, cell});
        std::vector<Cell> fresh = schedule.add_cells(link, 1, cs, rng, knowledge, pick);
        if (fresh.empty()) {
            schedule.place(link, cell);  // nowhere else to go; keep the old cell
            continue;
        }
        ++moved;
    }
    return moved;
}

}  // namespace lvsim
