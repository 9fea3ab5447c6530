#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace lvsim {

using NodeId = int;  // dense indices [0, N); generated topologies use 0 as the sink

// Directed transmitter->receiver pair. Ordered so containers iterate in
// lexicographic (src, dst) order, which is the scheduler's processing order.
struct LinkId {
    NodeId src = -1;
    NodeId dst = -1;

    friend auto operator<=>(const LinkId&, const LinkId&) = default;
};

inline bool shares_endpoint(LinkId a, LinkId b) {
    return a.src == b.src || a.src == b.dst || a.dst == b.src || a.dst == b.dst;
}

struct Cell {
    int slot = 0;     // slot offset t in [0, S)
    int channel = 0;  // channel offset chOf in [0, M)

    friend auto operator<=>(const Cell&, const Cell&) = default;
};

enum class ConflictKind { Primary, Secondary };

enum class SchedulerKind { LV, OTF };
enum class EngineMode { Strict, Local, Replay };

std::string to_string(SchedulerKind k);
std::string to_string(EngineMode m);
bool parse_scheduler(const std::string& s, SchedulerKind& out);
bool parse_mode(const std::string& s, EngineMode& out);
// throwing forms for config/CLI plumbing
SchedulerKind parse_scheduler(const std::string& s);
EngineMode parse_mode(const std::string& s);

}  // namespace lvsim

template <>
struct std::hash<lvsim::LinkId> {
    size_t operator()(const lvsim::LinkId& l) const noexcept {
        return std::hash<long long>()((static_cast<long long>(l.src) << 32) ^
                                      static_cast<unsigned>(l.dst));
    }
};
