#include "lvsim/scheduler_lv.hpp"

#include <cassert>
#include <stdexcept>

namespace lvsim {

std::optional<long> compute_load(long q, int p) {
    if (q == 0) return 0;
    if (p == 0) return std::nullopt;
    return q / p + 1;
}

double conflict_weight(const LinkId& a, const LinkId& b, const ConflictSets& cs, int channels) {
    std::optional<ConflictKind> k = cs.kind(a, b);
    if (!k) return 0.0;
    return *k == ConflictKind::Primary ? 1.0 : 1.0 / channels;
}

namespace {

long queue_of(const std::map<LinkId, LinkDemand>& states, const LinkId& l) {
    auto it = states.find(l);
    return it == states.end() ? 0 : it->second.q;
}

}  // namespace

long long weighted_neighborhood_demand(const LinkId& link,
                                       const std::map<LinkId, LinkDemand>& states,
                                       const ConflictSets& cs, int channels) {
    long long a = queue_of(states, link);
    long long b = 0;
    for (const auto& e : cs.of(link)) {
        if (e.kind == ConflictKind::Primary)
            a += queue_of(states, e.link);
        else
            b += queue_of(states, e.link);
    }
    return a * channels + b;
}

int compute_u(const LinkId& link, const std::map<LinkId, LinkDemand>& states,
              const ConflictSets& cs, int slots, int channels) {
    auto it = states.find(link);
    if (it == states.end()) throw std::invalid_argument("link has no demand state");
    long long d = weighted_neighborhood_demand(link, states, cs, channels);
    if (d <= 0) throw std::invalid_argument("vote undefined for an idle neighbourhood");
    // round-half-up of (q*S*M)/D: floor((2*n + d) / (2*d))
    long long n = static_cast<long long>(it->second.q) * slots * channels;
    long long share = (2 * n + d) / (2 * d);
    assert(share >= 0 && share <= slots);
    return static_cast<int>(share) - it->second.p;
}

std::vector<SixtopRequest> lv_schedule_frame(const std::map<LinkId, LinkDemand>& states,
                                             const ConflictSets& cs, int slots, int channels) {
    std::vector<SixtopRequest> out;
    for (const auto& [link, st] : states) {
        if (weighted_neighborhood_demand(link, states, cs, channels) == 0) {
            if (st.p > 0) out.push_back({link, SixtopRequest::Delete, st.p});
            continue;
        }
        int u = compute_u(link, states, cs, slots, channels);
        if (u > 0)
            out.push_back({link, SixtopRequest::Add, u});
        else if (u < 0)
            out.push_back({link, SixtopRequest::Delete, -u});
    }
    return out;
}

}  // namespace lvsim
