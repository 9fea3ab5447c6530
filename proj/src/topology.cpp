#include "lvsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace lvsim {

std::string to_string(SchedulerKind k) { return k == SchedulerKind::LV ? "lv" : "otf"; }

std::string to_string(EngineMode m) {
    switch (m) {
        case EngineMode::Strict: return "strict";
        case EngineMode::Local: return "local";
        default: return "replay";
    }
}

bool parse_scheduler(const std::string& s, SchedulerKind& out) {
    if (s == "lv" || s == "LV") out = SchedulerKind::LV;
    else if (s == "otf" || s == "OTF") out = SchedulerKind::OTF;
    else return false;
    return true;
}

bool parse_mode(const std::string& s, EngineMode& out) {
    if (s == "strict") out = EngineMode::Strict;
    else if (s == "local") out = EngineMode::Local;
    else if (s == "replay") out = EngineMode::Replay;
    else return false;
    return true;
}

SchedulerKind parse_scheduler(const std::string& s) {
    SchedulerKind k;
    if (!parse_scheduler(s, k)) throw std::invalid_argument("unknown scheduler: " + s);
    return k;
}

EngineMode parse_mode(const std::string& s) {
    EngineMode m;
    if (!parse_mode(s, m)) throw std::invalid_argument("unknown mode: " + s);
    return m;
}

double link_pdr(double distance_m, const PropagationModel& model, Rng& rng) {
    double d = std::max(distance_m, 1.0);
    double path_loss = model.pl_ref_db + 10.0 * model.pl_exponent * std::log10(d);
    double shadow = model.shadowing_sigma_db * rng.next_normal();
    double cap = 3.0 * model.shadowing_sigma_db;
    shadow = std::clamp(shadow, -cap, cap);
    double rx = model.tx_power_dbm - path_loss + shadow;
    if (rx >= model.full_rx_dbm) return 1.0;
    if (rx <= model.sensitivity_dbm) return 0.0;
    return (rx - model.sensitivity_dbm) / (model.full_rx_dbm - model.sensitivity_dbm);
}

Topology::Topology(int n_nodes, double area_side)
    : pos_(n_nodes), nbrs_(n_nodes), area_side_(area_side) {}

void Topology::set_position(NodeId n, double x, double y) { pos_[n] = {x, y}; }

double Topology::distance(NodeId a, NodeId b) const {
    double dx = pos_[a].first - pos_[b].first;
    double dy = pos_[a].second - pos_[b].second;
    return std::sqrt(dx * dx + dy * dy);
}

void Topology::set_edge(NodeId a, NodeId b, double pdr) {
    auto key = std::minmax(a, b);
    auto detach = [this](NodeId x, NodeId y) {
        auto& v = nbrs_[x];
        v.erase(std::remove(v.begin(), v.end(), y), v.end());
    };
    bool existed = edge_pdr_.count(key) > 0;
    if (pdr <= 0.0) {
        if (existed) {
            edge_pdr_.erase(key);
            detach(a, b);
            detach(b, a);
        }
        return;
    }
    edge_pdr_[key] = pdr;
    if (!existed) {
        nbrs_[a].insert(std::upper_bound(nbrs_[a].begin(), nbrs_[a].end(), b), b);
        nbrs_[b].insert(std::upper_bound(nbrs_[b].begin(), nbrs_[b].end(), a), a);
    }
}

double Topology::pdr(NodeId a, NodeId b) const {
    auto it = edge_pdr_.find(std::minmax(a, b));
    return it == edge_pdr_.end() ? 0.0 : it->second;
}

std::vector<NodeId> Topology::good_neighbors(NodeId n) const {
    std::vector<NodeId> out;
    for (NodeId m : nbrs_[n])
        if (pdr(n, m) > 0.5) out.push_back(m);
    return out;
}

std::vector<std::tuple<NodeId, NodeId, double>> Topology::edges() const {
    std::vector<std::tuple<NodeId, NodeId, double>> out;
    out.reserve(edge_pdr_.size());
    for (const auto& [key, p] : edge_pdr_) out.emplace_back(key.first, key.second, p);
    return out;
}

namespace {

uint64_t double_bits(double d) {
    uint64_t u;
    static_assert(sizeof(u) == sizeof(d));
    __builtin_memcpy(&u, &d, sizeof(u));
    return u;
}

// Position-derived edge seed: symmetric, order-independent, and any
// re-placement of an endpoint automatically re-draws the shadowing.
uint64_t edge_seed(uint64_t run_seed, std::pair<double, double> pa,
                   std::pair<double, double> pb) {
    uint64_t ha = splitmix64(double_bits(pa.first) ^ splitmix64(double_bits(pa.second)));
    uint64_t hb = splitmix64(double_bits(pb.first) ^ splitmix64(double_bits(pb.second)));
    auto [lo, hi] = std::minmax(ha, hb);
    return mix_seed(run_seed, 0xed6e5001u, lo, hi);
}

void recompute_edges_of(Topology& topo, NodeId n, uint64_t run_seed,
                        const PropagationModel& model) {
    for (NodeId m = 0; m < topo.n_nodes(); ++m) {
        if (m == n) continue;
        Rng edge_rng(edge_seed(run_seed, topo.position(n), topo.position(m)));
        topo.set_edge(n, m, link_pdr(topo.distance(n, m), model, edge_rng));
    }
}

// non-conforming: too few good neighbors, or cut off from the sink through
// good edges (only enforced when a neighbor minimum is demanded at all)
std::vector<NodeId> non_conforming(const Topology& topo, int min_good) {
    int n = topo.n_nodes();
    std::vector<char> reach(n, 0);
    if (min_good >= 1) {
        std::queue<NodeId> bfs;
        bfs.push(0);
        reach[0] = 1;
        while (!bfs.empty()) {
            NodeId v = bfs.front();
            bfs.pop();
            for (NodeId w : topo.good_neighbors(v))
                if (!reach[w]) {
                    reach[w] = 1;
                    bfs.push(w);
                }
        }
    } else {
        std::fill(reach.begin(), reach.end(), 1);
    }
    std::vector<NodeId> bad;
    for (NodeId v = 0; v < n; ++v)
        if (static_cast<int>(topo.good_neighbors(v).size()) < min_good || !reach[v])
            bad.push_back(v);
    return bad;
}

}  // namespace

Topology generate_topology(int n_nodes, double area_side, int min_good_neighbors,
                           uint64_t rng_seed, const PropagationModel& model,
                           int attempt_cap) {
    if (n_nodes < 2) throw std::invalid_argument("generate_topology: need at least 2 nodes");
    if (area_side <= 0) throw std::invalid_argument("generate_topology: area_side must be > 0");

    Topology topo(n_nodes, area_side);
    std::vector<Rng> node_streams;
    node_streams.reserve(n_nodes);
    for (NodeId v = 0; v < n_nodes; ++v)
        node_streams.emplace_back(mix_seed(rng_seed, 0x706c6163u, static_cast<uint64_t>(v)));

    for (NodeId v = 0; v < n_nodes; ++v) {
        double x = node_streams[v].next_double() * area_side;
        double y = node_streams[v].next_double() * area_side;
        topo.set_position(v, x, y);
    }
    for (NodeId v = 0; v < n_nodes; ++v)
        for (NodeId w = v + 1; w < n_nodes; ++w) {
            Rng edge_rng(edge_seed(rng_seed, topo.position(v), topo.position(w)));
            topo.set_edge(v, w, link_pdr(topo.distance(v, w), model, edge_rng));
        }

    std::vector<int> attempts(n_nodes, 0);
    for (;;) {
        std::vector<NodeId> bad = non_conforming(topo, min_good_neighbors);
        if (bad.empty()) break;
        NodeId v = bad.front();
        if (++attempts[v] > attempt_cap)
            throw std::runtime_error(
                "generate_topology: node " + std::to_string(v) + " still non-conforming after " +
                std::to_string(attempt_cap) + " re-placements (density infeasible)");
        double x = node_streams[v].next_double() * area_side;
        double y = node_streams[v].next_double() * area_side;
        topo.set_position(v, x, y);
        recompute_edges_of(topo, v, rng_seed, model);
    }
    return topo;
}

std::vector<LinkId> RplTree::links() const {
    std::vector<LinkId> out;
    for (NodeId child = 0; child < static_cast<NodeId>(parents.size()); ++child)
        for (NodeId par : parents[child]) out.push_back({child, par});
    std::sort(out.begin(), out.end());
    return out;
}

RplTree build_rpl_tree(const Topology& topo, int max_parents, NodeId sink) {
    int n = topo.n_nodes();
    constexpr double kInf = 1e300;
    RplTree tree;
    tree.sink = sink;
    tree.rank.assign(n, kInf);
    tree.parents.assign(n, {});

    using Item = std::pair<double, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    tree.rank[sink] = 0.0;
    pq.push({0.0, sink});
    while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        if (d > tree.rank[v]) continue;
        for (NodeId w : topo.neighbors(v)) {
            double p = topo.pdr(v, w);
            if (p <= 0.5) continue;
            double nd = d + 1.0 / p;
            if (nd < tree.rank[w]) {
                tree.rank[w] = nd;
                pq.push({nd, w});
            }
        }
    }

    for (NodeId v = 0; v < n; ++v) {
        if (v == sink) continue;
        if (tree.rank[v] >= kInf)
            throw std::runtime_error("build_rpl_tree: node " + std::to_string(v) +
                                     " unreachable from the sink over pdr>0.5 edges");
        std::vector<NodeId> cand = topo.good_neighbors(v);
        std::erase_if(cand, [&](NodeId w) { return tree.rank[w] >= tree.rank[v]; });
        std::sort(cand.begin(), cand.end(), [&](NodeId a, NodeId b) {
            return tree.rank[a] != tree.rank[b] ? tree.rank[a] < tree.rank[b] : a < b;
        });
        if (cand.empty())
            throw std::runtime_error("build_rpl_tree: node " + std::to_string(v) +
                                     " has no lower-rank parent candidate");
        if (static_cast<int>(cand.size()) > max_parents) cand.resize(max_parents);
        tree.parents[v] = std::move(cand);
    }
    return tree;
}

const std::vector<ConflictSets::Entry>& ConflictSets::of(LinkId l) const {
    static const std::vector<Entry> kEmpty;
    auto it = sets_.find(l);
    return it == sets_.end() ? kEmpty : it->second;
}

bool ConflictSets::conflicts(LinkId a, LinkId b) const { return kind(a, b).has_value(); }

std::optional<ConflictKind> ConflictSets::kind(LinkId a, LinkId b) const {
    for (const Entry& e : of(a))
        if (e.link == b) return e.kind;
    return std::nullopt;
}

ConflictSets interference_sets(const Topology& topo, const std::vector<LinkId>& links) {
    ConflictSets cs;
    cs.links_ = links;
    std::sort(cs.links_.begin(), cs.links_.end());
    for (LinkId a : cs.links_) {
        std::vector<ConflictSets::Entry> entries;
        for (LinkId b : cs.links_) {
            if (a == b) continue;
            if (shares_endpoint(a, b)) {
                entries.push_back({b, ConflictKind::Primary});
            } else if (topo.pdr(a.src, b.dst) > 0.0 || topo.pdr(a.dst, b.src) > 0.0) {
                entries.push_back({b, ConflictKind::Secondary});
            }
        }
        cs.sets_[a] = std::move(entries);
    }
    return cs;
}

std::string fixture_to_text(const Topology& topo, NodeId sink) {
    std::ostringstream out;
    out << "# sink " << sink << "\n# nodes\n";
    char buf[128];
    for (NodeId v = 0; v < topo.n_nodes(); ++v) {
        auto [x, y] = topo.position(v);
        std::snprintf(buf, sizeof buf, "%d, %.17g, %.17g\n", v, x, y);
        out << buf;
    }
    out << "# edges\n";
    for (const auto& [a, b, p] : topo.edges()) {
        std::snprintf(buf, sizeof buf, "%d, %d, %.17g\n", a, b, p);
        out << buf;
    }
    return out.str();
}

Fixture fixture_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    enum { kNodes, kEdges } section = kNodes;
    NodeId sink = 0;
    std::vector<std::tuple<int, double, double>> nodes;
    std::vector<std::tuple<int, int, double>> edges;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = line;
        for (char& c : s)
            if (c == ',') c = ' ';
        std::istringstream ls(s);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "#") {
            std::string word;
            if (ls >> word) {
                if (word == "nodes") section = kNodes;
                else if (word == "edges") section = kEdges;
                else if (word == "sink") ls >> sink;
            }
            continue;
        }
        std::istringstream vs(s);
        if (section == kNodes) {
            int id;
            double x, y;
            if (!(vs >> id >> x >> y))
                throw std::runtime_error("fixture line " + std::to_string(lineno) +
                                         ": expected 'id, x, y'");
            nodes.emplace_back(id, x, y);
        } else {
            int a, b;
            double p;
            if (!(vs >> a >> b >> p))
                throw std::runtime_error("fixture line " + std::to_string(lineno) +
                                         ": expected 'a, b, pdr'");
            edges.emplace_back(a, b, p);
        }
    }
    int n = 0;
    for (auto& [id, x, y] : nodes) n = std::max(n, id + 1);
    Fixture fx;
    fx.topo = Topology(n, 0.0);
    fx.sink = sink;
    for (auto& [id, x, y] : nodes) fx.topo.set_position(id, x, y);
    for (auto& [a, b, p] : edges) fx.topo.set_edge(a, b, p);
    return fx;
}

Fixture load_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open fixture file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return fixture_from_text(ss.str());
}

void save_fixture(const std::string& path, const Topology& topo, NodeId sink) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write fixture file: " + path);
    out << fixture_to_text(topo, sink);
}

Fixture nine_node_fixture() {
    Fixture fx;
    fx.topo = Topology(9, 600.0);
    fx.sink = 1;
    // positions are illustrative only; connectivity is pinned by explicit edges
    const double pos[9][2] = {{300, 500}, {300, 400}, {200, 300}, {400, 300}, {150, 200},
                              {450, 200}, {100, 100}, {400, 100}, {500, 100}};
    for (NodeId v = 0; v < 9; ++v) fx.topo.set_position(v, pos[v][0], pos[v][1]);
    fx.topo.set_edge(0, 1, 1.0);  // traffic-less leaf keeps node 0 out of the dynamics
    fx.topo.set_edge(2, 1, 1.0);
    fx.topo.set_edge(3, 1, 1.0);
    fx.topo.set_edge(4, 2, 1.0);
    fx.topo.set_edge(5, 3, 1.0);
    fx.topo.set_edge(6, 4, 1.0);
    fx.topo.set_edge(7, 5, 1.0);
    fx.topo.set_edge(8, 5, 1.0);
    // interference-only edge: too weak to route over, strong enough to couple
    // the (4,2)/(5,3) and (2,1)/(7,5)/(8,5) neighborhoods
    fx.topo.set_edge(2, 5, 0.4);
    return fx;
}

}  // namespace lvsim
