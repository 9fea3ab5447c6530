#include "lvsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lvsim {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("config: " + what);
}

}  // namespace

void validate(const SimConfig& c) {
    require(c.n_nodes >= 2, "n_nodes must be at least 2");
    require(c.area_side > 0, "area_side must be positive");
    require(c.slotframe_length >= 1, "slotframe_length must be positive");
    require(c.slot_duration > 0, "slot_duration must be positive");
    require(c.channels >= 1, "channels must be positive");
    require(c.packets_per_burst >= 0, "packets_per_burst must be non-negative");
    require(c.queue_capacity >= 1, "queue_capacity must be positive");
    require(c.max_mac_retries >= 1, "max_mac_retries must be positive");
    require(c.housekeeping_period > 0, "housekeeping_period must be positive");
    require(c.otf_threshold >= 0, "otf_threshold must be non-negative");
    require(c.rpl_parents >= 1, "rpl_parents must be positive");
    require(c.cycles_per_run >= 1, "cycles_per_run must be positive");
    require(c.otf_alpha > 0 && c.otf_alpha <= 1, "otf_alpha must be in (0, 1]");
    require(c.min_good_neighbors >= 0, "min_good_neighbors must be non-negative");
    require(c.energy.sleep >= 0, "energy.sleep must be non-negative");
    require(c.energy.sleep <= c.energy.idle_listen &&
                c.energy.idle_listen <= std::min(c.energy.tx_data_rx_ack, c.energy.rx_data_tx_ack),
            "energy states must order sleep <= idle_listen <= min(tx, rx)");
    double horizon = static_cast<double>(c.cycles_per_run) * c.slotframe_length * c.slot_duration;
    for (double t : c.burst_times) {
        require(t >= 0, "burst time must be non-negative");
        require(t < horizon, "burst time beyond the run horizon");
    }
}

Engine::Engine(const SimConfig& config, Topology topology, RplTree tree)
    : config_(config),
      topo_(std::move(topology)),
      tree_(std::move(tree)),
      conflicts_(interference_sets(topo_, tree_.links())),
      schedule_(config.slotframe_length, config.channels),
      rng_(mix_seed(config.rng_seed, 0x656e67u)),
      knowledge_(config.mode == EngineMode::Local ? Knowledge::Local : Knowledge::Global),
      pick_(config.mode == EngineMode::Replay ? CellPick::FirstFit : CellPick::UniformRandom) {
    validate(config_);
    otf_.alpha = config_.otf_alpha;
    double frame_seconds = config_.slotframe_length * config_.slot_duration;
    housekeeping_frames_ = static_cast<int>(std::ceil(config_.housekeeping_period / frame_seconds));
    for (const LinkId& l : tree_.links()) links_[l];
    for (double t : config_.burst_times)
        burst_slots_.push_back(std::llround(t / config_.slot_duration));
}

Engine Engine::from_config(const SimConfig& config) {
    validate(config);
    Topology topo = generate_topology(config.n_nodes, config.area_side, config.min_good_neighbors,
                                      config.rng_seed, config.propagation);
    RplTree tree = build_rpl_tree(topo, config.rpl_parents, 0);
    return Engine(config, std::move(topo), std::move(tree));
}

std::map<LinkId, LinkDemand> Engine::snapshot() const {
    std::map<LinkId, LinkDemand> out;
    for (const auto& [link, rt] : links_)
        out[link] = {static_cast<long>(rt.queue.size()), schedule_.allocated(link)};
    return out;
}

std::vector<SixtopRequest> Engine::schedule_frame(
    const std::map<LinkId, LinkDemand>& states) const {
    if (config_.scheduler == SchedulerKind::LV)
        return lv_schedule_frame(states, conflicts_, config_.slotframe_length, config_.channels);
    return otf_schedule_frame(states, otf_, config_.otf_threshold, config_.slotframe_length);
}

void Engine::apply_requests(const std::vector<SixtopRequest>& requests) {
    for (const SixtopRequest& r : requests)
        if (r.action == SixtopRequest::Delete) schedule_.delete_cells(r.link, r.count, rng_, pick_);
    for (const SixtopRequest& r : requests)
        if (r.action == SixtopRequest::Add)
            schedule_.add_cells(r.link, r.count, conflicts_, rng_, knowledge_, pick_);
}

void Engine::seed_queue(const LinkId& link, long count) {
    auto it = links_.find(link);
    if (it == links_.end()) throw std::invalid_argument("seed_queue: link not in routing tree");
    long now = static_cast<long>(frame_) * config_.slotframe_length;
    for (long i = 0; i < count; ++i)
        it->second.queue.push_back({next_packet_id_++, link.src, now, 0});
    created_ += count;
}

void Engine::inject_arrivals(NodeId node, long count) {
    long now = static_cast<long>(frame_) * config_.slotframe_length;
    for (long i = 0; i < count; ++i) stage(node, {next_packet_id_++, node, now, 0});
    created_ += count;
}

void Engine::stage(NodeId node, Packet pkt) { staged_[node].push_back(pkt); }

void Engine::set_event_log(std::ostream* out) {
    event_log_ = out;
    // packet/created let latency and delivery counts be recomputed from the
    // log alone; both fields are blank for idle cells
    if (event_log_) *event_log_ << "frame,slot,channel,src,dst,outcome,packet,created\n";
}

void Engine::fail_attempt(LinkRuntime& rt, LedgerRow& row, FrameReport& report) {
    Packet& head = rt.queue.front();
    if (++head.retries >= config_.max_mac_retries) {
        rt.queue.pop_front();
        ++row.retry_drops;
        ++report.dropped_retry;
        ++dropped_retry_;
    }
}

FrameReport Engine::execute_frame() {
    FrameReport report;
    report.frame = frame_;
    std::map<LinkId, std::size_t> row_of;
    for (const auto& [link, rt] : links_) {
        row_of[link] = report.ledger.size();
        LedgerRow row;
        row.link = link;
        row.q_start = static_cast<long>(rt.queue.size());
        row.p = schedule_.allocated(link);
        report.ledger.push_back(row);
    }

    const int S = config_.slotframe_length;
    const int M = config_.channels;
    enum : std::uint8_t { kSleep, kIdle, kRx, kTx };
    std::vector<std::uint8_t> state(static_cast<std::size_t>(topo_.n_nodes()));

    for (int t = 0; t < S; ++t) {
        long abs_slot = static_cast<long>(frame_) * S + t;
        for (long b : burst_slots_) {
            if (b != abs_slot) continue;
            for (NodeId n = 0; n < topo_.n_nodes(); ++n) {
                if (n == tree_.sink) continue;
                for (int k = 0; k < config_.packets_per_burst; ++k)
                    stage(n, {next_packet_id_++, n, abs_slot, 0});
                created_ += config_.packets_per_burst;
            }
        }

        std::fill(state.begin(), state.end(), kSleep);
        auto raise = [&](NodeId n, std::uint8_t s) {
            if (state[n] < s) state[n] = s;
        };

        for (int ch = 0; ch < M; ++ch) {
            const std::vector<LinkId>& occ = schedule_.occupants({t, ch});
            if (occ.empty()) continue;
            std::vector<LinkId> active;
            for (const LinkId& l : occ)
                if (!links_[l].queue.empty()) active.push_back(l);

            // A transmission collides when any co-channel active link
            // interferes with it; every member of such a set is lost.
            // Only local mode can stack interfering links on one cell.
            auto collides = [&](const LinkId& a) {
                for (const LinkId& b : active)
                    if (!(b == a) && conflicts_.kind(a, b).has_value()) return true;
                return false;
            };

            for (const LinkId& l : occ) {
                LinkRuntime& rt = links_[l];
                LedgerRow& row = report.ledger[row_of[l]];
                const char* outcome = "idle";
                long pkt_id = -1;
                long pkt_created = -1;
                if (!rt.queue.empty()) {
                    pkt_id = rt.queue.front().id;
                    pkt_created = rt.queue.front().created_at;
                    ++cell_stats_[{l, Cell{t, ch}}].attempts;
                    raise(l.src, kTx);
                    bool lost_to_collision = collides(l);
                    bool ok = false;
                    if (lost_to_collision) {
                        outcome = "collision";
                        raise(l.dst, kRx);  // the receiver hears the pile-up
                        ++report.collided;
                        ++collisions_;
                        fail_attempt(rt, row, report);
                    } else {
                        ok = config_.mode == EngineMode::Replay ||
                             rng_.bernoulli(topo_.pdr(l.src, l.dst));
                        if (ok) {
                            outcome = "ok";
                            raise(l.dst, kRx);
                            ++cell_stats_[{l, Cell{t, ch}}].successes;
                            Packet pkt = rt.queue.front();
                            rt.queue.pop_front();
                            ++row.sent;
                            ++report.sent;
                            if (l.dst == tree_.sink) {
                                ++delivered_;
                                ++report.delivered;
                                last_delivery_slot_ = abs_slot;
                                max_latency_slots_ =
                                    std::max(max_latency_slots_, abs_slot - pkt.created_at);
                            } else {
                                pkt.retries = 0;  // retry budget is per hop
                                stage(l.dst, pkt);
                            }
                        } else {
                            outcome = "fail";
                            raise(l.dst, kIdle);  // listened, nothing decodable arrived
                            fail_attempt(rt, row, report);
                        }
                    }
                } else {
                    raise(l.dst, kIdle);  // scheduled receiver always listens
                }
                if (event_log_) {
                    *event_log_ << frame_ << ',' << t << ',' << ch << ',' << l.src << ',' << l.dst
                                << ',' << outcome << ',';
                    if (pkt_id >= 0)
                        *event_log_ << pkt_id << ',' << pkt_created << '\n';
                    else
                        *event_log_ << ",\n";
                }
            }
        }

        for (NodeId n = 0; n < topo_.n_nodes(); ++n) {
            switch (state[n]) {
                case kTx: charge_ += config_.energy.tx_data_rx_ack; break;
                case kRx: charge_ += config_.energy.rx_data_tx_ack; break;
                case kIdle: charge_ += config_.energy.idle_listen; break;
                default: charge_ += config_.energy.sleep; break;
            }
        }
    }
    return report;
}

void Engine::merge_arrivals(FrameReport& report) {
    std::map<LinkId, std::size_t> row_of;
    for (std::size_t i = 0; i < report.ledger.size(); ++i) row_of[report.ledger[i].link] = i;

    for (auto& [node, packets] : staged_) {
        const std::vector<NodeId>& parents = tree_.parents.at(node);
        for (const Packet& pkt : packets) {
            bool placed = false;
            for (NodeId par : parents) {
                LinkRuntime& rt = links_.at({node, par});
                if (static_cast<int>(rt.queue.size()) < config_.queue_capacity) {
                    rt.queue.push_back(pkt);
                    ++report.ledger[row_of[{node, par}]].z;
                    placed = true;
                    break;
                }
            }
            if (!placed) {
                ++report.dropped_overflow;
                ++dropped_overflow_;
            }
        }
    }
    staged_.clear();

    for (auto& [link, rt] : links_) {
        LedgerRow& row = report.ledger[row_of[link]];
        row.q_end = static_cast<long>(rt.queue.size());
        rt.z_last = row.z;
        otf_.update_demand(link, row.z);
    }
}

void Engine::check_ledger(const FrameReport& report) const {
    for (const LedgerRow& r : report.ledger) {
        bool ok = r.q_end == r.q_start - r.sent - r.retry_drops + r.z;
        if (ok && config_.mode == EngineMode::Replay)
            ok = r.sent == std::min<long>(r.q_start, r.p) &&
                 r.q_end == std::max<long>(0, r.q_start - r.p) + r.z;
        if (!ok) {
            std::ostringstream os;
            os << "queue ledger violated at frame " << report.frame << " link (" << r.link.src
               << "," << r.link.dst << "): q " << r.q_start << " -> " << r.q_end << " with p="
               << r.p << " sent=" << r.sent << " drops=" << r.retry_drops << " z=" << r.z;
            throw std::logic_error(os.str());
        }
    }
}

void Engine::record_metrics(const FrameReport& report) {
    long fill = 0;
    for (const auto& [link, rt] : links_) fill += static_cast<long>(rt.queue.size());
    series_.total_queue_fill.push_back(fill);
    series_.packets_reached_root_cumulative.push_back(delivered_);
    series_.allocated_rx_cells.push_back(schedule_.total_allocated());
    series_.charge_consumed_cumulative.push_back(charge_);
    (void)report;
}

FrameReport Engine::step() {
    std::vector<SixtopRequest> requests = schedule_frame(snapshot());
    apply_requests(requests);
    FrameReport report = execute_frame();
    report.requests_issued = static_cast<int>(requests.size());
    merge_arrivals(report);
    check_ledger(report);
    if (config_.mode == EngineMode::Local && (frame_ + 1) % housekeeping_frames_ == 0) {
        report.relocations = housekeeping(schedule_, cell_stats_, conflicts_, rng_, knowledge_,
                                          pick_);
        relocations_ += report.relocations;
        cell_stats_.clear();  // statistics window = one housekeeping period
    }
    record_metrics(report);
    ++frame_;
    return report;
}

RunSummary Engine::run() {
    for (int f = 0; f < config_.cycles_per_run; ++f) step();

    RunSummary s;
    s.key = config_.scenario();
    s.seed = config_.rng_seed;
    s.mode = config_.mode;
    s.series = series_;
    s.time_last_packet =
        last_delivery_slot_ < 0 ? 0.0 : static_cast<double>(last_delivery_slot_) * config_.slot_duration;
    s.max_end_to_end_latency = static_cast<double>(max_latency_slots_) * config_.slot_duration;
    s.total_charge = charge_;
    s.created = created_;
    s.delivered = delivered_;
    for (const auto& [link, rt] : links_) s.queued_at_end += static_cast<long>(rt.queue.size());
    s.dropped_overflow = dropped_overflow_;
    s.dropped_retry = dropped_retry_;
    s.collisions = collisions_;
    s.relocations = relocations_;

    if (s.created != s.delivered + s.queued_at_end + s.dropped_overflow + s.dropped_retry)
        throw std::logic_error("packet conservation violated");
    return s;
}

}  // namespace lvsim
