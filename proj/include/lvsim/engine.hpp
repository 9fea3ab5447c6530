#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <ostream>
#include <vector>

#include "lvsim/metrics.hpp"
#include "lvsim/rng.hpp"
#include "lvsim/schedule.hpp"
#include "lvsim/scheduler_lv.hpp"
#include "lvsim/scheduler_otf.hpp"
#include "lvsim/topology.hpp"
#include "lvsim/types.hpp"

namespace lvsim {

// Charge per slot in microcoulombs, one state per node per slot.
struct EnergyModel {
    double tx_data_rx_ack = 54.5;
    double rx_data_tx_ack = 32.6;
    double idle_listen = 6.4;
    double sleep = 0.85;
};

struct SimConfig {
    int n_nodes = 50;
    double area_side = 2000.0;  // metres
    int slotframe_length = 101;
    double slot_duration = 0.010;  // seconds
    int channels = 16;
    std::vector<double> burst_times = {20.0, 60.0};  // seconds
    int packets_per_burst = 5;
    int queue_capacity = 100;
    int max_mac_retries = 5;
    double housekeeping_period = 1.0;  // seconds
    int otf_threshold = 0;
    int rpl_parents = 1;
    int cycles_per_run = 100;
    SchedulerKind scheduler = SchedulerKind::LV;
    EngineMode mode = EngineMode::Strict;
    std::uint64_t rng_seed = 1;
    // secondary knobs, defaults documented in the README
    double otf_alpha = 0.5;
    int min_good_neighbors = 2;
    EnergyModel energy{};
    PropagationModel propagation{};

    ScenarioKey scenario() const {
        return {scheduler, otf_threshold, rpl_parents, packets_per_burst};
    }
};

// Throws std::invalid_argument naming the offending field.
void validate(const SimConfig& config);

// Queue recurrence bookkeeping for one link over one frame:
//   q_end = q_start - sent - retry_drops + z
// and, in replay mode, sent = min(q_start, p).
struct LedgerRow {
    LinkId link;
    long q_start = 0;
    int p = 0;
    long sent = 0;
    long retry_drops = 0;
    long z = 0;
    long q_end = 0;
};

struct FrameReport {
    int frame = 0;
    int requests_issued = 0;  // 6top add/delete requests at this frame's boundary
    long sent = 0;
    long delivered = 0;
    long collided = 0;
    long dropped_retry = 0;
    long dropped_overflow = 0;
    int relocations = 0;
    std::vector<LedgerRow> ledger;  // one row per tree link, (src, dst) order
};

struct Packet {
    long id = 0;
    NodeId source = -1;
    long created_at = 0;  // absolute slot index
    int retries = 0;      // failed attempts on the current hop
};

// One simulation run: a routing tree over a fixed topology, a TSCH schedule
// evolving per frame under the configured scheduling function, and per-slot
// transmission/energy accounting. Strictly single-threaded, deterministic
// under (config, topology) including the seed.
//
// run() drives the whole loop; the frame pipeline underneath is public so
// tests and the trace replayer can step it one phase at a time:
//   snapshot -> schedule_frame -> apply_requests -> execute_frame -> merge
class Engine {
  public:
    Engine(const SimConfig& config, Topology topology, RplTree tree);

    // Generates the topology and routing tree from the config seed.
    static Engine from_config(const SimConfig& config);

    RunSummary run();

    // One frame through the full pipeline (including metrics recording).
    FrameReport step();

    // -- pipeline phases --
    std::map<LinkId, LinkDemand> snapshot() const;
    // Scheduling decisions for the current boundary from the given snapshot.
    std::vector<SixtopRequest> schedule_frame(const std::map<LinkId, LinkDemand>& states) const;
    // All deletes first, then all adds, in the emitted order.
    void apply_requests(const std::vector<SixtopRequest>& requests);
    // Executes the current frame's S slots: transmissions, collisions,
    // retries, bursts, energy. Arrivals are staged, not yet visible in queues.
    FrameReport execute_frame();
    // Frame-end queue merge; routes staged packets to parent links with
    // overflow accounting, totals z per link, feeds the OTF demand estimator.
    void merge_arrivals(FrameReport& report);

    // Direct enqueue onto a link (initial backlog for trace replay and
    // drain tests); packets are stamped with the current absolute slot.
    void seed_queue(const LinkId& link, long count);
    // Staged injection at a node, merged like any other arrival at frame end.
    void inject_arrivals(NodeId node, long count);

    // Per-slot audit records ("frame,slot,channel,src,dst,outcome"); header
    // is written on attach. Pass nullptr to detach.
    void set_event_log(std::ostream* out);

    const Topology& topology() const { return topo_; }
    const RplTree& tree() const { return tree_; }
    const ConflictSets& conflicts() const { return conflicts_; }
    const Schedule& schedule() const { return schedule_; }
    Schedule& schedule() { return schedule_; }
    const SimConfig& config() const { return config_; }
    int frame_index() const { return frame_; }
    long created() const { return created_; }
    long delivered() const { return delivered_; }
    double charge() const { return charge_; }

  private:
    struct LinkRuntime {
        std::deque<Packet> queue;
        long z_last = 0;
    };

    void stage(NodeId node, Packet pkt);
    void record_metrics(const FrameReport& report);
    void fail_attempt(LinkRuntime& rt, LedgerRow& row, FrameReport& report);
    void check_ledger(const FrameReport& report) const;

    SimConfig config_;
    Topology topo_;
    RplTree tree_;
    ConflictSets conflicts_;
    Schedule schedule_;
    Rng rng_;
    OtfState otf_;
    Knowledge knowledge_;
    CellPick pick_;
    int housekeeping_frames_ = 1;

    std::map<LinkId, LinkRuntime> links_;
    std::map<NodeId, std::vector<Packet>> staged_;
    CellStats cell_stats_;
    std::vector<long> burst_slots_;

    int frame_ = 0;
    long next_packet_id_ = 0;
    long created_ = 0;
    long delivered_ = 0;
    long dropped_overflow_ = 0;
    long dropped_retry_ = 0;
    long collisions_ = 0;
    long relocations_ = 0;
    double charge_ = 0.0;
    long last_delivery_slot_ = -1;
    long max_latency_slots_ = 0;
    MetricsSeries series_;
    std::ostream* event_log_ = nullptr;
};

}  // namespace lvsim
