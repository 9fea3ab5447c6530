#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lvsim/types.hpp"

namespace lvsim {

// Identifies one scenario cell of the experiment grid. Threshold only
// matters for the OTF scheduler but stays in the key so CSV rows are uniform.
struct ScenarioKey {
    SchedulerKind scheduler = SchedulerKind::LV;
    int threshold = 0;
    int parents = 1;
    int packets_per_burst = 5;

    auto operator<=>(const ScenarioKey&) const = default;
};

std::string scenario_label(const ScenarioKey& key);

// Per-frame time series; one entry per executed slotframe.
struct MetricsSeries {
    std::vector<long> total_queue_fill;
    std::vector<long> packets_reached_root_cumulative;
    std::vector<long> allocated_rx_cells;
    std::vector<double> charge_consumed_cumulative;  // µC

    std::size_t frames() const { return total_queue_fill.size(); }
};

struct RunSummary {
    ScenarioKey key;
    std::uint64_t seed = 0;
    EngineMode mode = EngineMode::Strict;
    MetricsSeries series;
    double time_last_packet = 0.0;        // seconds; 0 when nothing was delivered
    double max_end_to_end_latency = 0.0;  // seconds over delivered packets
    double total_charge = 0.0;            // µC
    long created = 0;
    long delivered = 0;
    long queued_at_end = 0;
    long dropped_overflow = 0;
    long dropped_retry = 0;
    long collisions = 0;
    long relocations = 0;
};

struct MetricStat {
    std::string name;
    double mean = 0.0;
    bool ci_defined = false;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct AggregateReport {
    ScenarioKey key;
    int runs = 0;
    std::vector<MetricStat> scalars;  // fixed name order, see aggregate()
    // per-frame means over runs (series lengths must agree across runs)
    std::vector<double> mean_queue_fill;
    std::vector<double> mean_reached_root;
    std::vector<double> mean_allocated_cells;
    std::vector<double> mean_charge;
};

// Mean and symmetric normal-approximation CI per scalar metric. One summary
// is accepted but leaves the CI flagged undefined. All summaries must share
// the same scenario key and frame count.
AggregateReport aggregate(const std::vector<RunSummary>& summaries, double confidence = 0.95);

// CSV writers. All doubles are printed with %.17g so equal values round-trip
// bit-exactly; rows use LF line endings. Headers are always present.
void emit_timeseries_csv(const MetricsSeries& series, const std::string& path);
void emit_mean_timeseries_csv(const AggregateReport& report, const std::string& path);
void emit_aggregate_csv(const std::vector<AggregateReport>& reports, const std::string& path);
void emit_run_summary_csv(const RunSummary& summary, const std::string& path);

// Writes <dir>/timeseries.csv (mean series) and <dir>/aggregate.csv for one
// scenario's aggregate report.
void emit_csv(const AggregateReport& report, const std::string& dir);

std::string format_double(double v);

}  // namespace lvsim
