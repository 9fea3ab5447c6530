#include "lvsim/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lvsim {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string scenario_label(const ScenarioKey& key) {
    std::ostringstream os;
    os << to_string(key.scheduler);
    if (key.scheduler == SchedulerKind::OTF) os << "_t" << key.threshold;
    os << "_p" << key.parents << "_b" << key.packets_per_burst;
    return os.str();
}

namespace {

// two-sided normal quantiles for the supported confidence levels
double z_for(double confidence) {
    if (confidence == 0.90) return 1.6448536269514722;
    if (confidence == 0.95) return 1.959963984540054;
    if (confidence == 0.99) return 2.5758293035489004;
    throw std::invalid_argument("unsupported confidence level (use 0.90, 0.95 or 0.99)");
}

MetricStat stat_of(const std::string& name, const std::vector<double>& xs, double z) {
    MetricStat s;
    s.name = name;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    if (xs.size() >= 2) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
        double half = z * sd / std::sqrt(static_cast<double>(xs.size()));
        s.ci_defined = true;
        s.ci_low = s.mean - half;
        s.ci_high = s.mean + half;
    }
    return s;
}

std::ofstream open_or_throw(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: LF endings everywhere
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

}  // namespace

AggregateReport aggregate(const std::vector<RunSummary>& summaries, double confidence) {
    if (summaries.empty()) throw std::invalid_argument("aggregate needs at least one run");
    double z = z_for(confidence);
    AggregateReport rep;
    rep.key = summaries.front().key;
    rep.runs = static_cast<int>(summaries.size());
    std::size_t frames = summaries.front().series.frames();
    for (const RunSummary& s : summaries) {
        if (s.key != rep.key) throw std::invalid_argument("mixed scenario keys in aggregate");
        if (s.series.frames() != frames)
            throw std::invalid_argument("mismatched series lengths in aggregate");
    }

    auto collect = [&](auto&& get) {
        std::vector<double> xs;
        xs.reserve(summaries.size());
        for (const RunSummary& s : summaries) xs.push_back(static_cast<double>(get(s)));
        return xs;
    };
    rep.scalars = {
        stat_of("packets_reached_root", collect([](const RunSummary& s) { return s.delivered; }), z),
        stat_of("time_last_packet_s", collect([](const RunSummary& s) { return s.time_last_packet; }), z),
        stat_of("max_end_to_end_latency_s",
                collect([](const RunSummary& s) { return s.max_end_to_end_latency; }), z),
        stat_of("total_charge_uc", collect([](const RunSummary& s) { return s.total_charge; }), z),
        stat_of("packets_created", collect([](const RunSummary& s) { return s.created; }), z),
        stat_of("queued_at_end", collect([](const RunSummary& s) { return s.queued_at_end; }), z),
        stat_of("dropped_overflow", collect([](const RunSummary& s) { return s.dropped_overflow; }), z),
        stat_of("dropped_retry", collect([](const RunSummary& s) { return s.dropped_retry; }), z),
        stat_of("collisions", collect([](const RunSummary& s) { return s.collisions; }), z),
    };

    double inv_n = 1.0 / static_cast<double>(summaries.size());
    rep.mean_queue_fill.assign(frames, 0.0);
    rep.mean_reached_root.assign(frames, 0.0);
    rep.mean_allocated_cells.assign(frames, 0.0);
    rep.mean_charge.assign(frames, 0.0);
    for (const RunSummary& s : summaries) {
        for (std::size_t f = 0; f < frames; ++f) {
            rep.mean_queue_fill[f] += static_cast<double>(s.series.total_queue_fill[f]) * inv_n;
            rep.mean_reached_root[f] +=
                static_cast<double>(s.series.packets_reached_root_cumulative[f]) * inv_n;
            rep.mean_allocated_cells[f] +=
                static_cast<double>(s.series.allocated_rx_cells[f]) * inv_n;
            rep.mean_charge[f] += s.series.charge_consumed_cumulative[f] * inv_n;
        }
    }
    return rep;
}

static const char* kSeriesHeader =
    "frame,total_queue_fill,packets_reached_root_cumulative,allocated_rx_cells,"
    "charge_consumed_cumulative\n";

void emit_timeseries_csv(const MetricsSeries& series, const std::string& path) {
    std::ofstream out = open_or_throw(path);
    out << kSeriesHeader;
    for (std::size_t f = 0; f < series.frames(); ++f) {
        out << f << ',' << series.total_queue_fill[f] << ','
            << series.packets_reached_root_cumulative[f] << ',' << series.allocated_rx_cells[f]
            << ',' << format_double(series.charge_consumed_cumulative[f]) << '\n';
    }
}

void emit_mean_timeseries_csv(const AggregateReport& report, const std::string& path) {
    std::ofstream out = open_or_throw(path);
    out << kSeriesHeader;
    for (std::size_t f = 0; f < report.mean_queue_fill.size(); ++f) {
        out << f << ',' << format_double(report.mean_queue_fill[f]) << ','
            << format_double(report.mean_reached_root[f]) << ','
            << format_double(report.mean_allocated_cells[f]) << ','
            << format_double(report.mean_charge[f]) << '\n';
    }
}

void emit_aggregate_csv(const std::vector<AggregateReport>& reports, const std::string& path) {
    std::ofstream out = open_or_throw(path);
    out << "scheduler,threshold,parents,packets_per_burst,runs,metric,mean,ci_low,ci_high\n";
    for (const AggregateReport& rep : reports) {
        for (const MetricStat& s : rep.scalars) {
            out << to_string(rep.key.scheduler) << ',' << rep.key.threshold << ','
                << rep.key.parents << ',' << rep.key.packets_per_burst << ',' << rep.runs << ','
                << s.name << ',' << format_double(s.mean) << ',';
            if (s.ci_defined)
                out << format_double(s.ci_low) << ',' << format_double(s.ci_high) << '\n';
            else
                out << "nan,nan\n";  // single run: CI undefined
        }
    }
}

void emit_run_summary_csv(const RunSummary& s, const std::string& path) {
    std::ofstream out = open_or_throw(path);
    out << "scheduler,threshold,parents,packets_per_burst,mode,seed,metric,value\n";
    auto row = [&](const std::string& name, const std::string& value) {
        out << to_string(s.key.scheduler) << ',' << s.key.threshold << ',' << s.key.parents << ','
            << s.key.packets_per_burst << ',' << to_string(s.mode) << ',' << s.seed << ',' << name
            << ',' << value << '\n';
    };
    row("packets_created", std::to_string(s.created));
    row("packets_reached_root", std::to_string(s.delivered));
    row("queued_at_end", std::to_string(s.queued_at_end));
    row("dropped_overflow", std::to_string(s.dropped_overflow));
    row("dropped_retry", std::to_string(s.dropped_retry));
    row("collisions", std::to_string(s.collisions));
    row("relocations", std::to_string(s.relocations));
    row("time_last_packet_s", format_double(s.time_last_packet));
    row("max_end_to_end_latency_s", format_double(s.max_end_to_end_latency));
    row("total_charge_uc", format_double(s.total_charge));
}

void emit_csv(const AggregateReport& report, const std::string& dir) {
    emit_mean_timeseries_csv(report, dir + "/timeseries.csv");
    emit_aggregate_csv({report}, dir + "/aggregate.csv");
}

}  // namespace lvsim
