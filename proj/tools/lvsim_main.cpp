// Batch experiment driver: single runs, scenario sweeps, the 9-node
// reference-trace replay, and conflict checking of schedule dumps.
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "lvsim/config.hpp"
#include "lvsim/engine.hpp"
#include "lvsim/metrics.hpp"
#include "lvsim/replay.hpp"
#include "lvsim/schedule.hpp"
#include "lvsim/topology.hpp"

namespace fs = std::filesystem;
using namespace lvsim;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir = "out";
    std::string event_log_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> scheduler;
    std::optional<int> threshold;
    std::optional<int> parents;
    std::optional<int> packets_per_burst;
    std::optional<std::string> mode;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f, bool with_event_log) {
    cmd->add_option("--config", f.config_path, "key=value configuration file");
    cmd->add_option("--out-dir", f.out_dir, "output directory for CSV files");
    cmd->add_option("--seed", f.seed, "RNG seed for the run");
    cmd->add_option("--scheduler", f.scheduler, "scheduling function: lv or otf");
    cmd->add_option("--threshold", f.threshold, "OTF over-provisioning threshold (cells)");
    cmd->add_option("--parents", f.parents, "max routing parents per node");
    cmd->add_option("--packets-per-burst", f.packets_per_burst, "packets each node emits per burst");
    cmd->add_option("--mode", f.mode, "engine mode: strict, local or replay");
    if (with_event_log)
        cmd->add_option("--event-log", f.event_log_path, "write per-slot audit records to this file");
}

ConfigFile resolve_config(const CommonFlags& f) {
    ConfigFile cfg;
    if (!f.config_path.empty()) cfg = load_config(f.config_path);
    if (f.seed) cfg.sim.rng_seed = *f.seed;
    if (f.scheduler) cfg.sim.scheduler = parse_scheduler(*f.scheduler);
    if (f.threshold) cfg.sim.otf_threshold = *f.threshold;
    if (f.parents) cfg.sim.rpl_parents = *f.parents;
    if (f.packets_per_burst) cfg.sim.packets_per_burst = *f.packets_per_burst;
    if (f.mode) cfg.sim.mode = parse_mode(*f.mode);
    return cfg;
}

int cmd_run(const CommonFlags& flags) {
    ConfigFile cfg = resolve_config(flags);
    Engine engine = Engine::from_config(cfg.sim);
    std::ofstream event_log;
    if (!flags.event_log_path.empty()) {
        event_log.open(flags.event_log_path, std::ios::binary);
        if (!event_log) {
            std::cerr << "cannot open event log: " << flags.event_log_path << "\n";
            return 1;
        }
        engine.set_event_log(&event_log);
    }
    RunSummary summary = engine.run();
    fs::create_directories(flags.out_dir);
    emit_timeseries_csv(summary.series, flags.out_dir + "/timeseries.csv");
    emit_run_summary_csv(summary, flags.out_dir + "/summary.csv");
    std::cout << scenario_label(summary.key) << " seed " << summary.seed << ": created "
              << summary.created << ", reached root " << summary.delivered << ", queued "
              << summary.queued_at_end << ", dropped " << summary.dropped_overflow + summary.dropped_retry
              << ", charge " << format_double(summary.total_charge) << " uC\n";
    return 0;
}

int cmd_sweep(const CommonFlags& flags, std::optional<int> seeds_flag, std::optional<int> jobs_flag) {
    ConfigFile cfg = resolve_config(flags);
    if (seeds_flag) cfg.sweep.seeds = *seeds_flag;
    if (jobs_flag) cfg.sweep.jobs = *jobs_flag;
    if (cfg.sweep.seeds < 1) {
        std::cerr << "sweep needs at least one seed\n";
        return 1;
    }

    // Scenario grid: the voting scheduler has no threshold axis.
    std::vector<SimConfig> scenarios;
    for (SchedulerKind sched : cfg.sweep.schedulers) {
        std::vector<int> thresholds =
            sched == SchedulerKind::OTF ? cfg.sweep.thresholds : std::vector<int>{0};
        for (int thr : thresholds) {
            for (int par : cfg.sweep.parents) {
                for (int burst : cfg.sweep.bursts) {
                    SimConfig s = cfg.sim;
                    s.scheduler = sched;
                    s.otf_threshold = thr;
                    s.rpl_parents = par;
                    s.packets_per_burst = burst;
                    scenarios.push_back(s);
                }
            }
        }
    }

    // One task per (scenario, seed); workers fill pre-sized slots so the
    // merge order (and therefore the CSV) is independent of scheduling.
    const int seeds = cfg.sweep.seeds;
    std::vector<RunSummary> results(scenarios.size() * static_cast<std::size_t>(seeds));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= results.size()) return;
            SimConfig s = scenarios[i / seeds];
            s.rng_seed = cfg.sim.rng_seed + i % seeds;  // paired seeds across scenarios
            results[i] = Engine::from_config(s).run();
        }
    };
    int jobs = std::max(1, cfg.sweep.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    fs::create_directories(flags.out_dir);
    std::vector<AggregateReport> reports;
    for (std::size_t sc = 0; sc < scenarios.size(); ++sc) {
        std::vector<RunSummary> group(results.begin() + sc * seeds,
                                      results.begin() + (sc + 1) * seeds);
        AggregateReport rep = aggregate(group);
        emit_mean_timeseries_csv(rep,
                                 flags.out_dir + "/timeseries_" + scenario_label(rep.key) + ".csv");
        reports.push_back(std::move(rep));
    }
    emit_aggregate_csv(reports, flags.out_dir + "/aggregate.csv");
    std::cout << "wrote " << reports.size() << " scenarios x " << seeds << " seeds to "
              << flags.out_dir << "/aggregate.csv\n";
    return 0;
}

int cmd_replay() {
    std::vector<TraceRow> actual = run_replay_trace();
    std::cout << format_trace(actual);
    std::vector<std::string> diffs = diff_trace(golden_trace(), actual);
    if (diffs.empty()) {
        std::cout << "trace matches the pinned reference (13 frames, 7 links)\n";
        return 0;
    }
    std::cerr << diffs.size() << " mismatches:\n";
    for (const std::string& d : diffs) std::cerr << "  " << d << "\n";
    return 1;
}

int cmd_verify(const std::string& fixture_path, const std::string& dump_path) {
    Fixture fx = load_fixture(fixture_path);
    std::ifstream in(dump_path, std::ios::binary);
    if (!in) {
        std::cerr << "cannot read schedule dump: " << dump_path << "\n";
        return 1;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    Schedule schedule = Schedule::from_dump(buf.str(), 1, 1);

    std::vector<LinkId> links;
    for (int t = 0; t < schedule.slots(); ++t)
        for (int ch = 0; ch < schedule.channels(); ++ch)
            for (const LinkId& l : schedule.occupants({t, ch}))
                if (std::find(links.begin(), links.end(), l) == links.end()) links.push_back(l);
    ConflictSets cs = interference_sets(fx.topo, links);
    std::vector<std::string> violations = schedule.scan_violations(cs);
    if (violations.empty()) {
        std::cout << "schedule clean: " << schedule.total_allocated() << " cells, "
                  << links.size() << " links\n";
        return 0;
    }
    std::cerr << violations.size() << " violations:\n";
    for (const std::string& v : violations) std::cerr << "  " << v << "\n";
    return 1;
}

int cmd_fixture(const std::string& out_path) {
    Fixture fx = nine_node_fixture();
    std::string text = fixture_to_text(fx.topo, fx.sink);
    if (out_path.empty()) {
        std::cout << text;
        return 0;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        std::cerr << "cannot write " << out_path << "\n";
        return 1;
    }
    out << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TSCH cell-scheduling simulator (voting and threshold schedulers)"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    CLI::App* run = app.add_subcommand("run", "run one scenario and write its CSVs");
    add_common_flags(run, run_flags, true);

    CommonFlags sweep_flags;
    std::optional<int> seeds_flag;
    std::optional<int> jobs_flag;
    CLI::App* sweep = app.add_subcommand("sweep", "run the scenario grid and aggregate");
    add_common_flags(sweep, sweep_flags, false);
    sweep->add_option("--seeds", seeds_flag, "number of seeds per scenario");
    sweep->add_option("--jobs", jobs_flag, "worker threads (output is order-independent)");

    CLI::App* replay = app.add_subcommand("replay", "reproduce the 9-node reference trace");

    std::string verify_fixture;
    std::string verify_dump;
    CLI::App* verify = app.add_subcommand("verify", "conflict-check a schedule dump");
    verify->add_option("fixture", verify_fixture, "fixture topology file")->required();
    verify->add_option("dump", verify_dump, "schedule dump file (t, chOf, src, dst)")->required();

    std::string fixture_out;
    CLI::App* fixture = app.add_subcommand("fixture", "print the 9-node fixture topology");
    fixture->add_option("--out", fixture_out, "write to a file instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_flags);
        if (sweep->parsed()) return cmd_sweep(sweep_flags, seeds_flag, jobs_flag);
        if (replay->parsed()) return cmd_replay();
        if (verify->parsed()) return cmd_verify(verify_fixture, verify_dump);
        if (fixture->parsed()) return cmd_fixture(fixture_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
