#pragma once

#include <string>
#include <vector>

#include "lvsim/engine.hpp"

namespace lvsim {

// Scenario grid for batch sweeps. Threshold only applies to the OTF
// scheduler; the voting scheduler contributes one scenario per
// (parents, burst) combination.
struct SweepGrid {
    std::vector<SchedulerKind> schedulers = {SchedulerKind::LV, SchedulerKind::OTF};
    std::vector<int> thresholds = {0, 1, 4, 10};
    std::vector<int> parents = {1, 2, 3};
    std::vector<int> bursts = {5, 25};
    int seeds = 30;
    int jobs = 1;
};

struct ConfigFile {
    SimConfig sim;
    SweepGrid sweep;
};

// Plain-text key=value configuration; '#' starts a comment, blank lines are
// skipped, list values are comma-separated. Keys mirror the SimConfig field
// names (see README for the full table). Unknown keys are an error.
ConfigFile parse_config_text(const std::string& text);
ConfigFile load_config(const std::string& path);

// Applies one key=value assignment; used for both files and CLI overrides.
void apply_config_entry(ConfigFile& cfg, const std::string& key, const std::string& value);

}  // namespace lvsim
