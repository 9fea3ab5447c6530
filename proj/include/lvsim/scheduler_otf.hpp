#pragma once

#include <map>
#include <vector>

#include "lvsim/schedule.hpp"
#include "lvsim/scheduler_lv.hpp"
#include "lvsim/types.hpp"

namespace lvsim {

// Per-link state of the threshold-based bandwidth estimator: an exponential
// moving average of per-frame packet arrivals.
struct OtfState {
    double alpha = 0.5;
    std::map<LinkId, double> smoothed;

    void update_demand(const LinkId& link, long arrivals) {
        double& s = smoothed[link];
        s = alpha * static_cast<double>(arrivals) + (1.0 - alpha) * s;
    }
    double demand(const LinkId& link) const {
        auto it = smoothed.find(link);
        return it == smoothed.end() ? 0.0 : it->second;
    }
};

// One scheduling round of the threshold baseline. A link asks for
//   required = ceil(smoothed_demand + q / slots)
// cells (the backlog term amortises standing queue over one slotframe) and
// tolerates up to `threshold` extra cells before releasing:
//   p < required             -> Add(required - p)
//   p > required + threshold -> Delete(p - required - threshold)
// Requests come out in (src, dst) link order, like the voting scheduler.
std::vector<SixtopRequest> otf_schedule_frame(const std::map<LinkId, LinkDemand>& states,
                                              const OtfState& otf, int threshold, int slots);

}  // namespace lvsim
