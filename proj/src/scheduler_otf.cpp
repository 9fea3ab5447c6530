#include "lvsim/scheduler_otf.hpp"

#include <algorithm>
#include <cmath>

namespace lvsim {

std::vector<SixtopRequest> otf_schedule_frame(const std::map<LinkId, LinkDemand>& states,
                                              const OtfState& otf, int threshold, int slots) {
    std::vector<SixtopRequest> out;
    for (const auto& [link, st] : states) {
        double want = otf.demand(link) + static_cast<double>(st.q) / slots;
        int required = static_cast<int>(std::ceil(want));
        required = std::clamp(required, 0, slots);
        if (st.p < required)
            out.push_back({link, SixtopRequest::Add, required - st.p});
        else if (st.p > required + threshold)
            out.push_back({link, SixtopRequest::Delete, st.p - required - threshold});
    }
    return out;
}

}  // namespace lvsim
