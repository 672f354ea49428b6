#include "ricci/flowstate.hpp"

#include <algorithm>

#include "ricci/curvature.hpp"

namespace ricci {

std::vector<SurgeryEvent> perform_surgery(FlowState& state, const SurgeryParams& params,
                                          int child_nodes) {
  params.check();
  std::vector<SurgeryEvent> events;
  std::vector<Component> next;
  for (Component& c : state.components) {
    const CurvatureField cf = sectional(c.p);
    const double rmax = *std::max_element(cf.R.begin(), cf.R.end());
    if (rmax < params.horn_threshold()) {
      next.push_back(std::move(c));
      continue;
    }
    ComponentSurgery cs = surger_component(c.p, params, child_nodes);
    SurgeryEvent ev;
    ev.t = state.t;
    ev.component = c.id;
    ev.cuts = cs.cuts;
    ev.discarded = cs.discarded;
    ev.cap_checks = cs.cap_checks;
    ev.whole_component_discarded = cs.whole_component_discarded;
    ev.max_psi_before = cs.max_psi_before;
    ev.max_psi_after = cs.max_psi_after;
    ev.bumps_before = cs.bumps_before;
    ev.bumps_after = cs.bumps_after;
    std::vector<long> child_ids;
    for (Profile& ch : cs.children) {
      Component nc;
      nc.id = state.next_id++;
      nc.parent = c.id;
      nc.born_from_surgery = true;
      const auto s = arclength(ch);
      nc.extinction_threshold = 10.0 * (s.back() - s.front()) / (ch.size() - 1);
      nc.p = std::move(ch);
      child_ids.push_back(nc.id);
      next.push_back(std::move(nc));
    }
    ev.children = child_ids;
    state.genealogy.emplace_back(c.id, child_ids);
    events.push_back(std::move(ev));
  }
  state.components = std::move(next);
  return events;
}

}  // namespace ricci
