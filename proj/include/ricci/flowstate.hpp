#pragma once

#include <utility>
#include <vector>

#include "ricci/profile.hpp"
#include "ricci/surgery.hpp"

namespace ricci {

struct Component {
  long id = 0;
  long parent = -1;
  Profile p;
  double extinction_threshold = 0;  // 10 * mean ds at birth
  bool born_from_surgery = false;
};

struct SurgeryEvent {
  double t = 0;
  long component = -1;
  std::vector<CutRecord> cuts;
  std::vector<long> children;
  std::vector<DiscardedPiece> discarded;
  std::vector<CapCheck> cap_checks;
  bool whole_component_discarded = false;
  double max_psi_before = 0, max_psi_after = 0;
  int bumps_before = 0, bumps_after = 0;
};

// The multiset of live components plus genealogy.
struct FlowState {
  double t = 0;
  std::vector<Component> components;
  std::vector<std::pair<long, std::vector<long>>> genealogy;
  long next_id = 0;
};

// Applies the (r,delta)-cutoff to every component whose curvature reached
// the horn threshold; treated components are replaced by their children
// (or removed when discarded).  Returns one event per treated component.
std::vector<SurgeryEvent> perform_surgery(FlowState& state, const SurgeryParams& params,
                                          int child_nodes);

}  // namespace ricci
