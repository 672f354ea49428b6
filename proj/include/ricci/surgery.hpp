#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ricci/curvature.hpp"
#include "ricci/profile.hpp"

namespace ricci {

// Standard-cap warping eta_hat: 1 on r <= 0, the 1 - a e^{-b/r} drop to 1/8,
// a concave monotone bridge, then a spherical cap with eta_hat(D) = 0 and
// eta_hat'(D) = -1.  Closed forms are kept so the cap can be evaluated at
// arbitrary r; the sampled table is for serialization.
struct CapTable {
  int n = 2;
  double a_const = 0, b_const = 0;  // 1/(100n)^2, 100n
  double k = 0;                     // spherical-cap curvature
  double D = 0;
  double r_left = 1.0;
  double bridge_x0 = 0, bridge_x1 = 0;
  double zc[4] = {0, 0, 0, 0};      // cubic for eta' on the bridge, t = r - x0
  double bridge_v0 = 1;             // eta at bridge_x0
  std::vector<double> r, eta;

  double eta_hat(double r) const;
  double eta_p(double r) const;
  double eta_pp(double r) const;
};

CapTable build_cap_table(int n, int grid_size = 4096);

struct SurgeryParams {
  double r = 0.1;       // canonical scale
  double delta = 0.05;  // neck tolerance
  double h = -1;        // cut-scale factor; < 0 selects h = delta
  double tol_cap = 1e-6;
  // Numerical fallbacks (all recorded per cut when used): the window shrinks
  // geometrically from 1/delta toward min_window, the acceptance threshold
  // relaxes up to score_relax_max * delta, and the R-band widens until the
  // horn is covered.  Cylindricality of a real pinch improves only like
  // 1/log(T-t), so the nominal window-(1/delta) test may be unattainable.
  double min_window = 1.0;
  double score_relax_max = 1.0;   // 1 = strict delta threshold
  double trigger_factor = 0.5;    // trigger at factor * h r sqrt(2/(n(n-1)))
  CapTable cap;

  double h_eff() const { return h < 0 ? delta : h; }
  double horn_threshold() const { return 1.0 / (delta * r * delta * r); }
  double cut_level() const { return 1.0 / (h_eff() * r * h_eff() * r); }
  double trigger_rho(int n) const {
    return trigger_factor * h_eff() * r * std::sqrt(2.0 / (n * (n - 1.0)));
  }
  void check() const;
};

// Discrete C^2 distance to the unit cylinder after rescaling psi(i) to 1,
// over the arclength window of half-width `window` * psi(i).
double neck_quality(const Profile& p, std::size_t i, double window);

struct Horn {
  std::size_t lo, hi;  // node range with R >= (delta r)^-2, inclusive
  int side;            // +1: entered from the left (low curvature on the left)
};

std::vector<Horn> find_horns(const Profile& p, const CurvatureField& cf,
                             const SurgeryParams& params);

struct CutRecord {
  long node = -1;
  int side = 0;
  double s_pos = 0;
  double psi_cut = 0;
  double R_at_cut = 0;
  double neck_score = 0;
  double widen_factor = 0;
  double cut_scale_hr = 0;
  double window_used = 0;
  double threshold_used = 0;
};

CutRecord select_cut(const Profile& p, const CurvatureField& cf, const Horn& horn,
                     const SurgeryParams& params);

struct CapCheck {
  double min_krad_gain = 0;   // min (K~_rad - K_rad) on [0, 1/4], cap units
  double min_R_gain = 0;      // min (R~ - R) on [0, 1/4]
  double min_korb_inner = 0;  // min K~_orb on [0, 1/4]
  double sigma_est = 0;       // min of K~_rad, K~_orb on [1/4, D]
  double pole_slope = 0;
};

// Replaces the profile beyond cut_node (toward side) with the blended
// standard cap; returns the capped component in arclength gauge.
Profile glue_cap(const Profile& p, std::size_t cut_node, int side, const CapTable& cap,
                 double tol_cap = 1e-6, CapCheck* check = nullptr);

struct DiscardedPiece {
  long lo = 0, hi = 0;
  double max_psi = 0;
  double min_R = 0;
  std::string reason;
};

struct ComponentSurgery {
  std::vector<CutRecord> cuts;
  std::vector<Profile> children;
  std::vector<CapCheck> cap_checks;
  std::vector<DiscardedPiece> discarded;
  bool whole_component_discarded = false;
  double max_psi_before = 0, max_psi_after = 0;
  int bumps_before = 0, bumps_after = 0;
};

// Full (r,delta)-cutoff on one component: find horns, cut and cap each,
// split into children, discard pieces that miss the low-curvature set.
ComponentSurgery surger_component(const Profile& p, const SurgeryParams& params,
                                  int child_nodes);

}  // namespace ricci
