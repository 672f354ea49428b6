#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ricci/curvature.hpp"
#include "ricci/evolution.hpp"
#include "ricci/profile.hpp"

namespace ricci {

constexpr double kMarginSentinel = 1e300;  // vacuous pass

struct MonitorReport {
  std::string name;
  bool pass = true;
  bool enabled = true;       // false: precondition failed, monitor skipped
  double margin = kMarginSentinel;  // signed; positive = satisfied with slack
  double t_at = 0;
  long node_at = -1;
  long samples = 0;
  std::string note;
};

// ---- pointwise / randomized algebra ----

// Def. R >= -nu (log(-nu) + log(1+t) - n(n+1)/2) at nodes with nu <= -1/(1+t).
// Margin is relative to the node scale; pass at >= -1e-8.
MonitorReport hamilton_ivey(const CurvatureField& cf, double t, int n);
// Aggregated over snapshots; disabled unless min nu(t0) >= -1 (+1e-9 slack).
MonitorReport hamilton_ivey_trajectory(const Trajectory& traj);

struct HiOdeSample {
  double identity_rel;  // |dR/dt - 2R^2/(n+1) - n(n-1)^2 (l-m)^2/(n+1)| / scale
  double case_rel;      // ((-nu) dR/dt + dnu/dt (R-nu) - (-nu)^3) / scale, signed
};
HiOdeSample hi_ode_algebra(double lambda, double mu, int n);

struct ScanResult {
  long samples = 0;
  long violations = 0;
  double worst_identity = 0;   // max |identity_rel|
  double worst_case = kMarginSentinel;  // min signed case_rel
  std::uint64_t seed = 0;
};
ScanResult hi_ode_scan(int n, long samples, std::uint64_t seed);
ScanResult hi_ode_scan_serial(int n, long samples, std::uint64_t seed);

// Rm(h,h)/|h|^2 <= |Rc|^2/R for rotationally symmetric h, R > 0; lambda/mu
// are sectional curvatures here.  Returns the relative margin (>= -1e-12
// passes) and the eigenvalue cross-check gap.
bool anderson_chow(double lambda, double mu, double h00, double h11, int n,
                   double* rel_margin = nullptr, double* eigen_gap = nullptr);

struct AcScanResult {
  long samples = 0;
  long violations = 0;
  double worst_margin = kMarginSentinel;  // min signed relative margin
  double worst_eigen_gap = 0;             // max |direct - eigen route| rel
  std::uint64_t seed = 0;
};
AcScanResult anderson_chow_scan(int n, long samples, std::uint64_t seed);
AcScanResult anderson_chow_scan_serial(int n, long samples, std::uint64_t seed);

// ---- bump structure ----

struct BumpInfo {
  int bumps = 0;   // sign changes of psi_s from + to -
  int necks = 0;   // - to +
  std::vector<std::size_t> bump_nodes;
  std::vector<std::size_t> neck_nodes;
};
BumpInfo bump_structure(const Profile& p, double eps = -1);
int bump_count(const Profile& p, double eps = -1);

// totals: (t, total live bump count); margin = min(prev - next).
MonitorReport bump_monotone(const std::vector<std::pair<double, int>>& totals);

// ---- trajectory monitors ----

// psi(leftmost bump)^2 - 2(n-1)(T-t) > 0 at every snapshot.
MonitorReport neck_lower_bound(const Trajectory& traj, double T);

// (T-t)^2 K_max bounded: no 2x growth across the final decade of T-t.
MonitorReport blowup_rate(const Trajectory& traj, double T);

// Pole sectional curvature against b2 A1^2 / (2(n-1)(T-t)^2).
MonitorReport pole_rate_bound(const Trajectory& traj, double T, double b2, double A1);

// max psi^2 strictly decreasing, rate >= 2(n-1)(1-0.05) at interior-critical
// maxima; the paper's constant n is reported alongside.
MonitorReport extinction_decay(const Trajectory& traj);

// margin = min(z_sim - z_star) on a common grid.
MonitorReport barrier_ordering(std::span<const double> u, std::span<const double> z_sim,
                               std::span<const double> z_star);

}  // namespace ricci
