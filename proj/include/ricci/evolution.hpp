#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ricci/profile.hpp"

namespace ricci {

struct StepControl {
  double cfl = 0.2;              // in (0, 0.5]
  double dt_min = 1e-12;
  double snapshot_every = 0;     // flow time cadence; 0 = off
  long snapshot_every_steps = 0; // step-count cadence; 0 = off
  long max_steps = 200'000'000;
  long series_stride = 8;        // K_max sampling / control-check stride
  int regrid_nodes = 0;          // 0 = keep the incoming node count
  double c_mon = -1;             // monitor coefficient; <0 = 0.1 mean rho at start
};

struct StopRule {
  double t_end = 1e30;
  double rho_trigger = 0;        // stop when min rho drops below; 0 = off
  double psi_max_below = 0;      // stop (extinct) when max psi drops below; 0 = off
  // When positive, the trigger only arms once min rho has been seen above
  // this level (hysteresis for freshly capped components).
  double trigger_arm_above = 0;
};

struct Derivs {
  std::vector<double> dphi, dpsi;
};

// d psi/dt = psi_ss - (n-1)(1 - psi_s^2)/psi,  d phi/dt = n phi psi_ss/psi.
Derivs rhs(const Profile& p);
Derivs rhs_serial(const Profile& p);

double cfl_dt(const Profile& p, const StepControl& ctl);

// One classical RK4 update; pole values re-enforced.
Profile step(const Profile& p, double dt);

enum class StopReason { TimeEnd, Trigger, Underflow, Extinct, MaxSteps };
std::string stop_reason_name(StopReason r);

struct KmaxSample {
  double t, K_max, psi_min, psi_max;
};

struct TrajectoryEvent {
  double t;
  std::string kind;    // "regrid" | "trigger" | "underflow" | "extinct"
  std::string detail;
};

struct Trajectory {
  std::vector<std::pair<double, Profile>> snapshots;
  std::vector<KmaxSample> series;   // sampled every series_stride steps
  std::vector<TrajectoryEvent> events;
  StopReason reason = StopReason::TimeEnd;
  long steps = 0;
  double c_mon = 0;
};

Trajectory evolve(const Profile& p0, const StepControl& ctl, const StopRule& stop);

// Type-I blow-up time from a least-squares line through 1/K_max over the
// last quartile of the series.  Throws FitFailed.
double estimate_blowup_time(const std::vector<std::pair<double, double>>& t_and_kmax,
                            double* fit_residual = nullptr);
double estimate_blowup_time(const Trajectory& traj, double* fit_residual = nullptr);

// Sup-norm residual of [d_t, d_s] psi = -n (psi_ss/psi) d_s psi across
// adjacent snapshot pairs sharing a grid.
double commutator_residual(const Trajectory& traj);

}  // namespace ricci
