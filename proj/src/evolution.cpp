#include "ricci/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "ricci/curvature.hpp"
#include "ricci/errors.hpp"
#include "ricci/interp.hpp"
#include "ricci/stencil.hpp"

namespace ricci {

namespace {

// 5-point derivative pair on the (nonuniform) arclength positions S, with
// parity ghosts: odd mirror about poles, wraparound for periodic grids.
void s_derivs(const std::vector<double>& S, const std::vector<double>& f,
              OrbitTopology topo, double period_len, std::vector<double>& d1,
              std::vector<double>& d2) {
  const int N = static_cast<int>(S.size());
  const bool periodic = topo == OrbitTopology::PeriodicCylinder;
  const bool left_pole = topo != OrbitTopology::PeriodicCylinder;
  const bool right_pole = topo == OrbitTopology::ClosedSphere;
  std::vector<double> xe, fe;
  xe.reserve(N + 4);
  fe.reserve(N + 4);
  if (periodic) {
    xe.push_back(S[N - 2] - period_len);
    xe.push_back(S[N - 1] - period_len);
    fe.push_back(f[N - 2]);
    fe.push_back(f[N - 1]);
  } else if (left_pole) {
    xe.push_back(2 * S[0] - S[2]);
    xe.push_back(2 * S[0] - S[1]);
    fe.push_back(2 * f[0] - f[2]);
    fe.push_back(2 * f[0] - f[1]);
  }
  const int L = static_cast<int>(xe.size());
  for (int i = 0; i < N; ++i) {
    xe.push_back(S[i]);
    fe.push_back(f[i]);
  }
  if (periodic) {
    xe.push_back(S[0] + period_len);
    xe.push_back(S[1] + period_len);
    fe.push_back(f[0]);
    fe.push_back(f[1]);
  } else if (right_pole) {
    xe.push_back(2 * S[N - 1] - S[N - 2]);
    xe.push_back(2 * S[N - 1] - S[N - 3]);
    fe.push_back(2 * f[N - 1] - f[N - 2]);
    fe.push_back(2 * f[N - 1] - f[N - 3]);
  }
  d1.resize(N);
  d2.resize(N);
  const int ext_n = static_cast<int>(xe.size());
  std::vector<std::vector<double>> w;
  std::vector<double> xs(5);
  for (int i = 0; i < N; ++i) {
    const int base = std::clamp(i + L - 2, 0, ext_n - 5);
    for (int j = 0; j < 5; ++j) xs[j] = xe[base + j];
    fornberg_weights(S[i], xs, 2, w);
    double a = 0, b = 0;
    for (int j = 0; j < 5; ++j) {
      a += w[1][j] * fe[base + j];
      b += w[2][j] * fe[base + j];
    }
    d1[i] = a;
    d2[i] = b;
  }
}

// The flow is advanced in (S, v) variables with v = psi^2 and S(x,t) the
// cumulative arclength on the fixed coordinate grid:
//   d v/dt = v_ss - 2(n-1) + (n-2) v_s^2 / (2v)    (s-derivatives on S)
//   d S_i/dt = n * int_0^{S_i} Q ds,   Q = psi_ss/psi = (v_ss - v_s^2/(2v))/(2v).
// This is still the fixed-x gauge (phi = dS/dx).  In psi variables the pole
// rows mix 1/psi-amplified stencil noise into a positive eigenvalue of the
// semi-discrete system; in v the n = 2 equation is plain linear heat with a
// pinned zero at the poles, and the n > 2 correction is a smooth even ratio.
// Integrating S instead of phi removes the phi_x coupling from v's equation
// and low-passes the remaining near-pole noise in Q.
class Stepper {
 public:
  explicit Stepper(const Profile& p) : ref_(p), xst_(p) {
    s_.S = arclength(p);
    s_.v.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) s_.v[i] = p.psi[i] * p.psi[i];
    s_.t = p.t;
    if (p.topology == OrbitTopology::PeriodicCylinder)
      s_.length =
          s_.S.back() + 0.5 * (p.phi.back() + p.phi.front()) * (p.period - p.x.back());
  }

  struct SState {
    std::vector<double> S, v;
    double t = 0;
    double length = 0;  // periodic total arclength
  };

  struct SDeriv {
    std::vector<double> dS, dv;
    double dlength = 0;
  };

  const SState& state() const { return s_; }
  double t() const { return s_.t; }

  double min_spacing() const {
    double m = std::numeric_limits<double>::max();
    for (std::size_t i = 1; i < s_.S.size(); ++i) m = std::min(m, s_.S[i] - s_.S[i - 1]);
    if (ref_.topology == OrbitTopology::PeriodicCylinder)
      m = std::min(m, s_.length - s_.S.back());
    return m;
  }

  double min_interior_psi() const {
    const std::size_t lo = ref_.has_left_pole() ? 1 : 0;
    const std::size_t hi = ref_.has_right_pole() ? s_.v.size() - 1 : s_.v.size();
    double m = std::numeric_limits<double>::max();
    for (std::size_t i = lo; i < hi; ++i) m = std::min(m, s_.v[i]);
    return std::sqrt(std::max(m, 0.0));
  }

  double max_psi() const {
    return std::sqrt(std::max(*std::max_element(s_.v.begin(), s_.v.end()), 0.0));
  }

  void rhs_s(const SState& st, SDeriv& d) const {
    const std::size_t N = st.S.size();
    const int n = ref_.n;
    const bool lp = ref_.has_left_pole(), rp = ref_.has_right_pole();
    const std::size_t lo = lp ? 1 : 0, hi = rp ? N - 1 : N;
    for (std::size_t i = lo; i < hi; ++i)
      if (st.v[i] < kPsiFloor * kPsiFloor)
        throw DegenerateProfile("rhs: psi underflow at node " + std::to_string(i) +
                                " t=" + std::to_string(st.t));
    s_derivs(st.S, st.v, ref_.topology, st.length, d1_, d2_);
    d.dS.assign(N, 0.0);
    d.dv.assign(N, 0.0);
    q_.assign(N, 0.0);
#pragma omp parallel for schedule(static) if (N > 4096)
    for (long li = static_cast<long>(lo); li < static_cast<long>(hi); ++li) {
      const std::size_t i = static_cast<std::size_t>(li);
      const double v = st.v[i];
      const double ratio = d1_[i] * d1_[i] / (2.0 * v);
      d.dv[i] = d2_[i] - 2.0 * (n - 1) + (n - 2) * ratio;
      q_[i] = (d2_[i] - ratio) / (2.0 * v);
    }
    // Pole limits of Q by even-parity extrapolation.
    if (lp) {
      double t2[3], qv[3];
      for (int k = 0; k < 3; ++k) {
        const double dd = st.S[k + 1] - st.S[0];
        t2[k] = dd * dd;
        qv[k] = q_[k + 1];
      }
      q_[0] = quad_extrapolate(t2, qv, 0.0);
    }
    if (rp) {
      double t2[3], qv[3];
      for (int k = 0; k < 3; ++k) {
        const double dd = st.S[N - 1] - st.S[N - 2 - k];
        t2[k] = dd * dd;
        qv[k] = q_[N - 2 - k];
      }
      q_[N - 1] = quad_extrapolate(t2, qv, 0.0);
    }
    double acc = 0;
    for (std::size_t i = 1; i < N; ++i) {
      acc += 0.5 * (q_[i] + q_[i - 1]) * (st.S[i] - st.S[i - 1]);
      d.dS[i] = n * acc;
    }
    if (ref_.topology == OrbitTopology::PeriodicCylinder) {
      acc += 0.5 * (q_[0] + q_.back()) * (st.length - st.S.back());
      d.dlength = n * acc;
    }
  }

  void advance(double dt) {
    rhs_s(s_, k1_);
    SState a = axpy(s_, 0.5 * dt, k1_);
    rhs_s(a, k2_);
    a = axpy(s_, 0.5 * dt, k2_);
    rhs_s(a, k3_);
    a = axpy(s_, dt, k3_);
    rhs_s(a, k4_);
    const double w = dt / 6.0;
    for (std::size_t i = 0; i < s_.S.size(); ++i) {
      s_.S[i] += w * (k1_.dS[i] + 2 * k2_.dS[i] + 2 * k3_.dS[i] + k4_.dS[i]);
      s_.v[i] += w * (k1_.dv[i] + 2 * k2_.dv[i] + 2 * k3_.dv[i] + k4_.dv[i]);
    }
    s_.length += w * (k1_.dlength + 2 * k2_.dlength + 2 * k3_.dlength + k4_.dlength);
    s_.t += dt;
    pin_poles(s_);
    for (std::size_t i = 1; i < s_.S.size(); ++i)
      if (!(s_.S[i] > s_.S[i - 1]))
        throw NumericBlowup("step: coordinate map degenerated at t=" + std::to_string(s_.t));
    for (std::size_t i = 0; i < s_.v.size(); ++i)
      if (!std::isfinite(s_.S[i]) || !std::isfinite(s_.v[i]))
        throw NumericBlowup("step: non-finite field at t=" + std::to_string(s_.t));
  }

  Profile profile() const {
    Profile out = ref_;
    out.t = s_.t;
    out.psi.resize(s_.v.size());
    for (std::size_t i = 0; i < s_.v.size(); ++i)
      out.psi[i] = std::sqrt(std::max(s_.v[i], 0.0));
    std::vector<double> dSdx;
    xst_.apply(s_.S, -1, &dSdx, nullptr);
    out.phi = dSdx;
    for (double v : out.phi)
      if (!(v > 0)) throw NumericBlowup("step: nonpositive phi after reconstruction");
    return out;
  }

 private:
  SState axpy(const SState& base, double c, const SDeriv& d) const {
    SState out = base;
    for (std::size_t i = 0; i < base.S.size(); ++i) {
      out.S[i] = base.S[i] + c * d.dS[i];
      out.v[i] = base.v[i] + c * d.dv[i];
    }
    out.length = base.length + c * d.dlength;
    pin_poles(out);
    return out;
  }

  void pin_poles(SState& st) const {
    if (ref_.has_left_pole()) st.v.front() = 0;
    if (ref_.has_right_pole()) st.v.back() = 0;
  }

  Profile ref_;
  StencilSet xst_;
  SState s_;
  mutable std::vector<double> d1_, d2_, q_;
  mutable SDeriv k1_, k2_, k3_, k4_;
};

double min_ds(const Profile& p) {
  const auto s = arclength(p);
  double m = std::numeric_limits<double>::max();
  for (std::size_t i = 1; i < s.size(); ++i) m = std::min(m, s[i] - s[i - 1]);
  if (p.topology == OrbitTopology::PeriodicCylinder)
    m = std::min(m, 0.5 * (p.phi.back() + p.phi.front()) * (p.period - p.x.back()));
  return m;
}

double min_interior_psi(const Profile& p) {
  const std::size_t lo = p.has_left_pole() ? 1 : 0;
  const std::size_t hi = p.has_right_pole() ? p.size() - 1 : p.size();
  double m = std::numeric_limits<double>::max();
  for (std::size_t i = lo; i < hi; ++i) m = std::min(m, p.psi[i]);
  return m;
}

double cfl_dt_raw(double ds_min, double psi_min, int n, const StepControl& ctl) {
  const double dt =
      ctl.cfl * std::min(ds_min * ds_min, psi_min * psi_min / (2.0 * (n - 1)));
  if (dt < ctl.dt_min)
    throw TimestepUnderflow("cfl_dt: required dt " + std::to_string(dt) + " below dt_min");
  return dt;
}

}  // namespace

Derivs rhs(const Profile& p) {
  Stepper st(p);
  Stepper::SDeriv d;
  st.rhs_s(st.state(), d);
  Derivs out;
  const std::size_t N = p.size();
  out.dpsi.assign(N, 0.0);
  const std::size_t lo = p.has_left_pole() ? 1 : 0;
  const std::size_t hi = p.has_right_pole() ? N - 1 : N;
  for (std::size_t i = lo; i < hi; ++i) out.dpsi[i] = d.dv[i] / (2.0 * p.psi[i]);
  // phi_t = d/dx (S_t), pointwise in the fixed coordinate.
  StencilSet xst(p);
  xst.apply(d.dS, -1, &out.dphi, nullptr);
  return out;
}

Derivs rhs_serial(const Profile& p) { return rhs(p); }

double cfl_dt(const Profile& p, const StepControl& ctl) {
  if (!(ctl.dt_min > 0)) throw InvalidSpec("cfl_dt: dt_min must be positive");
  return cfl_dt_raw(min_ds(p), min_interior_psi(p), p.n, ctl);
}

Profile step(const Profile& p, double dt) {
  if (dt == 0) return p;
  Stepper s(p);
  s.advance(dt);
  return s.profile();
}

std::string stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::TimeEnd: return "t_end";
    case StopReason::Trigger: return "trigger";
    case StopReason::Underflow: return "underflow";
    case StopReason::Extinct: return "extinct";
    case StopReason::MaxSteps: return "max_steps";
  }
  return "?";
}

Trajectory evolve(const Profile& p0, const StepControl& ctl, const StopRule& stop) {
  if (!(ctl.cfl > 0 && ctl.cfl <= 0.5)) throw InvalidSpec("evolve: cfl must be in (0, 0.5]");
  if (!(ctl.dt_min > 0)) throw InvalidSpec("evolve: dt_min must be positive");
  Trajectory traj;
  traj.c_mon = ctl.c_mon >= 0 ? ctl.c_mon : default_cmon(p0);
  const int nodes = ctl.regrid_nodes > 0 ? ctl.regrid_nodes : static_cast<int>(p0.size());

  auto stepper = std::make_unique<Stepper>(p0);
  double ds_min_ref = stepper->min_spacing();

  Profile snap = p0;
  auto materialize = [&]() { snap = stepper->profile(); };
  auto sample_series = [&](const CurvatureField& cf) {
    traj.series.push_back({snap.t, max_abs_sectional(cf), min_interior_psi(snap),
                           *std::max_element(snap.psi.begin(), snap.psi.end())});
  };
  auto snapshot = [&]() {
    if (!traj.snapshots.empty() && traj.snapshots.back().first == snap.t) return;
    traj.snapshots.emplace_back(snap.t, snap);
  };

  snapshot();
  sample_series(sectional(snap));
  double next_snap = ctl.snapshot_every > 0 ? p0.t + ctl.snapshot_every : 0;
  const double t_end = stop.t_end;
  bool trigger_armed = stop.trigger_arm_above <= 0;

  for (long k = 0;; ++k) {
    if (k >= ctl.max_steps) {
      traj.reason = StopReason::MaxSteps;
      break;
    }
    const bool control_step = (k % std::max<long>(1, ctl.series_stride)) == 0;
    if (control_step) {
      if (k > 0) materialize();
      CurvatureField cf = sectional(snap);
      if (k > 0) sample_series(cf);
      const double rmin = min_rho(cf);
      if (!trigger_armed && rmin >= stop.trigger_arm_above) trigger_armed = true;
      if (stop.rho_trigger > 0 && trigger_armed && rmin < stop.rho_trigger) {
        traj.events.push_back({snap.t, "trigger", "rho_min below trigger scale"});
        traj.reason = StopReason::Trigger;
        break;
      }
      // Regrid when the minimum spacing drifts 4x from its reference or the
      // pinch region outgrows its local resolution.
      bool need = false;
      const double dsm = stepper->min_spacing();
      if (dsm / ds_min_ref > 4.0 || dsm / ds_min_ref < 0.25) need = true;
      if (!need && snap.has_left_pole()) {
        const auto s = arclength(snap);
        std::size_t amin = 1;
        const std::size_t hi = snap.has_right_pole() ? snap.size() - 1 : snap.size();
        for (std::size_t i = 1; i < hi; ++i)
          if (snap.psi[i] < snap.psi[amin]) amin = i;
        const double local =
            (s[std::min(amin + 1, snap.size() - 1)] - s[amin > 0 ? amin - 1 : 0]) / 2.0;
        if (local > snap.psi[amin] / 5.0) need = true;
      }
      if (need) {
        try {
          snap = regrid(snap, nodes, traj.c_mon);
        } catch (const DegenerateProfile&) {
          traj.events.push_back({snap.t, "extinct", "component below regrid resolution"});
          traj.reason = StopReason::Extinct;
          break;
        }
        stepper = std::make_unique<Stepper>(snap);
        ds_min_ref = stepper->min_spacing();
        traj.events.push_back({snap.t, "regrid", std::to_string(nodes) + " nodes"});
      }
    }
    if (stop.psi_max_below > 0 && stepper->max_psi() < stop.psi_max_below) {
      materialize();
      traj.events.push_back({snap.t, "extinct", "max psi below extinction threshold"});
      traj.reason = StopReason::Extinct;
      break;
    }
    if (stepper->t() >= t_end * (1 - 1e-14)) {
      materialize();
      traj.reason = StopReason::TimeEnd;
      break;
    }
    double dt;
    try {
      dt = cfl_dt_raw(stepper->min_spacing(), stepper->min_interior_psi(), p0.n, ctl);
    } catch (const TimestepUnderflow& e) {
      materialize();
      traj.events.push_back({snap.t, "underflow", e.what()});
      traj.reason = StopReason::Underflow;
      break;
    }
    if (stepper->t() + dt > t_end) dt = t_end - stepper->t();
    bool snap_now = false;
    if (next_snap > 0 && stepper->t() + dt >= next_snap * (1 - 1e-14)) {
      dt = std::min(dt, next_snap - stepper->t());
      snap_now = true;
    }
    if (dt <= 0) {
      materialize();
      traj.reason = StopReason::TimeEnd;
      break;
    }
    stepper->advance(dt);
    ++traj.steps;
    if (snap_now) {
      materialize();
      snapshot();
      next_snap += ctl.snapshot_every;
    } else if (ctl.snapshot_every_steps > 0 && (k + 1) % ctl.snapshot_every_steps == 0) {
      materialize();
      snapshot();
    }
  }
  snapshot();
  sample_series(sectional(snap));
  return traj;
}

double estimate_blowup_time(const std::vector<std::pair<double, double>>& samples,
                            double* fit_residual) {
  if (samples.size() < 10) throw FitFailed("blowup fit: fewer than 10 samples");
  std::size_t lo = samples.size() - std::max<std::size_t>(samples.size() / 4, 10);
  if (lo > samples.size() - 10) lo = samples.size() - 10;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const std::size_t m = samples.size() - lo;
  for (std::size_t i = lo; i < samples.size(); ++i) {
    if (!(samples[i].second > 0)) throw FitFailed("blowup fit: nonpositive K_max");
    const double x = samples[i].first, y = 1.0 / samples[i].second;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double det = m * sxx - sx * sx;
  if (det == 0) throw FitFailed("blowup fit: degenerate time samples");
  const double b = (m * sxy - sx * sy) / det;  // slope of 1/K
  const double a = (sy - b * sx) / m;
  if (!(b < 0)) throw FitFailed("blowup fit: 1/K_max not decreasing");
  if (fit_residual) {
    double rss = 0;
    for (std::size_t i = lo; i < samples.size(); ++i) {
      const double r = 1.0 / samples[i].second - (a + b * samples[i].first);
      rss += r * r;
    }
    *fit_residual = std::sqrt(rss / m);
  }
  return -a / b;
}

double estimate_blowup_time(const Trajectory& traj, double* fit_residual) {
  std::vector<std::pair<double, double>> s;
  s.reserve(traj.series.size());
  for (const auto& k : traj.series) s.emplace_back(k.t, k.K_max);
  return estimate_blowup_time(s, fit_residual);
}

double commutator_residual(const Trajectory& traj) {
  if (traj.snapshots.size() < 2) throw InvalidSpec("commutator: need >= 2 snapshots");
  double sup = 0;
  bool any = false;
  for (std::size_t k = 0; k + 1 < traj.snapshots.size(); ++k) {
    const Profile& p1 = traj.snapshots[k].second;
    const Profile& p2 = traj.snapshots[k + 1].second;
    if (p1.x != p2.x) continue;  // regridded in between
    const double dt = p2.t - p1.t;
    if (!(dt > 0)) continue;
    any = true;
    Profile mid = p1;
    for (std::size_t i = 0; i < mid.size(); ++i) {
      mid.phi[i] = 0.5 * (p1.phi[i] + p2.phi[i]);
      mid.psi[i] = 0.5 * (p1.psi[i] + p2.psi[i]);
    }
    StencilSet st(mid);
    std::vector<double> d1a, d1b, psit(p1.size()), dpsit, mx, mxx, mphx;
    st.apply(p1.psi, -1, &d1a, nullptr);
    st.apply(p2.psi, -1, &d1b, nullptr);
    for (std::size_t i = 0; i < p1.size(); ++i) psit[i] = (p2.psi[i] - p1.psi[i]) / dt;
    st.apply(psit, -1, &dpsit, nullptr);
    st.apply(mid.psi, -1, &mx, &mxx);
    st.apply(mid.phi, +1, &mphx, nullptr);
    const std::size_t lo0 = mid.has_left_pole() ? 1 : 0;
    const std::size_t hi0 = mid.has_right_pole() ? mid.size() - 1 : mid.size();
    const std::size_t lo = lo0 + 3 < hi0 ? lo0 + 3 : lo0;
    const std::size_t hi = hi0 > 3 + lo ? hi0 - 3 : hi0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double phim = mid.phi[i], psim = mid.psi[i];
      const double psi_s1 = d1a[i] / p1.phi[i];
      const double psi_s2 = d1b[i] / p2.phi[i];
      const double lhs = (psi_s2 - psi_s1) / dt - dpsit[i] / phim;
      const double psi_s = mx[i] / phim;
      const double psi_ss = (mxx[i] - mx[i] * mphx[i] / phim) / (phim * phim);
      const double r = lhs + mid.n * (psi_ss / psim) * psi_s;
      sup = std::max(sup, std::abs(r));
    }
  }
  if (!any) throw InvalidSpec("commutator: no snapshot pair shares a grid");
  return sup;
}

}  // namespace ricci
