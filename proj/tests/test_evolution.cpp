#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ricci/curvature.hpp"
#include "ricci/errors.hpp"
#include "ricci/evolution.hpp"
#include "ricci/profile.hpp"

using namespace ricci;

namespace {
Profile sphere(int N = 401, double rho0 = 1.0, int n = 2) {
  InitialSpec s;
  s.family = InitialSpec::Family::RoundSphere;
  s.rho0 = rho0;
  s.n = n;
  s.grid_size = N;
  return build_initial(s);
}
Profile cylinder(double c = 1.0, double len = 10.0, int N = 401, int n = 2) {
  InitialSpec s;
  s.family = InitialSpec::Family::Cylinder;
  s.radius = c;
  s.length = len;
  s.n = n;
  s.grid_size = N;
  return build_initial(s);
}
Profile dumbbell(int N = 401) {
  InitialSpec s;
  s.family = InitialSpec::Family::Dumbbell;
  s.lobe_left = s.lobe_right = 1.0;
  s.neck_radius = 0.25;
  s.neck_width = 1.0;
  s.grid_size = N;
  return build_initial(s);
}
// March to a target time with CFL steps (clipped at the end).
Profile march(Profile p, double t_end, const StepControl& ctl) {
  while (p.t < t_end) {
    double dt = cfl_dt(p, ctl);
    if (p.t + dt > t_end) dt = t_end - p.t;
    p = step(p, dt);
  }
  return p;
}
}  // namespace

TEST_CASE("rhs on the exact cylinder") {
  const Profile p = cylinder(0.8);
  const Derivs d = rhs(p);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(d.dpsi[i] == doctest::Approx(-1.0 / 0.8).epsilon(1e-10));
    CHECK(d.dphi[i] == doctest::Approx(0.0).epsilon(1e-10));
  }
}

TEST_CASE("rhs on the unit round sphere is -n psi") {
  const Profile p = sphere(401);
  const Derivs d = rhs(p);
  double sup = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    sup = std::max(sup, std::abs(d.dpsi[i] + 2.0 * p.psi[i]));
  CHECK(sup < 2e-4);
}

TEST_CASE("rhs matches the exact shrinking-sphere difference quotient") {
  // family: phi = rho(t), psi = rho(t) sin(x), rho^2 = 1 - 2n t
  auto member = [](double t) {
    Profile p = sphere(401);
    const double rho = std::sqrt(1.0 - 4.0 * t);
    for (auto& v : p.phi) v *= rho;
    for (auto& v : p.psi) v *= rho;
    p.t = t;
    return p;
  };
  const double h = 1e-6;
  const Profile p0 = member(0.05), p1 = member(0.05 + h);
  const Derivs d = rhs(p0);
  double sup = 0;
  for (std::size_t i = 0; i < p0.size(); ++i) {
    sup = std::max(sup, std::abs((p1.psi[i] - p0.psi[i]) / h - d.dpsi[i]));
    sup = std::max(sup, std::abs((p1.phi[i] - p0.phi[i]) / h - d.dphi[i]));
  }
  CHECK(sup < 5e-4);  // O(h) + O(ds^2)
}

TEST_CASE("cfl_dt arithmetic") {
  StepControl ctl;
  ctl.cfl = 0.2;
  // uniform ds = 0.01, psi_min = 1
  CHECK(cfl_dt(cylinder(1.0, 4.0, 400), ctl) == doctest::Approx(2e-5).epsilon(1e-12));
  // psi_min = 0.01 with coarse ds: the psi term binds at cfl * 5e-5
  CHECK(cfl_dt(cylinder(0.01, 4.0, 40), ctl) == doctest::Approx(0.2 * 5e-5).epsilon(1e-12));
  ctl.dt_min = 1.0;
  CHECK_THROWS_AS(cfl_dt(cylinder(1.0, 4.0, 400), ctl), TimestepUnderflow);
}

TEST_CASE("zero-time step is the identity") {
  const Profile p = dumbbell();
  const Profile q = step(p, 0.0);
  CHECK(q.psi == p.psi);
  CHECK(q.phi == p.phi);
}

TEST_CASE("shrinking cylinder reproduced to 1e-6") {
  StepControl ctl;
  const Profile p = march(cylinder(), 0.1, ctl);
  const double want = std::sqrt(1.0 - 2.0 * 0.1);  // psi^2 = 1 - 2(n-1)t
  for (double v : p.psi) CHECK(std::abs(v - want) < 1e-6);
  for (double v : p.phi) CHECK(std::abs(v - 1.0) < 1e-10);
}

TEST_CASE("shrinking sphere reproduced to 1e-4 relative") {
  StepControl ctl;
  const Profile p = march(sphere(401), 0.1, ctl);
  const double rho2 = 1.0 - 4.0 * 0.1;
  const double got = *std::max_element(p.psi.begin(), p.psi.end());
  CHECK(std::abs(got * got - rho2) / rho2 < 1e-4);
}

TEST_CASE("scheme order: ds study on the sphere family") {
  StepControl ctl;
  ctl.cfl = 0.05;  // keep dt error negligible against ds
  double errs[2];
  int k = 0;
  for (int N : {101, 201}) {
    const Profile p = march(sphere(N), 0.05, ctl);
    const double rho = std::sqrt(1.0 - 4.0 * 0.05);
    double sup = 0;
    const auto s = arclength(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      // compare against the family member with the same total arclength
      const double want = rho * std::sin(s[i] / rho);
      sup = std::max(sup, std::abs(p.psi[i] - want));
    }
    errs[k++] = sup;
  }
  CHECK(std::log2(errs[0] / errs[1]) > 1.9);
}

TEST_CASE("scheme order: dt study on the cylinder family") {
  // Spatially exact data isolates the time integrator; halving cfl must
  // shrink the error at order >= 3.5.
  double errs[2];
  int k = 0;
  for (double cfl : {0.4, 0.2}) {
    StepControl ctl;
    ctl.cfl = cfl;
    Profile p = cylinder(1.0, 10.0, 64);
    const double t_end = 0.2;
    while (p.t < t_end) {
      double dt = cfl * 0.05;  // fixed-ratio steps, dt halves with cfl
      if (p.t + dt > t_end) dt = t_end - p.t;
      p = step(p, dt);
    }
    const double want = std::sqrt(1.0 - 2.0 * t_end);
    errs[k++] = std::abs(p.psi[13] - want);
  }
  CHECK(std::log2(errs[0] / errs[1]) > 3.5);
}

TEST_CASE("evolve: sphere K_max tracks 1/(1-2nt)") {
  StepControl ctl;
  ctl.series_stride = 16;
  StopRule stop;
  stop.t_end = 0.24;
  const Trajectory traj = evolve(sphere(401), ctl, stop);
  CHECK(traj.reason == StopReason::TimeEnd);
  for (const auto& ks : traj.series) {
    const double want = 1.0 / (1.0 - 4.0 * ks.t);
    CHECK(std::abs(ks.K_max - want) / want < 0.1);
  }
  // max psi is nonincreasing along the run
  for (std::size_t i = 1; i < traj.series.size(); ++i)
    CHECK(traj.series[i].psi_max <= traj.series[i - 1].psi_max + 1e-12);
}

TEST_CASE("evolve: cylinder run has no regrids and constant phi") {
  StepControl ctl;
  StopRule stop;
  stop.t_end = 0.2;
  const Trajectory traj = evolve(cylinder(), ctl, stop);
  for (const auto& ev : traj.events) CHECK(ev.kind != "regrid");
  const Profile& last = traj.snapshots.back().second;
  for (double v : last.phi) CHECK(std::abs(v - 1.0) < 1e-12);
}

TEST_CASE("evolve: dumbbell pinches with monotone neck radius") {
  StepControl ctl;
  ctl.series_stride = 32;
  StopRule stop;
  stop.t_end = 1.0;
  stop.rho_trigger = 0.02;  // stop early; the pinch property is what matters
  const Trajectory traj = evolve(dumbbell(801), ctl, stop);
  CHECK(traj.reason == StopReason::Trigger);
  const auto& ser = traj.series;
  const std::size_t lo = ser.size() * 4 / 5;
  for (std::size_t i = lo; i + 1 < ser.size(); ++i)
    CHECK(ser[i + 1].psi_min <= ser[i].psi_min + 1e-12);
}

TEST_CASE("blow-up time estimator on synthetic Type-I series") {
  std::vector<std::pair<double, double>> sphere_series, cyl_series, flat;
  for (int k = 0; k < 100; ++k) {
    const double t = 0.2 * k / 99.0;
    sphere_series.emplace_back(t, 1.0 / (1.0 - 4.0 * t));
    cyl_series.emplace_back(t, 1.0 / (1.0 - 2.0 * t));
    flat.emplace_back(t, 5.0);
  }
  CHECK(std::abs(estimate_blowup_time(sphere_series) - 0.25) < 1e-3);
  CHECK(std::abs(estimate_blowup_time(cyl_series) - 0.5) < 1e-3);
  CHECK_THROWS_AS(estimate_blowup_time(flat), FitFailed);
}

TEST_CASE("commutator residual vanishes on the cylinder") {
  StepControl ctl;
  ctl.snapshot_every = 0.01;
  StopRule stop;
  stop.t_end = 0.05;
  const Trajectory traj = evolve(cylinder(), ctl, stop);
  CHECK(commutator_residual(traj) < 1e-8);
}

TEST_CASE("commutator residual decays under dt refinement on the sphere") {
  double res[2];
  int k = 0;
  for (double cfl : {0.4, 0.2}) {
    StepControl ctl;
    ctl.cfl = cfl;
    ctl.snapshot_every = 0.02;
    StopRule stop;
    stop.t_end = 0.04;
    res[k++] = commutator_residual(evolve(sphere(201), ctl, stop));
  }
  CHECK(res[1] < res[0]);
}

TEST_CASE("parallel and serial rhs agree bitwise") {
  const Profile p = dumbbell(801);
  const Derivs a = rhs(p);
  const Derivs b = rhs_serial(p);
  CHECK(a.dpsi == b.dpsi);
  CHECK(a.dphi == b.dphi);
}
