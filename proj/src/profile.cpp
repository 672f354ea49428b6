#include "ricci/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ricci/curvature.hpp"
#include "ricci/errors.hpp"
#include "ricci/interp.hpp"

namespace ricci {

std::string topology_name(OrbitTopology t) {
  switch (t) {
    case OrbitTopology::ClosedSphere: return "ClosedSphere";
    case OrbitTopology::PeriodicCylinder: return "PeriodicCylinder";
    case OrbitTopology::Disk: return "Disk";
  }
  return "?";
}

OrbitTopology topology_from_name(const std::string& s) {
  if (s == "ClosedSphere") return OrbitTopology::ClosedSphere;
  if (s == "PeriodicCylinder") return OrbitTopology::PeriodicCylinder;
  if (s == "Disk") return OrbitTopology::Disk;
  throw InvalidSpec("unknown topology: " + s);
}

std::vector<double> arclength(const Profile& p) {
  return cumtrapz(p.x, p.phi);
}

double max_orbit_diameter(const Profile& p) {
  return M_PI * *std::max_element(p.psi.begin(), p.psi.end());
}

double pole_slope_left(const Profile& p) {
  const auto s = arclength(p);
  return p.psi[1] / (s[1] - s[0]);
}

double pole_slope_right(const Profile& p) {
  const auto s = arclength(p);
  const std::size_t n = p.size();
  return p.psi[n - 2] / (s[n - 1] - s[n - 2]);
}

void validate(const Profile& p, double tol_pole) {
  const std::size_t n = p.size();
  if (p.n < 2) throw InvalidSpec("profile: n must be >= 2");
  if (n < 32) throw InvalidSpec("profile: fewer than 32 nodes");
  if (p.phi.size() != n || p.psi.size() != n) throw InvalidSpec("profile: ragged arrays");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(p.x[i + 1] > p.x[i])) throw InvalidSpec("profile: x not strictly increasing");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(p.phi[i] > 0)) throw InvalidSpec("profile: phi must be positive");
    if (!std::isfinite(p.phi[i]) || !std::isfinite(p.psi[i]))
      throw NumericBlowup("profile: non-finite field");
  }
  const std::size_t lo = p.has_left_pole() ? 1 : 0;
  const std::size_t hi = p.has_right_pole() ? n - 1 : n;
  for (std::size_t i = lo; i < hi; ++i)
    if (!(p.psi[i] > 0)) throw DegenerateProfile("profile: interior psi <= 0");
  if (p.topology == OrbitTopology::PeriodicCylinder) {
    if (!(p.period > 0) || !(p.x.back() < p.period))
      throw InvalidSpec("profile: bad period");
  }
  if (p.has_left_pole()) {
    if (p.psi[0] != 0) throw InvalidSpec("profile: left pole psi != 0");
    const double sl = pole_slope_left(p);
    if (std::abs(sl - 1.0) > tol_pole)
      throw DegenerateProfile("profile: left pole slope " + std::to_string(sl));
  }
  if (p.has_right_pole()) {
    if (p.psi.back() != 0) throw InvalidSpec("profile: right pole psi != 0");
    const double sr = pole_slope_right(p);
    if (std::abs(sr - 1.0) > tol_pole)
      throw DegenerateProfile("profile: right pole slope " + std::to_string(sr));
  }
}

namespace {

void check_spec(const InitialSpec& spec) {
  if (spec.n < 2) throw InvalidSpec("initial: n must be >= 2");
  if (spec.grid_size < 32) throw InvalidSpec("initial: grid_size < 32");
  switch (spec.family) {
    case InitialSpec::Family::RoundSphere:
      if (!(spec.rho0 > 0)) throw InvalidSpec("initial: rho0 <= 0");
      break;
    case InitialSpec::Family::Cylinder:
      if (!(spec.radius > 0) || !(spec.length > 0))
        throw InvalidSpec("initial: cylinder radius/length <= 0");
      break;
    case InitialSpec::Family::Dumbbell:
      if (!(spec.lobe_left > 0) || !(spec.lobe_right > 0) || !(spec.neck_radius > 0) ||
          !(spec.neck_width > 0))
        throw InvalidSpec("initial: dumbbell radii <= 0");
      if (!(spec.neck_radius < std::min(spec.lobe_left, spec.lobe_right)))
        throw InvalidSpec("initial: neck radius must be below both lobes");
      break;
    case InitialSpec::Family::Custom:
      if (spec.cx.size() < 32) throw InvalidSpec("initial: custom table too small");
      break;
  }
}

Profile make_sphere(const InitialSpec& spec) {
  Profile p;
  p.n = spec.n;
  p.topology = OrbitTopology::ClosedSphere;
  const int N = spec.grid_size;
  const double L = M_PI * spec.rho0;
  p.x.resize(N);
  p.phi.assign(N, 1.0);
  p.psi.resize(N);
  for (int i = 0; i < N; ++i) {
    p.x[i] = L * i / (N - 1);
    p.psi[i] = spec.rho0 * std::sin(p.x[i] / spec.rho0);
  }
  p.psi.front() = 0;
  p.psi.back() = 0;
  return p;
}

Profile make_cylinder(const InitialSpec& spec) {
  Profile p;
  p.n = spec.n;
  p.topology = OrbitTopology::PeriodicCylinder;
  p.period = spec.length;
  const int N = spec.grid_size;
  p.x.resize(N);
  p.phi.assign(N, 1.0);
  p.psi.assign(N, spec.radius);
  for (int i = 0; i < N; ++i) p.x[i] = spec.length * i / N;
  return p;
}

// Dumbbell profile in arclength: exact sphere caps up to the lobe equators,
// a cosh neck of radius r_N spanning width w, quintic C^2 bridges between.
struct DumbbellShape {
  double sL1, sB1, sN0, sNm, sN1, sB2, sR1, total;
  double rL, rR, rN, a;
  Quintic bridgeL, bridgeR;

  double eval(double s) const {
    if (s <= 0) return 0;
    if (s >= total) return 0;
    if (s < sL1) return rL * std::sin(s / rL);
    if (s < sB1) return bridgeL.value(s);
    if (s < sN1) return rN * std::cosh((s - sNm) / a);
    if (s < sB2) return bridgeR.value(s);
    return rR * std::sin((total - s) / rR);
  }
};

// Pick a bridge length so the quintic joining the lobe equator to the neck
// shoulder is monotone decreasing; among feasible lengths take the one with
// the largest interior descent margin.
Quintic fit_bridge(double s0, double v0, double d0, double c0, double v1, double d1,
                   double c1, double* length_out) {
  const double drop = v0 - v1;
  double best_margin = -1, best_L = 0;
  for (double L = 0.3 * drop; L <= 40.0 * drop; L *= 1.1) {
    Quintic q{s0, s0 + L, v0, d0, c0, v1, d1, c1};
    double worst = 1e300;
    bool monotone = true;
    for (int k = 1; k < 400 && monotone; ++k) {
      const double s = s0 + L * k / 400.0;
      const double dv = q.deriv(s);
      if (dv > 1e-10) monotone = false;
      if (k > 20 && k < 380) worst = std::min(worst, -dv);
    }
    if (monotone && worst > best_margin) {
      best_margin = worst;
      best_L = L;
    }
  }
  if (best_L == 0) throw InvalidSpec("dumbbell: no monotone bridge for these radii");
  *length_out = best_L;
  return Quintic{s0, s0 + best_L, v0, d0, c0, v1, d1, c1};
}

Profile make_dumbbell(const InitialSpec& spec) {
  DumbbellShape sh;
  sh.rL = spec.lobe_left;
  sh.rR = spec.lobe_right;
  sh.rN = spec.neck_radius;
  sh.a = 0.5 * spec.neck_width;
  const double xi = 1.0;  // cosh argument at the neck shoulders
  const double psi_e = sh.rN * std::cosh(xi);
  if (!(psi_e < 0.8 * std::min(sh.rL, sh.rR)))
    throw InvalidSpec("dumbbell: neck too wide or too fat for the lobes");
  const double slope_e = sh.rN * std::sinh(xi) / sh.a;
  const double curv_e = sh.rN * std::cosh(xi) / (sh.a * sh.a);

  sh.sL1 = 0.5 * M_PI * sh.rL;
  double Lb1 = 0;
  sh.bridgeL = fit_bridge(sh.sL1, sh.rL, 0.0, -1.0 / sh.rL, psi_e, -slope_e, curv_e, &Lb1);
  sh.sB1 = sh.sL1 + Lb1;
  sh.sN0 = sh.sB1;
  sh.sNm = sh.sN0 + sh.a * xi;
  sh.sN1 = sh.sNm + sh.a * xi;
  // Right bridge built mirrored, then flipped onto [sN1, sB2].
  double Lb2 = 0;
  Quintic mirrored =
      fit_bridge(0.0, sh.rR, 0.0, -1.0 / sh.rR, psi_e, -slope_e, curv_e, &Lb2);
  sh.sB2 = sh.sN1 + Lb2;
  sh.sR1 = sh.sB2 + 0.5 * M_PI * sh.rR;
  sh.total = sh.sR1;
  sh.bridgeR = Quintic{sh.sN1, sh.sB2, psi_e, slope_e, curv_e, sh.rR, 0.0, -1.0 / sh.rR};
  // Consistency: bridgeR is the reflection of `mirrored`, same length works.
  (void)mirrored;

  Profile p;
  p.n = spec.n;
  p.topology = OrbitTopology::ClosedSphere;
  const int N = spec.grid_size;
  p.x.resize(N);
  p.phi.assign(N, 1.0);
  p.psi.resize(N);
  for (int i = 0; i < N; ++i) {
    p.x[i] = sh.total * i / (N - 1);
    p.psi[i] = sh.eval(p.x[i]);
  }
  p.psi.front() = 0;
  p.psi.back() = 0;
  return p;
}

Profile make_custom(const InitialSpec& spec) {
  Profile p;
  p.n = spec.n;
  p.topology = OrbitTopology::ClosedSphere;
  p.x = spec.cx;
  p.phi = spec.cphi;
  p.psi = spec.cpsi;
  return p;
}

}  // namespace

Profile build_initial(const InitialSpec& spec) {
  check_spec(spec);
  Profile p;
  switch (spec.family) {
    case InitialSpec::Family::RoundSphere: p = make_sphere(spec); break;
    case InitialSpec::Family::Cylinder: p = make_cylinder(spec); break;
    case InitialSpec::Family::Dumbbell: p = make_dumbbell(spec); break;
    case InitialSpec::Family::Custom: p = make_custom(spec); break;
  }
  validate(p);
  return p;
}

double default_cmon(const Profile& p) {
  // 0.1 * mean rho leaves neck spacing right at half the mean; 0.2 gives the
  // concentration the regrid contract asks for with margin.
  const auto [rho, rho1] = scale(p);
  const double mean = std::accumulate(rho1.begin(), rho1.end(), 0.0) / rho1.size();
  return 0.2 * mean;
}

namespace {

// Node positions equidistributing the monitor integral: M(s_j) = j/(N-1) M_tot.
std::vector<double> equidistribute(const std::vector<double>& s,
                                   const std::vector<double>& m, int N) {
  const auto M = cumtrapz(s, m);
  const double Mtot = M.back();
  std::vector<double> out(N);
  out[0] = s.front();
  out[N - 1] = s.back();
  std::size_t seg = 0;
  for (int j = 1; j + 1 < N; ++j) {
    const double target = Mtot * j / (N - 1);
    while (seg + 2 < M.size() && M[seg + 1] < target) ++seg;
    const double f = (target - M[seg]) / std::max(M[seg + 1] - M[seg], 1e-300);
    out[j] = s[seg] + f * (s[seg + 1] - s[seg]);
  }
  return out;
}

std::vector<double> monitor_of(const Profile& q, double c_mon) {
  const auto [rho, rho1] = scale(q);
  // Min-filter the curvature scale so wells are not undersampled.
  std::vector<double> m(rho.size());
  const long N = static_cast<long>(rho.size());
  for (long i = 0; i < N; ++i) {
    double r = rho[i];
    for (long j = std::max<long>(0, i - 2); j <= std::min(N - 1, i + 2); ++j)
      r = std::min(r, rho[j]);
    m[i] = 1.0 + c_mon / r;
  }
  return m;
}

}  // namespace

Profile regrid(const Profile& p, int target_nodes, double c_mon) {
  if (target_nodes < 32) throw InvalidSpec("regrid: target_nodes < 32");
  const auto s = arclength(p);
  const double L = s.back() - s.front();
  const double mean_ds = L / (target_nodes - 1);
  const double psi_max = *std::max_element(p.psi.begin(), p.psi.end());
  if (psi_max < 10 * mean_ds)
    throw DegenerateProfile("regrid: component too small to resolve");
  if (c_mon < 0) c_mon = default_cmon(p);

  if (p.topology == OrbitTopology::PeriodicCylinder) {
    // Uniform resample over one period.
    Profile q;
    q.n = p.n;
    q.topology = p.topology;
    q.t = p.t;
    // Close the loop through the seam with the leading node repeated.
    std::vector<double> sw(s), pw(p.psi);
    sw.push_back(s.back() + 0.5 * (p.phi.back() + p.phi.front()) * (p.period - p.x.back()));
    pw.push_back(p.psi.front());
    Pchip interp(sw, pw);
    const double Ltot = sw.back();
    q.period = Ltot;
    q.x.resize(target_nodes);
    q.phi.assign(target_nodes, 1.0);
    q.psi.resize(target_nodes);
    for (int i = 0; i < target_nodes; ++i) {
      q.x[i] = Ltot * i / target_nodes;
      q.psi[i] = interp(std::min(q.x[i], sw.back()));
    }
    return q;
  }

  Pchip psi_of_s(s, p.psi);
  Profile q;
  q.n = p.n;
  q.topology = p.topology;
  q.t = p.t;
  q.phi.assign(target_nodes, 1.0);
  q.psi.resize(target_nodes);
  q.x.resize(target_nodes);

  // Fixed-point iteration: the output grid must regenerate itself from its
  // own monitor, which makes regrid idempotent to rounding on smooth data.
  std::vector<double> grid = equidistribute(s, monitor_of(p, c_mon), target_nodes);
  for (int iter = 0; iter < 40; ++iter) {
    for (int i = 0; i < target_nodes; ++i) q.psi[i] = psi_of_s(grid[i]);
    q.x = grid;
    if (p.has_left_pole()) q.psi.front() = 0;
    if (p.has_right_pole()) q.psi.back() = 0;
    std::vector<double> next = equidistribute(grid, monitor_of(q, c_mon), target_nodes);
    double move = 0;
    for (int i = 0; i < target_nodes; ++i) move = std::max(move, std::abs(next[i] - grid[i]));
    grid = std::move(next);
    if (move < 1e-12 * L) break;
  }
  for (int i = 0; i < target_nodes; ++i) q.psi[i] = psi_of_s(grid[i]);
  q.x = grid;
  if (p.has_left_pole()) q.psi.front() = 0;
  if (p.has_right_pole()) q.psi.back() = 0;
  for (int i = 1; i + 1 < target_nodes; ++i) q.psi[i] = std::max(q.psi[i], kPsiFloor);
  return q;
}

}  // namespace ricci
