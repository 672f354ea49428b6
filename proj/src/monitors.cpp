#include "ricci/monitors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ricci/errors.hpp"
#include "ricci/rng.hpp"
#include "ricci/stencil.hpp"

namespace ricci {

MonitorReport hamilton_ivey(const CurvatureField& cf, double t, int n) {
  MonitorReport rep;
  rep.name = "hamilton_ivey";
  const double gate = -1.0 / (1.0 + t);
  double worst = kMarginSentinel;
  long at = -1;
  for (std::size_t i = 0; i < cf.size(); ++i) {
    const double nu = cf.nu[i];
    if (nu > gate) continue;
    const double rhs = -nu * (std::log(-nu) + std::log1p(t) - 0.5 * n * (n + 1));
    const double scale =
        -nu * (std::abs(std::log(-nu)) + std::abs(std::log1p(t)) + 0.5 * n * (n + 1)) +
        std::abs(cf.R[i]);
    const double rel = (cf.R[i] - rhs) / scale;
    if (rel < worst) {
      worst = rel;
      at = static_cast<long>(i);
    }
  }
  rep.margin = worst;
  rep.node_at = at;
  rep.t_at = t;
  rep.samples = static_cast<long>(cf.size());
  rep.pass = worst >= -1e-8;
  if (at < 0) rep.note = "vacuous: no node gated";
  return rep;
}

MonitorReport hamilton_ivey_trajectory(const Trajectory& traj) {
  MonitorReport rep;
  rep.name = "hamilton_ivey";
  if (traj.snapshots.empty()) {
    rep.enabled = false;
    rep.note = "no snapshots";
    return rep;
  }
  const int n = traj.snapshots.front().second.n;
  const CurvatureField cf0 = sectional(traj.snapshots.front().second);
  const double nu0 = *std::min_element(cf0.nu.begin(), cf0.nu.end());
  if (nu0 < -1.0 - 1e-9) {
    rep.enabled = false;
    rep.pass = true;
    rep.note = "not normalized: min nu(t0) = " + std::to_string(nu0);
    return rep;
  }
  long samples = 0;
  for (const auto& [t, p] : traj.snapshots) {
    const MonitorReport r = hamilton_ivey(sectional(p), t, n);
    samples += r.samples;
    if (r.margin < rep.margin) {
      rep.margin = r.margin;
      rep.t_at = t;
      rep.node_at = r.node_at;
    }
  }
  rep.samples = samples;
  rep.pass = rep.margin >= -1e-8;
  return rep;
}

HiOdeSample hi_ode_algebra(double l, double m, int n) {
  const double dl = l * l + (n - 1) * l * m;
  const double dm = (n - 1) * m * m + l * l;
  const double dR = n * dl + 0.5 * n * (n - 1) * dm;
  const double R = n * l + 0.5 * n * (n - 1) * m;
  const double quad = 2.0 * R * R / (n + 1);
  const double pinch = n * (n - 1) * (n - 1) * (l - m) * (l - m) / (n + 1);
  const double scale_i = std::max({std::abs(dR), quad, pinch, 1e-300});
  HiOdeSample out;
  out.identity_rel = std::abs(dR - quad - pinch) / scale_i;

  const double nu = std::min(l, m);
  if (nu < 0) {
    const double dnu = (m < l) ? dm : dl;
    const double a = -nu * dR;
    const double b = dnu * (R - nu);
    const double c = -nu * nu * nu;  // (-nu)^3 with nu < 0
    const double scale_c = std::max({std::abs(a), std::abs(b), std::abs(c), 1e-300});
    out.case_rel = (a + b - c) / scale_c;
  } else {
    out.case_rel = kMarginSentinel;
  }
  return out;
}

namespace {

// Wide-dynamic-range sample: half uniform in [-10,10], half log-scaled.
double sample_eig(std::uint64_t seed, std::uint64_t i, std::uint64_t lane) {
  const std::uint64_t b = rng_at(seed, i, lane);
  const std::uint64_t sel = rng_at(seed, i, lane + 16);
  if (sel & 1) return uniform(b, -10.0, 10.0);
  const double mag = std::pow(10.0, uniform(b, -3.0, 3.0));
  return (sel & 2) ? mag : -mag;
}

template <bool Parallel>
ScanResult hi_ode_scan_impl(int n, long samples, std::uint64_t seed) {
  ScanResult res;
  res.samples = samples;
  res.seed = seed;
  double worst_identity = 0;
  double worst_case = kMarginSentinel;
  long violations = 0;
#pragma omp parallel for schedule(static) reduction(max : worst_identity) \
    reduction(min : worst_case) reduction(+ : violations) if (Parallel)
  for (long i = 0; i < samples; ++i) {
    const double l = sample_eig(seed, i, 0);
    const double m = sample_eig(seed, i, 1);
    const HiOdeSample s = hi_ode_algebra(l, m, n);
    worst_identity = std::max(worst_identity, s.identity_rel);
    if (s.case_rel < worst_case) worst_case = s.case_rel;
    if (s.identity_rel > 1e-12 || s.case_rel < -1e-12) ++violations;
  }
  res.worst_identity = worst_identity;
  res.worst_case = worst_case;
  res.violations = violations;
  return res;
}

template <bool Parallel>
AcScanResult anderson_chow_scan_impl(int n, long samples, std::uint64_t seed) {
  AcScanResult res;
  res.samples = samples;
  res.seed = seed;
  double worst_margin = kMarginSentinel;
  double worst_gap = 0;
  long violations = 0;
#pragma omp parallel for schedule(static) reduction(min : worst_margin) \
    reduction(max : worst_gap) reduction(+ : violations) if (Parallel)
  for (long i = 0; i < samples; ++i) {
    double l = sample_eig(seed, i, 2);
    double m = sample_eig(seed, i, 3);
    double R = 2.0 * n * l + n * (n - 1) * m;
    if (R == 0) continue;
    if (R < 0) {
      l = -l;
      m = -m;
    }
    const double h00 = uniform(rng_at(seed, i, 4), -1.0, 1.0) *
                       std::pow(10.0, uniform(rng_at(seed, i, 6), -2.0, 2.0));
    const double h11 = uniform(rng_at(seed, i, 5), -1.0, 1.0) *
                       std::pow(10.0, uniform(rng_at(seed, i, 7), -2.0, 2.0));
    if (h00 == 0 && h11 == 0) continue;
    double margin, gap;
    const bool ok = anderson_chow(l, m, h00, h11, n, &margin, &gap);
    if (margin < worst_margin) worst_margin = margin;
    worst_gap = std::max(worst_gap, gap);
    if (!ok) ++violations;
  }
  res.worst_margin = worst_margin;
  res.worst_eigen_gap = worst_gap;
  res.violations = violations;
  return res;
}

}  // namespace

ScanResult hi_ode_scan(int n, long samples, std::uint64_t seed) {
  return hi_ode_scan_impl<true>(n, samples, seed);
}
ScanResult hi_ode_scan_serial(int n, long samples, std::uint64_t seed) {
  return hi_ode_scan_impl<false>(n, samples, seed);
}

bool anderson_chow(double l, double m, double h00, double h11, int n, double* rel_margin,
                   double* eigen_gap) {
  const double R = 2.0 * n * l + n * (n - 1) * m;
  if (!(R > 0)) throw DomainError("anderson_chow: R <= 0");
  const double rm = 2.0 * n * l * h00 * h11 + n * (n - 1) * m * h11 * h11;
  const double h2 = h00 * h00 + n * h11 * h11;
  const double rc2 = n * n * l * l + n * (l + (n - 1) * m) * (l + (n - 1) * m);
  // Multiplicative form: Rm(h,h) * R <= |Rc|^2 * |h|^2.
  const double lhs = rm * R, rhs = rc2 * h2;
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  const double margin = (rhs - lhs) / scale;
  if (rel_margin) *rel_margin = margin;

  // Cross-check through the 2x2 eigenvalue route.
  const double disc = std::sqrt((n - 1) * (n - 1) * m * m + 4.0 * n * l * l);
  const double t1 = 0.5 * ((n - 1) * m + disc);
  const double t2 = 0.5 * ((n - 1) * m - disc);
  const double maxt = std::max(std::abs(t1), std::abs(t2));
  // Rayleigh quotient bound |v^T A v| <= maxt |v|^2 and maxt <= |Rc|^2 / R.
  const double g1 = (std::abs(rm) - maxt * h2) / std::max({std::abs(rm), maxt * h2, 1e-300});
  const double g2 = (maxt * R - rc2) / std::max({maxt * R, rc2, 1e-300});
  const double gap = std::max(g1, g2);  // positive would violate a route
  if (eigen_gap) *eigen_gap = gap;
  return margin >= -1e-12 && gap <= 1e-12;
}

AcScanResult anderson_chow_scan(int n, long samples, std::uint64_t seed) {
  return anderson_chow_scan_impl<true>(n, samples, seed);
}
AcScanResult anderson_chow_scan_serial(int n, long samples, std::uint64_t seed) {
  return anderson_chow_scan_impl<false>(n, samples, seed);
}

BumpInfo bump_structure(const Profile& p, double eps) {
  if (eps < 0) eps = 1e-6 * *std::max_element(p.psi.begin(), p.psi.end());
  StencilSet st(p);
  std::vector<double> psi_x;
  st.apply(p.psi, -1, &psi_x, nullptr);
  const bool periodic = p.topology == OrbitTopology::PeriodicCylinder;
  const std::size_t N = p.size();
  const std::size_t lo = p.has_left_pole() ? 1 : 0;
  const std::size_t hi = p.has_right_pole() ? N - 1 : N;

  std::vector<double> d;
  std::vector<std::size_t> idx;
  for (std::size_t i = lo; i < hi; ++i) {
    d.push_back(psi_x[i] / p.phi[i]);
    idx.push_back(i);
  }
  BumpInfo out;
  if (d.empty()) return out;
  const std::size_t M = d.size();

  // Scan registered slopes (|d| > eps); a sign change between consecutive
  // registrations is a crossing, located at the psi extremum in between.
  std::size_t start = 0;
  if (periodic) {
    bool found = false;
    for (std::size_t i = 0; i < M && !found; ++i)
      if (std::abs(d[i]) > eps) {
        start = i;
        found = true;
      }
    if (!found) return out;  // flat
  }
  int state = 0;
  std::size_t prev_seq = 0;
  const std::size_t steps = periodic ? M + 1 : M;
  for (std::size_t k = 0; k < steps; ++k) {
    const std::size_t seq = k;
    const std::size_t i = periodic ? (start + k) % M : k;
    if (std::abs(d[i]) <= eps) continue;
    const int sign = d[i] > 0 ? 1 : -1;
    if (state != 0 && sign != state) {
      std::size_t best = prev_seq;
      for (std::size_t q = prev_seq; q <= seq; ++q) {
        const std::size_t j = periodic ? (start + q) % M : q;
        const std::size_t jb = periodic ? (start + best) % M : best;
        const bool better = state > 0 ? p.psi[idx[j]] > p.psi[idx[jb]]
                                      : p.psi[idx[j]] < p.psi[idx[jb]];
        if (better) best = q;
      }
      const std::size_t node = idx[periodic ? (start + best) % M : best];
      if (state > 0) {
        ++out.bumps;
        out.bump_nodes.push_back(node);
      } else {
        ++out.necks;
        out.neck_nodes.push_back(node);
      }
    }
    state = sign;
    prev_seq = seq;
  }
  return out;
}

int bump_count(const Profile& p, double eps) { return bump_structure(p, eps).bumps; }

MonitorReport bump_monotone(const std::vector<std::pair<double, int>>& totals) {
  MonitorReport rep;
  rep.name = "bump_monotone";
  rep.samples = static_cast<long>(totals.size());
  for (std::size_t i = 0; i + 1 < totals.size(); ++i) {
    const double m = totals[i].second - totals[i + 1].second;
    if (m < rep.margin) {
      rep.margin = m;
      rep.t_at = totals[i + 1].first;
    }
  }
  rep.pass = rep.margin >= 0;
  return rep;
}

MonitorReport neck_lower_bound(const Trajectory& traj, double T) {
  MonitorReport rep;
  rep.name = "neck_lower_bound";
  const int n = traj.snapshots.empty() ? 2 : traj.snapshots.front().second.n;
  bool any = false;
  for (const auto& [t, p] : traj.snapshots) {
    if (t >= T) break;
    const BumpInfo b = bump_structure(p);
    if (b.bumps == 0) throw NoBump("neck_lower_bound: snapshot without a bump");
    const double psi_b = p.psi[b.bump_nodes.front()];
    const double m = psi_b * psi_b - 2.0 * (n - 1) * (T - t);
    any = true;
    if (m < rep.margin) {
      rep.margin = m;
      rep.t_at = t;
      rep.node_at = static_cast<long>(b.bump_nodes.front());
    }
    ++rep.samples;
  }
  if (!any) throw NoBump("neck_lower_bound: no snapshot before T");
  rep.pass = rep.margin > 0;
  return rep;
}

MonitorReport blowup_rate(const Trajectory& traj, double T) {
  MonitorReport rep;
  rep.name = "blowup_rate";
  std::vector<std::pair<double, double>> q;  // (T - t, (T-t)^2 K_max)
  for (const auto& [t, p] : traj.snapshots) {
    if (t >= T) continue;
    const double K = max_abs_sectional(sectional(p));
    q.emplace_back(T - t, (T - t) * (T - t) * K);
  }
  rep.samples = static_cast<long>(q.size());
  if (q.size() < 4) {
    rep.enabled = false;
    rep.note = "too few snapshots before T";
    return rep;
  }
  double dmin = kMarginSentinel, sup = 0;
  for (const auto& [d, v] : q) {
    dmin = std::min(dmin, d);
    sup = std::max(sup, v);
  }
  double last = 0, prev = 0;
  for (const auto& [d, v] : q) {
    if (d < 10 * dmin) last = std::max(last, v);
    else if (d < 100 * dmin) prev = std::max(prev, v);
  }
  rep.note = "sup (T-t)^2 K_max = " + std::to_string(sup);
  if (prev == 0) {
    rep.margin = kMarginSentinel;
    rep.note += "; no earlier decade to compare";
    rep.pass = true;
    return rep;
  }
  rep.margin = 2.0 * prev - last;
  rep.pass = rep.margin >= 0;
  return rep;
}

MonitorReport pole_rate_bound(const Trajectory& traj, double T, double b2, double A1) {
  MonitorReport rep;
  rep.name = "pole_rate_bound";
  for (const auto& [t, p] : traj.snapshots) {
    if (t >= T) break;
    if (!p.has_left_pole()) continue;
    const CurvatureField cf = sectional(p);
    const double Kpole = std::max(cf.K_rad.front(), p.has_right_pole() ? cf.K_rad.back() : 0.0);
    const double n = p.n;
    const double bound = b2 * A1 * A1 / (2.0 * (n - 1) * (T - t) * (T - t));
    const double m = bound - Kpole;
    ++rep.samples;
    if (m < rep.margin) {
      rep.margin = m;
      rep.t_at = t;
    }
  }
  rep.pass = rep.margin >= 0;
  return rep;
}

MonitorReport extinction_decay(const Trajectory& traj) {
  MonitorReport rep;
  rep.name = "extinction_decay";
  if (traj.snapshots.size() < 2) {
    rep.enabled = false;
    rep.note = "need >= 2 snapshots";
    return rep;
  }
  const int n = traj.snapshots.front().second.n;
  const double want = 2.0 * (n - 1) * (1.0 - 0.05);
  long paper_ok = 0, critical_pairs = 0;
  bool decreasing = true;
  for (std::size_t k = 0; k + 1 < traj.snapshots.size(); ++k) {
    const auto& [t1, p1] = traj.snapshots[k];
    const auto& [t2, p2] = traj.snapshots[k + 1];
    if (!(t2 > t1)) continue;
    const double M1 = max_orbit_diameter(p1) / M_PI, M2 = max_orbit_diameter(p2) / M_PI;
    const double rate = (M1 * M1 - M2 * M2) / (t2 - t1);
    if (M2 * M2 >= M1 * M1) decreasing = false;
    // interior-critical test at the earlier snapshot
    std::size_t amax = 0;
    for (std::size_t i = 0; i < p1.size(); ++i)
      if (p1.psi[i] > p1.psi[amax]) amax = i;
    bool interior = !((p1.has_left_pole() && amax <= 1) ||
                      (p1.has_right_pole() && amax + 2 >= p1.size()));
    if (interior) {
      StencilSet st(p1);
      std::vector<double> d1;
      st.apply(p1.psi, -1, &d1, nullptr);
      const double slope = d1[amax] / p1.phi[amax];
      interior = std::abs(slope) < 0.05;
    }
    if (interior) {
      ++critical_pairs;
      const double m = rate - want;
      if (m < rep.margin) {
        rep.margin = m;
        rep.t_at = t1;
      }
      if (rate >= n * (1.0 - 0.05)) ++paper_ok;
    }
    ++rep.samples;
  }
  rep.note = "paper-rate n satisfied on " + std::to_string(paper_ok) + "/" +
             std::to_string(critical_pairs) + " interior-critical intervals";
  rep.pass = decreasing && rep.margin >= 0;
  if (!decreasing) rep.note += "; max psi^2 not strictly decreasing";
  return rep;
}

MonitorReport barrier_ordering(std::span<const double> u, std::span<const double> z_sim,
                               std::span<const double> z_star) {
  if (u.size() != z_sim.size() || u.size() != z_star.size() || u.empty())
    throw GridMismatch("barrier_ordering: incompatible grids");
  MonitorReport rep;
  rep.name = "barrier_ordering";
  rep.samples = static_cast<long>(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double m = z_sim[i] - z_star[i];
    if (m < rep.margin) {
      rep.margin = m;
      rep.node_at = static_cast<long>(i);
      rep.t_at = u[i];  // grid coordinate of the worst point
    }
  }
  rep.pass = rep.margin >= 0;
  return rep;
}

}  // namespace ricci
