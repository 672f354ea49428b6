#include "ricci/barriers.hpp"

#include <algorithm>
#include <cmath>

#include "ricci/errors.hpp"
#include "ricci/interp.hpp"
#include "ricci/monitors.hpp"
#include "ricci/stencil.hpp"

namespace ricci {

double barrier_Z1(double u) {
  if (!(u > 0) || !(u <= 1)) throw DomainError("Z1: u outside (0,1]");
  const double q = 1.0 - u * u;
  return q * q / (u * u);
}

double barrier_zeta(double u) {
  if (!(u > 0) || !(u <= 1)) throw DomainError("zeta: u outside (0,1]");
  const double q = 1.0 - u * u;
  if (q == 0) return 0;
  const double u2 = u * u;
  return q * q / (u2 * u2) * (1.0 - 2.0 * u2 + 2.0 * u2 * q * (std::log(q) - 2.0 * std::log(u)));
}

double z_int(const BryantProfile& bp, const BarrierParams& p, double u, double tau) {
  return bp.B(p.A1 * std::exp(0.5 * tau) * u);
}

double z_ext(const BarrierParams& p, double u, double tau) {
  return p.A2 * std::exp(-tau) * barrier_Z1(u) - p.A3 * std::exp(-2.0 * tau) * barrier_zeta(u);
}

ZstarTable build_zstar(const BarrierParams& p, const BryantProfile& bp, double tau, int nodes) {
  const double u1 = std::exp(-0.5 * tau) * p.R_D;
  const double u2 = 2.0 * u1;
  if (!(u2 < 0.5))
    throw PatchOrderViolated("zstar: tau too small, doubling band reaches u = " +
                             std::to_string(u2));
  const double zi1 = z_int(bp, p, u1, tau), ze1 = z_ext(p, u1, tau);
  const double zi2 = z_int(bp, p, u2, tau), ze2 = z_ext(p, u2, tau);
  if (!(zi1 > ze1))
    throw PatchOrderViolated("zstar: z_int <= z_ext at R_D edge, margin " +
                             std::to_string(zi1 - ze1));
  if (!(zi2 < ze2))
    throw PatchOrderViolated("zstar: z_int >= z_ext at 2 R_D edge, margin " +
                             std::to_string(ze2 - zi2));
  ZstarTable t;
  t.tau = tau;
  t.u.resize(nodes);
  t.z.resize(nodes);
#pragma omp parallel for schedule(static) if (nodes > 10000)
  for (int i = 0; i < nodes; ++i) {
    const double u = static_cast<double>(i) / (nodes - 1);
    t.u[i] = u;
    if (u <= u1) {
      t.z[i] = u == 0 ? 1.0 : z_int(bp, p, u, tau);
    } else if (u <= u2) {
      t.z[i] = std::max(z_int(bp, p, u, tau), z_ext(p, u, tau));
    } else {
      t.z[i] = u >= 1.0 ? 0.0 : z_ext(p, u, tau);
    }
  }
  return t;
}

double horizontal_operator(int n, double z, double zu, double zuu, double u) {
  return (z * zuu + (n - 1 - z) * zu / u + 2.0 * (n - 1) * z * (1.0 - z) / (u * u) -
          0.5 * zu * zu) /
             (2.0 * (n - 1)) -
         0.5 * u * zu;
}

namespace {

// 5-point centered first/second u-derivatives of a closed-form function.
template <typename F>
void fd_uderivs(const F& f, double u, double h, double* d1, double* d2) {
  const double f2 = f(u + 2 * h), f1 = f(u + h), fm1 = f(u - h), fm2 = f(u - 2 * h);
  const double f0 = f(u);
  *d1 = (-f2 + 8 * f1 - 8 * fm1 + fm2) / (12 * h);
  *d2 = (-f2 + 16 * f1 - 30 * f0 + 16 * fm1 - fm2) / (12 * h * h);
}

double resid_int(const BryantProfile& bp, const BarrierParams& p, double u, double tau) {
  const int n = bp.n;
  const double g = p.A1 * std::exp(0.5 * tau);
  const double xi = g * u;
  const double z = bp.B(xi);
  const double zu = g * bp.B_d1(xi);
  const double zuu = g * g * bp.B_d2(xi);
  const double ztau = 0.5 * xi * bp.B_d1(xi);
  return ztau - horizontal_operator(n, z, zu, zuu, u);
}

double resid_ext(int n, const BarrierParams& p, double u, double tau) {
  const double e1 = p.A2 * std::exp(-tau), e2 = p.A3 * std::exp(-2.0 * tau);
  auto f = [&](double v) { return e1 * barrier_Z1(v) - e2 * barrier_zeta(v); };
  const double h = std::min(1e-5, 0.2 * std::min(u, 1.0 - u));
  double zu, zuu;
  fd_uderivs(f, u, h, &zu, &zuu);
  const double z = f(u);
  const double ztau = -e1 * barrier_Z1(u) + 2.0 * e2 * barrier_zeta(u);
  return ztau - horizontal_operator(n, z, zu, zuu, u);
}

template <bool Parallel>
SubsolutionReport verify_impl(const BarrierParams& p, const BryantProfile& bp,
                              std::span<const double> u_grid,
                              std::span<const double> tau_grid) {
  SubsolutionReport rep;
  const long NU = static_cast<long>(u_grid.size());
  const long NT = static_cast<long>(tau_grid.size());
  rep.samples = 0;
  double mi = -1e300, me = -1e300;
  long samples = 0;
#pragma omp parallel for collapse(2) schedule(static) reduction(max : mi, me) \
    reduction(+ : samples) if (Parallel)
  for (long a = 0; a < NT; ++a) {
    for (long b = 0; b < NU; ++b) {
      const double tau = tau_grid[a], u = u_grid[b];
      if (!(u > 0) || !(u < 1)) continue;
      mi = std::max(mi, resid_int(bp, p, u, tau));
      if (u >= p.b_coeff * std::exp(-0.5 * tau) && u < 1)
        me = std::max(me, resid_ext(bp.n, p, u, tau));
      ++samples;
    }
  }
  rep.max_resid_int = mi;
  rep.max_resid_ext = me;
  rep.samples = samples;
  return rep;
}

}  // namespace

SubsolutionReport verify_subsolution(const BarrierParams& p, const BryantProfile& bp,
                                     std::span<const double> u_grid,
                                     std::span<const double> tau_grid) {
  return verify_impl<true>(p, bp, u_grid, tau_grid);
}

SubsolutionReport verify_subsolution_serial(const BarrierParams& p, const BryantProfile& bp,
                                            std::span<const double> u_grid,
                                            std::span<const double> tau_grid) {
  return verify_impl<false>(p, bp, u_grid, tau_grid);
}

namespace {

// Smallest band coefficient b such that the z_ext residual stays nonpositive
// for u in [b e^{-tau/2}, ~1) on a probe tau grid.
double find_b_coeff(int n, const BarrierParams& p, double tau_lo) {
  const double taus[3] = {tau_lo, tau_lo + 1.5, tau_lo + 3.0};
  double best = -1;
  for (double b = 0.25; b <= 64.0; b *= std::sqrt(2.0)) {
    bool ok = true;
    for (double tau : taus) {
      for (double r = b; ok && r <= 4096.0; r *= 1.3) {
        const double u = r * std::exp(-0.5 * tau);
        if (u >= 0.98) break;
        if (resid_ext(n, p, u, tau) > 1e-6) ok = false;
      }
      // also sweep the fixed-u range up to the boundary
      for (double u = 0.05; ok && u < 0.98; u += 0.02)
        if (u >= b * std::exp(-0.5 * tau) && resid_ext(n, p, u, tau) > 1e-6) ok = false;
      if (!ok) break;
    }
    if (ok) {
      best = b;
      break;
    }
  }
  return best;
}

}  // namespace

BarrierParams choose_params(std::span<const double> u0, std::span<const double> z0,
                            const BryantProfile& bp) {
  if (u0.size() != z0.size() || u0.size() < 8)
    throw InvalidSpec("choose_params: bad initial table");
  double inf_z0 = 1e300;
  for (std::size_t i = 0; i < u0.size(); ++i)
    if (u0[i] > 0 && u0[i] <= 1) inf_z0 = std::min(inf_z0, z0[i]);
  if (!(inf_z0 > 0))
    throw NoAdmissibleParams("choose_params: inf z0 <= 0, no D with D^-2 <= inf z0");
  Pchip z0_interp(u0, z0);
  const int n = bp.n;

  BarrierParams p;
  p.A2 = 1.0;
  for (double A3 = std::max(1.0, p.A2 * p.A2); A3 <= 1u << 20; A3 *= 2) {
    p.A3 = A3;
    double D = std::max(std::sqrt(1.0 / inf_z0) * 1.0000001, 4.0);
    for (int dstep = 0; dstep < 40; ++dstep, D *= 1.3) {
      p.D = D;
      p.R_D = D * std::sqrt(p.A3 / p.A2);
      p.beta = std::max(4.0, 3.0 * p.R_D);
      p.A1 = 1.0 / std::sqrt(p.A2 * (1.0 - 0.5 / (D * D)));
      // tau must at least push the doubling band below u = 1/2 and make
      // z_int steeper than z0 near the pole.
      double tau_lo = 2.0 * std::log(8.0 * p.R_D);
      const double pole_need = std::max(1.0, 4.0 / (bp.b2 * p.A1 * p.A1));
      tau_lo = std::max(tau_lo, std::log(pole_need));
      p.b_coeff = find_b_coeff(n, p, tau_lo);
      if (p.b_coeff < 0) continue;  // z_ext not a subsolution; widen the scan
      bool ok_tau = false;
      for (double tau0 = tau_lo; tau0 <= tau_lo + 40.0; tau0 += 0.25) {
        ZstarTable zt;
        try {
          zt = build_zstar(p, bp, tau0, 1201);
        } catch (const PatchOrderViolated&) {
          continue;
        }
        // z_* must sit strictly under z0 at interior nodes.
        bool under = true;
        const double u_max = std::min(1.0, u0.back());
        for (int i = 1; i + 1 < static_cast<int>(zt.u.size()) && under; ++i) {
          const double u = zt.u[i];
          if (u <= u0.front() || u >= u_max) continue;
          if (zt.z[i] > z0_interp(u) - 1e-4) under = false;
        }
        if (!under) continue;
        // z_ext bound <= D^-2 on its band.
        bool bounded = true;
        const double u1 = std::exp(-0.5 * tau0) * p.R_D;
        for (double u = u1 * 1.0001; u <= 0.5 && bounded; u += 0.005)
          if (z_ext(p, u, tau0) > 1.0 / (D * D) + 1e-12) bounded = false;
        if (!bounded) break;  // needs larger A3
        p.tau0 = tau0;
        ok_tau = true;
        break;
      }
      if (ok_tau) return p;
    }
  }
  throw NoAdmissibleParams("choose_params: scan exhausted without admissible parameters");
}

ZTable horizontal_transform(const Profile& p, double T) {
  if (!(T > p.t)) throw BadT("horizontal_transform: T <= profile time");
  if (!p.has_left_pole())
    throw NotMonotone("horizontal_transform: no pole-to-bump segment on this topology");
  const BumpInfo bumps = bump_structure(p);
  if (bumps.bumps == 0) throw NotMonotone("horizontal_transform: no bump");
  const std::size_t k = bumps.bump_nodes.front();
  for (std::size_t i = 0; i + 1 <= k; ++i)
    if (!(p.psi[i + 1] > p.psi[i]))
      throw NotMonotone("horizontal_transform: psi not increasing before the bump");
  StencilSet st(p);
  std::vector<double> psi_x;
  st.apply(p.psi, -1, &psi_x, nullptr);
  const double scale = std::sqrt(2.0 * (p.n - 1) * (T - p.t));
  ZTable out;
  out.u.reserve(k + 1);
  out.z.reserve(k + 1);
  for (std::size_t i = 0; i <= k; ++i) {
    const double psi_s = psi_x[i] / p.phi[i];
    out.u.push_back(p.psi[i] / scale);
    out.z.push_back(psi_s * psi_s);
  }
  return out;
}

std::vector<double> bryant_extend(std::span<const double> r_in,
                                  std::span<const double> phi_in, double D,
                                  std::span<const double> r_out) {
  if (r_in.size() != phi_in.size() || r_in.size() < 4)
    throw InvalidSpec("bryant_extend: bad input table");
  for (std::size_t i = 0; i + 1 < phi_in.size(); ++i)
    if (!(phi_in[i + 1] > phi_in[i]))
      throw NotIncreasing("bryant_extend: input map not increasing");
  Pchip phi(r_in, phi_in);
  const double lo = 5.0 * D / 8.0, hi = 7.0 * D / 8.0;
  std::vector<double> out(r_out.size());
  for (std::size_t i = 0; i < r_out.size(); ++i) {
    const double r = r_out[i];
    const double z2 = smoothstep5((r - lo) / (hi - lo));
    out[i] = r + z2 * (phi(r) - r);
  }
  for (std::size_t i = 0; i + 1 < out.size(); ++i)
    if (!(out[i + 1] > out[i])) throw NotIncreasing("bryant_extend: output not increasing");
  return out;
}

}  // namespace ricci
