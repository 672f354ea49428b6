#pragma once

#include <span>
#include <vector>

#include "ricci/bryant.hpp"
#include "ricci/profile.hpp"

namespace ricci {

// Closed-form barrier ingredients on u in (0,1).
double barrier_Z1(double u);
double barrier_zeta(double u);

struct BarrierParams {
  double A1 = 0, A2 = 1, A3 = 1;
  double beta = 4;
  double D = 0;
  double R_D = 0;      // D sqrt(A3/A2)
  double tau0 = 0;
  double b_coeff = 0;  // inner edge of the z_ext validity band, in units of e^{-tau/2}
};

double z_int(const BryantProfile& bp, const BarrierParams& p, double u, double tau);
double z_ext(const BarrierParams& p, double u, double tau);

struct ZstarTable {
  double tau = 0;
  std::vector<double> u, z;
};

// Piecewise subsolution: z_int below e^{-tau/2} R_D, max of both on the
// doubling band, z_ext beyond.  Throws PatchOrderViolated when the crossing
// inequalities fail at the band edges.
ZstarTable build_zstar(const BarrierParams& p, const BryantProfile& bp, double tau,
                       int nodes = 2001);

// Selects (A1, A2, A3, beta, D, tau0) for initial data z0(u0): D from
// D^-2 <= inf z0, A2 = 1, A3 by scanning for a nonpositive z_ext residual,
// A1 from A1^-2 = A2 (1 - D^-2/2), tau0 raised until z_* fits under z0.
BarrierParams choose_params(std::span<const double> u0, std::span<const double> z0,
                            const BryantProfile& bp);

struct SubsolutionReport {
  double max_resid_int = -1e300;  // signed; subsolution wants <= ~0
  double max_resid_ext = -1e300;
  long samples = 0;
};
SubsolutionReport verify_subsolution(const BarrierParams& p, const BryantProfile& bp,
                                     std::span<const double> u_grid,
                                     std::span<const double> tau_grid);
SubsolutionReport verify_subsolution_serial(const BarrierParams& p, const BryantProfile& bp,
                                            std::span<const double> u_grid,
                                            std::span<const double> tau_grid);

// The parabolic operator in Type-I variables: d_tau z = D[z].
double horizontal_operator(int n, double z, double zu, double zuu, double u);

struct ZTable {
  std::vector<double> u, z;
};

// z = (psi_s)^2 against u = psi / sqrt(2(n-1)(T-t)) on the monotone segment
// from the left pole to the leftmost bump.
ZTable horizontal_transform(const Profile& p, double T);

// Radial-map extension: blends the identity with phi by a smooth partition
// of unity supported on (0, 7D/8) and (5D/8, D).
std::vector<double> bryant_extend(std::span<const double> r_in,
                                  std::span<const double> phi_in, double D,
                                  std::span<const double> r_out);

}  // namespace ricci
