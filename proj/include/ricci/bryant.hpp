#pragma once

#include <utility>
#include <vector>

#include "ricci/interp.hpp"

namespace ricci {

// Tabulated Bryant soliton: the warping w together with the soliton
// potential u, normalized so the scalar curvature at the tip is 1, plus the
// horizontal z-function B(psi) = (w')^2 indexed by w.
struct BryantProfile {
  int n = 2;
  std::vector<double> r, w, wp, u, up;  // accepted integrator nodes
  std::vector<double> bw, bz;           // raw B table: w -> (w')^2
  double tail_coeff = 1;                // q = lim w^2 B_raw(w)
  double b2 = 0, c2 = 0;                // fitted on the tail-normalized B
  double tol = 0;
  double max_local_error = 0;

  // Tail-normalized z-function: B(x) = B_raw(sqrt(q) x), so B(x) x^2 -> 1;
  // beyond the table it continues with the fitted 1/x^2 + c2/x^4 form.
  double B(double x) const;
  double B_d1(double x) const;
  double B_d2(double x) const;

  // internal spline over the raw table (built by solve_soliton)
  CubicSpline braw;
  double blend_lo = 0, blend_hi = 0;  // table->asymptote blend window (raw w)
};

BryantProfile solve_soliton(int n, double r_max, double tol);

struct AsymptoticsReport {
  double w_over_sqrt_r_mean = 0, w_over_sqrt_r_drift = 0;
  double korb_r_mean = 0, korb_r_drift = 0;
  double krad_r2_mean = 0, krad_r2_drift = 0;
  double rR_mean = 0, rR_drift = 0;
  bool R_monotone = false;
  bool pass = false;
};
AsymptoticsReport check_asymptotics(const BryantProfile& bp);

// Fits b2 (small-x quadratic drop of B) and c2 (large-x 1/x^4 coefficient),
// storing them on the profile.
std::pair<double, double> fit_b2_c2(BryantProfile& bp);

// Scalar curvature along the table (from the state, not finite differences).
std::vector<double> bryant_scalar_curvature(const BryantProfile& bp);

}  // namespace ricci
