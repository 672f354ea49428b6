#include "ricci/bryant.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "ricci/errors.hpp"

namespace ricci {

namespace {

struct State {
  double w, wp, u, up;
};

State operator+(State a, State b) { return {a.w + b.w, a.wp + b.wp, a.u + b.u, a.up + b.up}; }
State operator*(double c, State a) { return {c * a.w, c * a.wp, c * a.u, c * a.up}; }

State soliton_rhs(int n, const State& y) {
  const double wpp = (n - 1) * (1.0 - y.wp * y.wp) / y.w + y.up * y.wp;
  return {y.wp, wpp, y.up, n * wpp / y.w};
}

// Taylor seed at r0: w = r + w3 r^3 + w5 r^5, u = u2 r^2 + u4 r^4, from the
// soliton system with u''(0) = -1/(n+1).
State series_seed(int n, double r0) {
  const double w3 = -1.0 / (6.0 * n * (n + 1));
  const double u2 = -0.5 / (n + 1);
  const double w5 = 3.0 * (-(5.0 * n - 3.0) * w3 * w3 + 6.0 * u2 * w3) / (10.0 * (n + 3));
  const double u4 = n * (10.0 * w5 - 3.0 * w3 * w3) / 6.0;
  const double r2 = r0 * r0, r3 = r2 * r0, r4 = r3 * r0, r5 = r4 * r0;
  return {r0 + w3 * r3 + w5 * r5, 1.0 + 3.0 * w3 * r2 + 5.0 * w5 * r4, u2 * r2 + u4 * r4,
          2.0 * u2 * r0 + 4.0 * u4 * r3};
}

// Cash-Karp embedded RK4(5) tableau.
State ck_step(int n, double r, const State& y, double h, double* err_norm) {
  static constexpr double B21 = 1.0 / 5;
  static constexpr double B31 = 3.0 / 40, B32 = 9.0 / 40;
  static constexpr double B41 = 3.0 / 10, B42 = -9.0 / 10, B43 = 6.0 / 5;
  static constexpr double B51 = -11.0 / 54, B52 = 5.0 / 2, B53 = -70.0 / 27, B54 = 35.0 / 27;
  static constexpr double B61 = 1631.0 / 55296, B62 = 175.0 / 512, B63 = 575.0 / 13824,
                          B64 = 44275.0 / 110592, B65 = 253.0 / 4096;
  static constexpr double C1 = 37.0 / 378, C3 = 250.0 / 621, C4 = 125.0 / 594,
                          C6 = 512.0 / 1771;
  static constexpr double D1 = 2825.0 / 27648, D3 = 18575.0 / 48384, D4 = 13525.0 / 55296,
                          D5 = 277.0 / 14336, D6 = 1.0 / 4;
  (void)r;
  const State k1 = soliton_rhs(n, y);
  const State k2 = soliton_rhs(n, y + h * B21 * k1);
  const State k3 = soliton_rhs(n, y + h * (B31 * k1 + B32 * k2));
  const State k4 = soliton_rhs(n, y + h * (B41 * k1 + B42 * k2 + B43 * k3));
  const State k5 = soliton_rhs(n, y + h * (B51 * k1 + B52 * k2 + B53 * k3 + B54 * k4));
  const State k6 =
      soliton_rhs(n, y + h * (B61 * k1 + B62 * k2 + B63 * k3 + B64 * k4 + B65 * k5));
  const State y5 = y + h * (C1 * k1 + C3 * k3 + C4 * k4 + C6 * k6);
  const State y4 = y + h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6);
  const double scale_w = std::abs(y.w) + 1.0, scale_u = std::abs(y.up) + 1.0;
  *err_norm = std::max({std::abs(y5.w - y4.w) / scale_w, std::abs(y5.wp - y4.wp),
                        std::abs(y5.up - y4.up) / scale_u});
  return y5;
}

}  // namespace

BryantProfile solve_soliton(int n, double r_max, double tol) {
  if (n < 2) throw InvalidSpec("bryant: n must be >= 2");
  if (!(r_max > 1)) throw InvalidSpec("bryant: r_max too small");
  if (!(tol > 0)) throw InvalidSpec("bryant: tol must be positive");
  BryantProfile bp;
  bp.n = n;
  bp.tol = tol;

  double r = 1e-3;
  State y = series_seed(n, r);
  double h = 1e-4;
  auto record = [&](double rr, const State& s) {
    bp.r.push_back(rr);
    bp.w.push_back(s.w);
    bp.wp.push_back(s.wp);
    bp.u.push_back(s.u);
    bp.up.push_back(s.up);
  };
  record(r, y);
  long rejects = 0;
  while (r < r_max) {
    if (r + h > r_max) h = r_max - r;
    double err = 0;
    const State ynew = ck_step(n, r, y, h, &err);
    if (err <= tol) {
      r += h;
      y = ynew;
      if (!(y.w > 0) || !(y.wp > 0) || y.wp > 1.0 + 1e-12)
        throw NonMonotone("bryant: w' left (0,1) at r=" + std::to_string(r));
      record(r, y);
      bp.max_local_error = std::max(bp.max_local_error, err);
      rejects = 0;
    } else if (++rejects > 60) {
      throw IntegrationFailed("bryant: step control stalled at r=" + std::to_string(r));
    }
    const double fac = 0.9 * std::pow(tol / std::max(err, 1e-300), 0.2);
    h *= std::clamp(fac, 0.2, 5.0);
    if (h < 1e-14) throw IntegrationFailed("bryant: step underflow");
  }

  // Raw horizontal table: w is strictly increasing since w' > 0.
  bp.bw.assign(1, 0.0);
  bp.bz.assign(1, 1.0);
  for (std::size_t i = 0; i < bp.w.size(); ++i) {
    if (bp.w[i] <= bp.bw.back()) continue;
    bp.bw.push_back(bp.w[i]);
    bp.bz.push_back(bp.wp[i] * bp.wp[i]);
  }
  bp.braw = CubicSpline(bp.bw, bp.bz);

  // Tail coefficient q = lim w^2 z, from a linear fit of w^2 z against 1/w^2
  // over the outer half of the table.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long m = 0;
  for (std::size_t i = 0; i < bp.bw.size(); ++i) {
    if (bp.bw[i] < 0.5 * bp.bw.back()) continue;
    const double X = 1.0 / (bp.bw[i] * bp.bw[i]);
    const double Y = bp.bz[i] * bp.bw[i] * bp.bw[i];
    sx += X;
    sy += Y;
    sxx += X * X;
    sxy += X * Y;
    ++m;
  }
  const double det = m * sxx - sx * sx;
  if (m < 8 || det == 0) throw IntegrationFailed("bryant: tail fit underdetermined");
  const double slope = (m * sxy - sx * sy) / det;
  bp.tail_coeff = (sy - slope * sx) / m;
  if (!(bp.tail_coeff > 0)) throw IntegrationFailed("bryant: nonpositive tail coefficient");

  bp.blend_hi = bp.bw.back();
  bp.blend_lo = 0.9 * bp.blend_hi;
  fit_b2_c2(bp);
  return bp;
}

namespace {

// Normalized asymptote branch 1/x^2 + c2/x^4 and its derivatives.
inline double asym_branch(double c2, double x, int deriv) {
  const double x2 = x * x;
  switch (deriv) {
    case 0: return 1.0 / x2 + c2 / (x2 * x2);
    case 1: return -2.0 / (x2 * x) - 4.0 * c2 / (x2 * x2 * x);
    default: return 6.0 / (x2 * x2) + 20.0 * c2 / (x2 * x2 * x2);
  }
}

struct Blend {
  double v, d1, d2;  // smoothstep and derivatives in the raw-w variable
};

inline Blend blend_at(double wq, double lo, double hi) {
  const double t = (wq - lo) / (hi - lo);
  const double dt = 1.0 / (hi - lo);
  Blend b;
  b.v = 6 * t * t * t * t * t - 15 * t * t * t * t + 10 * t * t * t;
  b.d1 = (30 * t * t * t * t - 60 * t * t * t + 30 * t * t) * dt;
  b.d2 = (120 * t * t * t - 180 * t * t + 60 * t) * dt * dt;
  return b;
}

}  // namespace

double BryantProfile::B(double x) const {
  const double s = std::sqrt(tail_coeff);
  const double wq = s * x;
  if (wq <= blend_lo) return braw(wq);
  const double a = asym_branch(c2, x, 0);
  if (wq >= blend_hi) return a;
  const Blend b = blend_at(wq, blend_lo, blend_hi);
  return (1 - b.v) * braw(wq) + b.v * a;
}

double BryantProfile::B_d1(double x) const {
  const double s = std::sqrt(tail_coeff);
  const double wq = s * x;
  if (wq <= blend_lo) return s * braw.derivative(wq);
  const double a1 = asym_branch(c2, x, 1);
  if (wq >= blend_hi) return a1;
  const Blend b = blend_at(wq, blend_lo, blend_hi);
  const double f = braw(wq), f1 = s * braw.derivative(wq);
  const double a0 = asym_branch(c2, x, 0);
  return (1 - b.v) * f1 + b.v * a1 + b.d1 * s * (a0 - f);
}

double BryantProfile::B_d2(double x) const {
  const double s = std::sqrt(tail_coeff);
  const double wq = s * x;
  if (wq <= blend_lo) return s * s * braw.derivative2(wq);
  const double a2 = asym_branch(c2, x, 2);
  if (wq >= blend_hi) return a2;
  const Blend b = blend_at(wq, blend_lo, blend_hi);
  const double f = braw(wq), f1 = s * braw.derivative(wq), f2 = s * s * braw.derivative2(wq);
  const double a0 = asym_branch(c2, x, 0);
  const double a1 = asym_branch(c2, x, 1);
  return (1 - b.v) * f2 + b.v * a2 + 2 * b.d1 * s * (a1 - f1) + b.d2 * s * s * (a0 - f);
}

std::vector<double> bryant_scalar_curvature(const BryantProfile& bp) {
  std::vector<double> R(bp.r.size());
  for (std::size_t i = 0; i < bp.r.size(); ++i) {
    const State y{bp.w[i], bp.wp[i], bp.u[i], bp.up[i]};
    const double wpp = (bp.n - 1) * (1.0 - y.wp * y.wp) / y.w + y.up * y.wp;
    R[i] = -2.0 * bp.n * wpp / y.w +
           bp.n * (bp.n - 1) * (1.0 - y.wp * y.wp) / (y.w * y.w);
  }
  return R;
}

AsymptoticsReport check_asymptotics(const BryantProfile& bp) {
  AsymptoticsReport rep;
  const auto R = bryant_scalar_curvature(bp);
  const double r_lo = 0.5 * bp.r.back();
  auto drift = [&](auto f, double* mean_out) {
    double mn = 1e300, mx = -1e300, sum = 0;
    long m = 0;
    for (std::size_t i = 0; i < bp.r.size(); ++i) {
      if (bp.r[i] < r_lo) continue;
      const double v = f(i);
      mn = std::min(mn, v);
      mx = std::max(mx, v);
      sum += v;
      ++m;
    }
    const double mean = sum / m;
    *mean_out = mean;
    return (mx - mn) / std::abs(mean);
  };
  rep.w_over_sqrt_r_drift =
      drift([&](std::size_t i) { return bp.w[i] / std::sqrt(bp.r[i]); }, &rep.w_over_sqrt_r_mean);
  rep.korb_r_drift = drift(
      [&](std::size_t i) {
        return (1.0 - bp.wp[i] * bp.wp[i]) / (bp.w[i] * bp.w[i]) * bp.r[i];
      },
      &rep.korb_r_mean);
  rep.krad_r2_drift = drift(
      [&](std::size_t i) {
        const double wpp =
            (bp.n - 1) * (1.0 - bp.wp[i] * bp.wp[i]) / bp.w[i] + bp.up[i] * bp.wp[i];
        return -wpp / bp.w[i] * bp.r[i] * bp.r[i];
      },
      &rep.krad_r2_mean);
  rep.rR_drift = drift([&](std::size_t i) { return bp.r[i] * R[i]; }, &rep.rR_mean);
  rep.R_monotone = true;
  for (std::size_t i = 1; i < R.size(); ++i)
    if (R[i] > R[i - 1] + 1e-12 * std::abs(R[i - 1])) rep.R_monotone = false;
  rep.pass = rep.w_over_sqrt_r_drift < 0.02 && rep.korb_r_drift < 0.02 &&
             rep.krad_r2_drift < 0.02 && rep.rR_drift < 0.02 && rep.R_monotone &&
             rep.w_over_sqrt_r_mean > 0 && rep.korb_r_mean > 0 && rep.krad_r2_mean > 0 &&
             rep.rR_mean > 0;
  return rep;
}

std::pair<double, double> fit_b2_c2(BryantProfile& bp) {
  const double s = std::sqrt(bp.tail_coeff);
  // b2: least squares of 1 - B(x) = b2 x^2 over small x (through the origin).
  double num = 0, den = 0;
  for (double x = 0.005; x <= 0.1; x += 0.005) {
    const double y = 1.0 - bp.braw(s * x);
    num += y * x * x;
    den += x * x * x * x;
  }
  if (den == 0) throw FitFailed("bryant: empty b2 window");
  bp.b2 = num / den;
  // c2: mean of x^4 (B - 1/x^2) over the far table (raw values, normalized x).
  double sum = 0;
  long m = 0;
  const double x_lo = 0.5 * bp.bw.back() / s, x_hi = 0.95 * bp.bw.back() / s;
  for (std::size_t i = 0; i < bp.bw.size(); ++i) {
    const double x = bp.bw[i] / s;
    if (x < x_lo || x > x_hi) continue;
    sum += x * x * x * x * (bp.bz[i] - 1.0 / (x * x));
    ++m;
  }
  if (m < 8) throw FitFailed("bryant: empty c2 window");
  bp.c2 = sum / m;
  return {bp.b2, bp.c2};
}

}  // namespace ricci
