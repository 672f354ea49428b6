#include "ricci/curvature.hpp"

#include <algorithm>
#include <cmath>

#include "ricci/errors.hpp"
#include "ricci/interp.hpp"
#include "ricci/stencil.hpp"

namespace ricci {

namespace {

void check_degenerate(const Profile& p) {
  const std::size_t lo = p.has_left_pole() ? 1 : 0;
  const std::size_t hi = p.has_right_pole() ? p.size() - 1 : p.size();
  for (std::size_t i = lo; i < hi; ++i)
    if (p.psi[i] < kPsiFloor) throw DegenerateProfile("curvature: psi underflow");
}

// lambda at a pole by one-sided parabolic extrapolation of interior lambda;
// mu is set equal there (smooth closure limit).
void fill_pole(CurvatureField& cf, const std::vector<double>& s, std::size_t pole,
               std::size_t i1, std::size_t i2, std::size_t i3) {
  const double xs[3] = {s[i1], s[i2], s[i3]};
  const double ys[3] = {cf.lambda[i1], cf.lambda[i2], cf.lambda[i3]};
  const double lp = quad_extrapolate(xs, ys, s[pole]);
  cf.lambda[pole] = lp;
  cf.mu[pole] = lp;
}

template <bool Parallel>
CurvatureField sectional_impl(const Profile& p) {
  check_degenerate(p);
  const std::size_t N = p.size();
  const int n = p.n;
  StencilSet st(p);
  std::vector<double> psi_x, psi_xx, phi_x;
  st.apply(p.psi, -1, &psi_x, &psi_xx);
  st.apply(p.phi, +1, &phi_x, nullptr);

  CurvatureField cf;
  cf.lambda.resize(N);
  cf.mu.resize(N);
  cf.R.resize(N);
  cf.nu.resize(N);
  cf.K_rad.resize(N);
  cf.K_orb.resize(N);
  cf.rho.resize(N);
  cf.rho1.resize(N);

  const std::size_t lo = p.has_left_pole() ? 1 : 0;
  const std::size_t hi = p.has_right_pole() ? N - 1 : N;
#pragma omp parallel for schedule(static) if (Parallel && N > 512)
  for (long li = static_cast<long>(lo); li < static_cast<long>(hi); ++li) {
    const std::size_t i = static_cast<std::size_t>(li);
    const double phi = p.phi[i], psi = p.psi[i];
    const double psi_s = psi_x[i] / phi;
    const double psi_ss = (psi_xx[i] - psi_x[i] * phi_x[i] / phi) / (phi * phi);
    cf.lambda[i] = -2.0 * psi_ss / psi;
    cf.mu[i] = 2.0 * (1.0 - psi_s * psi_s) / (psi * psi);
  }
  if (p.has_left_pole() || p.has_right_pole()) {
    const auto s = arclength(p);
    if (p.has_left_pole()) fill_pole(cf, s, 0, 1, 2, 3);
    if (p.has_right_pole()) fill_pole(cf, s, N - 1, N - 2, N - 3, N - 4);
  }
#pragma omp parallel for schedule(static) if (Parallel && N > 512)
  for (long li = 0; li < static_cast<long>(N); ++li) {
    const std::size_t i = static_cast<std::size_t>(li);
    const double l = cf.lambda[i], m = cf.mu[i];
    cf.R[i] = n * l + 0.5 * n * (n - 1) * m;
    cf.nu[i] = std::min(l, m);
    cf.K_rad[i] = 0.5 * l;
    cf.K_orb[i] = 0.5 * m;
    const double top = 0.5 * std::max(std::abs(l), std::abs(m));
    cf.rho[i] = top > 0 ? std::min(1.0 / std::sqrt(top), kRhoCap) : kRhoCap;
    cf.rho1[i] = std::min(cf.rho[i], 1.0);
  }
  return cf;
}

}  // namespace

CurvatureField sectional(const Profile& p) { return sectional_impl<true>(p); }
CurvatureField sectional_serial(const Profile& p) { return sectional_impl<false>(p); }

std::pair<std::vector<double>, std::vector<double>> ricci_coefficients(const Profile& p) {
  check_degenerate(p);
  const std::size_t N = p.size();
  const int n = p.n;
  StencilSet st(p);
  std::vector<double> psi_x, psi_xx, phi_x;
  st.apply(p.psi, -1, &psi_x, &psi_xx);
  st.apply(p.phi, +1, &phi_x, nullptr);

  std::vector<double> ric_rad(N), ric_orb(N);
  const std::size_t lo = p.has_left_pole() ? 1 : 0;
  const std::size_t hi = p.has_right_pole() ? N - 1 : N;
  for (std::size_t i = lo; i < hi; ++i) {
    const double phi = p.phi[i], psi = p.psi[i];
    const double phi2 = phi * phi, phi3 = phi2 * phi;
    ric_rad[i] = n * (psi_x[i] * phi_x[i] / (psi * phi3) - psi_xx[i] / (phi2 * psi));
    ric_orb[i] = -psi_xx[i] / (phi2 * psi) - (n - 1) * psi_x[i] * psi_x[i] / (psi * psi * phi2) +
                 phi_x[i] * psi_x[i] / (phi3 * psi) + (n - 1) / (psi * psi);
  }
  // Poles: both Ric eigenvalues equal n*K_rad by the smooth closure.
  const auto s = arclength(p);
  auto fill = [&](std::size_t pole, std::size_t i1, std::size_t i2, std::size_t i3) {
    const double xs[3] = {s[i1], s[i2], s[i3]};
    const double ys[3] = {ric_rad[i1], ric_rad[i2], ric_rad[i3]};
    ric_rad[pole] = quad_extrapolate(xs, ys, s[pole]);
    ric_orb[pole] = ric_rad[pole];
  };
  if (p.has_left_pole()) fill(0, 1, 2, 3);
  if (p.has_right_pole()) fill(N - 1, N - 2, N - 3, N - 4);
  return {ric_rad, ric_orb};
}

std::pair<std::vector<double>, std::vector<double>> scale(const Profile& p) {
  CurvatureField cf = sectional(p);
  return {std::move(cf.rho), std::move(cf.rho1)};
}

double min_rho(const CurvatureField& cf) {
  return *std::min_element(cf.rho.begin(), cf.rho.end());
}

double max_abs_sectional(const CurvatureField& cf) {
  double m = 0;
  for (std::size_t i = 0; i < cf.size(); ++i)
    m = std::max(m, std::max(std::abs(cf.K_rad[i]), std::abs(cf.K_orb[i])));
  return m;
}

}  // namespace ricci
