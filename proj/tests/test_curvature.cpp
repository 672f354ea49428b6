#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ricci/curvature.hpp"
#include "ricci/errors.hpp"
#include "ricci/profile.hpp"

using namespace ricci;

namespace {
Profile sphere(int N, double rho0 = 1.0, int n = 2) {
  InitialSpec s;
  s.family = InitialSpec::Family::RoundSphere;
  s.rho0 = rho0;
  s.n = n;
  s.grid_size = N;
  return build_initial(s);
}
Profile cylinder(double c, int n = 2) {
  InitialSpec s;
  s.family = InitialSpec::Family::Cylinder;
  s.radius = c;
  s.n = n;
  s.grid_size = 401;
  return build_initial(s);
}
double sup_err(const std::vector<double>& v, double want) {
  double e = 0;
  for (double x : v) e = std::max(e, std::abs(x - want));
  return e;
}
// A sphere of radius L/pi presented in a warped coordinate, exercising
// nonconstant phi in both derivative routes.  The arclength of
// phi = C (1 + sin(pi x)^2/4) has the closed form C (9x/8 - sin(2 pi x)/(16 pi)),
// so the sampled data carry an exactly smooth pole.
Profile warped_sphere(int N) {
  Profile p;
  p.n = 2;
  p.topology = OrbitTopology::ClosedSphere;
  const double L = 2.0;  // total arclength
  const double C = 8.0 * L / 9.0;
  const double rho = L / M_PI;
  for (int i = 0; i < N; ++i) {
    const double x = static_cast<double>(i) / (N - 1);
    p.x.push_back(x);
    p.phi.push_back(C * (1.0 + 0.25 * std::sin(M_PI * x) * std::sin(M_PI * x)));
    const double s = C * (9.0 * x / 8.0 - std::sin(2.0 * M_PI * x) / (16.0 * M_PI));
    p.psi.push_back(rho * std::sin(s / rho));
  }
  p.psi.front() = 0;
  p.psi.back() = 0;
  return p;
}
}  // namespace

TEST_CASE("unit round sphere: lambda = mu = 2, R = n(n+1)") {
  const CurvatureField cf = sectional(sphere(401));
  CHECK(sup_err(cf.lambda, 2.0) < 1e-4);
  CHECK(sup_err(cf.mu, 2.0) < 1e-4);
  CHECK(sup_err(cf.R, 6.0) < 4e-4);
  CHECK(sup_err(cf.rho, 1.0) < 1e-4);
}

TEST_CASE("cylinder: lambda = 0, mu = 2/c^2, rho = c") {
  for (double c : {1.0, 0.5, 2.0}) {
    const CurvatureField cf = sectional(cylinder(c));
    CHECK(sup_err(cf.lambda, 0.0) < 1e-10);
    CHECK(sup_err(cf.mu, 2.0 / (c * c)) < 1e-10);
    CHECK(sup_err(cf.R, 2.0 / (c * c)) < 1e-10);
    CHECK(sup_err(cf.rho, c) < 1e-10);
  }
}

TEST_CASE("stored-field identities hold exactly") {
  const CurvatureField cf = sectional(sphere(201, 0.7, 3));
  for (std::size_t i = 0; i < cf.size(); ++i) {
    const int n = 3;
    CHECK(cf.R[i] == n * cf.lambda[i] + 0.5 * n * (n - 1) * cf.mu[i]);
    CHECK(cf.nu[i] <= cf.lambda[i]);
    CHECK(cf.nu[i] <= cf.mu[i]);
    CHECK(cf.rho[i] > 0);
    CHECK(cf.rho1[i] == std::min(cf.rho[i], 1.0));
  }
}

TEST_CASE("grid refinement converges at order >= 1.9") {
  const double e1 = std::max(sup_err(sectional(sphere(201)).lambda, 2.0),
                             sup_err(sectional(sphere(201)).mu, 2.0));
  const double e2 = std::max(sup_err(sectional(sphere(401)).lambda, 2.0),
                             sup_err(sectional(sphere(401)).mu, 2.0));
  const double e3 = std::max(sup_err(sectional(sphere(801)).lambda, 2.0),
                             sup_err(sectional(sphere(801)).mu, 2.0));
  CHECK(std::log2(e1 / e2) > 1.9);
  CHECK(std::log2(e2 / e3) > 1.9);
}

TEST_CASE("pole continuity of lambda") {
  for (int N : {201, 401}) {
    const Profile p = sphere(N);
    const CurvatureField cf = sectional(p);
    const double ds = M_PI / (N - 1);
    CHECK(std::abs(cf.lambda.front() - cf.lambda[1]) <= 5.0 * ds);
  }
}

TEST_CASE("ricci coefficients: Einstein sphere and flat-radial cylinder") {
  const auto [rad, orb] = ricci_coefficients(sphere(401));
  CHECK(sup_err(rad, 2.0) < 1e-3);
  CHECK(sup_err(orb, 2.0) < 1e-3);
  const auto [crad, corb] = ricci_coefficients(cylinder(0.5));
  CHECK(sup_err(crad, 0.0) < 1e-10);
  CHECK(sup_err(corb, (2 - 1) / 0.25) < 1e-9);
}

TEST_CASE("two curvature routes agree under refinement") {
  double prev = 0;
  int k = 0;
  const double rho = 2.0 / M_PI;
  for (int N : {201, 401, 801}) {
    const Profile p = warped_sphere(N);
    const CurvatureField cf = sectional(p);
    const auto [rad, orb] = ricci_coefficients(p);
    // trace identity: R = Ric_rad + n Ric_orb across the two routes
    double sup = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
      sup = std::max(sup, std::abs(rad[i] + p.n * orb[i] - cf.R[i]));
    // Einstein values on the warped sphere, both routes
    sup = std::max(sup, sup_err(rad, p.n / (rho * rho)));
    sup = std::max(sup, sup_err(orb, p.n / (rho * rho)));
    sup = std::max(sup, sup_err(cf.R, p.n * (p.n + 1) / (rho * rho)));
    if (k > 0) CHECK(std::log2(prev / sup) > 1.7);
    prev = sup;
    ++k;
  }
}

TEST_CASE("degenerate interior psi raises") {
  Profile p = sphere(64);
  p.psi[32] = 1e-31;
  CHECK_THROWS_AS(sectional(p), DegenerateProfile);
}

TEST_CASE("parallel and serial curvature kernels agree bitwise") {
  const Profile p = warped_sphere(801);
  const CurvatureField a = sectional(p);
  const CurvatureField b = sectional_serial(p);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(a.lambda[i] == b.lambda[i]);
    CHECK(a.mu[i] == b.mu[i]);
    CHECK(a.R[i] == b.R[i]);
    CHECK(a.rho[i] == b.rho[i]);
  }
}
