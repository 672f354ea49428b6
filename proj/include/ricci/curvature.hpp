#pragma once

#include <utility>
#include <vector>

#include "ricci/profile.hpp"

namespace ricci {

// Pointwise curvature of a Profile.  lambda/mu are the two curvature
// operator eigenvalues (lambda = -2 psi_ss/psi, mu = 2(1-psi_s^2)/psi^2);
// K_rad/K_orb the sectional curvatures lambda/2, mu/2; rho the curvature
// scale (max sectional)^(-1/2) capped at kRhoCap.
struct CurvatureField {
  std::vector<double> lambda, mu, R, nu, K_rad, K_orb, rho, rho1;
  std::size_t size() const { return lambda.size(); }
};

constexpr double kRhoCap = 1e15;
constexpr double kPsiFloor = 1e-30;

CurvatureField sectional(const Profile& p);
CurvatureField sectional_serial(const Profile& p);  // reference implementation

// Eigenvalues of Ric(g): radial n*K_rad and orbital K_rad + (n-1)K_orb,
// evaluated from the coordinate-form expressions (x-derivatives of phi and
// psi), independent of sectional()'s arclength route.
std::pair<std::vector<double>, std::vector<double>> ricci_coefficients(const Profile& p);

// rho and rho1 = min(rho, 1).
std::pair<std::vector<double>, std::vector<double>> scale(const Profile& p);

double min_rho(const CurvatureField& cf);
double max_abs_sectional(const CurvatureField& cf);

}  // namespace ricci
