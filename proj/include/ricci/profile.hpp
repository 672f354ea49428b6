#pragma once

#include <string>
#include <vector>

namespace ricci {

enum class OrbitTopology { ClosedSphere, PeriodicCylinder, Disk };

std::string topology_name(OrbitTopology t);
OrbitTopology topology_from_name(const std::string& s);

// One rotationally invariant component at one time, as a discretized warped
// product g = phi^2 dx (x) dx + psi^2 g_{S^n} on the orbit interval.
// Value type: operations return new profiles, never mutate in place.
struct Profile {
  int n = 2;                      // fiber sphere dimension, >= 2
  OrbitTopology topology = OrbitTopology::ClosedSphere;
  std::vector<double> x;          // strictly increasing coordinate grid
  std::vector<double> phi;        // radial coefficient, > 0
  std::vector<double> psi;        // orbit radius, >= 0 (0 exactly at poles)
  double t = 0;                   // flow time
  double period = 0;              // coordinate period (PeriodicCylinder only)

  std::size_t size() const { return x.size(); }
  bool has_left_pole() const { return topology != OrbitTopology::PeriodicCylinder; }
  bool has_right_pole() const { return topology == OrbitTopology::ClosedSphere; }
};

struct InitialSpec {
  enum class Family { RoundSphere, Cylinder, Dumbbell, Custom };
  Family family = Family::RoundSphere;
  int n = 2;
  int grid_size = 401;
  // round_sphere
  double rho0 = 1.0;
  // cylinder
  double radius = 1.0;
  double length = 10.0;
  // dumbbell
  double lobe_left = 1.0;
  double lobe_right = 1.0;
  double neck_radius = 0.3;
  double neck_width = 1.0;
  // custom
  std::vector<double> cx, cphi, cpsi;
};

constexpr double kTolPole = 0.02;

Profile build_initial(const InitialSpec& spec);

// Cumulative arclength s(x) = int phi dx; s[0] = 0.
std::vector<double> arclength(const Profile& p);

// Resample onto an arclength-equidistributed grid weighted by the monitor
// function 1 + c_mon / rho.  c_mon < 0 selects 0.1 * (mean rho of p).
// The result is in arclength gauge (x = s, phi = 1).
Profile regrid(const Profile& p, int target_nodes, double c_mon = -1.0);

double max_orbit_diameter(const Profile& p);

// Throws (InvalidSpec / DegenerateProfile) when an invariant fails.
void validate(const Profile& p, double tol_pole = kTolPole);

// Default monitor coefficient for a profile: 0.1 * mean rho.
double default_cmon(const Profile& p);

// One-sided arclength derivative of psi at each pole (ghost-symmetric).
double pole_slope_left(const Profile& p);
double pole_slope_right(const Profile& p);

}  // namespace ricci
