#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "ricci/errors.hpp"
#include "ricci/io.hpp"
#include "ricci/monitors.hpp"
#include "ricci/profile.hpp"

using namespace ricci;

namespace {
InitialSpec sphere_spec(double rho0 = 1.0, int n = 2, int N = 401) {
  InitialSpec s;
  s.family = InitialSpec::Family::RoundSphere;
  s.rho0 = rho0;
  s.n = n;
  s.grid_size = N;
  return s;
}
InitialSpec cylinder_spec(double c = 1.0, double len = 10.0, int n = 2, int N = 401) {
  InitialSpec s;
  s.family = InitialSpec::Family::Cylinder;
  s.radius = c;
  s.length = len;
  s.n = n;
  s.grid_size = N;
  return s;
}
InitialSpec dumbbell_spec(double rl, double rr, double rn, double w, int n = 2, int N = 401) {
  InitialSpec s;
  s.family = InitialSpec::Family::Dumbbell;
  s.lobe_left = rl;
  s.lobe_right = rr;
  s.neck_radius = rn;
  s.neck_width = w;
  s.n = n;
  s.grid_size = N;
  return s;
}
}  // namespace

TEST_CASE("round sphere initial data is the exact sine chart") {
  const Profile p = build_initial(sphere_spec());
  CHECK(p.size() == 401);
  CHECK(p.psi.front() == 0.0);
  CHECK(p.psi.back() == 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(p.phi[i] == 1.0);
    CHECK(p.psi[i] == doctest::Approx(std::sin(p.x[i])).epsilon(1e-14));
  }
  CHECK(p.x.back() == doctest::Approx(M_PI));
}

TEST_CASE("cylinder initial data is flat and periodic") {
  const Profile p = build_initial(cylinder_spec());
  CHECK(p.topology == OrbitTopology::PeriodicCylinder);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(p.phi[i] == 1.0);
    CHECK(p.psi[i] == 1.0);
  }
}

TEST_CASE("dumbbell has exactly 2 bumps and 1 neck") {
  const Profile p = build_initial(dumbbell_spec(1, 1, 0.3, 1));
  const BumpInfo b = bump_structure(p, 1e-6);
  CHECK(b.bumps == 2);
  CHECK(b.necks == 1);
  // the neck bottoms out at the requested radius
  CHECK(p.psi[b.neck_nodes.front()] == doctest::Approx(0.3).epsilon(1e-3));
}

TEST_CASE("invalid initial specs are rejected") {
  CHECK_THROWS_AS(build_initial(sphere_spec(-1)), InvalidSpec);
  CHECK_THROWS_AS(build_initial(sphere_spec(1, 2, 8)), InvalidSpec);
  CHECK_THROWS_AS(build_initial(dumbbell_spec(1, 1, 1.5, 1)), InvalidSpec);
}

TEST_CASE("arclength is the cumulative trapezoid of phi") {
  Profile p = build_initial(sphere_spec());
  auto s = arclength(p);
  for (std::size_t i = 0; i < p.size(); ++i)
    CHECK(s[i] == doctest::Approx(p.x[i]).epsilon(1e-15));
  for (auto& v : p.phi) v = 2.0;
  s = arclength(p);
  for (std::size_t i = 0; i < p.size(); ++i)
    CHECK(s[i] == doctest::Approx(2 * p.x[i]).epsilon(1e-15));
}

TEST_CASE("arclength of phi = 1+x^2 matches the analytic integral") {
  Profile p;
  p.n = 2;
  p.topology = OrbitTopology::Disk;
  const int N = 401;
  for (int i = 0; i < N; ++i) {
    const double x = static_cast<double>(i) / (N - 1);
    p.x.push_back(x);
    p.phi.push_back(1 + x * x);
    p.psi.push_back(x);  // placeholder field
  }
  const auto s = arclength(p);
  CHECK(s.back() == doctest::Approx(4.0 / 3.0).epsilon(1e-5));
}

TEST_CASE("max orbit diameter") {
  CHECK(max_orbit_diameter(build_initial(sphere_spec())) == doctest::Approx(M_PI).epsilon(1e-6));
  CHECK(max_orbit_diameter(build_initial(cylinder_spec(2))) == doctest::Approx(2 * M_PI));
}

TEST_CASE("regrid reproduces the sphere and is exact on the cylinder") {
  const Profile p = build_initial(sphere_spec());
  const Profile q = regrid(p, 401);
  double sup = 0;
  for (std::size_t i = 0; i < q.size(); ++i)
    sup = std::max(sup, std::abs(q.psi[i] - std::sin(q.x[i])));
  CHECK(sup < 1e-6);

  const Profile c = build_initial(cylinder_spec());
  const Profile cq = regrid(c, 513);
  for (double v : cq.psi) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("regrid concentrates nodes at the neck") {
  const Profile p = build_initial(dumbbell_spec(1, 1, 0.05, 0.3, 2, 401));
  const Profile q = regrid(p, 801);
  const auto s = arclength(q);
  const double mean = (s.back() - s.front()) / (q.size() - 1);
  // min spacing near the neck bottom should be below half the mean spacing
  const BumpInfo b = bump_structure(q);
  REQUIRE(b.necks == 1);
  const std::size_t amin = b.neck_nodes.front();
  double local = 1e300;
  for (std::size_t i = amin - 3; i <= amin + 3; ++i) local = std::min(local, s[i + 1] - s[i]);
  CHECK(local < 0.5 * mean);
}

TEST_CASE("regrid preserves total length and is idempotent") {
  for (const Profile& p : {build_initial(sphere_spec()), build_initial(dumbbell_spec(1, 1, 0.3, 1))}) {
    const double c_mon = default_cmon(p);  // held fixed along a run
    const auto s0 = arclength(p);
    const Profile q = regrid(p, 401, c_mon);
    const auto s1 = arclength(q);
    CHECK(std::abs(s1.back() - s0.back()) / s0.back() < 1e-4);
    const Profile q2 = regrid(q, 401, c_mon);
    double sup = 0;
    for (std::size_t i = 0; i < q.size(); ++i)
      sup = std::max(sup, std::abs(q2.psi[i] - q.psi[i]));
    CHECK(sup < 1e-8);
  }
}

TEST_CASE("regrid rejects unresolvably small components") {
  Profile p = build_initial(sphere_spec(1.0, 2, 64));
  for (auto& v : p.psi) v *= 1e-3;  // max psi far below 10 * mean spacing
  CHECK_THROWS_AS(regrid(p, 64), DegenerateProfile);
}

TEST_CASE("profile validation catches pole defects") {
  Profile p = build_initial(sphere_spec());
  validate(p);
  Profile bad = p;
  for (auto& v : bad.psi) v *= 0.9;  // pole slope 0.9, outside tol 0.02
  CHECK_THROWS_AS(validate(bad), DegenerateProfile);
}

TEST_CASE("profile CSV round-trips bit-exactly") {
  Profile p = build_initial(dumbbell_spec(1, 0.8, 0.3, 1.2));
  p.t = 0.123456789012345678;
  const std::string dir = std::filesystem::temp_directory_path().string();
  const std::string path = dir + "/ricci_roundtrip_test.csv";
  write_profile_csv(path, p);
  const Profile q = read_profile_csv(path);
  REQUIRE(q.size() == p.size());
  CHECK(q.t == p.t);
  CHECK(q.n == p.n);
  CHECK(q.topology == p.topology);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(q.x[i] == p.x[i]);
    CHECK(q.phi[i] == p.phi[i]);
    CHECK(q.psi[i] == p.psi[i]);
  }
  std::filesystem::remove(path);
}
