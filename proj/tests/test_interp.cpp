#include <doctest.h>

#include <cmath>
#include <vector>

#include "ricci/interp.hpp"

using namespace ricci;

TEST_CASE("pchip reproduces knots and preserves monotone data") {
  std::vector<double> x, y;
  for (int i = 0; i <= 20; ++i) {
    x.push_back(0.1 * i);
    y.push_back(std::tanh(x.back()));
  }
  Pchip p(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(p(x[i]) == doctest::Approx(y[i]).epsilon(1e-15));
  double prev = p(0.0);
  for (double q = 0.0; q <= 2.0; q += 0.003) {
    const double v = p(q);
    CHECK(v >= prev - 1e-14);
    prev = v;
  }
}

TEST_CASE("cubic spline derivatives converge on smooth data") {
  std::vector<double> x, y;
  for (int i = 0; i <= 200; ++i) {
    x.push_back(i / 200.0 * 3.0);
    y.push_back(std::sin(x.back()));
  }
  CubicSpline s(x, y);
  for (double q = 0.5; q <= 2.5; q += 0.1) {
    CHECK(s(q) == doctest::Approx(std::sin(q)).epsilon(1e-7));
    CHECK(s.derivative(q) == doctest::Approx(std::cos(q)).epsilon(1e-4));
    CHECK(s.derivative2(q) == doctest::Approx(-std::sin(q)).epsilon(1e-2));
  }
}

TEST_CASE("fornberg weights match the classical uniform stencils") {
  const std::vector<double> x = {-2, -1, 0, 1, 2};
  std::vector<std::vector<double>> w;
  fornberg_weights(0.0, x, 2, w);
  const double d1[5] = {1.0 / 12, -8.0 / 12, 0, 8.0 / 12, -1.0 / 12};
  const double d2[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
  for (int j = 0; j < 5; ++j) {
    CHECK(w[1][j] == doctest::Approx(d1[j]).epsilon(1e-13));
    CHECK(w[2][j] == doctest::Approx(d2[j]).epsilon(1e-13));
  }
}

TEST_CASE("quintic hermite matches its endpoint data") {
  Quintic q{1.0, 3.0, 2.0, -0.5, 0.25, 0.1, -1.0, -0.75};
  CHECK(q.value(1.0) == doctest::Approx(2.0));
  CHECK(q.deriv(1.0) == doctest::Approx(-0.5));
  CHECK(q.deriv2(1.0) == doctest::Approx(0.25));
  CHECK(q.value(3.0) == doctest::Approx(0.1));
  CHECK(q.deriv(3.0) == doctest::Approx(-1.0));
  CHECK(q.deriv2(3.0) == doctest::Approx(-0.75));
}

TEST_CASE("cumtrapz on a linear integrand is exact") {
  std::vector<double> x, y;
  for (int i = 0; i <= 10; ++i) {
    x.push_back(0.5 * i);
    y.push_back(3.0 * x.back() + 1.0);
  }
  const auto s = cumtrapz(x, y);
  CHECK(s.front() == 0.0);
  CHECK(s.back() == doctest::Approx(1.5 * 25.0 + 5.0).epsilon(1e-14));
}

TEST_CASE("quadratic extrapolation is exact on parabolas") {
  const double xs[3] = {1.0, 2.0, 3.5};
  auto f = [](double x) { return 2.0 - 0.5 * x + 0.25 * x * x; };
  const double ys[3] = {f(xs[0]), f(xs[1]), f(xs[2])};
  CHECK(quad_extrapolate(xs, ys, 0.0) == doctest::Approx(f(0.0)).epsilon(1e-13));
}
