#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ricci {

// Monotonicity-preserving cubic Hermite interpolant (Fritsch-Carlson slopes).
class Pchip {
 public:
  Pchip() = default;
  Pchip(std::span<const double> x, std::span<const double> y);

  double operator()(double xq) const;
  double derivative(double xq) const;
  const std::vector<double>& knots() const { return x_; }

 private:
  std::size_t segment(double xq) const;
  std::vector<double> x_, y_, d_;
};

// Natural cubic spline (C^2), for data needing smooth second derivatives.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::span<const double> x, std::span<const double> y);
  double operator()(double xq) const;
  double derivative(double xq) const;
  double derivative2(double xq) const;
  double xmin() const { return x_.front(); }
  double xmax() const { return x_.back(); }

 private:
  std::size_t segment(double xq) const;
  std::vector<double> x_, y_, m_;  // m = second derivatives at knots
};

// Quintic Hermite on [x0,x1] matching value, first and second derivative at
// both ends.
struct Quintic {
  double x0 = 0, x1 = 1;
  double v0 = 0, d0 = 0, c0 = 0;
  double v1 = 0, d1 = 0, c1 = 0;

  double value(double x) const;
  double deriv(double x) const;
  double deriv2(double x) const;
};

// C^2 transition 0 -> 1 on [0,1].
inline double smoothstep5(double t) {
  if (t <= 0) return 0;
  if (t >= 1) return 1;
  return t * t * t * (10 + t * (-15 + 6 * t));
}

inline double smoothstep5_deriv(double t) {
  if (t <= 0 || t >= 1) return 0;
  return 30 * t * t * (1 + t * (-2 + t));
}

// Fornberg finite-difference weights: weights w[k][j] so that
// sum_j w[k][j] f(x[j]) approximates f^(k)(x0), for k = 0..m.
// x need not be uniform or sorted around x0.
void fornberg_weights(double x0, std::span<const double> x, int m,
                      std::vector<std::vector<double>>& w);

// Cumulative trapezoid of y over x; out[0] = 0.
std::vector<double> cumtrapz(std::span<const double> x, std::span<const double> y);

// Quadratic extrapolation: fit a parabola through (x[i], y[i]), i = 0..2,
// evaluate at xq.
double quad_extrapolate(const double x[3], const double y[3], double xq);

}  // namespace ricci
