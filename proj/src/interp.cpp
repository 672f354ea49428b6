#include "ricci/interp.hpp"

#include <algorithm>
#include <cmath>

#include "ricci/errors.hpp"

namespace ricci {

Pchip::Pchip(std::span<const double> x, std::span<const double> y)
    : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw InvalidSpec("pchip: need >= 2 knots");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(x_[i + 1] > x_[i])) throw InvalidSpec("pchip: knots not increasing");

  d_.assign(n, 0.0);
  std::vector<double> h(n - 1), del(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    del[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  if (n == 2) {
    d_[0] = d_[1] = del[0];
    return;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (del[i - 1] * del[i] <= 0) {
      d_[i] = 0;
    } else {
      const double w1 = 2 * h[i] + h[i - 1];
      const double w2 = h[i] + 2 * h[i - 1];
      d_[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
    }
  }
  auto end_slope = [](double h1, double h2, double del1, double del2) {
    double d = ((2 * h1 + h2) * del1 - h1 * del2) / (h1 + h2);
    if (d * del1 <= 0)
      d = 0;
    else if (del1 * del2 < 0 && std::abs(d) > 3 * std::abs(del1))
      d = 3 * del1;
    return d;
  };
  d_[0] = end_slope(h[0], h[1], del[0], del[1]);
  d_[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
}

std::size_t Pchip::segment(double xq) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), xq);
  std::size_t i = (it == x_.begin()) ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  if (i > x_.size() - 2) i = x_.size() - 2;
  return i;
}

double Pchip::operator()(double xq) const {
  const std::size_t i = segment(xq);
  const double h = x_[i + 1] - x_[i];
  const double t = (xq - x_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

double Pchip::derivative(double xq) const {
  const std::size_t i = segment(xq);
  const double h = x_[i + 1] - x_[i];
  const double t = (xq - x_[i]) / h;
  const double t2 = t * t;
  const double g00 = (6 * t2 - 6 * t) / h;
  const double g10 = 3 * t2 - 4 * t + 1;
  const double g01 = (-6 * t2 + 6 * t) / h;
  const double g11 = 3 * t2 - 2 * t;
  return g00 * y_[i] + g10 * d_[i] + g01 * y_[i + 1] + g11 * d_[i + 1];
}

CubicSpline::CubicSpline(std::span<const double> x, std::span<const double> y)
    : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
  const std::size_t n = x_.size();
  if (n < 3 || y_.size() != n) throw InvalidSpec("spline: need >= 3 knots");
  m_.assign(n, 0.0);
  std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
  b[0] = 1;
  b[n - 1] = 1;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hl = x_[i] - x_[i - 1], hr = x_[i + 1] - x_[i];
    a[i] = hl / 6.0;
    b[i] = (hl + hr) / 3.0;
    c[i] = hr / 6.0;
    d[i] = (y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl;
  }
  // Thomas algorithm.
  for (std::size_t i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  m_[n - 1] = d[n - 1] / b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) m_[i] = (d[i] - c[i] * m_[i + 1]) / b[i];
}

std::size_t CubicSpline::segment(double xq) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), xq);
  std::size_t i = (it == x_.begin()) ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  if (i > x_.size() - 2) i = x_.size() - 2;
  return i;
}

double CubicSpline::operator()(double xq) const {
  const std::size_t i = segment(xq);
  const double h = x_[i + 1] - x_[i];
  const double A = (x_[i + 1] - xq) / h, B = (xq - x_[i]) / h;
  return A * y_[i] + B * y_[i + 1] +
         ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::derivative(double xq) const {
  const std::size_t i = segment(xq);
  const double h = x_[i + 1] - x_[i];
  const double A = (x_[i + 1] - xq) / h, B = (xq - x_[i]) / h;
  return (y_[i + 1] - y_[i]) / h +
         ((1 - 3 * A * A) * m_[i] + (3 * B * B - 1) * m_[i + 1]) * h / 6.0;
}

double CubicSpline::derivative2(double xq) const {
  const std::size_t i = segment(xq);
  const double h = x_[i + 1] - x_[i];
  const double A = (x_[i + 1] - xq) / h, B = (xq - x_[i]) / h;
  return A * m_[i] + B * m_[i + 1];
}

namespace {

// Basis values for the quintic Hermite at parameter t in [0,1]:
// p = v0 b0 + d0 L b1 + c0 L^2 b2 + v1 b3 + d1 L b4 + c1 L^2 b5.
void quintic_basis(double t, double b[6]) {
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  b[0] = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  b[1] = t - 6 * t3 + 8 * t4 - 3 * t5;
  b[2] = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
  b[3] = 10 * t3 - 15 * t4 + 6 * t5;
  b[4] = -4 * t3 + 7 * t4 - 3 * t5;
  b[5] = 0.5 * t3 - t4 + 0.5 * t5;
}

void quintic_basis_d1(double t, double b[6]) {
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
  b[0] = -30 * t2 + 60 * t3 - 30 * t4;
  b[1] = 1 - 18 * t2 + 32 * t3 - 15 * t4;
  b[2] = t - 4.5 * t2 + 6 * t3 - 2.5 * t4;
  b[3] = 30 * t2 - 60 * t3 + 30 * t4;
  b[4] = -12 * t2 + 28 * t3 - 15 * t4;
  b[5] = 1.5 * t2 - 4 * t3 + 2.5 * t4;
}

void quintic_basis_d2(double t, double b[6]) {
  const double t2 = t * t, t3 = t2 * t;
  b[0] = -60 * t + 180 * t2 - 120 * t3;
  b[1] = -36 * t + 96 * t2 - 60 * t3;
  b[2] = 1 - 9 * t + 18 * t2 - 10 * t3;
  b[3] = 60 * t - 180 * t2 + 120 * t3;
  b[4] = -24 * t + 84 * t2 - 60 * t3;
  b[5] = 3 * t - 12 * t2 + 10 * t3;
}

}  // namespace

double Quintic::value(double x) const {
  const double L = x1 - x0, t = (x - x0) / L;
  double b[6];
  quintic_basis(t, b);
  return v0 * b[0] + d0 * L * b[1] + c0 * L * L * b[2] + v1 * b[3] + d1 * L * b[4] +
         c1 * L * L * b[5];
}

double Quintic::deriv(double x) const {
  const double L = x1 - x0, t = (x - x0) / L;
  double b[6];
  quintic_basis_d1(t, b);
  return (v0 * b[0] + d0 * L * b[1] + c0 * L * L * b[2] + v1 * b[3] + d1 * L * b[4] +
          c1 * L * L * b[5]) /
         L;
}

double Quintic::deriv2(double x) const {
  const double L = x1 - x0, t = (x - x0) / L;
  double b[6];
  quintic_basis_d2(t, b);
  return (v0 * b[0] + d0 * L * b[1] + c0 * L * L * b[2] + v1 * b[3] + d1 * L * b[4] +
          c1 * L * L * b[5]) /
         (L * L);
}

// B. Fornberg, "Generation of finite difference formulas on arbitrarily
// spaced grids", Math. Comp. 51 (1988).
void fornberg_weights(double x0, std::span<const double> x, int m,
                      std::vector<std::vector<double>>& w) {
  const int n = static_cast<int>(x.size()) - 1;
  w.assign(m + 1, std::vector<double>(x.size(), 0.0));
  double c1 = 1.0;
  double c4 = x[0] - x0;
  w[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          w[k][i] = c1 * (k * w[k - 1][i - 1] - c5 * w[k][i - 1]) / c2;
        w[0][i] = -c1 * c5 * w[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k)
        w[k][j] = (c4 * w[k][j] - k * w[k - 1][j]) / c3;
      w[0][j] = c4 * w[0][j] / c3;
    }
    c1 = c2;
  }
}

std::vector<double> cumtrapz(std::span<const double> x, std::span<const double> y) {
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t i = 1; i < x.size(); ++i)
    out[i] = out[i - 1] + 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  return out;
}

double quad_extrapolate(const double x[3], const double y[3], double xq) {
  // Lagrange form.
  const double l0 = (xq - x[1]) * (xq - x[2]) / ((x[0] - x[1]) * (x[0] - x[2]));
  const double l1 = (xq - x[0]) * (xq - x[2]) / ((x[1] - x[0]) * (x[1] - x[2]));
  const double l2 = (xq - x[0]) * (xq - x[1]) / ((x[2] - x[0]) * (x[2] - x[1]));
  return y[0] * l0 + y[1] * l1 + y[2] * l2;
}

}  // namespace ricci
