#include "ricci/stencil.hpp"

#include <algorithm>

#include "ricci/errors.hpp"
#include "ricci/interp.hpp"

namespace ricci {

StencilSet::StencilSet(const Profile& p)
    : n_(p.size()), topology_(p.topology), period_(p.period) {
  if (n_ < 8) throw InvalidSpec("stencil: grid too small");
  const auto& x = p.x;
  const bool periodic = topology_ == OrbitTopology::PeriodicCylinder;
  const bool right_pole = p.has_right_pole();

  // Extended coordinate array with ghost positions.
  std::vector<double> xe;
  xe.reserve(n_ + 2 * kGhost);
  ext_.clear();
  if (periodic) {
    for (int k = kGhost; k >= 1; --k) {
      xe.push_back(x[n_ - 1 - (k - 1)] - period_);
      ext_.push_back({static_cast<int>(n_) - 1 - (k - 1), false});
    }
  } else {
    for (int k = kGhost; k >= 1; --k) {
      xe.push_back(2 * x[0] - x[k]);
      ext_.push_back({k, true});
    }
  }
  for (std::size_t i = 0; i < n_; ++i) {
    xe.push_back(x[i]);
    ext_.push_back({static_cast<int>(i), false});
  }
  if (periodic) {
    for (int k = 0; k < kGhost; ++k) {
      xe.push_back(x[k] + period_);
      ext_.push_back({k, false});
    }
  } else if (right_pole) {
    for (int k = 1; k <= kGhost; ++k) {
      xe.push_back(2 * x[n_ - 1] - x[n_ - 1 - k]);
      ext_.push_back({static_cast<int>(n_) - 1 - k, true});
    }
  }
  // Disk: no right ghosts, one-sided stencils near the open edge.

  const int ext_n = static_cast<int>(xe.size());
  nodes_.resize(n_);
  std::vector<std::vector<double>> w;
  std::vector<double> xs(kWidth);
  for (std::size_t i = 0; i < n_; ++i) {
    int base = static_cast<int>(i) + kGhost - kWidth / 2;
    base = std::clamp(base, 0, ext_n - kWidth);
    for (int j = 0; j < kWidth; ++j) xs[j] = xe[base + j];
    fornberg_weights(x[i], xs, 2, w);
    NodeStencil& st = nodes_[i];
    st.base = base;
    for (int j = 0; j < kWidth; ++j) {
      st.w1[j] = w[1][j];
      st.w2[j] = w[2][j];
    }
  }
  scratch_.resize(xe.size());
}

void StencilSet::apply(const std::vector<double>& f, int parity, std::vector<double>* d1,
                       std::vector<double>* d2) const {
  const bool periodic = topology_ == OrbitTopology::PeriodicCylinder;
  const double fl = f.front(), fr = f.back();
  for (std::size_t e = 0; e < ext_.size(); ++e) {
    const GhostMap& g = ext_[e];
    double v = f[g.src];
    if (g.mirror && parity < 0) {
      // Odd reflection about the pole value (left ghosts mirror about f[0]).
      const double pivot = (e < static_cast<std::size_t>(kGhost) || periodic) ? fl : fr;
      v = 2 * pivot - v;
    }
    scratch_[e] = v;
  }
  if (d1) d1->resize(n_);
  if (d2) d2->resize(n_);
  const double* s = scratch_.data();
#pragma omp parallel for schedule(static) if (n_ > 4096)
  for (long i = 0; i < static_cast<long>(n_); ++i) {
    const NodeStencil& st = nodes_[i];
    const double* v = s + st.base;
    if (d1) {
      double a = 0;
      for (int j = 0; j < kWidth; ++j) a += st.w1[j] * v[j];
      (*d1)[i] = a;
    }
    if (d2) {
      double a = 0;
      for (int j = 0; j < kWidth; ++j) a += st.w2[j] * v[j];
      (*d2)[i] = a;
    }
  }
}

}  // namespace ricci
