#pragma once

#include <vector>

#include "ricci/profile.hpp"

namespace ricci {

// 5-point finite-difference operators in the coordinate x, with ghost
// continuation past the ends: odd/even mirror at poles, wraparound for
// periodic grids, one-sided at an open Disk edge.  Weights depend only on
// the x grid, so one StencilSet serves every field on that grid.
class StencilSet {
 public:
  explicit StencilSet(const Profile& p);

  // f has profile length; parity: -1 odd mirror (psi), +1 even mirror (phi).
  // Fills d1 = f_x and optionally d2 = f_xx at every node.
  void apply(const std::vector<double>& f, int parity, std::vector<double>* d1,
             std::vector<double>* d2) const;

  std::size_t size() const { return n_; }

 private:
  static constexpr int kWidth = 5;
  static constexpr int kGhost = 2;
  struct NodeStencil {
    int base;                  // extended-array index of first stencil node
    double w1[kWidth];
    double w2[kWidth];
  };
  std::size_t n_ = 0;
  OrbitTopology topology_ = OrbitTopology::ClosedSphere;
  double period_ = 0;
  std::vector<NodeStencil> nodes_;
  // Extended grid bookkeeping: ext index -> (source index, sign flip slot).
  struct GhostMap {
    int src;
    bool mirror;               // true: value comes from mirrored node
  };
  std::vector<GhostMap> ext_;
  mutable std::vector<double> scratch_;
};

}  // namespace ricci
