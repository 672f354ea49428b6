#include "ricci/surgery.hpp"

#include <algorithm>
#include <cmath>

#include "ricci/errors.hpp"
#include "ricci/interp.hpp"
#include "ricci/monitors.hpp"
#include "ricci/stencil.hpp"

namespace ricci {

void SurgeryParams::check() const {
  if (!(r > 0) || !(r <= 1)) throw InvalidSpec("surgery: r must be in (0, 1]");
  if (!(delta > 0)) throw InvalidSpec("surgery: delta must be positive");
  const double hh = h_eff();
  if (!(hh > 0) || !(hh <= delta)) throw InvalidSpec("surgery: need 0 < h <= delta");
  if (cap.r.empty()) throw InvalidSpec("surgery: cap table not built");
}

// ---------------- cap construction ----------------

double CapTable::eta_hat(double rr) const {
  if (rr <= 0) return 1.0;
  if (rr <= bridge_x0) return 1.0 - a_const * std::exp(-b_const / rr);
  if (rr <= bridge_x1) {
    const double t = rr - bridge_x0;
    return bridge_v0 + t * (zc[0] + t * (zc[1] / 2 + t * (zc[2] / 3 + t * zc[3] / 4)));
  }
  const double sk = std::sqrt(k);
  return std::sin(sk * (D - rr)) / sk;
}

double CapTable::eta_p(double rr) const {
  if (rr <= 0) return 0.0;
  if (rr <= bridge_x0) {
    const double e = a_const * std::exp(-b_const / rr);
    return -e * b_const / (rr * rr);
  }
  if (rr <= bridge_x1) {
    const double t = rr - bridge_x0;
    return zc[0] + t * (zc[1] + t * (zc[2] + t * zc[3]));
  }
  return -std::cos(std::sqrt(k) * (D - rr));
}

double CapTable::eta_pp(double rr) const {
  if (rr <= 0) return 0.0;
  if (rr <= bridge_x0) {
    const double e = a_const * std::exp(-b_const / rr);
    return -e * (b_const * b_const / (rr * rr * rr * rr) - 2.0 * b_const / (rr * rr * rr));
  }
  if (rr <= bridge_x1) {
    const double t = rr - bridge_x0;
    return zc[1] + t * (2 * zc[2] + 3 * t * zc[3]);
  }
  return -k * eta_hat(rr);
}

CapTable build_cap_table(int n, int grid_size) {
  if (n < 2) throw InvalidSpec("cap: n must be >= 2");
  if (grid_size < 64) throw InvalidSpec("cap: grid too small");
  CapTable c;
  c.n = n;
  c.b_const = 100.0 * n;
  c.a_const = 1.0 / (c.b_const * c.b_const);
  c.k = 0.25 * M_PI * M_PI;
  c.bridge_x0 = 0.125;

  const double sk = std::sqrt(c.k);
  const double v1 = std::sin(sk * 0.125) / sk;  // values at the sine joint
  const double d1 = -std::cos(sk * 0.125);
  const double c1 = -c.k * v1;
  const double e0 = c.a_const * std::exp(-c.b_const / c.bridge_x0);
  const double v0 = 1.0 - e0;
  const double A = -e0 * c.b_const / (c.bridge_x0 * c.bridge_x0);
  const double B = -e0 * (std::pow(c.b_const / (c.bridge_x0 * c.bridge_x0), 2) -
                          2.0 * c.b_const / std::pow(c.bridge_x0, 3));

  // eta' on the bridge is the cubic Hermite (A, B) -> (d1, c1); the bridge
  // length is fixed by requiring the total drop to reach the sine joint.
  auto bridge_coeffs = [&](double L, double zc[4]) {
    const double P = d1 - A - B * L;
    const double Q = c1 - B;
    zc[0] = A;
    zc[1] = B;
    zc[2] = (3 * P - Q * L) / (L * L);
    zc[3] = (Q * L - 2 * P) / (L * L * L);
  };
  auto drop = [&](double L) {
    double zc[4];
    bridge_coeffs(L, zc);
    return L * (zc[0] + L * (zc[1] / 2 + L * (zc[2] / 3 + L * zc[3] / 4)));
  };
  double lo = 0.05, hi = 8.0;
  const double target = v1 - v0;
  if (!(drop(lo) > target && drop(hi) < target))
    throw CapConstructionFailed("cap: no bridge length bracket");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (drop(mid) > target) lo = mid;
    else hi = mid;
  }
  const double L = 0.5 * (lo + hi);
  bridge_coeffs(L, c.zc);
  c.bridge_v0 = v0;
  c.bridge_x1 = c.bridge_x0 + L;
  c.D = c.bridge_x1 + 0.125;
  if (!(c.D > 5.0 / 8.0)) throw CapConstructionFailed("cap: D <= 5/8");

  c.r.resize(grid_size);
  c.eta.resize(grid_size);
  for (int i = 0; i < grid_size; ++i) {
    c.r[i] = -c.r_left + (c.D + c.r_left) * i / (grid_size - 1);
    c.eta[i] = c.eta_hat(c.r[i]);
  }
  if (std::abs(c.eta_hat(c.D)) > 1e-14 || std::abs(c.eta_p(c.D) + 1.0) > 1e-12)
    throw CapConstructionFailed("cap: tip closure violated");
  for (int i = 0; i < 4096; ++i) {
    const double rr = c.D * (i + 0.5) / 4096.0;
    const double e = c.eta_hat(rr), ep = c.eta_p(rr), epp = c.eta_pp(rr);
    if (!(e > 0) || e > 1.0)
      throw CapConstructionFailed("cap: eta out of (0,1] at r=" + std::to_string(rr));
    if (ep > 1e-15 || ep <= -1.0)
      throw CapConstructionFailed("cap: eta' out of (-1,0] at r=" + std::to_string(rr));
    // Strict signs are only representable once e^{-b/r} stops underflowing.
    if (rr > 0.3 && rr < c.D - 1e-6 && !(ep < 0))
      throw CapConstructionFailed("cap: eta' not strictly negative at r=" + std::to_string(rr));
    if (epp > 1e-12)
      throw CapConstructionFailed("cap: eta'' positive at r=" + std::to_string(rr));
    if (rr > 0.3 && rr < c.D - 1e-6 && !(epp < 0))
      throw CapConstructionFailed("cap: eta'' not strictly negative at r=" + std::to_string(rr));
  }
  for (double rr = c.D - 0.125; rr <= c.D; rr += 0.125 / 64) {
    const double want = std::sin(sk * (c.D - rr)) / sk;
    if (std::abs(c.eta_hat(rr) - want) > 1e-8)
      throw CapConstructionFailed("cap: sine tail mismatch");
  }
  return c;
}

// ---------------- neck quality ----------------

namespace {

struct NeckContext {
  std::vector<double> s, psi_s, psi_ss;
};

NeckContext neck_context(const Profile& p) {
  NeckContext ctx;
  ctx.s = arclength(p);
  StencilSet st(p);
  std::vector<double> d1, d2, phix;
  st.apply(p.psi, -1, &d1, &d2);
  st.apply(p.phi, +1, &phix, nullptr);
  ctx.psi_s.resize(p.size());
  ctx.psi_ss.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double phi = p.phi[i];
    ctx.psi_s[i] = d1[i] / phi;
    ctx.psi_ss[i] = (d2[i] - d1[i] * phix[i] / phi) / (phi * phi);
  }
  return ctx;
}

double neck_quality_ctx(const Profile& p, const NeckContext& ctx, std::size_t i,
                        double window) {
  const double psi_c = p.psi[i];
  if (!(psi_c > 0)) throw WindowOutOfRange("neck_quality: centered at a pole");
  const double half = window * psi_c;
  const double lo = ctx.s[i] - half, hi = ctx.s[i] + half;
  if (lo < ctx.s.front() || hi > ctx.s.back())
    throw WindowOutOfRange("neck_quality: window exceeds the component");
  double score = 0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (ctx.s[j] < lo || ctx.s[j] > hi) continue;
    score = std::max({score, std::abs(p.psi[j] / psi_c - 1.0), std::abs(ctx.psi_s[j]),
                      std::abs(psi_c * ctx.psi_ss[j])});
  }
  return score;
}

}  // namespace

double neck_quality(const Profile& p, std::size_t i, double window) {
  const NeckContext ctx = neck_context(p);
  return neck_quality_ctx(p, ctx, i, window);
}

// ---------------- horns & cuts ----------------

std::vector<Horn> find_horns(const Profile& p, const CurvatureField& cf,
                             const SurgeryParams& params) {
  const double thr = params.horn_threshold();
  const std::size_t N = p.size();
  std::vector<Horn> horns;
  std::size_t i = 0;
  while (i < N) {
    if (cf.R[i] < thr) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < N && cf.R[j + 1] >= thr) ++j;
    if (i > 0) horns.push_back({i, j, +1});
    if (j + 1 < N) horns.push_back({i, j, -1});
    i = j + 1;
  }
  return horns;
}

CutRecord select_cut(const Profile& p, const CurvatureField& cf, const Horn& horn,
                     const SurgeryParams& params) {
  const double target = params.cut_level();
  const NeckContext ctx = neck_context(p);

  // A horn is walked from its low-curvature entrance toward the deepest
  // point; an island shares its run between two horns, split at the R-argmax.
  std::size_t amax = horn.lo;
  for (std::size_t i = horn.lo; i <= horn.hi; ++i)
    if (cf.R[i] > cf.R[amax]) amax = i;
  const std::size_t lo = horn.side > 0 ? horn.lo : amax;
  const std::size_t hi = horn.side > 0 ? amax : horn.hi;

  // The R-band widens until the whole horn is eligible.
  double span = 0;
  for (std::size_t i = lo; i <= hi; ++i)
    span = std::max(span, std::abs(std::log(cf.R[i] / target)));
  std::vector<double> widen_ladder;
  for (double wdn = 1.5;; wdn *= 2) {
    widen_ladder.push_back(wdn);
    if (std::log(wdn) >= span) break;
  }

  double best_score = kMarginSentinel;
  for (double window = 1.0 / params.delta; window >= params.min_window * (1 - 1e-12);
       window /= 2) {
    for (double relax = 1.0; relax <= params.score_relax_max * (1 + 1e-12); relax *= 2) {
      const double threshold = relax * params.delta;
      for (double widen : widen_ladder) {
        std::vector<std::pair<double, std::size_t>> cand;  // (|log(R/target)|, node)
        for (std::size_t i = lo; i <= hi; ++i) {
          const double key = std::abs(std::log(cf.R[i] / target));
          if (key <= std::log(widen)) cand.emplace_back(key, i);
        }
        if (cand.empty()) continue;
        std::sort(cand.begin(), cand.end());
        // Within a tie group try the median node first (exact-level plateaus).
        std::vector<std::size_t> order;
        std::size_t g = 0;
        while (g < cand.size()) {
          std::size_t ge = g;
          while (ge + 1 < cand.size() && cand[ge + 1].first <= cand[g].first + 1e-12) ++ge;
          std::vector<std::size_t> group;
          for (std::size_t q = g; q <= ge; ++q) group.push_back(cand[q].second);
          std::sort(group.begin(), group.end());
          const std::size_t med = group[group.size() / 2];
          order.push_back(med);
          for (std::size_t v : group)
            if (v != med) order.push_back(v);
          g = ge + 1;
        }
        for (std::size_t i : order) {
          double score;
          try {
            score = neck_quality_ctx(p, ctx, i, window);
          } catch (const WindowOutOfRange&) {
            continue;
          }
          best_score = std::min(best_score, score);
          if (score < threshold) {
            CutRecord rec;
            rec.node = static_cast<long>(i);
            rec.side = horn.side;
            rec.s_pos = ctx.s[i];
            rec.psi_cut = p.psi[i];
            rec.R_at_cut = cf.R[i];
            rec.neck_score = score;
            rec.widen_factor = widen;
            rec.cut_scale_hr = params.h_eff() * params.r;
            rec.window_used = window;
            rec.threshold_used = threshold;
            return rec;
          }
        }
      }
    }
  }
  throw NoNeckFound("select_cut: no delta-neck in horn (best score " +
                    std::to_string(best_score) + "); run under-resolved");
}

// ---------------- gluing ----------------

namespace {

// Open-window 5-point derivatives, for the check tables.
void open_derivs(const std::vector<double>& s, const std::vector<double>& f,
                 std::vector<double>* d1, std::vector<double>* d2) {
  const int N = static_cast<int>(s.size());
  d1->resize(N);
  d2->resize(N);
  std::vector<std::vector<double>> w;
  for (int i = 0; i < N; ++i) {
    const int base = std::clamp(i - 2, 0, N - 5);
    std::vector<double> xs(s.begin() + base, s.begin() + base + 5);
    fornberg_weights(s[i], xs, 2, w);
    double a = 0, b = 0;
    for (int j = 0; j < 5; ++j) {
      a += w[1][j] * f[base + j];
      b += w[2][j] * f[base + j];
    }
    (*d1)[i] = a;
    (*d2)[i] = b;
  }
}

// phi_1 of the partition of unity subordinate to (-inf,1/2) u (1/4,inf).
double blend_phi1(double r) { return 1.0 - smoothstep5((r - 0.25) * 4.0); }

struct Segment {
  std::vector<double> s, psi;  // arclength gauge
};

Segment flip_segment(const Segment& g) {
  Segment out;
  const double sr = g.s.back();
  out.s.resize(g.s.size());
  out.psi.resize(g.s.size());
  for (std::size_t i = 0; i < g.s.size(); ++i) {
    const std::size_t j = g.s.size() - 1 - i;
    out.s[i] = sr - g.s[j];
    out.psi[i] = g.psi[j];
  }
  return out;
}

// Core of the surgery: replace everything past `cut` with the blended cap.
Segment glue_right(const Segment& g, std::size_t cut, const CapTable& cap, int n,
                   double tol_cap, CapCheck* check) {
  if (cut < 1 || cut + 1 >= g.s.size())
    throw InvalidSpec("glue_cap: cut at a boundary node");
  const double sc = g.s[cut];
  const double sigma = g.psi[cut];
  if (!(sigma > 0)) throw InvalidSpec("glue_cap: zero radius at cut");
  if (sc + 0.55 * sigma > g.s.back())
    throw CapConditionViolated("glue_cap: horn too short for the blend region");
  Pchip psi_of_s(g.s, g.psi);

  auto glued_psi = [&](double rr) {  // rr in cap units
    if (rr <= 0) return psi_of_s(sc + sigma * rr);
    const double f1 = blend_phi1(rr);
    const double base = rr < 0.5 ? f1 * psi_of_s(sc + sigma * rr) / sigma + (1.0 - f1) : 1.0;
    return base * cap.eta_hat(rr) * sigma;
  };

  Segment out;
  for (std::size_t i = 0; i <= cut; ++i) {
    out.s.push_back(g.s[i]);
    out.psi.push_back(g.psi[i]);
  }
  const double ds_cap = (cap.D + cap.r_left) / (cap.r.size() - 1);
  for (double rr = ds_cap; rr < cap.D; rr += ds_cap) {
    out.s.push_back(sc + sigma * rr);
    out.psi.push_back(std::max(glued_psi(rr), kPsiFloor));
  }
  out.s.push_back(sc + sigma * cap.D);
  out.psi.push_back(0.0);

  // Lemma-style verification in cap units across the blend, closed forms on
  // the pure cap.
  CapCheck cc;
  cc.min_krad_gain = kMarginSentinel;
  cc.min_R_gain = kMarginSentinel;
  cc.min_korb_inner = kMarginSentinel;
  cc.sigma_est = kMarginSentinel;
  {
    std::vector<double> rs, old_psi, new_psi;
    for (double rr = -0.5; rr <= 0.5 + 1e-9; rr += 0.01) {
      rs.push_back(rr);
      old_psi.push_back(psi_of_s(sc + sigma * rr) / sigma);
      new_psi.push_back(glued_psi(rr) / sigma);
    }
    std::vector<double> od1, od2, nd1, nd2;
    open_derivs(rs, old_psi, &od1, &od2);
    open_derivs(rs, new_psi, &nd1, &nd2);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      const double rr = rs[i];
      if (rr < 0) continue;
      const double Ko = -od2[i] / old_psi[i];
      const double Oo = (1.0 - od1[i] * od1[i]) / (old_psi[i] * old_psi[i]);
      const double Kn = -nd2[i] / new_psi[i];
      const double On = (1.0 - nd1[i] * nd1[i]) / (new_psi[i] * new_psi[i]);
      const double Ro = 2.0 * n * Ko + n * (n - 1.0) * Oo;
      const double Rn = 2.0 * n * Kn + n * (n - 1.0) * On;
      if (rr <= 0.25 + 1e-9) {
        cc.min_krad_gain = std::min(cc.min_krad_gain, Kn - Ko);
        cc.min_R_gain = std::min(cc.min_R_gain, Rn - Ro);
        cc.min_korb_inner = std::min(cc.min_korb_inner, On);
      } else {
        cc.sigma_est = std::min({cc.sigma_est, Kn, On});
      }
    }
  }
  for (double rr = 0.5; rr < cap.D - 1e-6; rr += 0.005) {
    const double e = cap.eta_hat(rr);
    const double Kn = -cap.eta_pp(rr) / e;
    const double On = (1.0 - cap.eta_p(rr) * cap.eta_p(rr)) / (e * e);
    cc.sigma_est = std::min({cc.sigma_est, Kn, On});
  }
  if (cc.min_krad_gain < -tol_cap)
    throw CapConditionViolated("glue_cap: K_rad gain " + std::to_string(cc.min_krad_gain) +
                               " on the blend region");
  if (cc.min_R_gain < -tol_cap)
    throw CapConditionViolated("glue_cap: R gain " + std::to_string(cc.min_R_gain) +
                               " on the blend region");
  if (!(cc.min_korb_inner > 0))
    throw CapConditionViolated("glue_cap: K_orb nonpositive on the blend");
  if (!(cc.sigma_est > 0))
    throw CapConditionViolated("glue_cap: cap curvature not positive beyond 1/4");
  const std::size_t m = out.s.size();
  cc.pole_slope = out.psi[m - 2] / (out.s[m - 1] - out.s[m - 2]);
  if (check) *check = cc;
  return out;
}

Segment segment_of(const Profile& p) {
  Segment g;
  g.s = arclength(p);
  g.psi = p.psi;
  return g;
}

Profile profile_of(const Segment& g, const Profile& like, bool left_pole, bool right_pole) {
  Profile q;
  q.n = like.n;
  q.t = like.t;
  q.topology = (left_pole && right_pole) ? OrbitTopology::ClosedSphere : OrbitTopology::Disk;
  q.x = g.s;
  q.phi.assign(g.s.size(), 1.0);
  q.psi = g.psi;
  if (left_pole) q.psi.front() = 0;
  if (right_pole) q.psi.back() = 0;
  return q;
}

}  // namespace

Profile glue_cap(const Profile& p, std::size_t cut_node, int side, const CapTable& cap,
                 double tol_cap, CapCheck* check) {
  Segment g = segment_of(p);
  if (side >= 0) {
    const Segment out = glue_right(g, cut_node, cap, p.n, tol_cap, check);
    return profile_of(out, p, p.has_left_pole(), true);
  }
  const Segment fl = flip_segment(g);
  const Segment out = glue_right(fl, p.size() - 1 - cut_node, cap, p.n, tol_cap, check);
  return profile_of(flip_segment(out), p, true, p.has_right_pole());
}

// ---------------- component surgery ----------------

ComponentSurgery surger_component(const Profile& p, const SurgeryParams& params,
                                  int child_nodes) {
  params.check();
  ComponentSurgery out;
  const CurvatureField cf = sectional(p);
  const double thr = params.horn_threshold();
  out.max_psi_before = *std::max_element(p.psi.begin(), p.psi.end());
  out.bumps_before = bump_count(p);

  double Rmin = kMarginSentinel, Rmax = -kMarginSentinel;
  for (double v : cf.R) {
    Rmin = std::min(Rmin, v);
    Rmax = std::max(Rmax, v);
  }
  if (Rmin >= thr) {
    out.whole_component_discarded = true;
    out.discarded.push_back({0, static_cast<long>(p.size()) - 1, out.max_psi_before, Rmin,
                             "component entirely above (delta r)^-2"});
    return out;
  }
  if (Rmax < thr) return out;  // nothing to cut

  const auto horns = find_horns(p, cf, params);
  for (const Horn& h : horns) out.cuts.push_back(select_cut(p, cf, h, params));
  std::sort(out.cuts.begin(), out.cuts.end(),
            [](const CutRecord& a, const CutRecord& b) { return a.node < b.node; });

  const auto s = arclength(p);
  std::vector<long> bounds;
  bounds.push_back(0);
  for (const auto& c : out.cuts) bounds.push_back(c.node);
  bounds.push_back(static_cast<long>(p.size()) - 1);

  for (std::size_t seg = 0; seg + 1 < bounds.size(); ++seg) {
    const long a = bounds[seg], b = bounds[seg + 1];
    if (b <= a) continue;
    bool meets_low = false;
    for (long i = a; i <= b; ++i)
      if (cf.R[i] < thr) meets_low = true;
    if (!meets_low) {
      double mp = 0, mr = kMarginSentinel;
      for (long i = a; i <= b; ++i) {
        mp = std::max(mp, p.psi[i]);
        mr = std::min(mr, cf.R[i]);
      }
      out.discarded.push_back({a, b, mp, mr, "piece misses the low-curvature set"});
      continue;
    }
    const bool left_is_cut = seg > 0;
    const bool right_is_cut = seg + 2 < bounds.size();
    // Keep extra nodes past each cut so the blend region has data.
    long lo = a, hi = b;
    if (left_is_cut)
      while (lo > 0 && s[lo] > s[a] - 0.6 * p.psi[a]) --lo;
    if (right_is_cut)
      while (hi + 1 < static_cast<long>(p.size()) && s[hi] < s[b] + 0.6 * p.psi[b]) ++hi;
    Segment g;
    g.s.assign(s.begin() + lo, s.begin() + hi + 1);
    g.psi.assign(p.psi.begin() + lo, p.psi.begin() + hi + 1);

    if (right_is_cut) {
      CapCheck cc;
      g = glue_right(g, static_cast<std::size_t>(b - lo), params.cap, p.n, params.tol_cap,
                     &cc);
      out.cap_checks.push_back(cc);
    }
    if (left_is_cut) {
      CapCheck cc;
      Segment fl = flip_segment(g);
      fl = glue_right(fl, g.s.size() - 1 - static_cast<std::size_t>(a - lo), params.cap, p.n,
                      params.tol_cap, &cc);
      g = flip_segment(fl);
      out.cap_checks.push_back(cc);
    }
    Profile child = profile_of(g, p, true, true);
    child = regrid(child, child_nodes);
    validate(child);
    out.children.push_back(std::move(child));
  }
  for (const Profile& ch : out.children) {
    out.max_psi_after =
        std::max(out.max_psi_after, *std::max_element(ch.psi.begin(), ch.psi.end()));
    out.bumps_after += bump_count(ch);
  }
  return out;
}

}  // namespace ricci
