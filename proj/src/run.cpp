#include "ricci/run.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "ricci/barriers.hpp"
#include "ricci/curvature.hpp"
#include "ricci/errors.hpp"
#include "ricci/flowstate.hpp"
#include "ricci/interp.hpp"
#include "ricci/monitors.hpp"

namespace fs = std::filesystem;

namespace ricci {

namespace {

InitialSpec parse_initial(const Json& j) {
  InitialSpec s;
  const std::string fam = j.value("family", "round_sphere");
  s.n = j.value("n", 2);
  s.grid_size = j.value("grid_size", 401);
  if (fam == "round_sphere") {
    s.family = InitialSpec::Family::RoundSphere;
    s.rho0 = j.value("rho0", 1.0);
  } else if (fam == "cylinder") {
    s.family = InitialSpec::Family::Cylinder;
    s.radius = j.value("radius", 1.0);
    s.length = j.value("length", 10.0);
  } else if (fam == "dumbbell") {
    s.family = InitialSpec::Family::Dumbbell;
    s.lobe_left = j.value("lobe_left", 1.0);
    s.lobe_right = j.value("lobe_right", 1.0);
    s.neck_radius = j.value("neck_radius", 0.3);
    s.neck_width = j.value("neck_width", 1.0);
  } else {
    throw InvalidSpec("config: unknown initial family " + fam);
  }
  return s;
}

Json initial_echo(const InitialSpec& s) {
  Json j;
  switch (s.family) {
    case InitialSpec::Family::RoundSphere:
      j["family"] = "round_sphere";
      j["rho0"] = s.rho0;
      break;
    case InitialSpec::Family::Cylinder:
      j["family"] = "cylinder";
      j["radius"] = s.radius;
      j["length"] = s.length;
      break;
    case InitialSpec::Family::Dumbbell:
      j["family"] = "dumbbell";
      j["lobe_left"] = s.lobe_left;
      j["lobe_right"] = s.lobe_right;
      j["neck_radius"] = s.neck_radius;
      j["neck_width"] = s.neck_width;
      break;
    case InitialSpec::Family::Custom:
      j["family"] = "custom";
      break;
  }
  j["n"] = s.n;
  j["grid_size"] = s.grid_size;
  return j;
}

}  // namespace

RunConfig parse_config(const Json& j) {
  RunConfig c;
  if (j.contains("initial")) c.initial = parse_initial(j.at("initial"));
  if (j.contains("step")) {
    const Json& s = j.at("step");
    c.step.cfl = s.value("cfl", c.step.cfl);
    c.step.dt_min = s.value("dt_min", c.step.dt_min);
    c.step.snapshot_every = s.value("snapshot_every", c.step.snapshot_every);
    c.step.snapshot_every_steps =
        s.value("snapshot_every_steps", c.step.snapshot_every_steps);
    c.step.max_steps = s.value("max_steps", c.step.max_steps);
    c.step.series_stride = s.value("series_stride", c.step.series_stride);
    c.step.regrid_nodes = s.value("regrid_nodes", c.step.regrid_nodes);
    c.step.c_mon = s.value("c_mon", c.step.c_mon);
  }
  c.t_max = j.value("t_max", c.t_max);
  c.normalize = j.value("normalize", c.normalize);
  if (j.contains("surgery")) {
    const Json& s = j.at("surgery");
    c.surgery_enabled = s.value("enabled", true);
    c.surgery.r = s.value("r", c.surgery.r);
    c.surgery.delta = s.value("delta", c.surgery.delta);
    c.surgery.h = s.value("h", c.surgery.h);
    c.surgery.tol_cap = s.value("tol_cap", c.surgery.tol_cap);
    c.surgery.min_window = s.value("min_window", c.surgery.min_window);
    c.surgery.score_relax_max = s.value("score_relax_max", c.surgery.score_relax_max);
    c.surgery.trigger_factor = s.value("trigger_factor", c.surgery.trigger_factor);
    c.child_nodes = s.value("child_nodes", c.child_nodes);
  }
  if (j.contains("barriers")) {
    const Json& b = j.at("barriers");
    c.barriers_enabled = b.value("enabled", true);
    c.bryant_rmax = b.value("bryant_rmax", c.bryant_rmax);
    c.bryant_tol = b.value("bryant_tol", c.bryant_tol);
  }
  if (j.contains("monitors"))
    for (const auto& m : j.at("monitors")) c.monitors.push_back(m.get<std::string>());
  if (j.contains("checks")) {
    const Json& ch = j.at("checks");
    if (ch.contains("hi_ode")) {
      c.checks.hi_ode = true;
      c.checks.hi_ns.clear();
      for (const auto& v : ch.at("hi_ode").value("ns", Json::array({2, 3, 4})))
        c.checks.hi_ns.push_back(v.get<int>());
      c.checks.hi_samples = ch.at("hi_ode").value("samples", c.checks.hi_samples);
    }
    if (ch.contains("anderson_chow")) {
      c.checks.anderson_chow = true;
      c.checks.ac_ns.clear();
      for (const auto& v : ch.at("anderson_chow").value("ns", Json::array({2, 3, 4, 5, 6})))
        c.checks.ac_ns.push_back(v.get<int>());
      c.checks.ac_samples = ch.at("anderson_chow").value("samples", c.checks.ac_samples);
    }
  }
  c.out_dir = j.value("out", c.out_dir);
  c.seed = j.value("seed", c.seed);
  return c;
}

Json config_echo(const RunConfig& c) {
  Json j;
  j["initial"] = initial_echo(c.initial);
  j["step"] = {{"cfl", c.step.cfl},
               {"dt_min", c.step.dt_min},
               {"snapshot_every", c.step.snapshot_every},
               {"snapshot_every_steps", c.step.snapshot_every_steps},
               {"max_steps", c.step.max_steps},
               {"series_stride", c.step.series_stride},
               {"regrid_nodes", c.step.regrid_nodes},
               {"c_mon", c.step.c_mon}};
  j["t_max"] = c.t_max;
  j["normalize"] = c.normalize;
  j["surgery"] = {{"enabled", c.surgery_enabled},
                  {"r", c.surgery.r},
                  {"delta", c.surgery.delta},
                  {"h", c.surgery.h},
                  {"tol_cap", c.surgery.tol_cap},
                  {"min_window", c.surgery.min_window},
                  {"score_relax_max", c.surgery.score_relax_max},
                  {"trigger_factor", c.surgery.trigger_factor},
                  {"child_nodes", c.child_nodes}};
  j["barriers"] = {{"enabled", c.barriers_enabled},
                   {"bryant_rmax", c.bryant_rmax},
                   {"bryant_tol", c.bryant_tol}};
  j["monitors"] = c.monitors;
  Json checks;
  if (c.checks.hi_ode)
    checks["hi_ode"] = {{"ns", c.checks.hi_ns}, {"samples", c.checks.hi_samples}};
  if (c.checks.anderson_chow)
    checks["anderson_chow"] = {{"ns", c.checks.ac_ns}, {"samples", c.checks.ac_samples}};
  j["checks"] = checks;
  j["out"] = c.out_dir;
  j["seed"] = c.seed;
  return j;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  Json j = Json::parse(in, nullptr, true, /*ignore_comments=*/true);
  return parse_config(j);
}

namespace {

Json report_json(const MonitorReport& r) {
  Json j;
  j["name"] = r.name;
  j["pass"] = r.pass;
  j["enabled"] = r.enabled;
  j["margin"] = r.margin;
  j["t_at"] = r.t_at;
  j["node_at"] = r.node_at;
  j["samples"] = r.samples;
  j["note"] = r.note;
  return j;
}

struct RunRecord {
  std::map<long, Trajectory> trajectories;   // by component id
  std::vector<SurgeryEvent> surgeries;
  std::map<long, double> extinction_times;
  std::map<long, std::string> end_reasons;
  double normalization = 1.0;
  int n = 2;
  long root_nodes = 0;
};

// Snapshot-derived K_max series for the blow-up fit (identical in run and
// replay since snapshots round-trip bit-exactly).
std::vector<std::pair<double, double>> snapshot_kmax(const Trajectory& traj) {
  std::vector<std::pair<double, double>> out;
  for (const auto& [t, p] : traj.snapshots)
    out.emplace_back(t, max_abs_sectional(sectional(p)));
  return out;
}

MonitorReport monitor_bumps(const RunRecord& rec) {
  MonitorReport rep;
  rep.name = "bump_monotone";
  for (const auto& [id, traj] : rec.trajectories) {
    int prev = -1;
    for (const auto& [t, p] : traj.snapshots) {
      const int b = bump_count(p);
      ++rep.samples;
      if (prev >= 0) {
        const double m = prev - b;
        if (m < rep.margin) {
          rep.margin = m;
          rep.t_at = t;
          rep.node_at = id;
        }
      }
      prev = b;
    }
  }
  for (const SurgeryEvent& ev : rec.surgeries) {
    const double m = ev.bumps_before - ev.bumps_after;
    ++rep.samples;
    if (m < rep.margin) {
      rep.margin = m;
      rep.t_at = ev.t;
      rep.node_at = ev.component;
    }
  }
  rep.pass = rep.margin >= 0;
  rep.note = "per-trajectory and across-surgery bump totals";
  return rep;
}

MonitorReport monitor_hamilton_ivey(const RunRecord& rec) {
  MonitorReport agg;
  agg.name = "hamilton_ivey";
  bool any_enabled = false;
  for (const auto& [id, traj] : rec.trajectories) {
    MonitorReport r = hamilton_ivey_trajectory(traj);
    if (!r.enabled) {
      if (id == 0) {
        agg = r;
        return agg;  // root not normalized: monitor disabled
      }
      continue;
    }
    any_enabled = true;
    agg.samples += r.samples;
    if (r.margin < agg.margin) {
      agg.margin = r.margin;
      agg.t_at = r.t_at;
      agg.node_at = r.node_at;
    }
  }
  agg.enabled = any_enabled;
  agg.pass = !any_enabled || agg.margin >= -1e-8;
  return agg;
}

MonitorReport monitor_extinction(const RunRecord& rec) {
  MonitorReport agg;
  agg.name = "extinction_decay";
  std::string notes;
  for (const auto& [id, traj] : rec.trajectories) {
    MonitorReport r = extinction_decay(traj);
    if (!r.enabled) continue;
    agg.samples += r.samples;
    if (!r.pass) agg.pass = false;
    if (r.margin < agg.margin) {
      agg.margin = r.margin;
      agg.t_at = r.t_at;
      agg.node_at = id;
    }
    if (!notes.empty()) notes += " | ";
    notes += "c" + std::to_string(id) + ": " + r.note;
  }
  agg.pass = agg.pass && agg.margin >= 0;
  agg.note = notes;
  return agg;
}

struct BarrierArtifacts {
  bool ok = false;
  BarrierParams params;
  double T_hat = 0;
  double t0 = 0;
  std::string fail_note;
  SubsolutionReport subsolution;
  MonitorReport ordering;
};

BarrierArtifacts barrier_pipeline(const RunRecord& rec, const BryantProfile& bp) {
  BarrierArtifacts art;
  const auto it = rec.trajectories.find(0);
  if (it == rec.trajectories.end() || it->second.snapshots.size() < 6) {
    art.fail_note = "root trajectory too short";
    return art;
  }
  const Trajectory& traj = it->second;
  double fit_res = 0;
  const double T = estimate_blowup_time(snapshot_kmax(traj), &fit_res);
  art.T_hat = T;

  // Initial data for the comparison: first snapshot with a monotone
  // pole-to-bump segment.
  std::size_t k0 = traj.snapshots.size();
  ZTable z0;
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const auto& [t, p] = traj.snapshots[k];
    if (!(t < T)) break;
    try {
      z0 = horizontal_transform(p, T);
      k0 = k;
      break;
    } catch (const FlowError&) {
      continue;
    }
  }
  if (k0 == traj.snapshots.size()) {
    art.fail_note = "no snapshot admits the horizontal transform";
    return art;
  }
  art.t0 = traj.snapshots[k0].first;
  art.params = choose_params(z0.u, z0.z, bp);

  // Subsolution residuals on the standard test grids.
  std::vector<double> ug, tg;
  for (double u = 0.01; u <= 0.5 + 1e-12; u += 0.005) ug.push_back(u);
  for (double tau = art.params.tau0; tau <= art.params.tau0 + 3 + 1e-12; tau += 0.25)
    tg.push_back(tau);
  art.subsolution = verify_subsolution(art.params, bp, ug, tg);

  // Ordering z_sim >= z_* at every recorded tau in [tau0, tau0+3].
  MonitorReport ord;
  ord.name = "barrier_ordering";
  const double t0 = art.t0;
  for (std::size_t k = k0; k < traj.snapshots.size(); ++k) {
    const auto& [t, p] = traj.snapshots[k];
    if (!(t < T)) break;
    const double tau = art.params.tau0 + std::log((T - t0) / (T - t));
    if (tau > art.params.tau0 + 3) break;
    ZTable zs;
    try {
      zs = horizontal_transform(p, T);
    } catch (const FlowError&) {
      continue;
    }
    const ZstarTable zt = build_zstar(art.params, bp, tau, 2001);
    Pchip sim(zs.u, zs.z);
    const double u_hi = std::min(0.999, zs.u.back());
    std::vector<double> uu, a, b;
    for (std::size_t i = 0; i < zt.u.size(); ++i) {
      const double u = zt.u[i];
      if (u <= std::max(zs.u[1], 1e-6) || u >= u_hi) continue;
      uu.push_back(u);
      a.push_back(sim(u));
      b.push_back(zt.z[i]);
    }
    if (uu.empty()) continue;
    MonitorReport r = barrier_ordering(uu, a, b);
    ord.samples += r.samples;
    if (r.margin < ord.margin) {
      ord.margin = r.margin;
      ord.t_at = t;
      ord.node_at = r.node_at;
    }
  }
  ord.pass = ord.margin >= 0 && ord.samples > 0;
  if (ord.samples == 0) {
    ord.enabled = false;
    ord.note = "no snapshots in [tau0, tau0+3]";
  }
  art.ordering = ord;
  art.ok = true;
  return art;
}

std::vector<MonitorReport> compute_monitors(const RunConfig& cfg, const RunRecord& rec,
                                            Json* aux) {
  std::vector<MonitorReport> out;
  const bool barriers_wanted =
      std::count(cfg.monitors.begin(), cfg.monitors.end(), "barrier_ordering") > 0 ||
      std::count(cfg.monitors.begin(), cfg.monitors.end(), "pole_rate_bound") > 0;
  BarrierArtifacts barr;
  BryantProfile bp;
  if (cfg.barriers_enabled && barriers_wanted) {
    bp = solve_soliton(rec.n, cfg.bryant_rmax, cfg.bryant_tol);
    barr = barrier_pipeline(rec, bp);
    if (aux) {
      (*aux)["barriers"] = Json{{"ok", barr.ok},
                                {"T_hat", barr.T_hat},
                                {"t0", barr.t0},
                                {"A1", barr.params.A1},
                                {"A2", barr.params.A2},
                                {"A3", barr.params.A3},
                                {"beta", barr.params.beta},
                                {"D", barr.params.D},
                                {"R_D", barr.params.R_D},
                                {"tau0", barr.params.tau0},
                                {"b_coeff", barr.params.b_coeff},
                                {"b2", bp.b2},
                                {"c2", bp.c2},
                                {"max_resid_int", barr.subsolution.max_resid_int},
                                {"max_resid_ext", barr.subsolution.max_resid_ext},
                                {"note", barr.fail_note}};
    }
  }

  for (const std::string& name : cfg.monitors) {
    if (name == "hamilton_ivey") {
      out.push_back(monitor_hamilton_ivey(rec));
    } else if (name == "bump_monotone") {
      out.push_back(monitor_bumps(rec));
    } else if (name == "extinction_decay") {
      out.push_back(monitor_extinction(rec));
    } else if (name == "neck_lower_bound" || name == "blowup_rate" ||
               name == "pole_rate_bound" || name == "barrier_ordering") {
      MonitorReport r;
      r.name = name;
      const auto it = rec.trajectories.find(0);
      if (it == rec.trajectories.end()) {
        r.enabled = false;
        r.note = "no root trajectory";
        out.push_back(r);
        continue;
      }
      try {
        if (name == "barrier_ordering") {
          r = barr.ok ? barr.ordering : r;
          if (!barr.ok) {
            r.enabled = false;
            r.note = barr.fail_note.empty() ? "barrier pipeline unavailable" : barr.fail_note;
          }
        } else {
          double fit_res = 0;
          const double T = estimate_blowup_time(snapshot_kmax(it->second), &fit_res);
          if (name == "neck_lower_bound") r = neck_lower_bound(it->second, T);
          else if (name == "blowup_rate") r = blowup_rate(it->second, T);
          else if (name == "pole_rate_bound") {
            if (barr.ok) r = pole_rate_bound(it->second, T, bp.b2, barr.params.A1);
            else {
              r.enabled = false;
              r.note = "barrier parameters unavailable";
            }
          }
          r.name = name;
        }
      } catch (const FlowError& e) {
        r.enabled = false;
        r.pass = false;
        r.note = e.what();
      }
      out.push_back(r);
    } else if (name == "hi_ode_algebra") {
      for (int n : cfg.checks.hi_ns) {
        const ScanResult s = hi_ode_scan(n, cfg.checks.hi_samples, cfg.seed + n);
        MonitorReport r;
        r.name = "hi_ode_algebra_n" + std::to_string(n);
        r.samples = s.samples;
        r.margin = std::min(1e-12 - s.worst_identity, s.worst_case + 1e-12);
        r.pass = s.violations == 0;
        r.note = "seed " + std::to_string(s.seed) + ", worst identity " +
                 fmt17(s.worst_identity) + ", worst case " + fmt17(s.worst_case);
        out.push_back(r);
      }
    } else if (name == "anderson_chow") {
      for (int n : cfg.checks.ac_ns) {
        const AcScanResult s = anderson_chow_scan(n, cfg.checks.ac_samples, cfg.seed + 16 + n);
        MonitorReport r;
        r.name = "anderson_chow_n" + std::to_string(n);
        r.samples = s.samples;
        r.margin = std::min(s.worst_margin + 1e-12, 1e-12 - s.worst_eigen_gap);
        r.pass = s.violations == 0;
        r.note = "seed " + std::to_string(s.seed) + ", worst margin " +
                 fmt17(s.worst_margin) + ", worst eigen gap " + fmt17(s.worst_eigen_gap);
        out.push_back(r);
      }
    } else {
      MonitorReport r;
      r.name = name;
      r.enabled = false;
      r.note = "unknown monitor";
      out.push_back(r);
    }
  }
  return out;
}

Json monitors_json(const RunConfig& cfg, const RunRecord& rec) {
  Json aux;
  const auto reports = compute_monitors(cfg, rec, &aux);
  Json j;
  j["seed"] = cfg.seed;
  j["monitors"] = Json::array();
  for (const auto& r : reports) j["monitors"].push_back(report_json(r));
  if (!aux.is_null()) j["aux"] = aux;
  bool all_pass = true;
  for (const auto& r : reports)
    if (r.enabled && !r.pass) all_pass = false;
  j["all_pass"] = all_pass;
  return j;
}

Json cut_json(const CutRecord& c) {
  return Json{{"node", c.node},
              {"side", c.side},
              {"s", c.s_pos},
              {"psi_cut", c.psi_cut},
              {"R_at_cut", c.R_at_cut},
              {"neck_score", c.neck_score},
              {"widen_factor", c.widen_factor},
              {"cut_scale_hr", c.cut_scale_hr},
              {"window_used", c.window_used},
              {"threshold_used", c.threshold_used}};
}

Json surgery_event_json(const SurgeryEvent& ev) {
  Json j;
  j["kind"] = "surgery";
  j["t"] = ev.t;
  j["component"] = ev.component;
  j["cuts"] = Json::array();
  for (const auto& c : ev.cuts) j["cuts"].push_back(cut_json(c));
  j["children"] = ev.children;
  Json disc = Json::array();
  for (const auto& d : ev.discarded)
    disc.push_back(Json{{"lo", d.lo},
                        {"hi", d.hi},
                        {"max_psi", d.max_psi},
                        {"min_R", d.min_R},
                        {"reason", d.reason}});
  j["discarded"] = disc;
  Json checks = Json::array();
  for (const auto& c : ev.cap_checks)
    checks.push_back(Json{{"min_krad_gain", c.min_krad_gain},
                          {"min_R_gain", c.min_R_gain},
                          {"min_korb_inner", c.min_korb_inner},
                          {"sigma_est", c.sigma_est},
                          {"pole_slope", c.pole_slope}});
  j["cap_checks"] = checks;
  j["whole_component_discarded"] = ev.whole_component_discarded;
  j["max_psi_before"] = ev.max_psi_before;
  j["max_psi_after"] = ev.max_psi_after;
  j["bumps_before"] = ev.bumps_before;
  j["bumps_after"] = ev.bumps_after;
  return j;
}

class EventLog {
 public:
  explicit EventLog(const std::string& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot open " + path);
  }
  void append(const Json& j) {
    out_ << j.dump() << "\n";
    out_.flush();
  }

 private:
  std::ofstream out_;
};

std::string snap_name(long component, double t) {
  return "snap_" + std::to_string(component) + "_" + fmt17(t) + ".csv";
}

}  // namespace

int run(const RunConfig& cfg, bool quiet) {
  fs::create_directories(cfg.out_dir);
  const auto path = [&](const std::string& f) { return cfg.out_dir + "/" + f; };
  write_json_atomic(path("config_echo.json"), config_echo(cfg));

  RunRecord rec;
  rec.n = cfg.initial.n;
  try {
    Profile p0 = build_initial(cfg.initial);
    rec.root_nodes = static_cast<long>(p0.size());

    if (cfg.normalize) {
      const CurvatureField cf = sectional(p0);
      const double nu_min = *std::min_element(cf.nu.begin(), cf.nu.end());
      if (nu_min < -1.0) {
        const double c = -nu_min;  // g -> c g scales nu by 1/c
        const double s = std::sqrt(c);
        for (auto& v : p0.phi) v *= s;
        for (auto& v : p0.psi) v *= s;
        rec.normalization = c;
      }
    }

    SurgeryParams sp = cfg.surgery;
    if (cfg.surgery_enabled && sp.cap.r.empty()) sp.cap = build_cap_table(cfg.initial.n);
    const int child_nodes = cfg.child_nodes > 0 ? cfg.child_nodes : cfg.initial.grid_size;

    long next_id = 0;
    std::vector<Component> queue;
    {
      Component root;
      root.id = next_id++;
      const auto s = arclength(p0);
      root.extinction_threshold = 10.0 * (s.back() - s.front()) / (p0.size() - 1);
      root.p = std::move(p0);
      queue.push_back(std::move(root));
    }

    EventLog events(path("events.jsonl"));
    std::ofstream kmax(path("kmax.csv"), std::ios::binary | std::ios::trunc);
    kmax << "t,K_max,psi_min,psi_max\n";

    // Components evolve independently; process in id order until extinction,
    // t_max, or a surgery trigger (which enqueues children).
    std::size_t qi = 0;
    while (qi < queue.size()) {
      Component comp = std::move(queue[qi++]);
      StopRule stop;
      stop.t_end = cfg.t_max;
      stop.psi_max_below = comp.extinction_threshold;
      if (cfg.surgery_enabled) {
        stop.rho_trigger = sp.trigger_rho(comp.p.n);
        if (comp.born_from_surgery) stop.trigger_arm_above = 3.0 * stop.rho_trigger;
      }
      Trajectory traj = evolve(comp.p, cfg.step, stop);
      for (const auto& [t, prof] : traj.snapshots) {
        const CurvatureField cf = sectional(prof);
        write_profile_csv(path(snap_name(comp.id, t)), prof, &cf);
      }
      for (const auto& ks : traj.series)
        kmax << fmt17(ks.t) << ',' << fmt17(ks.K_max) << ',' << fmt17(ks.psi_min) << ','
             << fmt17(ks.psi_max) << "\n";
      for (const auto& ev : traj.events)
        if (ev.kind == "regrid")
          events.append(Json{{"kind", "regrid"}, {"t", ev.t}, {"component", comp.id},
                             {"detail", ev.detail}});
      const double t_end = traj.snapshots.back().first;
      rec.end_reasons[comp.id] = stop_reason_name(traj.reason);

      if (traj.reason == StopReason::Trigger && cfg.surgery_enabled) {
        FlowState st;
        st.t = t_end;
        st.next_id = next_id;
        Component at_trigger = comp;
        at_trigger.p = traj.snapshots.back().second;
        st.components.push_back(at_trigger);
        const auto evs = perform_surgery(st, sp, child_nodes);
        next_id = st.next_id;
        for (const auto& ev : evs) events.append(surgery_event_json(ev));
        for (auto& child : st.components)
          if (child.id != comp.id) queue.push_back(child);
        for (const auto& ev : evs) rec.surgeries.push_back(ev);
      } else if (traj.reason == StopReason::Extinct) {
        rec.extinction_times[comp.id] = t_end;
        events.append(Json{{"kind", "extinction"}, {"t", t_end}, {"component", comp.id}});
      } else if (traj.reason == StopReason::Underflow) {
        events.append(
            Json{{"kind", "underflow"}, {"t", t_end}, {"component", comp.id}});
      }
      rec.trajectories.emplace(comp.id, std::move(traj));
      if (!quiet)
        std::cerr << "component " << comp.id << " -> " << rec.end_reasons[comp.id]
                  << " at t=" << fmt17(t_end) << "\n";
    }

    const Json mj = monitors_json(cfg, rec);
    write_json_atomic(path("monitors.json"), mj);

    Json summary;
    summary["normalization"] = rec.normalization;
    summary["components"] = Json::object();
    for (const auto& [id, reason] : rec.end_reasons) {
      Json cj;
      cj["end"] = reason;
      if (rec.extinction_times.count(id)) cj["extinction_time"] = rec.extinction_times[id];
      summary["components"][std::to_string(id)] = cj;
    }
    summary["surgery_count"] = rec.surgeries.size();
    summary["all_monitors_pass"] = mj["all_pass"];
    write_json_atomic(path("summary.json"), summary);
    if (!quiet) std::cerr << "monitors all_pass=" << mj["all_pass"].dump() << "\n";
    return mj["all_pass"].get<bool>() ? 0 : 2;
  } catch (const std::exception& e) {
    Json diag;
    diag["error"] = e.what();
    write_json_atomic(path("diagnostic.json"), diag);
    if (!quiet) std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  }
}

int replay(const std::string& out_dir, bool quiet) {
  const auto path = [&](const std::string& f) { return out_dir + "/" + f; };
  RunConfig cfg = parse_config(Json::parse(read_text(path("config_echo.json"))));
  RunRecord rec;
  rec.n = cfg.initial.n;
  rec.normalization = 1.0;

  for (const auto& entry : fs::directory_iterator(out_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("snap_", 0) != 0 || entry.path().extension() != ".csv") continue;
    const auto second = name.find('_', 5);
    const long id = std::stol(name.substr(5, second - 5));
    Profile p = read_profile_csv(entry.path().string());
    rec.trajectories[id].snapshots.emplace_back(p.t, std::move(p));
  }
  for (auto& [id, traj] : rec.trajectories)
    std::sort(traj.snapshots.begin(), traj.snapshots.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

  std::ifstream ev(path("events.jsonl"));
  std::string line;
  while (std::getline(ev, line)) {
    if (line.empty()) continue;
    const Json j = Json::parse(line);
    if (j.value("kind", "") != "surgery") continue;
    SurgeryEvent s;
    s.t = j.value("t", 0.0);
    s.component = j.value("component", -1);
    s.bumps_before = j.value("bumps_before", 0);
    s.bumps_after = j.value("bumps_after", 0);
    s.max_psi_before = j.value("max_psi_before", 0.0);
    s.max_psi_after = j.value("max_psi_after", 0.0);
    rec.surgeries.push_back(std::move(s));
  }

  const Json mj = monitors_json(cfg, rec);
  write_json_atomic(path("monitors_replay.json"), mj);
  const std::string a = read_text(path("monitors.json"));
  const std::string b = read_text(path("monitors_replay.json"));
  const bool same = a == b;
  if (!quiet)
    std::cerr << "replay monitors " << (same ? "byte-identical" : "DIFFER") << "\n";
  return same ? 0 : 1;
}

}  // namespace ricci
