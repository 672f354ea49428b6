#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ricci/barriers.hpp"
#include "ricci/bryant.hpp"
#include "ricci/errors.hpp"
#include "ricci/io.hpp"
#include "ricci/monitors.hpp"
#include "ricci/run.hpp"
#include "ricci/surgery.hpp"

using namespace ricci;

namespace {

int cmd_run(const std::string& config_path, std::uint64_t seed, bool seed_set,
            const std::string& out, bool quiet) {
  RunConfig cfg = load_config_file(config_path);
  if (seed_set) cfg.seed = seed;
  if (!out.empty()) cfg.out_dir = out;
  return run(cfg, quiet);
}

int cmd_bryant(int n, double rmax, double tol, const std::string& out, bool quiet) {
  std::filesystem::create_directories(out);
  BryantProfile bp = solve_soliton(n, rmax, tol);
  const AsymptoticsReport rep = check_asymptotics(bp);

  std::ostringstream csv;
  csv << "r,w,u,B\n";
  for (std::size_t i = 0; i < bp.r.size(); ++i)
    csv << fmt17(bp.r[i]) << ',' << fmt17(bp.w[i]) << ',' << fmt17(bp.u[i]) << ','
        << fmt17(bp.wp[i] * bp.wp[i]) << "\n";
  atomic_write_text(out + "/bryant_n" + std::to_string(n) + ".csv", csv.str());

  Json j;
  j["n"] = n;
  j["r_max"] = rmax;
  j["tol"] = tol;
  j["max_local_error"] = bp.max_local_error;
  j["tail_coeff"] = bp.tail_coeff;
  j["b2"] = bp.b2;
  j["c2"] = bp.c2;
  j["w_over_sqrt_r"] = Json{{"mean", rep.w_over_sqrt_r_mean}, {"drift", rep.w_over_sqrt_r_drift}};
  j["korb_r"] = Json{{"mean", rep.korb_r_mean}, {"drift", rep.korb_r_drift}};
  j["krad_r2"] = Json{{"mean", rep.krad_r2_mean}, {"drift", rep.krad_r2_drift}};
  j["rR"] = Json{{"mean", rep.rR_mean}, {"drift", rep.rR_drift}};
  j["R_monotone"] = rep.R_monotone;
  j["pass"] = rep.pass;
  write_json_atomic(out + "/bryant_report.json", j);
  if (!quiet) std::cerr << "bryant n=" << n << " pass=" << rep.pass << "\n";
  return rep.pass ? 0 : 2;
}

int cmd_cap(int n, int grid, const std::string& out, bool quiet) {
  std::filesystem::create_directories(out);
  const CapTable cap = build_cap_table(n, grid);
  std::ostringstream csv;
  csv << "# n=" << n << " D=" << fmt17(cap.D) << " k=" << fmt17(cap.k)
      << " a=" << fmt17(cap.a_const) << " b=" << fmt17(cap.b_const) << "\n";
  csv << "r,eta_hat\n";
  for (std::size_t i = 0; i < cap.r.size(); ++i)
    csv << fmt17(cap.r[i]) << ',' << fmt17(cap.eta[i]) << "\n";
  atomic_write_text(out + "/cap_n" + std::to_string(n) + ".csv", csv.str());
  if (!quiet) std::cerr << "cap n=" << n << " D=" << cap.D << " validated\n";
  return 0;
}

int cmd_barriers(int n, double rmax, double tol, const std::string& out, bool quiet) {
  std::filesystem::create_directories(out);
  BryantProfile bp = solve_soliton(n, rmax, tol);
  // Initial data: the Bryant profile's own z-function on (0, 1].
  std::vector<double> u0, z0;
  for (int i = 1; i <= 400; ++i) {
    const double u = i / 400.0;
    u0.push_back(u);
    z0.push_back(bp.B(u));
  }
  const BarrierParams prm = choose_params(u0, z0, bp);
  std::vector<double> ug, tg;
  for (double u = 0.01; u <= 0.5 + 1e-12; u += 0.005) ug.push_back(u);
  for (double tau = prm.tau0; tau <= prm.tau0 + 3 + 1e-12; tau += 0.25) tg.push_back(tau);
  const SubsolutionReport sub = verify_subsolution(prm, bp, ug, tg);

  for (double tau : {prm.tau0, prm.tau0 + 1.5, prm.tau0 + 3.0}) {
    const ZstarTable zt = build_zstar(prm, bp, tau, 2001);
    std::ostringstream csv;
    csv << "u,z_star\n";
    for (std::size_t i = 0; i < zt.u.size(); ++i)
      csv << fmt17(zt.u[i]) << ',' << fmt17(zt.z[i]) << "\n";
    std::ostringstream name;
    name << out << "/zstar_" << tau << ".csv";
    atomic_write_text(name.str(), csv.str());
  }
  Json j;
  j["n"] = n;
  j["A1"] = prm.A1;
  j["A2"] = prm.A2;
  j["A3"] = prm.A3;
  j["beta"] = prm.beta;
  j["D"] = prm.D;
  j["R_D"] = prm.R_D;
  j["tau0"] = prm.tau0;
  j["b_coeff"] = prm.b_coeff;
  j["b2"] = bp.b2;
  j["c2"] = bp.c2;
  j["max_resid_int"] = sub.max_resid_int;
  j["max_resid_ext"] = sub.max_resid_ext;
  j["residual_pass"] = sub.max_resid_int <= 1e-3 && sub.max_resid_ext <= 1e-3;
  write_json_atomic(out + "/barrier_report.json", j);
  if (!quiet)
    std::cerr << "barriers: tau0=" << prm.tau0 << " D=" << prm.D
              << " resid_int=" << sub.max_resid_int << " resid_ext=" << sub.max_resid_ext
              << "\n";
  return j["residual_pass"].get<bool>() ? 0 : 2;
}

int cmd_check(const std::vector<int>& ns, long samples, std::uint64_t seed,
              const std::string& out, bool quiet) {
  std::filesystem::create_directories(out);
  Json j;
  j["seed"] = seed;
  j["samples"] = samples;
  bool pass = true;
  Json hi = Json::array();
  for (int n : ns) {
    const ScanResult s = hi_ode_scan(n, samples, seed + n);
    hi.push_back(Json{{"n", n},
                      {"violations", s.violations},
                      {"worst_identity", s.worst_identity},
                      {"worst_case", s.worst_case}});
    pass = pass && s.violations == 0;
  }
  j["hi_ode_algebra"] = hi;
  Json ac = Json::array();
  for (int n : ns) {
    const AcScanResult s = anderson_chow_scan(n, samples, seed + 16 + n);
    ac.push_back(Json{{"n", n},
                      {"violations", s.violations},
                      {"worst_margin", s.worst_margin},
                      {"worst_eigen_gap", s.worst_eigen_gap}});
    pass = pass && s.violations == 0;
  }
  j["anderson_chow"] = ac;
  j["pass"] = pass;
  write_json_atomic(out + "/checks.json", j);
  if (!quiet) std::cerr << "check pass=" << pass << "\n";
  return pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rotationally invariant Ricci flow laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 1;
  bool quiet = false;
  app.add_flag("--quiet", quiet, "suppress progress output");

  auto* c_run = app.add_subcommand("run", "evolve / surgery / monitors pipeline");
  c_run->add_option("--config", config_path, "config JSON (comments allowed)")->required();
  auto* seed_opt = c_run->add_option("--seed", seed, "override config seed");
  c_run->add_option("--out", out_dir, "override output directory");

  auto* c_bry = app.add_subcommand("bryant", "solve the soliton, asymptotics, fits");
  int n = 2, cap_grid = 4096;
  double rmax = 200, tol = 1e-10;
  std::string bout = "out_bryant";
  c_bry->add_option("--n", n, "fiber dimension");
  c_bry->add_option("--rmax", rmax, "integration extent");
  c_bry->add_option("--tol", tol, "integrator tolerance");
  c_bry->add_option("--out", bout, "output directory");

  auto* c_cap = app.add_subcommand("cap", "build and validate the standard cap");
  std::string cout_dir = "out_cap";
  c_cap->add_option("--n", n, "fiber dimension");
  c_cap->add_option("--grid", cap_grid, "table size");
  c_cap->add_option("--out", cout_dir, "output directory");

  auto* c_bar = app.add_subcommand("barriers", "parameters, z_* tables, residuals");
  std::string barout = "out_barriers";
  c_bar->add_option("--n", n, "fiber dimension");
  c_bar->add_option("--rmax", rmax, "soliton integration extent");
  c_bar->add_option("--tol", tol, "integrator tolerance");
  c_bar->add_option("--out", barout, "output directory");

  auto* c_chk = app.add_subcommand("check", "randomized algebraic suites");
  std::vector<int> ns = {2, 3, 4};
  long samples = 1000000;
  std::string chkout = "out_check";
  c_chk->add_option("--n", ns, "fiber dimensions");
  c_chk->add_option("--samples", samples, "samples per dimension");
  c_chk->add_option("--seed", seed, "RNG seed");
  c_chk->add_option("--out", chkout, "output directory");

  auto* c_rep = app.add_subcommand("replay", "recompute monitors from stored outputs");
  std::string repdir;
  c_rep->add_option("--out", repdir, "run output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_run->parsed()) return cmd_run(config_path, seed, seed_opt->count() > 0, out_dir, quiet);
    if (c_bry->parsed()) return cmd_bryant(n, rmax, tol, bout, quiet);
    if (c_cap->parsed()) return cmd_cap(n, cap_grid, cout_dir, quiet);
    if (c_bar->parsed()) return cmd_barriers(n, rmax, tol, barout, quiet);
    if (c_chk->parsed()) return cmd_check(ns, samples, seed, chkout, quiet);
    if (c_rep->parsed()) return replay(repdir, quiet);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
