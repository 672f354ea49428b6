#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ricci/evolution.hpp"
#include "ricci/io.hpp"
#include "ricci/profile.hpp"
#include "ricci/surgery.hpp"

namespace ricci {

struct CheckSpec {
  bool hi_ode = false;
  std::vector<int> hi_ns = {2, 3, 4};
  long hi_samples = 1000000;
  bool anderson_chow = false;
  std::vector<int> ac_ns = {2, 3, 4, 5, 6};
  long ac_samples = 1000000;
};

struct RunConfig {
  InitialSpec initial;
  StepControl step;
  double t_max = 1.0;
  bool normalize = false;

  bool surgery_enabled = false;
  SurgeryParams surgery;   // cap table is built by run()
  int child_nodes = 0;     // 0: initial grid size

  bool barriers_enabled = false;
  double bryant_rmax = 200.0;
  double bryant_tol = 1e-10;

  std::vector<std::string> monitors;
  CheckSpec checks;

  std::string out_dir = "out";
  std::uint64_t seed = 1;
};

RunConfig parse_config(const Json& j);
Json config_echo(const RunConfig& c);
RunConfig load_config_file(const std::string& path);

// Exit codes: 0 clean, 2 = a monitor recorded a failure, 3 = solver error.
int run(const RunConfig& cfg, bool quiet);

// Recomputes monitors from the stored snapshots and events; writes
// monitors_replay.json and returns 0 iff byte-identical to monitors.json.
int replay(const std::string& out_dir, bool quiet);

}  // namespace ricci
