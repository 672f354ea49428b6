#include "ricci/io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ricci/errors.hpp"

namespace ricci {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void atomic_write_text(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp);
    out << content;
    if (!out) throw IoError("short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

void write_json_atomic(const std::string& path, const Json& j) {
  atomic_write_text(path, j.dump(2) + "\n");
}

std::string profile_csv(const Profile& p, const CurvatureField* cf) {
  std::ostringstream out;
  out << "# n=" << p.n << " topology=" << topology_name(p.topology) << " t=" << fmt17(p.t);
  if (p.topology == OrbitTopology::PeriodicCylinder) out << " period=" << fmt17(p.period);
  out << "\n";
  out << (cf ? "x,phi,psi,lambda,mu,R,rho\n" : "x,phi,psi\n");
  for (std::size_t i = 0; i < p.size(); ++i) {
    out << fmt17(p.x[i]) << ',' << fmt17(p.phi[i]) << ',' << fmt17(p.psi[i]);
    if (cf)
      out << ',' << fmt17(cf->lambda[i]) << ',' << fmt17(cf->mu[i]) << ',' << fmt17(cf->R[i])
          << ',' << fmt17(cf->rho[i]);
    out << '\n';
  }
  return out.str();
}

void write_profile_csv(const std::string& path, const Profile& p, const CurvatureField* cf) {
  atomic_write_text(path, profile_csv(p, cf));
}

namespace {

double parse_double(std::string_view sv) {
  double v = 0;
  const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), v);
  if (res.ec != std::errc()) throw IoError("bad number: " + std::string(sv));
  return v;
}

}  // namespace

Profile read_profile_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw IoError("missing metadata line in " + path);
  Profile p;
  {
    std::istringstream meta(line.substr(2));
    std::string tok;
    while (meta >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
      if (key == "n") p.n = std::stoi(val);
      else if (key == "topology") p.topology = topology_from_name(val);
      else if (key == "t") p.t = parse_double(val);
      else if (key == "period") p.period = parse_double(val);
    }
  }
  if (!std::getline(in, line)) throw IoError("missing header in " + path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::string_view sv(line);
    double vals[3];
    for (int k = 0; k < 3; ++k) {
      const auto comma = sv.find(',');
      const auto field = (k < 2) ? sv.substr(0, comma) : sv.substr(0, sv.find(','));
      vals[k] = parse_double(field);
      if (k < 2) {
        if (comma == std::string_view::npos) throw IoError("short row in " + path);
        sv.remove_prefix(comma + 1);
      }
    }
    p.x.push_back(vals[0]);
    p.phi.push_back(vals[1]);
    p.psi.push_back(vals[2]);
  }
  return p;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ricci
