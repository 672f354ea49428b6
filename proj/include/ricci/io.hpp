#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "ricci/curvature.hpp"
#include "ricci/profile.hpp"

namespace ricci {

using Json = nlohmann::ordered_json;

// 17 significant digits: decimal rendering round-trips doubles bit-exactly.
std::string fmt17(double v);

// write-temp-then-rename
void atomic_write_text(const std::string& path, const std::string& content);
void write_json_atomic(const std::string& path, const Json& j);

// Profile CSV: "# n=<n> topology=<kind> t=<t>" metadata line, then
// "x,phi,psi" (plus lambda,mu,R,rho columns when a field is given).
std::string profile_csv(const Profile& p, const CurvatureField* cf = nullptr);
void write_profile_csv(const std::string& path, const Profile& p,
                       const CurvatureField* cf = nullptr);
Profile read_profile_csv(const std::string& path);

std::string read_text(const std::string& path);

}  // namespace ricci
