/// @file io.hpp
/// @brief CSV and JSON writers. Every file is written to a temporary sibling
/// and renamed into place, so readers never see a partial file.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unistd.h>

#include <json.hpp>

#include "eqflow/bounds.hpp"
#include "eqflow/curve.hpp"
#include "eqflow/flow.hpp"
#include "eqflow/geometry.hpp"
#include "eqflow/reference_cases.hpp"

namespace eqflow {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// 17 significant digits: doubles survive a text round trip.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory " + dir.string());
}

inline std::string profile_csv(const GraphProfile& p) {
  std::string s = "z,r\n";
  for (std::size_t i = 0; i < p.size(); ++i)
    s += fmt17(p.z(static_cast<int>(i))) + "," + fmt17(p.r[i]) + "\n";
  return s;
}

inline std::string geometry_csv(const GraphProfile& p, const GeometrySummary& g) {
  std::string s = "z,r,k1,k2,H,v\n";
  for (std::size_t i = 0; i < p.size(); ++i)
    s += fmt17(p.z(static_cast<int>(i))) + "," + fmt17(p.r[i]) + "," + fmt17(g.k1[i]) + "," +
         fmt17(g.k2[i]) + "," + fmt17(g.H[i]) + "," + fmt17(g.v[i]) + "\n";
  return s;
}

inline nlohmann::json geometry_json(const GeometrySummary& g) {
  return {{"area", g.area}, {"volume", g.volume}, {"avgH", g.avgH}, {"omega", g.omega}};
}

inline std::string curve_csv(const ParamCurve& c) {
  std::string s = "s,z,r\n";
  for (std::size_t i = 0; i < c.size(); ++i)
    s += fmt17(c.s[i]) + "," + fmt17(c.z[i]) + "," + fmt17(c.r[i]) + "\n";
  return s;
}

inline constexpr const char* kRunCsvHeader =
    "t,dt,area,volume,avgH,r_min,r_max,v_max,L_max,sup_H_dev,viol_r2,viol_h2,viol_vbound,viol_area,"
    "vol_drift";

inline std::string run_csv(const FlowRecord& rec) {
  std::string s = std::string(kRunCsvHeader) + "\n";
  for (const auto& r : rec.rows) {
    s += fmt17(r.t) + "," + fmt17(r.dt) + "," + fmt17(r.area) + "," + fmt17(r.volume) + "," +
         fmt17(r.avgH) + "," + fmt17(r.r_min) + "," + fmt17(r.r_max) + "," + fmt17(r.v_max) + "," +
         fmt17(r.L_max) + "," + fmt17(r.sup_H_dev) + "," + (r.viol_r2 ? "1" : "0") + "," +
         (r.viol_h2 ? "1" : "0") + "," + (r.viol_vbound ? "1" : "0") + "," +
         (r.viol_area ? "1" : "0") + "," + fmt17(r.vol_drift) + "\n";
  }
  return s;
}

inline nlohmann::json to_json(const BoundSet& b) {
  nlohmann::json j;
  j["V"] = b.V;
  j["area"] = b.area;
  j["rho"] = b.rho;
  j["frak_d"] = b.frak_d;
  j["r1"] = b.r1;
  j["r2"] = b.r2 ? nlohmann::json(*b.r2) : nlohmann::json("undefined-use-frak_z");
  j["r2_effective"] = b.r2_effective;
  j["h2"] = b.graph.h2;
  j["frak_R"] = b.graph.frak_R;
  j["C_graph"] = b.graph.C;
  j["C_tilde"] = b.graph.C_tilde;
  j["frak_h"] = b.graph.frak_h;
  j["max_v0"] = b.max_v0;
  j["v_bound"] = b.graph.v_bound;
  j["longtime_threshold"] = b.longtime.threshold;
  j["longtime_satisfied"] = b.longtime.satisfied;
  j["vol_G"] = b.vol_G.is_finite() ? nlohmann::json(b.vol_G.value()) : nlohmann::json("inf");
  return j;
}

inline nlohmann::json to_json(const AppendixBReport& r) {
  return {{"case", std::string(to_string(r.model))},
          {"lambda", r.lambda},
          {"samples", r.samples},
          {"s1", r.s1},
          {"s2", r.s2},
          {"area", r.area},
          {"avgH", r.avgH_by_parts},
          {"avgH_direct", r.avgH_direct},
          {"avgH_by_parts", r.avgH_by_parts},
          {"normalized", r.normalized},
          {"normalized_direct", r.normalized_direct}};
}

inline nlohmann::json run_summary_json(const FlowResult& res) {
  nlohmann::json j;
  j["termination"] = std::string(to_string(res.reason));
  if (!res.detail.empty()) j["detail"] = res.detail;
  j["steps"] = res.steps;
  j["rejected_steps"] = res.rejections;
  if (!res.record.rows.empty()) {
    const FlowRow& last = res.record.rows.back();
    j["final"] = {{"t", last.t},           {"area", last.area},       {"volume", last.volume},
                  {"avgH", last.avgH},     {"r_min", last.r_min},     {"r_max", last.r_max},
                  {"v_max", last.v_max},   {"L_max", last.L_max},     {"sup_H_dev", last.sup_H_dev},
                  {"vol_drift", last.vol_drift}};
    long viol = 0;
    for (const auto& r : res.record.rows) viol += r.viol_r2 + r.viol_h2 + r.viol_vbound + r.viol_area;
    j["monitor_violations"] = viol;
  }
  return j;
}

}  // namespace eqflow
