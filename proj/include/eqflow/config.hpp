/// @file config.hpp
/// @brief JSON run configuration: parsing with full error collection,
/// validation before any computation, and round-trip serialization.
///
/// Shape:
///   {"space":   {"case": "C1", "lambda": 0, "n": 2, "lambda_h": ...},
///    "slab":    {"a": 0, "b": 1},
///    "initial": {"kind": "perturbed", "R": 1, "epsilon": 0.1, "k": 1},
///    "grid":    {"N": 400},
///    "flow":    {"T_max": 10, "dt": {"cfl_safety": 0.4, "dt_max": 1e-3, "dt_min": 1e-14},
///                "scheme": "imex", "avg_mode": "volume_consistent", "eps_cmc": 1e-5,
///                "eps_axis": 1e-3, "output_every": 1, "step_tol": 1e-6,
///                "extrapolate": true, "monitors": true},
///    "output":  {"dir": "out", "snapshot_every": 0}}
/// Only "space", "slab", "initial" and "grid" are required.

#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "eqflow/ambient.hpp"
#include "eqflow/flow.hpp"
#include "eqflow/reference_cases.hpp"

namespace eqflow {

struct SpaceSpec {
  ModelCase model = ModelCase::C1;
  double lambda = 0.0;
  int n = 2;
  std::optional<double> lambda_h;

  AmbientSpace build() const { return AmbientSpace::make(model, lambda, n, lambda_h); }
  bool operator==(const SpaceSpec&) const = default;
};

struct OutputSpec {
  std::string dir = "out";
  /// Write profile_<step>.csv every this many steps; 0 disables snapshots.
  int snapshot_every = 0;
  bool operator==(const OutputSpec&) const = default;
};

struct RunConfig {
  SpaceSpec space;
  double a = 0.0, b = 1.0;
  InitialSpec initial;
  int N = 200;
  FlowConfig flow;
  OutputSpec output;

  bool operator==(const RunConfig&) const = default;
};

struct ConfigError {
  std::string path;
  std::string message;
};

struct ConfigResult {
  std::optional<RunConfig> config;
  std::vector<ConfigError> errors;

  bool ok() const { return config.has_value(); }
  std::string describe() const {
    std::string s;
    for (const auto& e : errors) s += e.path + ": " + e.message + "\n";
    return s;
  }
};

namespace detail {

using nlohmann::json;

class Reader {
 public:
  explicit Reader(std::vector<ConfigError>& errs) : errs_(errs) {}

  void fail(std::string path, std::string msg) { errs_.push_back({std::move(path), std::move(msg)}); }

  const json* object(const json& parent, const std::string& key, const std::string& path,
                     bool required) {
    if (!parent.contains(key)) {
      if (required) fail(path, "missing required object");
      return nullptr;
    }
    const json& v = parent.at(key);
    if (!v.is_object()) {
      fail(path, "must be an object");
      return nullptr;
    }
    return &v;
  }

  void number(const json& obj, const std::string& key, const std::string& path, double& out,
              bool required = false) {
    if (!obj.contains(key)) {
      if (required) fail(path + "." + key, "missing required number");
      return;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) return fail(path + "." + key, "must be a number");
    out = v.get<double>();
  }

  void integer(const json& obj, const std::string& key, const std::string& path, int& out,
               bool required = false) {
    if (!obj.contains(key)) {
      if (required) fail(path + "." + key, "missing required integer");
      return;
    }
    const json& v = obj.at(key);
    if (!v.is_number_integer()) return fail(path + "." + key, "must be an integer");
    out = v.get<int>();
  }

  void boolean(const json& obj, const std::string& key, const std::string& path, bool& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_boolean()) return fail(path + "." + key, "must be true or false");
    out = v.get<bool>();
  }

  std::optional<std::string> string(const json& obj, const std::string& key,
                                    const std::string& path, bool required = false) {
    if (!obj.contains(key)) {
      if (required) fail(path + "." + key, "missing required string");
      return std::nullopt;
    }
    const json& v = obj.at(key);
    if (!v.is_string()) {
      fail(path + "." + key, "must be a string");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  void known_keys(const json& obj, const std::string& path, std::set<std::string> keys) {
    for (const auto& [k, _] : obj.items())
      if (!keys.count(k)) fail(path.empty() ? k : path + "." + k, "unknown key");
  }

 private:
  std::vector<ConfigError>& errs_;
};

inline std::string_view kind_name(InitialSpec::Kind k) {
  switch (k) {
    case InitialSpec::Kind::Cylinder: return "cylinder";
    case InitialSpec::Kind::Perturbed: return "perturbed";
    case InitialSpec::Kind::Custom: return "custom";
  }
  return "cylinder";
}

}  // namespace detail

inline ConfigResult parse_config_json(const nlohmann::json& doc) {
  ConfigResult res;
  detail::Reader rd(res.errors);
  RunConfig cfg;
  if (!doc.is_object()) {
    rd.fail("", "config must be a JSON object");
    return res;
  }
  rd.known_keys(doc, "", {"space", "slab", "initial", "grid", "flow", "output"});

  bool space_ok = false;
  if (const auto* s = rd.object(doc, "space", "space", true)) {
    rd.known_keys(*s, "space", {"case", "lambda", "n", "lambda_h"});
    const std::size_t before = res.errors.size();
    if (auto tag = rd.string(*s, "case", "space", true)) {
      try {
        cfg.space.model = parse_case(*tag);
      } catch (const std::exception&) {
        rd.fail("space.case", "unknown case '" + *tag + "' (expected C1..C6)");
      }
    }
    rd.number(*s, "lambda", "space", cfg.space.lambda);
    rd.integer(*s, "n", "space", cfg.space.n);
    if (s->contains("lambda_h")) {
      double lh = 0.0;
      rd.number(*s, "lambda_h", "space", lh);
      cfg.space.lambda_h = lh;
    }
    if (res.errors.size() == before) {
      try {
        (void)cfg.space.build();
        space_ok = true;
      } catch (const std::exception& e) {
        rd.fail("space", e.what());
      }
    }
  }

  bool slab_ok = false;
  if (const auto* s = rd.object(doc, "slab", "slab", true)) {
    rd.known_keys(*s, "slab", {"a", "b"});
    const std::size_t before = res.errors.size();
    rd.number(*s, "a", "slab", cfg.a, true);
    rd.number(*s, "b", "slab", cfg.b, true);
    if (res.errors.size() == before) {
      if (!(cfg.a < cfg.b)) rd.fail("slab", "requires a < b");
      else slab_ok = true;
    }
  }
  if (space_ok && slab_ok) {
    const Interval J = cfg.space.build().z_domain();
    if (!J.contains(cfg.a) || !J.contains(cfg.b)) {
      rd.fail("slab", "[a, b] must lie inside the model's z interval");
      slab_ok = false;
    }
  }

  bool grid_ok = false;
  if (const auto* g = rd.object(doc, "grid", "grid", true)) {
    rd.known_keys(*g, "grid", {"N"});
    const std::size_t before = res.errors.size();
    rd.integer(*g, "N", "grid", cfg.N, true);
    if (res.errors.size() == before) {
      if (cfg.N < kMinNodes) rd.fail("grid.N", "must be >= 8");
      else grid_ok = true;
    }
  }

  bool initial_ok = false;
  if (const auto* s = rd.object(doc, "initial", "initial", true)) {
    rd.known_keys(*s, "initial", {"kind", "R", "epsilon", "k", "samples"});
    const std::size_t before = res.errors.size();
    if (auto kind = rd.string(*s, "kind", "initial", true)) {
      if (*kind == "cylinder") cfg.initial.kind = InitialSpec::Kind::Cylinder;
      else if (*kind == "perturbed") cfg.initial.kind = InitialSpec::Kind::Perturbed;
      else if (*kind == "custom") cfg.initial.kind = InitialSpec::Kind::Custom;
      else rd.fail("initial.kind", "expected cylinder, perturbed or custom");
    }
    rd.number(*s, "R", "initial", cfg.initial.R);
    rd.number(*s, "epsilon", "initial", cfg.initial.epsilon);
    rd.integer(*s, "k", "initial", cfg.initial.k);
    if (s->contains("samples")) {
      const auto& arr = s->at("samples");
      if (!arr.is_array()) {
        rd.fail("initial.samples", "must be an array of numbers");
      } else {
        for (std::size_t i = 0; i < arr.size(); ++i) {
          if (!arr[i].is_number()) rd.fail("initial.samples[" + std::to_string(i) + "]", "must be a number");
          else cfg.initial.samples.push_back(arr[i].get<double>());
        }
      }
    }
    if (cfg.initial.kind == InitialSpec::Kind::Custom && !s->contains("samples"))
      rd.fail("initial.samples", "custom profile needs samples");
    initial_ok = res.errors.size() == before;
  }
  if (space_ok && slab_ok && grid_ok && initial_ok) {
    try {
      (void)make_initial(cfg.space.build(), cfg.initial, cfg.a, cfg.b, cfg.N);
    } catch (const std::exception& e) {
      rd.fail("initial", e.what());
    }
  }

  if (const auto* f = rd.object(doc, "flow", "flow", false)) {
    rd.known_keys(*f, "flow", {"T_max", "dt", "scheme", "avg_mode", "eps_cmc", "eps_axis",
                               "output_every", "step_tol", "extrapolate", "monitors"});
    auto& fc = cfg.flow;
    rd.number(*f, "T_max", "flow", fc.T_max);
    if (const auto* d = rd.object(*f, "dt", "flow.dt", false)) {
      rd.known_keys(*d, "flow.dt", {"cfl_safety", "dt_max", "dt_min"});
      rd.number(*d, "cfl_safety", "flow.dt", fc.dt.cfl_safety);
      rd.number(*d, "dt_max", "flow.dt", fc.dt.dt_max);
      rd.number(*d, "dt_min", "flow.dt", fc.dt.dt_min);
    }
    if (auto s = rd.string(*f, "scheme", "flow")) {
      if (auto v = parse_scheme(*s)) fc.scheme = *v;
      else rd.fail("flow.scheme", "expected imex or explicit_rk4");
    }
    if (auto s = rd.string(*f, "avg_mode", "flow")) {
      if (auto v = parse_avg_mode(*s)) fc.avg_mode = *v;
      else rd.fail("flow.avg_mode", "expected volume_consistent or geometric");
    }
    rd.number(*f, "eps_cmc", "flow", fc.eps_cmc);
    rd.number(*f, "eps_axis", "flow", fc.eps_axis);
    rd.integer(*f, "output_every", "flow", fc.output_every);
    rd.number(*f, "step_tol", "flow", fc.step_tol);
    rd.boolean(*f, "extrapolate", "flow", fc.extrapolate);
    rd.boolean(*f, "monitors", "flow", fc.monitors);
  }
  for (const auto& p : cfg.flow.problems()) rd.fail("flow", p);

  if (const auto* o = rd.object(doc, "output", "output", false)) {
    rd.known_keys(*o, "output", {"dir", "snapshot_every"});
    if (auto d = rd.string(*o, "dir", "output")) cfg.output.dir = *d;
    rd.integer(*o, "snapshot_every", "output", cfg.output.snapshot_every);
    if (cfg.output.snapshot_every < 0) rd.fail("output.snapshot_every", "must be >= 0");
  }

  if (res.errors.empty()) res.config = std::move(cfg);
  return res;
}

/// Parses a JSON document; malformed JSON is reported as a single error at path "".
inline ConfigResult parse_config(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    ConfigResult r;
    r.errors.push_back({"", std::string("malformed JSON: ") + e.what()});
    return r;
  }
  return parse_config_json(doc);
}

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["space"] = {{"case", std::string(to_string(c.space.model))},
                {"lambda", c.space.lambda},
                {"n", c.space.n}};
  if (c.space.lambda_h) j["space"]["lambda_h"] = *c.space.lambda_h;
  j["slab"] = {{"a", c.a}, {"b", c.b}};
  j["initial"] = {{"kind", std::string(detail::kind_name(c.initial.kind))},
                  {"R", c.initial.R},
                  {"epsilon", c.initial.epsilon},
                  {"k", c.initial.k}};
  if (!c.initial.samples.empty()) j["initial"]["samples"] = c.initial.samples;
  j["grid"] = {{"N", c.N}};
  const auto& f = c.flow;
  j["flow"] = {{"T_max", f.T_max},
               {"dt", {{"cfl_safety", f.dt.cfl_safety}, {"dt_max", f.dt.dt_max}, {"dt_min", f.dt.dt_min}}},
               {"scheme", std::string(to_string(f.scheme))},
               {"avg_mode", std::string(to_string(f.avg_mode))},
               {"eps_cmc", f.eps_cmc},
               {"eps_axis", f.eps_axis},
               {"output_every", f.output_every},
               {"step_tol", f.step_tol},
               {"extrapolate", f.extrapolate},
               {"monitors", f.monitors}};
  j["output"] = {{"dir", c.output.dir}, {"snapshot_every", c.output.snapshot_every}};
  return j;
}

inline std::string serialize_config(const RunConfig& c) { return to_json(c).dump(2); }

}  // namespace eqflow
