// eqflow command-line driver.
//
//   eqflow run --config cfg.json [--out DIR]
//   eqflow bounds --config cfg.json
//   eqflow appendix-b --case C2|C5 [--samples N] [--lambda L] [--out DIR]
//   eqflow verify-curvature --config cfg.json
//   eqflow sweep --config base.json --variants variants.json [--out DIR] [--jobs J]
//
// Exit codes: 0 ok, 1 config/usage error, 2 singular_axis, 3 step_failure,
// 4 I/O failure, 5 a verification threshold was exceeded.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "eqflow/eqflow.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit : int { kOk = 0, kConfig = 1, kSingular = 2, kStepFailure = 3, kIo = 4, kCheck = 5 };

int exit_for(eqflow::Termination t) {
  switch (t) {
    case eqflow::Termination::ReachedT:
    case eqflow::Termination::Steady: return kOk;
    case eqflow::Termination::SingularAxis: return kSingular;
    case eqflow::Termination::StepFailure: return kStepFailure;
  }
  return kStepFailure;
}

struct ConfigError {
  std::string message;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError{"cannot read config file " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

eqflow::RunConfig load_config(const std::string& path) {
  const auto res = eqflow::parse_config(read_text(path));
  if (!res.ok()) throw ConfigError{res.describe()};
  return *res.config;
}

struct RunOutcome {
  int code = kOk;
  json summary;
};

// Runs one config into `dir`; never throws.
RunOutcome execute_run(const eqflow::RunConfig& cfg, const fs::path& dir) {
  RunOutcome out;
  try {
    eqflow::ensure_directory(dir);
  } catch (const eqflow::IoError& e) {
    out.code = kIo;
    out.summary = {{"error", e.what()}};
    return out;
  }
  try {
    const auto sp = cfg.space.build();
    const auto initial = eqflow::make_initial(sp, cfg.initial, cfg.a, cfg.b, cfg.N);
    const int every = cfg.output.snapshot_every;
    auto snap = [&](const eqflow::FlowState& s) {
      if (every > 0 && s.step % every == 0)
        eqflow::atomic_write(dir / ("profile_" + std::to_string(s.step) + ".csv"),
                             eqflow::profile_csv(s.profile));
    };
    const auto res = eqflow::run(sp, initial, cfg.flow, snap);
    eqflow::atomic_write(dir / "run.csv", eqflow::run_csv(res.record));
    eqflow::atomic_write(dir / "final_profile.csv", eqflow::profile_csv(res.final_state.profile));
    eqflow::atomic_write(dir / "final_geometry.csv",
                         eqflow::geometry_csv(res.final_state.profile, res.final_state.geometry));
    out.summary = eqflow::run_summary_json(res);
    out.summary["config"] = eqflow::to_json(cfg);
    eqflow::atomic_write(dir / "summary.json", out.summary.dump(2) + "\n");
    out.code = exit_for(res.reason);
  } catch (const eqflow::IoError& e) {
    out.code = kIo;
    out.summary = {{"error", e.what()}};
  } catch (const std::exception& e) {
    out.code = kStepFailure;
    out.summary = {{"error", e.what()}};
  }
  return out;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  auto cfg = load_config(config_path);
  if (!out_dir.empty()) cfg.output.dir = out_dir;
  const auto r = execute_run(cfg, cfg.output.dir);
  std::cout << r.summary.dump(2) << "\n";
  return r.code;
}

int cmd_bounds(const std::string& config_path) {
  const auto cfg = load_config(config_path);
  const auto sp = cfg.space.build();
  const auto initial = eqflow::make_initial(sp, cfg.initial, cfg.a, cfg.b, cfg.N);
  std::cout << eqflow::to_json(eqflow::compute_bounds(sp, initial)).dump(2) << "\n";
  return kOk;
}

constexpr double kPaperC5 = -9.72488e24;

int cmd_appendix_b(const std::string& tag, int samples, double lambda, const std::string& out_dir) {
  eqflow::ModelCase model;
  try {
    model = eqflow::parse_case(tag);
  } catch (const std::exception&) {
    throw ConfigError{"--case must be C2 or C5"};
  }
  if (model != eqflow::ModelCase::C2 && model != eqflow::ModelCase::C5)
    throw ConfigError{"--case must be C2 or C5"};
  if (samples < eqflow::kMinNodes) throw ConfigError{"--samples must be >= 8"};
  const auto rep = eqflow::appendix_b(model, samples, lambda);
  json j = eqflow::to_json(rep);
  if (model == eqflow::ModelCase::C5 && std::abs(rep.normalized / kPaperC5 - 1.0) > 1e-3) {
    json sweep = json::array();
    for (double l : {-0.25, -0.5, -1.0, -2.0, -4.0}) {
      const auto r = eqflow::appendix_b(model, samples, l);
      sweep.push_back({{"lambda", l}, {"normalized", r.normalized}});
    }
    j["lambda_sweep"] = sweep;
  }
  if (!out_dir.empty()) {
    try {
      eqflow::ensure_directory(out_dir);
      const auto curve = eqflow::sample_cycloid(rep.s1, rep.s2, samples);
      eqflow::atomic_write(fs::path(out_dir) / ("appendix_b_" + tag + ".json"), j.dump(2) + "\n");
      eqflow::atomic_write(fs::path(out_dir) / ("cycloid_" + tag + ".csv"), eqflow::curve_csv(curve));
    } catch (const eqflow::IoError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kIo;
    }
  }
  std::cout << j.dump(2) << "\n";
  return kOk;
}

int cmd_verify_curvature(const std::string& config_path) {
  const auto cfg = load_config(config_path);
  const auto sp = cfg.space.build();
  // sampled rect: the slab times a radius range inside (0, first zero of h)
  const double r_lo = 0.05;
  const double r_hi = sp.frak_z().min_with(3.0 / 0.95) * 0.95;
  constexpr int nz = 40, nr = 25;
  double worst = 0.0;
  for (int i = 0; i < nz; ++i) {
    const double z = cfg.a + (cfg.b - cfg.a) * i / (nz - 1);
    for (int k = 0; k < nr; ++k) {
      const double r = r_lo + (r_hi - r_lo) * k / (nr - 1);
      const auto c = sp.curvature_components(z, r);
      for (double v : {c.k_zplane, c.k_rplane, c.k_sphere})
        worst = std::max(worst, std::abs(v - sp.lambda()));
    }
  }
  json j = {{"case", std::string(eqflow::to_string(sp.model()))},
            {"lambda", sp.lambda()},
            {"space_form", sp.is_space_form()},
            {"points", nz * nr},
            {"rect", {cfg.a, cfg.b, r_lo, r_hi}},
            {"max_deviation", worst}};
  std::cout << j.dump(2) << "\n";
  return worst <= 1e-9 ? kOk : kCheck;
}

json load_variants(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError{std::string("variants: malformed JSON: ") + e.what()};
  }
  if (doc.is_object() && doc.contains("variants")) doc = doc["variants"];
  if (!doc.is_array()) throw ConfigError{"variants: expected an array of merge patches"};
  return doc;
}

int cmd_sweep(const std::string& base_path, const std::string& variants_path,
              const std::string& out_dir, int jobs) {
  const json base = json::parse(read_text(base_path), nullptr, false);
  if (base.is_discarded()) throw ConfigError{"base config: malformed JSON"};
  const json variants = load_variants(variants_path);

  // validate every variant before anything runs
  std::vector<eqflow::RunConfig> configs;
  std::string problems;
  for (std::size_t k = 0; k < variants.size(); ++k) {
    json doc = base;
    doc.merge_patch(variants[k]);
    const auto res = eqflow::parse_config_json(doc);
    if (!res.ok()) problems += "variant " + std::to_string(k) + ":\n" + res.describe();
    else configs.push_back(*res.config);
  }
  if (!problems.empty()) throw ConfigError{problems};

  const fs::path root = out_dir.empty() ? fs::path(configs.empty() ? "out" : configs[0].output.dir)
                                        : fs::path(out_dir);
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<RunOutcome> outcomes(configs.size());
  for (std::size_t start = 0; start < configs.size(); start += jobs) {
    std::vector<std::future<RunOutcome>> batch;
    const std::size_t stop = std::min(configs.size(), start + static_cast<std::size_t>(jobs));
    for (std::size_t k = start; k < stop; ++k) {
      auto dir = root / ("run_" + std::to_string(k));
      configs[k].output.dir = dir.string();
      batch.push_back(std::async(std::launch::async, execute_run, configs[k], dir));
    }
    for (std::size_t k = start; k < stop; ++k) outcomes[k] = batch[k - start].get();
  }

  json table = json::array();
  int code = kOk;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    table.push_back({{"variant", k}, {"exit", outcomes[k].code}, {"summary", outcomes[k].summary}});
    code = std::max(code, outcomes[k].code);
  }
  try {
    eqflow::ensure_directory(root);
    eqflow::atomic_write(root / "sweep.json", table.dump(2) + "\n");
  } catch (const eqflow::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
  std::cout << table.dump(2) << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Volume-preserving mean curvature flow between equidistant hypersurfaces"};
  app.require_subcommand(1);

  std::string config, out, variants, tag = "C2";
  int samples = 10000, jobs = 0;
  double lambda = -1.0;

  auto* run = app.add_subcommand("run", "Evolve a configured initial profile");
  run->add_option("--config", config, "JSON run configuration")->required();
  run->add_option("--out", out, "Output directory (overrides output.dir)");

  auto* bounds = app.add_subcommand("bounds", "Print the a-priori bounds of the initial state");
  bounds->add_option("--config", config, "JSON run configuration")->required();

  auto* appb = app.add_subcommand("appendix-b", "Averaged mean curvature of the cycloid example");
  appb->add_option("--case", tag, "C2 or C5");
  appb->add_option("--samples", samples, "Curve samples");
  appb->add_option("--lambda", lambda, "Curvature for C5");
  appb->add_option("--out", out, "Directory for the JSON report and the curve CSV");

  auto* verify = app.add_subcommand("verify-curvature", "Check sectional curvatures against lambda");
  verify->add_option("--config", config, "JSON run configuration")->required();

  auto* sweep = app.add_subcommand("sweep", "Run merge-patch variants of a base config concurrently");
  sweep->add_option("--config", config, "Base JSON configuration")->required();
  sweep->add_option("--variants", variants, "JSON array of merge patches")->required();
  sweep->add_option("--out", out, "Root output directory");
  sweep->add_option("--jobs", jobs, "Concurrent runs (default: hardware threads)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*run) return cmd_run(config, out);
    if (*bounds) return cmd_bounds(config);
    if (*appb) return cmd_appendix_b(tag, samples, lambda, out);
    if (*verify) return cmd_verify_curvature(config);
    if (*sweep) return cmd_sweep(config, variants, out, jobs);
  } catch (const ConfigError& e) {
    std::cerr << "config error:\n" << e.message << "\n";
    return kConfig;
  } catch (const eqflow::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
  return kConfig;
}
