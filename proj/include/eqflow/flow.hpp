/// @file flow.hpp
/// @brief Time integration of the volume-preserving mean curvature flow of a
/// graph r(z, t) with Neumann ends, plus steady-state and axis detection.
///
/// The graph equation is
///   r_t = r''/c^2 + (f'/f)(1/c^2 + n) r' - (n-1) h'/(h f^2) + avgH c/f,
/// c^2 = 1 + f^2 r'^2, which equals (c/f)(avgH - H) node by node.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eqflow/ambient.hpp"
#include "eqflow/bounds.hpp"
#include "eqflow/curve.hpp"
#include "eqflow/geometry.hpp"

namespace eqflow {

enum class Scheme { Imex, ExplicitRk4 };
enum class AvgMode { VolumeConsistent, Geometric };
enum class Termination { ReachedT, Steady, SingularAxis, StepFailure };

inline std::string_view to_string(Scheme s) { return s == Scheme::Imex ? "imex" : "explicit_rk4"; }
inline std::string_view to_string(AvgMode m) {
  return m == AvgMode::VolumeConsistent ? "volume_consistent" : "geometric";
}
inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::ReachedT: return "reached_T";
    case Termination::Steady: return "steady";
    case Termination::SingularAxis: return "singular_axis";
    case Termination::StepFailure: return "step_failure";
  }
  return "unknown";
}
inline std::optional<Scheme> parse_scheme(std::string_view s) {
  if (s == "imex") return Scheme::Imex;
  if (s == "explicit_rk4") return Scheme::ExplicitRk4;
  return std::nullopt;
}
inline std::optional<AvgMode> parse_avg_mode(std::string_view s) {
  if (s == "volume_consistent") return AvgMode::VolumeConsistent;
  if (s == "geometric") return AvgMode::Geometric;
  return std::nullopt;
}

struct DtPolicy {
  double cfl_safety = 0.4;
  double dt_max = 1e-3;
  double dt_min = 1e-14;
  bool operator==(const DtPolicy&) const = default;
};

struct FlowConfig {
  double T_max = 10.0;
  DtPolicy dt;
  Scheme scheme = Scheme::Imex;
  AvgMode avg_mode = AvgMode::VolumeConsistent;
  double eps_cmc = 1e-5;
  double eps_axis = 1e-3;
  int output_every = 1;
  /// Step-doubling tolerance on max |r_full - r_half| (IMEX only).
  double step_tol = 1e-6;
  /// Return 2 r_half - r_full from step doubling (second order in dt).
  bool extrapolate = true;
  bool monitors = true;

  bool operator==(const FlowConfig&) const = default;

  /// Empty when valid, otherwise one message per problem.
  std::vector<std::string> problems() const {
    std::vector<std::string> out;
    if (!(T_max >= 0.0)) out.push_back("T_max must be >= 0");
    if (!(dt.cfl_safety > 0.0 && dt.cfl_safety <= 1.0)) out.push_back("dt.cfl_safety must be in (0, 1]");
    if (!(dt.dt_min > 0.0)) out.push_back("dt.dt_min must be > 0");
    if (!(dt.dt_max > 0.0)) out.push_back("dt.dt_max must be > 0");
    if (!(dt.dt_min <= dt.dt_max)) out.push_back("dt.dt_min must not exceed dt.dt_max");
    if (!(eps_cmc > 0.0)) out.push_back("eps_cmc must be > 0");
    if (!(eps_axis > 0.0)) out.push_back("eps_axis must be > 0");
    if (!(step_tol > 0.0)) out.push_back("step_tol must be > 0");
    if (output_every < 1) out.push_back("output_every must be >= 1");
    return out;
  }
};

// ---------------------------------------------------------------------------
// Right-hand side

namespace detail {

// r_t = base + avgH * c_over_f; a = 1/c^2 is the diffusion coefficient.
struct RhsParts {
  std::vector<double> a, base, c_over_f, weight_v;  // weight_v = f^n h^{n-1}
  std::vector<double> d2;
};

inline RhsParts rhs_parts(const AmbientSpace& sp, const GraphProfile& p) {
  const Derivatives d = diff(p);
  const std::size_t m = p.size();
  const int n = sp.n();
  RhsParts q{std::vector<double>(m), std::vector<double>(m), std::vector<double>(m),
             std::vector<double>(m), d.d2};
  for (std::size_t i = 0; i < m; ++i) {
    check_radius(sp, p.r[i]);
    const WarpValues w = sp.eval(p.z(static_cast<int>(i)), p.r[i]);
    const double fr = w.f * d.d1[i];
    const double c2 = 1.0 + fr * fr;
    const double a = 1.0 / c2;
    q.a[i] = a;
    q.base[i] = a * d.d2[i] + (w.df / w.f) * (a + n) * d.d1[i] -
                (n - 1) * w.dh / (w.h * w.f * w.f);
    q.c_over_f[i] = std::sqrt(c2) / w.f;
    q.weight_v[i] = std::pow(w.f, n) * std::pow(w.h, n - 1);
  }
  return q;
}

inline double volume_consistent_avg(const RhsParts& q, double dz) {
  const std::size_t m = q.a.size();
  std::vector<double> num(m), den(m);
  for (std::size_t i = 0; i < m; ++i) {
    num[i] = -q.weight_v[i] * q.base[i];
    den[i] = q.weight_v[i] * q.c_over_f[i];
  }
  const double D = scaled_integral(den, dz, QuadratureRule::Trapezoid);
  if (!(D > 0.0) || !std::isfinite(D))
    throw std::domain_error("averaged mean curvature: area underflow");
  return scaled_integral(num, dz, QuadratureRule::Trapezoid) / D;
}

}  // namespace detail

inline std::vector<double> rhs(const AmbientSpace& sp, const GraphProfile& p, double avgH) {
  const auto q = detail::rhs_parts(sp, p);
  std::vector<double> out(q.base.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = q.base[i] + avgH * q.c_over_f[i];
  return out;
}

/// Volume-consistent mode returns the avgH for which the trapezoid volume
/// derivative omega sum w_i f^n h^{n-1} r_t,i vanishes. Geometric mode
/// returns int H dmu / |M| with Simpson weights.
inline double averaged_for_step(const AmbientSpace& sp, const GraphProfile& p, AvgMode mode) {
  if (mode == AvgMode::Geometric) return averaged_H_direct(sp, p, QuadratureRule::Simpson);
  return detail::volume_consistent_avg(detail::rhs_parts(sp, p), p.dz());
}

// ---------------------------------------------------------------------------
// Stepping

struct FlowState {
  double t = 0.0;
  GraphProfile profile;
  GeometrySummary geometry;
  double avgH = 0.0;       // the step's nonlocal term at this state
  double dt_next = 0.0;    // suggested next step, 0 = choose from policy
  long step = 0;
};

inline FlowState make_state(const AmbientSpace& sp, GraphProfile p, AvgMode mode, double t = 0.0) {
  FlowState s{t, std::move(p), {}, 0.0, 0.0, 0};
  s.geometry = summarize(sp, s.profile);
  s.avgH = averaged_for_step(sp, s.profile, mode);
  return s;
}

namespace detail {

inline bool admissible(const AmbientSpace& sp, const std::vector<double>& r) {
  for (double x : r) {
    if (!std::isfinite(x) || !(x > 0.0)) return false;
    if (sp.frak_z().is_finite() && !(x < sp.frak_z().value())) return false;
  }
  return true;
}

// One linearly implicit Euler step: (I - dt a D2) r_new = r + dt (b + avgH c/f),
// a frozen and avgH lagged at the current state. D2 carries the ghost closure.
inline std::optional<GraphProfile> imex_euler(const AmbientSpace& sp, const GraphProfile& p,
                                              double dt, AvgMode mode) {
  const RhsParts q = rhs_parts(sp, p);
  const double avgH = mode == AvgMode::Geometric ? averaged_H_direct(sp, p, QuadratureRule::Simpson)
                                                 : volume_consistent_avg(q, p.dz());
  const int N = p.intervals();
  const double k = dt / (p.dz() * p.dz());
  std::vector<double> lo(N + 1, 0.0), di(N + 1), up(N + 1, 0.0), rhs_v(N + 1);
  for (int i = 0; i <= N; ++i) {
    const double ka = k * q.a[i];
    di[i] = 1.0 + 2.0 * ka;
    if (i == 0) up[i] = -2.0 * ka;
    else if (i == N) lo[i] = -2.0 * ka;
    else lo[i] = up[i] = -ka;
    // explicit part: everything except the implicit a * r''
    const double b = q.base[i] - q.a[i] * q.d2[i] + avgH * q.c_over_f[i];
    rhs_v[i] = p.r[i] + dt * b;
  }
  GraphProfile next(p.a, p.b, CubicSpline::solve_tridiagonal(lo, di, up, rhs_v));
  if (!admissible(sp, next.r)) return std::nullopt;
  return next;
}

inline std::optional<GraphProfile> rk4(const AmbientSpace& sp, const GraphProfile& p, double dt,
                                       AvgMode mode) {
  auto stage = [&](const GraphProfile& s) -> std::optional<std::vector<double>> {
    if (!admissible(sp, s.r)) return std::nullopt;
    return rhs(sp, s, averaged_for_step(sp, s, mode));
  };
  auto shifted = [&](const std::vector<double>& k, double w) {
    GraphProfile s = p;
    for (std::size_t i = 0; i < s.r.size(); ++i) s.r[i] += w * k[i];
    return s;
  };
  const auto k1 = stage(p);
  if (!k1) return std::nullopt;
  const auto k2 = stage(shifted(*k1, 0.5 * dt));
  if (!k2) return std::nullopt;
  const auto k3 = stage(shifted(*k2, 0.5 * dt));
  if (!k3) return std::nullopt;
  const auto k4 = stage(shifted(*k3, dt));
  if (!k4) return std::nullopt;
  GraphProfile next = p;
  for (std::size_t i = 0; i < next.r.size(); ++i)
    next.r[i] += dt / 6.0 * ((*k1)[i] + 2.0 * (*k2)[i] + 2.0 * (*k3)[i] + (*k4)[i]);
  if (!admissible(sp, next.r)) return std::nullopt;
  return next;
}

inline double explicit_dt(const AmbientSpace& sp, const GraphProfile& p, const FlowConfig& cfg) {
  const auto q = rhs_parts(sp, p);
  const double amax = *std::max_element(q.a.begin(), q.a.end());  // 1 / min c^2
  return std::min(cfg.dt.dt_max, cfg.dt.cfl_safety * p.dz() * p.dz() / amax);
}

// The scheme's step at a fixed dt, without error control.
inline std::optional<GraphProfile> fixed_step(const AmbientSpace& sp, const GraphProfile& p,
                                              double dt, const FlowConfig& cfg) {
  if (cfg.scheme == Scheme::ExplicitRk4) return rk4(sp, p, dt, cfg.avg_mode);
  auto half = imex_euler(sp, p, 0.5 * dt, cfg.avg_mode);
  if (half) half = imex_euler(sp, *half, 0.5 * dt, cfg.avg_mode);
  if (!half || !cfg.extrapolate) return half;
  const auto full = imex_euler(sp, p, dt, cfg.avg_mode);
  if (!full) return std::nullopt;
  GraphProfile ex = *half;
  for (std::size_t i = 0; i < ex.r.size(); ++i) ex.r[i] = 2.0 * half->r[i] - full->r[i];
  if (!admissible(sp, ex.r)) return std::nullopt;
  return ex;
}

}  // namespace detail

struct StepResult {
  std::optional<GraphProfile> next;  // empty on step failure
  double dt_taken = 0.0;
  double dt_suggest = 0.0;
  double error = 0.0;
  int rejections = 0;
};

/// Error-controlled step from `p` trying `dt` first (clipped to the policy).
/// IMEX: step doubling, accepted when max |r_dt - r_{dt/2,dt/2}| <= step_tol,
/// returning the two-half-step result. Explicit RK4: fixed stability step.
inline StepResult advance(const AmbientSpace& sp, const GraphProfile& p, double dt,
                          const FlowConfig& cfg) {
  StepResult res;
  if (cfg.scheme == Scheme::ExplicitRk4) {
    double h = std::min(dt, detail::explicit_dt(sp, p, cfg));
    while (h >= cfg.dt.dt_min) {
      if (auto nx = detail::rk4(sp, p, h, cfg.avg_mode)) {
        res.next = std::move(nx);
        res.dt_taken = h;
        res.dt_suggest = detail::explicit_dt(sp, *res.next, cfg);
        return res;
      }
      h *= 0.5;
      ++res.rejections;
    }
    return res;
  }
  double h = std::min(dt, cfg.dt.dt_max);
  while (h >= cfg.dt.dt_min) {
    auto full = detail::imex_euler(sp, p, h, cfg.avg_mode);
    std::optional<GraphProfile> half;
    if (full) {
      half = detail::imex_euler(sp, p, 0.5 * h, cfg.avg_mode);
      if (half) half = detail::imex_euler(sp, *half, 0.5 * h, cfg.avg_mode);
    }
    if (full && half) {
      double err = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i)
        err = std::max(err, std::abs(full->r[i] - half->r[i]));
      const double factor =
          err > 0.0 ? std::clamp(0.9 * std::sqrt(cfg.step_tol / err), 0.2, 2.0) : 2.0;
      if (err <= cfg.step_tol) {
        if (cfg.extrapolate) {
          GraphProfile ex = *half;
          for (std::size_t i = 0; i < ex.r.size(); ++i) ex.r[i] = 2.0 * half->r[i] - full->r[i];
          if (detail::admissible(sp, ex.r)) half = std::move(ex);
        }
        res.next = std::move(half);
        res.dt_taken = h;
        res.error = err;
        res.dt_suggest = std::min(cfg.dt.dt_max, h * factor);
        return res;
      }
      h *= factor;
    } else {
      h *= 0.25;
    }
    ++res.rejections;
  }
  return res;
}

/// One accepted step of the flow from `state`; throws std::runtime_error on
/// step failure. The run loop below uses `advance` directly.
inline FlowState step(const AmbientSpace& sp, const FlowState& state, const FlowConfig& cfg) {
  const double dt0 = state.dt_next > 0.0 ? state.dt_next : cfg.dt.dt_max;
  StepResult r = advance(sp, state.profile, dt0, cfg);
  if (!r.next) throw std::runtime_error("step_failure: dt_min reached without meeting error control");
  FlowState out = make_state(sp, std::move(*r.next), cfg.avg_mode, state.t + r.dt_taken);
  out.dt_next = r.dt_suggest;
  out.step = state.step + 1;
  return out;
}

inline double sup_H_deviation(const GeometrySummary& g, double avgH) {
  double m = 0.0;
  for (double H : g.H) m = std::max(m, std::abs(H - avgH));
  return m;
}

inline bool detect_steady(const FlowState& s, double eps) {
  return sup_H_deviation(s.geometry, s.avgH) <= eps;
}

// ---------------------------------------------------------------------------
// Run loop

struct FlowRow {
  double t = 0.0, dt = 0.0;
  double area = 0.0, volume = 0.0, avgH = 0.0;
  double r_min = 0.0, r_max = 0.0, v_max = 0.0, L_max = 0.0;
  double sup_H_dev = 0.0;
  bool viol_r2 = false, viol_h2 = false, viol_vbound = false, viol_area = false;
  double vol_drift = 0.0;
  long step = 0;
  std::optional<ViolationReport> monitors;

  bool operator==(const FlowRow& o) const {
    return t == o.t && dt == o.dt && area == o.area && volume == o.volume && avgH == o.avgH &&
           r_min == o.r_min && r_max == o.r_max && v_max == o.v_max && L_max == o.L_max &&
           sup_H_dev == o.sup_H_dev && viol_r2 == o.viol_r2 && viol_h2 == o.viol_h2 &&
           viol_vbound == o.viol_vbound && viol_area == o.viol_area && vol_drift == o.vol_drift &&
           step == o.step;
  }
};

struct FlowRecord {
  std::vector<FlowRow> rows;
  bool operator==(const FlowRecord&) const = default;
};

struct FlowResult {
  FlowRecord record;
  Termination reason = Termination::ReachedT;
  /// For singular_axis: "r_min -> 0" or "r_max -> first zero of h".
  std::string detail;
  FlowState final_state;
  long steps = 0;
  long rejections = 0;
};

/// Called with the initial state and every accepted state.
using FlowObserver = std::function<void(const FlowState&)>;

namespace detail {

inline double distance_to_axes(const AmbientSpace& sp, const std::vector<double>& r, bool* lower) {
  const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
  double d = *lo;
  *lower = true;
  if (sp.frak_z().is_finite() && sp.frak_z().value() - *hi < d) {
    d = sp.frak_z().value() - *hi;
    *lower = false;
  }
  return d;
}

}  // namespace detail

inline FlowResult run(const AmbientSpace& sp, const GraphProfile& initial, const FlowConfig& cfg,
                      const FlowObserver& observer = {}) {
  if (const auto pr = cfg.problems(); !pr.empty()) throw std::invalid_argument("flow config: " + pr.front());
  FlowResult out;
  FlowState s = make_state(sp, initial, cfg.avg_mode);
  const double V0 = s.geometry.volume;

  std::optional<MonitorState> mon;
  if (cfg.monitors) mon.emplace(sp, initial, compute_bounds(sp, initial));

  auto record = [&](double dt, double elapsed) {
    FlowRow row;
    const auto& g = s.geometry;
    row.t = s.t;
    row.dt = dt;
    row.step = s.step;
    row.area = g.area;
    row.volume = g.volume;
    row.avgH = s.avgH;
    const auto [lo, hi] = std::minmax_element(s.profile.r.begin(), s.profile.r.end());
    row.r_min = *lo;
    row.r_max = *hi;
    row.v_max = *std::max_element(g.v.begin(), g.v.end());
    row.L_max = *std::max_element(g.L_norm.begin(), g.L_norm.end());
    row.sup_H_dev = sup_H_deviation(g, s.avgH);
    row.vol_drift = std::abs(g.volume - V0) / V0;
    if (mon) {
      ViolationReport rep = mon->check(sp, s.profile, g, s.t, elapsed);
      row.viol_r2 = rep.fails("r2");
      row.viol_h2 = rep.fails("h2");
      row.viol_vbound = rep.fails("vbound");
      row.viol_area = rep.fails("area");
      row.monitors = std::move(rep);
    }
    out.record.rows.push_back(row);
  };

  auto finish = [&](Termination why) {
    out.reason = why;
    out.final_state = s;
    out.steps = s.step;
    return out;
  };

  bool lower = true;
  if (detail::distance_to_axes(sp, s.profile.r, &lower) <= cfg.eps_axis) {
    record(0.0, 0.0);
    out.detail = lower ? "r_min -> 0" : "r_max -> first zero of h";
    return finish(Termination::SingularAxis);
  }
  record(0.0, 0.0);
  if (observer) observer(s);
  if (detect_steady(s, cfg.eps_cmc)) return finish(Termination::Steady);

  double dt_try = cfg.dt.dt_max;
  double t_last_record = 0.0;
  while (s.t < cfg.T_max) {
    const double remaining = cfg.T_max - s.t;
    StepResult r = advance(sp, s.profile, std::min(dt_try, remaining), cfg);
    out.rejections += r.rejections;
    if (!r.next) {
      out.detail = "dt fell below dt_min";
      return finish(Termination::StepFailure);
    }
    double taken = r.dt_taken;
    GraphProfile next = std::move(*r.next);

    if (detail::distance_to_axes(sp, next.r, &lower) < cfg.eps_axis) {
      // shorten the step so the last state sits just outside the margin
      double lo_dt = 0.0, hi_dt = taken;
      std::optional<GraphProfile> best;
      double best_dt = 0.0;
      for (int it = 0; it < 100 && hi_dt - lo_dt > 1e-15 * taken; ++it) {
        const double mid = 0.5 * (lo_dt + hi_dt);
        auto trial = detail::fixed_step(sp, s.profile, mid, cfg);
        bool low_side = true;
        const double d = trial ? detail::distance_to_axes(sp, trial->r, &low_side) : -1.0;
        if (d < cfg.eps_axis) {
          hi_dt = mid;
          continue;
        }
        lo_dt = mid;
        best = std::move(trial);
        best_dt = mid;
        lower = low_side;
        if (d <= 1.1 * cfg.eps_axis) break;
      }
      if (best) {
        const long prev_step = s.step;
        s = make_state(sp, std::move(*best), cfg.avg_mode, s.t + best_dt);
        s.step = prev_step + 1;
        record(best_dt, s.t - t_last_record);
        if (observer) observer(s);
      }
      out.detail = lower ? "r_min -> 0" : "r_max -> first zero of h";
      return finish(Termination::SingularAxis);
    }

    const long prev_step = s.step;
    s = make_state(sp, std::move(next), cfg.avg_mode, s.t + taken);
    s.step = prev_step + 1;
    s.dt_next = r.dt_suggest;
    dt_try = r.dt_suggest;
    // land exactly on T_max, including round-off slivers below dt_min
    if (remaining <= taken || cfg.T_max - s.t <= 1e-12 * std::max(1.0, cfg.T_max)) s.t = cfg.T_max;

    if (observer) observer(s);
    const bool steady = detect_steady(s, cfg.eps_cmc);
    const bool last = steady || s.t >= cfg.T_max;
    if (last || s.step % cfg.output_every == 0) {
      record(taken, s.t - t_last_record);
      t_last_record = s.t;
    }
    if (steady) return finish(Termination::Steady);
  }
  return finish(Termination::ReachedT);
}

}  // namespace eqflow
