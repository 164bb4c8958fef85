/// @file bounds.hpp
/// @brief A-priori constants of the flow and the runtime monitors that check
/// an evolving state against them.
///
/// Every constant is computed from closed-form model functions and sampled sup
/// norms over the rectangle [a,b] x [rho, d]. The monitors compare the
/// observed state with:
///   - the radius bound r < min{first zero of h, r2},
///   - the averaged mean curvature bound |avgH| <= h2(rho, d),
///   - the graph bound v <= max{e^{C d} max v0, frak_h / C_tilde},
///   - area monotonicity and the area dissipation identity,
///   - volume drift.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "eqflow/ambient.hpp"
#include "eqflow/curve.hpp"
#include "eqflow/geometry.hpp"

namespace eqflow {

/// int_a^b f^n dz.
inline double f_power_integral(const AmbientSpace& sp, double a, double b) {
  const int n = sp.n();
  return integrate_function([&](double z) { return std::pow(sp.f(z), n); }, a, b, 1e-13);
}

/// sup over [a,b] of f^{-n}.
inline double f_inv_n_sup(const AmbientSpace& sp, double a, double b,
                          int samples = kDefaultSupSamples) {
  const int n = sp.n();
  return detail::refined_sup_1d([&](double z) { return std::pow(sp.f(z), -n); }, a, b, samples);
}

struct RadiusBounds {
  double r1 = 0.0;
  /// Unset when the delta^{-1} argument exceeds delta(first zero of h).
  std::optional<double> r2;

  /// min{first zero of h, r2} with the undefined convention applied.
  double effective_r2(const AmbientSpace& sp) const {
    if (r2) return sp.frak_z().min_with(*r2);
    return sp.frak_z().value();
  }
};

inline RadiusBounds radius_bounds(const AmbientSpace& sp, double a, double b, double V,
                                  double area) {
  const double omega = sphere_volume(sp.n());
  const double fint = f_power_integral(sp, a, b);
  RadiusBounds rb;
  const double y1 = V / (omega * fint);
  rb.r1 = sp.delta_inverse(std::min(y1, sp.delta_max().min_with(y1)));
  const double y2 = area * f_inv_n_sup(sp, a, b) / omega + y1;
  const Extent top = sp.delta_max();
  if (!top.is_finite() || y2 <= top.value()) rb.r2 = sp.delta_inverse(y2);
  return rb;
}

/// (n-1)(1 + pi/2) ||h'/(fh)|| + ((n-1) pi/2 + n) ||f'/f|| over [a,b] x [rho, d].
inline double h2_from_norms(const SupNorms& s, int n) {
  return (n - 1) * (1.0 + kPi / 2.0) * s.dh_over_fh + ((n - 1) * kPi / 2.0 + n) * s.df_over_f;
}

inline double h2_bound(const AmbientSpace& sp, double a, double b, double rho, double frak_d,
                       int samples = kDefaultSupSamples) {
  if (!(rho > 0.0)) throw std::domain_error("h2_bound: rho must be positive");
  if (!(rho <= frak_d)) throw std::domain_error("h2_bound: rho must not exceed d");
  return h2_from_norms(sup_norms(sp, {a, b, rho, frak_d}, samples), sp.n());
}

struct GraphBound {
  double h2 = 0.0;
  double frak_R = 0.0;
  double C = 0.0;
  double C_tilde = 0.0;
  double frak_h = 0.0;
  double v_bound = 0.0;
};

/// Constants of the graph-preservation argument for phi(r) = e^{C r}.
inline GraphBound graph_bound(const AmbientSpace& sp, double a, double b, double rho,
                              double frak_d, double r2, double max_v0,
                              int samples = kDefaultSupSamples) {
  if (!(rho > 0.0)) throw std::domain_error("graph_bound: rho must be positive");
  const SupNorms s = sup_norms(sp, {a, b, rho, frak_d}, samples);
  const int n = sp.n();
  GraphBound g;
  g.h2 = h2_from_norms(s, n);
  g.frak_R = s.f2 * s.ricci + (n - 1) * (s.d2h_over_h + s.dh2_over_h2);
  g.C = g.frak_R + (n - 1) * s.dh_over_h + 1.0;
  g.C_tilde = g.C / s.f2;
  g.frak_h = g.C * std::exp(g.C * r2) * s.f_inv2 * (g.h2 + 2.0 * s.df_over_f + g.C * s.f_inv);
  g.v_bound = std::max(std::exp(g.C * frak_d) * max_v0, g.frak_h / g.C_tilde);
  return g;
}

struct LongtimeCheck {
  double threshold = 0.0;
  bool satisfied = false;
};

/// Area threshold min{V, vol(G) - V} / (||f^-n|| int f^n) for long-time existence.
inline LongtimeCheck longtime_check(const AmbientSpace& sp, double a, double b, double V,
                                    double area) {
  LongtimeCheck lc;
  if (!(V > 0.0)) return lc;
  const double fint = f_power_integral(sp, a, b);
  double numer = V;
  if (sp.frak_z().is_finite()) {
    const double volG = sphere_volume(sp.n()) * fint * sp.delta(sp.frak_z().value());
    numer = std::min(V, volG - V);
  }
  lc.threshold = numer / (f_inv_n_sup(sp, a, b) * fint);
  lc.satisfied = area <= lc.threshold;
  return lc;
}

/// Every a-priori constant for one initial state.
struct BoundSet {
  double V = 0.0;
  double area = 0.0;
  double rho = 0.0;
  double frak_d = 0.0;
  double r1 = 0.0;
  std::optional<double> r2;
  double r2_effective = 0.0;
  GraphBound graph;
  double max_v0 = 0.0;
  LongtimeCheck longtime;
  Extent vol_G = Extent::unbounded();
};

/// Margins applied to the observed radius range before sup norms are taken.
inline constexpr double kRhoShrink = 0.99;
inline constexpr double kDGrow = 1.01;

/// [rho, d] with the 1% margins, kept strictly inside (0, first zero of h).
inline std::pair<double, double> padded_radius_range(const AmbientSpace& sp, double rmin,
                                                     double rmax) {
  const double rho = kRhoShrink * rmin;
  double d = kDGrow * rmax;
  if (sp.frak_z().is_finite()) {
    const double zz = sp.frak_z().value();
    if (d >= zz) d = 0.5 * (rmax + zz);
  }
  return {rho, d};
}

inline BoundSet compute_bounds(const AmbientSpace& sp, const GraphProfile& p,
                               int samples = kDefaultSupSamples) {
  const GeometrySummary g = summarize(sp, p);
  BoundSet bs;
  bs.V = g.volume;
  bs.area = g.area;
  const auto [lo, hi] = std::minmax_element(p.r.begin(), p.r.end());
  std::tie(bs.rho, bs.frak_d) = padded_radius_range(sp, *lo, *hi);
  const RadiusBounds rb = radius_bounds(sp, p.a, p.b, bs.V, bs.area);
  bs.r1 = rb.r1;
  bs.r2 = rb.r2;
  bs.r2_effective = rb.effective_r2(sp);
  bs.max_v0 = *std::max_element(g.v.begin(), g.v.end());
  bs.graph = graph_bound(sp, p.a, p.b, bs.rho, bs.frak_d, bs.r2_effective, bs.max_v0, samples);
  bs.longtime = longtime_check(sp, p.a, p.b, bs.V, bs.area);
  if (sp.frak_z().is_finite())
    bs.vol_G = Extent::finite(sphere_volume(sp.n()) * f_power_integral(sp, p.a, p.b) *
                              sp.delta(sp.frak_z().value()));
  return bs;
}

// ---------------------------------------------------------------------------
// Boundary identities

struct BoundaryResiduals {
  std::array<double, 2> res_H{};   // dH/dz - (H - avgH) f'/f at z = a, z = b
  std::array<double, 2> res_k2{};  // dk2/dz - (f'/f)(k1 - k2)
};

inline BoundaryResiduals boundary_identity_residuals(const AmbientSpace& sp,
                                                     const GraphProfile& p, double avgH) {
  const auto pc = principal_curvatures(sp, p);
  const auto H = mean_curvature(pc, sp.n());
  const int N = p.intervals();
  const double dz = p.dz();
  // one-sided second-order first derivative, outward sign handled per end
  auto d_left = [&](const std::vector<double>& q) {
    return (-3.0 * q[0] + 4.0 * q[1] - q[2]) / (2.0 * dz);
  };
  auto d_right = [&](const std::vector<double>& q) {
    return (3.0 * q[N] - 4.0 * q[N - 1] + q[N - 2]) / (2.0 * dz);
  };
  BoundaryResiduals br;
  const std::array<int, 2> ends{0, N};
  for (int e = 0; e < 2; ++e) {
    const int i = ends[e];
    const auto F = sp.eval_f(p.z(i));
    const double ff = F[1] / F[0];
    const double dH = e == 0 ? d_left(H) : d_right(H);
    const double dk2 = e == 0 ? d_left(pc.k2) : d_right(pc.k2);
    br.res_H[e] = dH - (H[i] - avgH) * ff;
    br.res_k2[e] = dk2 - ff * (pc.k1[i] - pc.k2[i]);
  }
  return br;
}

/// Residual of r''' + (n+1)(f'/f) r'' + 2(n-1) h' f' / (h f^3) - avgH f'/f^2 = 0
/// at both ends, the z-derivative of the graph equation where r' = 0.
inline std::array<double, 2> boundary_compat_residual(const AmbientSpace& sp,
                                                      const GraphProfile& p, double avgH) {
  const int N = p.intervals();
  const double h = p.dz();
  const auto& r = p.r;
  const int n = sp.n();
  std::array<double, 2> res{};
  for (int e = 0; e < 2; ++e) {
    const int i = e == 0 ? 0 : N;
    const int s = e == 0 ? 1 : -1;  // step into the interior
    auto R = [&](int k) { return r[i + s * k]; };
    // one-sided second-order stencils; odd derivatives flip sign at the right end
    const double d2 = (2.0 * R(0) - 5.0 * R(1) + 4.0 * R(2) - R(3)) / (h * h);
    const double d3 =
        s * (-5.0 * R(0) + 18.0 * R(1) - 24.0 * R(2) + 14.0 * R(3) - 3.0 * R(4)) / (2.0 * h * h * h);
    const WarpValues w = sp.eval(p.z(i), r[i]);
    res[e] = d3 + (n + 1) * (w.df / w.f) * d2 +
             2.0 * (n - 1) * w.dh * w.df / (w.h * w.f * w.f * w.f) - avgH * w.df / (w.f * w.f);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Runtime monitors

/// omega int (avgH - H)^2 dmu over a graph state, trapezoid rule.
inline double area_dissipation(const AmbientSpace& sp, const GraphProfile& p,
                               const GeometrySummary& g) {
  std::vector<double> w(p.size());
  const int n = sp.n();
  for (std::size_t i = 0; i < w.size(); ++i) {
    const WarpValues v = sp.eval(p.z(static_cast<int>(i)), p.r[i]);
    const double dev = g.avgH - g.H[i];
    w[i] = dev * dev * g.speed[i] * std::pow(v.f * v.h, n - 1);
  }
  return g.omega * integrate(w, p.dz());
}

struct MonitorCheck {
  std::string name;
  double observed = 0.0;
  double threshold = 0.0;
  bool pass = true;
  bool applicable = true;
};

struct ViolationReport {
  double time = 0.0;
  std::vector<MonitorCheck> checks;

  const MonitorCheck* find(std::string_view name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
  bool fails(std::string_view name) const {
    const auto* c = find(name);
    return c && c->applicable && !c->pass;
  }
  int violations() const {
    int k = 0;
    for (const auto& c : checks) k += (c.applicable && !c.pass) ? 1 : 0;
    return k;
  }
};

struct MonitorTolerances {
  double area_increase = 1e-12;  // relative to the area
  double dissipation_rel = 0.05;
  double dissipation_dt_max = 1e-4;
  double dissipation_floor = 1e-8;  // below this (relative to area) the rate check is skipped
  double volume_drift = 1e-6;
};

/// Trajectory-scoped record of everything the monitors need from the past.
/// Owned by the flow loop; single writer.
class MonitorState {
 public:
  MonitorState(const AmbientSpace& sp, const GraphProfile& initial, const BoundSet& bounds,
               int sup_samples = kDefaultSupSamples)
      : samples_(sup_samples), V0_(bounds.V), max_v0_(bounds.max_v0) {
    r2_frozen_ = bounds.r2_effective;
    const auto [lo, hi] = std::minmax_element(initial.r.begin(), initial.r.end());
    rmin_ = *lo;
    rmax_ = *hi;
    refresh(sp, initial);
  }

  /// Checks a state. `prev_area`/`prev_dissipation` describe the previously
  /// checked state, `dt` the time elapsed since it (0 for the first call).
  ViolationReport check(const AmbientSpace& sp, const GraphProfile& p, const GeometrySummary& g,
                        double t, double dt, const MonitorTolerances& tol = {}) {
    const auto [lo, hi] = std::minmax_element(p.r.begin(), p.r.end());
    rmin_ = std::min(rmin_, *lo);
    rmax_ = std::max(rmax_, *hi);
    if (rmin_ < rect_rho_ || rmax_ > rect_d_) refresh(sp, p);

    ViolationReport rep;
    rep.time = t;

    // radius bound with the running area and the initial volume
    const RadiusBounds running = radius_bounds(sp, p.a, p.b, V0_, g.area);
    const double r2_bound = std::min(running.effective_r2(sp), r2_frozen_);
    rep.checks.push_back({"r2", *hi, r2_bound, *hi < r2_bound, true});

    rep.checks.push_back({"h2", std::abs(g.avgH), bound_.h2, std::abs(g.avgH) <= bound_.h2, true});

    const double vmax = *std::max_element(g.v.begin(), g.v.end());
    rep.checks.push_back({"vbound", vmax, bound_.v_bound, vmax <= bound_.v_bound, true});

    const double diss = area_dissipation(sp, p, g);
    if (has_prev_) {
      const double limit = prev_area_ + tol.area_increase * std::max(1.0, prev_area_);
      rep.checks.push_back({"area", g.area, limit, g.area <= limit, true});
      MonitorCheck rate{"dissipation", 0.0, 0.0, true, false};
      if (dt > 0.0) {
        rate.observed = (g.area - prev_area_) / dt;
        const double predicted = -0.5 * (diss + prev_dissipation_);
        rate.threshold = predicted;
        rate.applicable = dt <= tol.dissipation_dt_max &&
                          std::abs(predicted) > tol.dissipation_floor * g.area;
        rate.pass = std::abs(rate.observed - predicted) <= tol.dissipation_rel * std::abs(predicted);
      }
      rep.checks.push_back(rate);
    } else {
      rep.checks.push_back({"area", g.area, g.area, true, true});
      rep.checks.push_back({"dissipation", 0.0, 0.0, true, false});
    }

    const double drift = std::abs(g.volume - V0_) / V0_;
    rep.checks.push_back({"vol_drift", drift, tol.volume_drift, drift <= tol.volume_drift, true});

    prev_area_ = g.area;
    prev_dissipation_ = diss;
    has_prev_ = true;
    return rep;
  }

  const GraphBound& graph_bound_now() const { return bound_; }
  double rect_rho() const { return rect_rho_; }
  double rect_d() const { return rect_d_; }
  double volume0() const { return V0_; }

 private:
  void refresh(const AmbientSpace& sp, const GraphProfile& p) {
    std::tie(rect_rho_, rect_d_) = padded_radius_range(sp, rmin_, rmax_);
    bound_ = graph_bound(sp, p.a, p.b, rect_rho_, rect_d_, r2_frozen_, max_v0_, samples_);
  }

  int samples_;
  double V0_;
  double max_v0_;
  double r2_frozen_ = 0.0;
  double rmin_ = 0.0, rmax_ = 0.0;
  double rect_rho_ = 0.0, rect_d_ = 0.0;
  GraphBound bound_;
  bool has_prev_ = false;
  double prev_area_ = 0.0;
  double prev_dissipation_ = 0.0;
};

}  // namespace eqflow
