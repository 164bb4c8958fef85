/// @file geometry.hpp
/// @brief Extrinsic geometry of the revolution hypersurface generated by a
/// curve (z(s), r(s)): normal curvatures, mean curvature, area, enclosed
/// volume and the averaged mean curvature.
///
/// The unit normal points towards increasing r for a graph, so a round
/// cylinder in Euclidean space has positive mean curvature.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "eqflow/ambient.hpp"
#include "eqflow/curve.hpp"

namespace eqflow {

struct PrincipalCurvatures {
  std::vector<double> k1;  // profile direction
  std::vector<double> k2;  // orbit directions, multiplicity n-1
};

struct GraphSlope {
  std::vector<double> u;      // <N, d_r>
  std::vector<double> v;      // 1/u
  std::vector<double> speed;  // |c'| with s = z
};

struct GeometrySummary {
  std::vector<double> k1, k2, H;
  std::vector<double> u, v, speed;
  std::vector<double> L_norm;
  double area = 0.0;
  double volume = 0.0;
  double avgH = 0.0;
  double omega = 0.0;
};

namespace detail {

inline void check_radius(const AmbientSpace& sp, double r) {
  if (!(r > 0.0)) throw std::domain_error("generating curve touches the axis r = 0");
  if (sp.frak_z().is_finite() && !(r < sp.frak_z().value()))
    throw std::domain_error("generating curve touches the axis r = first zero of h");
}

// Per-sample local quantities of a curve, shared by every integral below.
struct CurveFrame {
  std::vector<double> z, r, dz, dr, d2z, d2r;
};

inline CurveFrame frame_of(const GraphProfile& p) {
  const Derivatives d = diff(p);
  const std::size_t m = p.size();
  CurveFrame fr;
  fr.z.resize(m);
  for (std::size_t i = 0; i < m; ++i) fr.z[i] = p.z(static_cast<int>(i));
  fr.r = p.r;
  fr.dz.assign(m, 1.0);
  fr.d2z.assign(m, 0.0);
  fr.dr = d.d1;
  fr.d2r = d.d2;
  return fr;
}

inline CurveFrame frame_of(const ParamCurve& c) {
  return {c.z, c.r, c.dz, c.dr, c.d2z, c.d2r};
}

// |c'| f^{n-1} h^{n-1}: the area density per unit parameter, without omega.
inline std::vector<double> area_density(const AmbientSpace& sp, const CurveFrame& fr) {
  std::vector<double> w(fr.z.size());
  const int n = sp.n();
  for (std::size_t i = 0; i < w.size(); ++i) {
    check_radius(sp, fr.r[i]);
    const WarpValues g = sp.eval(fr.z[i], fr.r[i]);
    const double c = std::hypot(fr.dz[i], g.f * fr.dr[i]);
    if (!(c > 0.0)) throw std::domain_error("curve is not regular (|c'| = 0)");
    w[i] = c * std::pow(g.f * g.h, n - 1);
  }
  return w;
}

// integral of values with a common scale pulled out, so that very large
// densities (f = e^z) are summed at unit magnitude and rescaled once.
inline double scaled_integral(const std::vector<double>& values, double step,
                              QuadratureRule rule) {
  double scale = 0.0;
  for (double x : values) scale = std::max(scale, std::abs(x));
  if (scale == 0.0 || !std::isfinite(scale)) return integrate(values, step, rule);
  std::vector<double> unit(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) unit[i] = values[i] / scale;
  return integrate(unit, step, rule) * scale;
}

template <class Curve>
double parameter_step(const Curve& c) {
  if constexpr (std::is_same_v<Curve, GraphProfile>) return c.dz();
  else return c.uniform_step();
}

}  // namespace detail

inline PrincipalCurvatures principal_curvatures_of(const AmbientSpace& sp,
                                                   const detail::CurveFrame& fr) {
  const std::size_t m = fr.z.size();
  PrincipalCurvatures pc{std::vector<double>(m), std::vector<double>(m)};
  for (std::size_t i = 0; i < m; ++i) {
    detail::check_radius(sp, fr.r[i]);
    const WarpValues g = sp.eval(fr.z[i], fr.r[i]);
    const double zd = fr.dz[i], rd = fr.dr[i];
    const double c = std::hypot(zd, g.f * rd);
    if (!(c > 0.0)) throw std::domain_error("curve is not regular (|c'| = 0)");
    const double turning = (fr.d2r[i] * g.f * zd - fr.d2z[i] * g.f * rd + rd * g.df * zd * zd) / (c * c);
    pc.k1[i] = -(turning + g.df * rd) / c;
    pc.k2[i] = (g.dh * zd / (g.h * g.f) - g.df * rd) / c;
  }
  return pc;
}

template <class Curve>
PrincipalCurvatures principal_curvatures(const AmbientSpace& sp, const Curve& c) {
  return principal_curvatures_of(sp, detail::frame_of(c));
}

inline std::vector<double> mean_curvature(const PrincipalCurvatures& pc, int n) {
  std::vector<double> H(pc.k1.size());
  for (std::size_t i = 0; i < H.size(); ++i) H[i] = pc.k1[i] + (n - 1) * pc.k2[i];
  return H;
}

inline std::vector<double> weingarten_norm(const std::vector<double>& k1,
                                           const std::vector<double>& k2, int n) {
  if (k1.size() != k2.size()) throw std::invalid_argument("weingarten_norm: misaligned arrays");
  std::vector<double> L(k1.size());
  for (std::size_t i = 0; i < L.size(); ++i) L[i] = std::sqrt(k1[i] * k1[i] + (n - 1) * k2[i] * k2[i]);
  return L;
}

template <class Curve>
double area(const AmbientSpace& sp, const Curve& c,
            QuadratureRule rule = QuadratureRule::Trapezoid) {
  const auto w = detail::area_density(sp, detail::frame_of(c));
  return sphere_volume(sp.n()) * detail::scaled_integral(w, detail::parameter_step(c), rule);
}

/// omega * int_a^b f^n delta(r(z)) dz.
inline double enclosed_volume(const AmbientSpace& sp, const GraphProfile& p,
                              QuadratureRule rule = QuadratureRule::Trapezoid) {
  std::vector<double> w(p.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    detail::check_radius(sp, p.r[i]);
    w[i] = std::pow(sp.f(p.z(static_cast<int>(i))), sp.n()) * sp.delta(p.r[i]);
  }
  return sphere_volume(sp.n()) * detail::scaled_integral(w, p.dz(), rule);
}

/// int H dmu / |M|.
template <class Curve>
double averaged_H_direct(const AmbientSpace& sp, const Curve& c,
                         QuadratureRule rule = QuadratureRule::Trapezoid) {
  const auto fr = detail::frame_of(c);
  const auto w = detail::area_density(sp, fr);
  const auto H = mean_curvature(principal_curvatures_of(sp, fr), sp.n());
  std::vector<double> hw(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) hw[i] = H[i] * w[i];
  const double step = detail::parameter_step(c);
  const double denom = detail::scaled_integral(w, step, rule);
  if (!(denom > 0.0)) throw std::domain_error("area underflow in averaged mean curvature");
  return detail::scaled_integral(hw, step, rule) / denom;
}

/// Splitting of the averaged mean curvature into the turning-angle part,
/// integrated by parts, and the remainder. Both are normalised by |M|/omega.
struct AveragedHParts {
  double I1 = 0.0;
  double I2 = 0.0;
  double total() const { return I1 + I2; }
};

/// Averaged mean curvature through the integrated-by-parts turning angle.
/// The angle atan2(f r', z') is unwrapped along the curve, so it stays
/// continuous through vertical tangents and no interior jump terms arise.
/// The endpoint terms f^{n-1}h^{n-1} theta are kept; they vanish when the
/// curve meets the boundary exactly orthogonally.
inline AveragedHParts averaged_H_by_parts_split(const AmbientSpace& sp, const ParamCurve& c,
                                                QuadratureRule rule = QuadratureRule::Trapezoid,
                                                double endpoint_tol = 1e-8) {
  const auto fr = detail::frame_of(c);
  const std::size_t m = fr.z.size();
  const int n = sp.n();
  const double step = c.uniform_step();

  auto endpoint_ok = [&](std::size_t i) {
    // coordinate test: in C5 the factor f ~ e^z would amplify round-off in r'
    if (std::abs(fr.dr[i]) > endpoint_tol * std::hypot(fr.dz[i], fr.dr[i]))
      throw std::domain_error("integration by parts needs r' = 0 at both curve endpoints");
    if (!(fr.dz[i] > 0.0))
      throw std::domain_error("curve must be traversed with increasing z at its endpoints");
  };
  endpoint_ok(0);
  endpoint_ok(m - 1);

  std::vector<double> theta(m), weight(m), rest(m), density(m), fh_pow(m);
  double prev = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    detail::check_radius(sp, fr.r[i]);
    const WarpValues g = sp.eval(fr.z[i], fr.r[i]);
    const double zd = fr.dz[i], rd = fr.dr[i];
    double a = std::atan2(g.f * rd, zd);
    if (i > 0) {
      while (a - prev > kPi) a -= 2.0 * kPi;
      while (a - prev < -kPi) a += 2.0 * kPi;
    }
    theta[i] = prev = a;
    const double fh = g.f * g.h;
    fh_pow[i] = std::pow(fh, n - 1);
    // d/ds (fh)^{n-1}
    weight[i] = (n - 1) * std::pow(fh, n - 2) * (g.f * g.dh * rd + g.h * g.df * zd);
    rest[i] = ((n - 1) * g.dh * zd / (g.h * g.f) - n * g.df * rd) * fh_pow[i];
    density[i] = std::hypot(zd, g.f * rd) * fh_pow[i];
  }
  std::vector<double> tw(m);
  for (std::size_t i = 0; i < m; ++i) tw[i] = theta[i] * weight[i];

  const double area_over_omega = detail::scaled_integral(density, step, rule);
  if (!(area_over_omega > 0.0)) throw std::domain_error("area underflow in averaged mean curvature");
  const double boundary = fh_pow[0] * theta[0] - fh_pow[m - 1] * theta[m - 1];
  AveragedHParts parts;
  parts.I1 = (boundary + detail::scaled_integral(tw, step, rule)) / area_over_omega;
  parts.I2 = detail::scaled_integral(rest, step, rule) / area_over_omega;
  return parts;
}

inline double averaged_H_by_parts(const AmbientSpace& sp, const ParamCurve& c,
                                  QuadratureRule rule = QuadratureRule::Trapezoid) {
  return averaged_H_by_parts_split(sp, c, rule).total();
}

inline GraphSlope graph_slope(const AmbientSpace& sp, const GraphProfile& p) {
  const Derivatives d = diff(p);
  GraphSlope gs{std::vector<double>(p.size()), std::vector<double>(p.size()),
                std::vector<double>(p.size())};
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double f = sp.f(p.z(static_cast<int>(i)));
    const double speed = std::sqrt(1.0 + (f * d.d1[i]) * (f * d.d1[i]));
    gs.speed[i] = speed;
    gs.u[i] = f / speed;
    gs.v[i] = speed / f;
  }
  return gs;
}

/// Length of a curve in the ambient metric, int |c'| ds.
inline double curve_length(const AmbientSpace& sp, const ParamCurve& c,
                           QuadratureRule rule = QuadratureRule::Simpson) {
  std::vector<double> w(c.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::hypot(c.dz[i], sp.f(c.z[i]) * c.dr[i]);
  return integrate(w, c.uniform_step(), rule);
}

/// Every per-node and scalar quantity of a graph state.
inline GeometrySummary summarize(const AmbientSpace& sp, const GraphProfile& p,
                                 QuadratureRule rule = QuadratureRule::Trapezoid) {
  GeometrySummary g;
  const auto fr = detail::frame_of(p);
  const auto pc = principal_curvatures_of(sp, fr);
  g.k1 = pc.k1;
  g.k2 = pc.k2;
  g.H = mean_curvature(pc, sp.n());
  g.L_norm = weingarten_norm(g.k1, g.k2, sp.n());
  auto gs = graph_slope(sp, p);
  g.u = std::move(gs.u);
  g.v = std::move(gs.v);
  g.speed = std::move(gs.speed);
  g.omega = sphere_volume(sp.n());
  const auto w = detail::area_density(sp, fr);
  std::vector<double> hw(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) hw[i] = g.H[i] * w[i];
  const double area_over_omega = detail::scaled_integral(w, p.dz(), rule);
  g.area = g.omega * area_over_omega;
  g.avgH = detail::scaled_integral(hw, p.dz(), rule) / area_over_omega;
  g.volume = enclosed_volume(sp, p, rule);
  return g;
}

}  // namespace eqflow
