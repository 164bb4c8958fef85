/// @file reference_cases.hpp
/// @brief Closed-form reference geometry: the cycloid generating curve with
/// negative averaged mean curvature, and the initial profiles used by runs.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "eqflow/ambient.hpp"
#include "eqflow/curve.hpp"
#include "eqflow/geometry.hpp"

namespace eqflow {

/// Point of the generating curve with first and second s-derivatives.
struct CurvePoint {
  double z, r;
  double dz, dr;
  double d2z, d2r;
};

/// Cycloid (x, y) = (2s - sin(s/2) + 2 pi, 2 - cos(s/2)) written in the
/// polar coordinates z = |(x, y)|, r = atan(x / y) of the spherical crown.
inline CurvePoint cycloid_point(double s) {
  const double x = 2.0 * s - std::sin(0.5 * s) + 2.0 * kPi;
  const double y = 2.0 - std::cos(0.5 * s);
  if (!(y > 0.0)) throw std::domain_error("cycloid: y(s) must be positive");
  const double xd = 2.0 - 0.5 * std::cos(0.5 * s), yd = 0.5 * std::sin(0.5 * s);
  const double xdd = 0.25 * std::sin(0.5 * s), ydd = 0.25 * std::cos(0.5 * s);

  const double rho2 = x * x + y * y;
  const double z = std::sqrt(rho2);
  const double zd = (x * xd + y * yd) / z;
  const double zdd = (xd * xd + x * xdd + yd * yd + y * ydd - zd * zd) / z;
  // r = atan(x/y) so r' = (x' y - x y') / (x^2 + y^2)
  const double num = xd * y - x * yd;
  const double numd = xdd * y - x * ydd;
  const double rd = num / rho2;
  const double rdd = numd / rho2 - num * 2.0 * (x * xd + y * yd) / (rho2 * rho2);
  return {z, std::atan(x / y), zd, rd, zdd, rdd};
}

/// Sign changes of `drdot` on [lo, hi], refined to |drdot| <= tol by
/// safeguarded secant steps inside a shrinking bisection bracket.
template <class DrDot>
std::vector<double> find_turning_points(DrDot&& drdot, double lo, double hi, int scan = 4000,
                                        double tol = 1e-10) {
  if (!(lo < hi)) throw std::invalid_argument("find_turning_points: empty range");
  std::vector<double> roots;
  double x0 = lo, f0 = drdot(lo);
  for (int k = 1; k <= scan; ++k) {
    const double x1 = lo + (hi - lo) * k / scan;
    const double f1 = drdot(x1);
    if (f0 == 0.0) {
      roots.push_back(x0);
    } else if (f0 * f1 < 0.0) {
      double a = x0, fa = f0, b = x1;
      double x = 0.5 * (a + b);
      for (int it = 0; it < 200; ++it) {
        // secant proposal, kept only while it stays well inside the bracket
        const double fb = drdot(b);
        double trial = (a * fb - b * fa) / (fb - fa);
        const double width = b - a;
        if (!(trial > a + 0.1 * width && trial < b - 0.1 * width)) trial = 0.5 * (a + b);
        x = trial;
        const double fx = drdot(x);
        if (fx == 0.0) break;
        if ((fx < 0.0) == (fa < 0.0)) { a = x; fa = fx; } else { b = x; }
        if (b - a <= 1e-15 * std::max(1.0, std::abs(x)) ||
            (std::abs(fx) <= tol && b - a <= 1e-12 * std::max(1.0, std::abs(x))))
          break;
      }
      roots.push_back(x);
    }
    x0 = x1;
    f0 = f1;
  }
  if (roots.empty()) throw std::domain_error("find_turning_points: no sign change of r' in range");
  return roots;
}

inline std::vector<double> cycloid_turning_points(double lo, double hi) {
  return find_turning_points([](double s) { return cycloid_point(s).dr; }, lo, hi);
}

/// Samples the cycloid on a uniform s grid with exact derivatives.
inline ParamCurve sample_cycloid(double s_lo, double s_hi, int samples) {
  if (samples < kMinNodes) throw std::invalid_argument("cycloid needs at least 8 samples");
  ParamCurve c;
  c.s.resize(samples); c.z.resize(samples); c.r.resize(samples);
  c.dz.resize(samples); c.dr.resize(samples); c.d2z.resize(samples); c.d2r.resize(samples);
  for (int i = 0; i < samples; ++i) {
    const double s = (i == samples - 1) ? s_hi : s_lo + (s_hi - s_lo) * i / (samples - 1);
    const CurvePoint p = cycloid_point(s);
    c.s[i] = s;
    c.z[i] = p.z; c.r[i] = p.r;
    c.dz[i] = p.dz; c.dr[i] = p.dr;
    c.d2z[i] = p.d2z; c.d2r[i] = p.d2r;
  }
  return c;
}

struct AppendixBReport {
  ModelCase model;
  double lambda;
  int samples;
  double s1, s2;
  double area;
  double avgH_direct;
  double avgH_by_parts;
  /// avgH * |M| / omega_{n-1} from the integrated-by-parts formula.
  double normalized;
  /// Same quantity from pointwise quadrature of H.
  double normalized_direct;
};

/// Default bracket containing the two consecutive turning points.
inline constexpr double kCycloidScanLo = 3.0;
inline constexpr double kCycloidScanHi = 14.0;

/// The cycloid hypersurface in the Euclidean crown (C2) or between two
/// horospheres of hyperbolic 3-space (C5), n = 2.
inline AppendixBReport appendix_b(ModelCase model, int samples = 10000, double lambda = -1.0,
                                  QuadratureRule rule = QuadratureRule::Simpson) {
  if (model != ModelCase::C2 && model != ModelCase::C5)
    throw std::invalid_argument("appendix_b supports C2 and C5 only");
  const auto roots = cycloid_turning_points(kCycloidScanLo, kCycloidScanHi);
  if (roots.size() < 2) throw std::domain_error("appendix_b: fewer than two turning points");
  const double s1 = roots[0], s2 = roots[1];
  const AmbientSpace sp = AmbientSpace::make(model, lambda, 2);
  const ParamCurve c = sample_cycloid(s1, s2, samples);

  AppendixBReport rep{};
  rep.model = model;
  rep.lambda = model == ModelCase::C5 ? lambda : 0.0;
  rep.samples = samples;
  rep.s1 = s1;
  rep.s2 = s2;
  rep.area = area(sp, c, rule);
  rep.avgH_direct = averaged_H_direct(sp, c, rule);
  rep.avgH_by_parts = averaged_H_by_parts(sp, c, rule);
  const double omega = sphere_volume(2);
  rep.normalized = rep.avgH_by_parts * rep.area / omega;
  rep.normalized_direct = rep.avgH_direct * rep.area / omega;
  return rep;
}

// ---------------------------------------------------------------------------
// Initial profiles

struct InitialSpec {
  enum class Kind { Cylinder, Perturbed, Custom };
  Kind kind = Kind::Cylinder;
  double R = 1.0;
  double epsilon = 0.0;
  int k = 1;
  std::vector<double> samples;  // Custom: N+1 radii

  bool operator==(const InitialSpec&) const = default;
};

/// Graph profile on [a, b] with N intervals. The perturbed profile is
/// R + epsilon cos(k pi (z - a) / (b - a)), which has r' = 0 at both ends.
inline GraphProfile make_initial(const AmbientSpace& sp, const InitialSpec& spec, double a,
                                 double b, int N) {
  if (!(a < b)) throw std::invalid_argument("slab requires a < b");
  if (N < kMinNodes) throw std::invalid_argument("grid needs N >= 8");
  std::vector<double> r(N + 1);
  switch (spec.kind) {
    case InitialSpec::Kind::Cylinder:
      std::fill(r.begin(), r.end(), spec.R);
      break;
    case InitialSpec::Kind::Perturbed:
      for (int i = 0; i <= N; ++i) {
        const double t = static_cast<double>(i) / N;
        r[i] = spec.R + spec.epsilon * std::cos(spec.k * kPi * t);
      }
      break;
    case InitialSpec::Kind::Custom:
      if (static_cast<int>(spec.samples.size()) != N + 1)
        throw std::invalid_argument("custom initial profile needs N+1 = " + std::to_string(N + 1) +
                                    " samples, got " + std::to_string(spec.samples.size()));
      r = spec.samples;
      break;
  }
  for (int i = 0; i <= N; ++i) {
    const bool in_band = r[i] > 0.0 && (!sp.frak_z().is_finite() || r[i] < sp.frak_z().value());
    if (!in_band)
      throw std::domain_error("initial radius r = " + std::to_string(r[i]) + " at node " +
                              std::to_string(i) + " is out of band");
  }
  for (int i = 0; i <= N; ++i) {
    const double z = a + (b - a) * i / N;
    if (!sp.z_domain().contains(z)) throw std::domain_error("slab leaves the model's z interval");
  }
  return GraphProfile(a, b, std::move(r));
}

}  // namespace eqflow
