/// @file curve.hpp
/// @brief Discrete generating curves: graph profiles on a uniform z grid and
/// general parametrized curves, with finite differences and quadrature.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace eqflow {

inline constexpr int kMinNodes = 8;

/// Generating curve r(z) sampled at z_i = a + i*dz, i = 0..N.
struct GraphProfile {
  double a = 0.0;
  double b = 1.0;
  std::vector<double> r;

  GraphProfile() = default;
  GraphProfile(double a_, double b_, std::vector<double> radii) : a(a_), b(b_), r(std::move(radii)) {
    if (!(a < b)) throw std::invalid_argument("slab requires a < b");
    if (static_cast<int>(r.size()) - 1 < kMinNodes)
      throw std::invalid_argument("profile needs N >= " + std::to_string(kMinNodes));
  }

  int intervals() const { return static_cast<int>(r.size()) - 1; }
  double dz() const { return (b - a) / intervals(); }
  double z(int i) const { return a + i * dz(); }
  std::size_t size() const { return r.size(); }

  bool operator==(const GraphProfile&) const = default;
};

/// First and second derivatives per node.
struct Derivatives {
  std::vector<double> d1;
  std::vector<double> d2;
};

/// Central differences with ghost reflection r_{-1} = r_1, r_{N+1} = r_{N-1};
/// the first derivative at both end nodes is exactly zero.
inline Derivatives diff(const GraphProfile& p) {
  const int N = p.intervals();
  if (N < kMinNodes) throw std::invalid_argument("diff: profile needs N >= 8");
  const double dz = p.dz();
  const double inv2 = 1.0 / (2.0 * dz), invsq = 1.0 / (dz * dz);
  Derivatives d{std::vector<double>(N + 1), std::vector<double>(N + 1)};
  const auto& r = p.r;
  d.d1[0] = 0.0;
  d.d2[0] = 2.0 * (r[1] - r[0]) * invsq;
  for (int i = 1; i < N; ++i) {
    d.d1[i] = (r[i + 1] - r[i - 1]) * inv2;
    d.d2[i] = (r[i + 1] - 2.0 * r[i] + r[i - 1]) * invsq;
  }
  d.d1[N] = 0.0;
  d.d2[N] = 2.0 * (r[N - 1] - r[N]) * invsq;
  return d;
}

enum class QuadratureRule { Trapezoid, Simpson };

/// Composite quadrature of equally spaced samples. Simpson falls back to the
/// 3/8 rule on the last three panels when the panel count is odd.
inline double integrate(std::span<const double> v, double step,
                        QuadratureRule rule = QuadratureRule::Trapezoid) {
  const std::size_t m = v.size();
  if (m < 2) throw std::invalid_argument("quadrature needs at least two samples");
  const std::size_t panels = m - 1;
  if (rule == QuadratureRule::Trapezoid || panels < 2) {
    double s = 0.5 * (v.front() + v.back());
    for (std::size_t i = 1; i + 1 < m; ++i) s += v[i];
    return s * step;
  }
  if (panels == 3) return 3.0 * step / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3]);
  std::size_t even = (panels % 2 == 0) ? panels : panels - 3;
  double s = v[0] + v[even];
  for (std::size_t i = 1; i < even; ++i) s += (i % 2 ? 4.0 : 2.0) * v[i];
  double total = s * step / 3.0;
  if (even != panels) {
    const std::size_t k = even;
    total += 3.0 * step / 8.0 * (v[k] + 3.0 * v[k + 1] + 3.0 * v[k + 2] + v[k + 3]);
  }
  return total;
}

/// Quadrature weights matching integrate(); sum_i w_i v_i == integrate(v).
inline std::vector<double> quadrature_weights(std::size_t m, double step,
                                              QuadratureRule rule = QuadratureRule::Trapezoid) {
  if (m < 2) throw std::invalid_argument("quadrature needs at least two samples");
  std::vector<double> w(m, 0.0);
  const std::size_t panels = m - 1;
  if (rule == QuadratureRule::Trapezoid || panels < 2) {
    std::fill(w.begin(), w.end(), step);
    w.front() = w.back() = 0.5 * step;
    return w;
  }
  auto add38 = [&](std::size_t k) {
    w[k] += 3.0 * step / 8.0;
    w[k + 1] += 9.0 * step / 8.0;
    w[k + 2] += 9.0 * step / 8.0;
    w[k + 3] += 3.0 * step / 8.0;
  };
  if (panels == 3) {
    add38(0);
    return w;
  }
  const std::size_t even = (panels % 2 == 0) ? panels : panels - 3;
  w[0] += step / 3.0;
  w[even] += step / 3.0;
  for (std::size_t i = 1; i < even; ++i) w[i] += (i % 2 ? 4.0 : 2.0) * step / 3.0;
  if (even != panels) add38(even);
  return w;
}

/// Adaptive Simpson quadrature of a callable on [lo, hi].
template <class F>
double integrate_function(F&& fn, double lo, double hi, double tol = 1e-12, int max_depth = 50) {
  if (lo == hi) return 0.0;
  std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double x0, double x1, double f0, double fm, double f1, double whole, double eps,
          int depth) -> double {
    const double xm = 0.5 * (x0 + x1);
    const double xl = 0.5 * (x0 + xm), xr = 0.5 * (xm + x1);
    const double fl = fn(xl), fr = fn(xr);
    const double left = (xm - x0) / 6.0 * (f0 + 4.0 * fl + fm);
    const double right = (x1 - xm) / 6.0 * (fm + 4.0 * fr + f1);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
    return rec(x0, xm, f0, fl, fm, left, 0.5 * eps, depth - 1) +
           rec(xm, x1, fm, fr, f1, right, 0.5 * eps, depth - 1);
  };
  // seed with a few panels so oscillatory integrands are not missed
  constexpr int kPanels = 16;
  std::vector<double> parts(kPanels);
  double scale = 0.0;
  for (int k = 0; k < kPanels; ++k) {
    const double x0 = lo + (hi - lo) * k / kPanels, x1 = lo + (hi - lo) * (k + 1) / kPanels;
    const double g0 = fn(x0), g1 = fn(x1), gm = fn(0.5 * (x0 + x1));
    parts[k] = (x1 - x0) / 6.0 * (g0 + 4.0 * gm + g1);
    scale += std::abs(parts[k]);
  }
  double total = 0.0;
  for (int k = 0; k < kPanels; ++k) {
    const double x0 = lo + (hi - lo) * k / kPanels, x1 = lo + (hi - lo) * (k + 1) / kPanels;
    total += rec(x0, x1, fn(x0), fn(0.5 * (x0 + x1)), fn(x1), parts[k],
                 tol * std::max(scale, 1e-300) / kPanels, max_depth);
  }
  return total;
}

/// General parametrized generating curve with first and second s-derivatives.
struct ParamCurve {
  std::vector<double> s;
  std::vector<double> z, r;
  std::vector<double> dz, dr;
  std::vector<double> d2z, d2r;

  std::size_t size() const { return s.size(); }
  /// Uniform spacing of s, or throws if the grid is not uniform.
  double uniform_step() const {
    const double h = (s.back() - s.front()) / static_cast<double>(s.size() - 1);
    for (std::size_t i = 1; i < s.size(); ++i)
      if (std::abs((s[i] - s[i - 1]) - h) > 1e-9 * std::abs(h))
        throw std::invalid_argument("curve parameter grid is not uniform");
    return h;
  }
};

/// Cubic spline with end slopes from one-sided third-order differences.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t m = x_.size();
    if (m < 4 || y_.size() != m) throw std::invalid_argument("spline needs >= 4 matching samples");
    for (std::size_t i = 1; i < m; ++i)
      if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("spline abscissae must increase strictly");
    // slopes m_i solve the C2 tridiagonal system with clamped ends
    auto end_slope = [&](std::size_t i0, int dir) {
      // cubic through 4 points, derivative at the end point (Lagrange form)
      const double x0 = x_[i0];
      double d = 0.0;
      for (int j = 0; j < 4; ++j) {
        const std::size_t ij = i0 + dir * j;
        double wsum = 0.0;
        double prod = 1.0;
        for (int k = 0; k < 4; ++k) {
          if (k == j) continue;
          prod *= (x_[ij] - x_[i0 + dir * k]);
        }
        // derivative of the Lagrange basis at x0
        for (int k = 0; k < 4; ++k) {
          if (k == j) continue;
          double term = 1.0;
          for (int l = 0; l < 4; ++l) {
            if (l == j || l == k) continue;
            term *= (x0 - x_[i0 + dir * l]);
          }
          wsum += term;
        }
        d += y_[ij] * wsum / prod;
      }
      return d;
    };
    std::vector<double> h(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) h[i] = x_[i + 1] - x_[i];
    std::vector<double> lo(m, 0.0), di(m, 1.0), up(m, 0.0), rhs(m, 0.0);
    rhs[0] = end_slope(0, +1);
    rhs[m - 1] = end_slope(m - 1, -1);
    for (std::size_t i = 1; i + 1 < m; ++i) {
      lo[i] = h[i];
      di[i] = 2.0 * (h[i - 1] + h[i]);
      up[i] = h[i - 1];
      rhs[i] = 3.0 * (h[i] * (y_[i] - y_[i - 1]) / h[i - 1] + h[i - 1] * (y_[i + 1] - y_[i]) / h[i]);
    }
    slope_ = solve_tridiagonal(lo, di, up, rhs);
  }

  /// value, first and second derivative at t.
  std::array<double, 3> eval(double t) const {
    std::size_t i = static_cast<std::size_t>(
        std::upper_bound(x_.begin(), x_.end(), t) - x_.begin());
    i = std::clamp<std::size_t>(i == 0 ? 0 : i - 1, 0, x_.size() - 2);
    const double h = x_[i + 1] - x_[i];
    const double u = (t - x_[i]) / h;
    const double y0 = y_[i], y1 = y_[i + 1], m0 = slope_[i] * h, m1 = slope_[i + 1] * h;
    // Hermite basis
    const double u2 = u * u, u3 = u2 * u;
    const double v = (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * m0 +
                     (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * m1;
    const double dv = ((6 * u2 - 6 * u) * y0 + (3 * u2 - 4 * u + 1) * m0 +
                       (-6 * u2 + 6 * u) * y1 + (3 * u2 - 2 * u) * m1) / h;
    const double d2v = ((12 * u - 6) * y0 + (6 * u - 4) * m0 + (-12 * u + 6) * y1 +
                        (6 * u - 2) * m1) / (h * h);
    return {v, dv, d2v};
  }

  static std::vector<double> solve_tridiagonal(std::vector<double> lo, std::vector<double> di,
                                               std::vector<double> up, std::vector<double> rhs) {
    const std::size_t m = di.size();
    for (std::size_t i = 1; i < m; ++i) {
      const double w = lo[i] / di[i - 1];
      di[i] -= w * up[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> x(m);
    x[m - 1] = rhs[m - 1] / di[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) x[i] = (rhs[i] - up[i] * x[i + 1]) / di[i];
    return x;
  }

 private:
  std::vector<double> x_, y_, slope_;
};

/// Builds a ParamCurve from coordinate samples; derivatives come from cubic splines.
inline ParamCurve curve_from_samples(std::vector<double> s, std::vector<double> z,
                                     std::vector<double> r) {
  if (s.size() != z.size() || s.size() != r.size())
    throw std::invalid_argument("curve samples have mismatched lengths");
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(s[i] > s[i - 1])) throw std::invalid_argument("curve parameter must increase strictly");
  const CubicSpline sz(s, z), sr(s, r);
  ParamCurve c;
  c.s = std::move(s);
  c.z = std::move(z);
  c.r = std::move(r);
  const std::size_t m = c.s.size();
  c.dz.resize(m); c.dr.resize(m); c.d2z.resize(m); c.d2r.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto ez = sz.eval(c.s[i]), er = sr.eval(c.s[i]);
    c.dz[i] = ez[1]; c.d2z[i] = ez[2];
    c.dr[i] = er[1]; c.d2r[i] = er[2];
  }
  return c;
}

/// Resamples onto M uniformly spaced parameter values by cubic interpolation.
inline ParamCurve resample(const ParamCurve& c, int M) {
  if (M < kMinNodes) throw std::invalid_argument("resample needs M >= 8");
  for (std::size_t i = 1; i < c.s.size(); ++i)
    if (!(c.s[i] > c.s[i - 1])) throw std::invalid_argument("resample: s grid is not monotone");
  const CubicSpline sz(c.s, c.z), sr(c.s, c.r);
  ParamCurve out;
  out.s.resize(M); out.z.resize(M); out.r.resize(M);
  out.dz.resize(M); out.dr.resize(M); out.d2z.resize(M); out.d2r.resize(M);
  const double s0 = c.s.front(), s1 = c.s.back();
  for (int i = 0; i < M; ++i) {
    const double t = (i == M - 1) ? s1 : s0 + (s1 - s0) * i / (M - 1);
    const auto ez = sz.eval(t), er = sr.eval(t);
    out.s[i] = t;
    out.z[i] = ez[0]; out.dz[i] = ez[1]; out.d2z[i] = ez[2];
    out.r[i] = er[0]; out.dr[i] = er[1]; out.d2r[i] = er[2];
  }
  return out;
}

/// Roots of the spline-interpolated r'(s), located by bisection on sign changes.
inline std::vector<double> curve_turning_points(const ParamCurve& c, double tol = 1e-12) {
  const CubicSpline sr(c.s, c.r);
  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < c.s.size(); ++i) {
    double lo = c.s[i], hi = c.s[i + 1];
    double flo = sr.eval(lo)[1], fhi = sr.eval(hi)[1];
    if (flo == 0.0) { roots.push_back(lo); continue; }
    if (flo * fhi > 0.0) continue;
    while (hi - lo > tol * std::max(1.0, std::abs(hi))) {
      const double mid = 0.5 * (lo + hi);
      const double fm = sr.eval(mid)[1];
      if ((fm < 0.0) == (flo < 0.0)) { lo = mid; flo = fm; } else { hi = mid; }
    }
    roots.push_back(0.5 * (lo + hi));
  }
  return roots;
}

}  // namespace eqflow
