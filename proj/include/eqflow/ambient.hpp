/// @file ambient.hpp
/// @brief Rotationally symmetric ambient spaces dz^2 + f(z)^2 dr^2 + f(z)^2 h(r)^2 g_S.
///
/// Six closed-form model families are supported (Euclidean slab, Euclidean
/// spherical crown, three hyperbolic slicings and the round sphere). Every
/// model evaluates f, h and their first two derivatives analytically; the flow
/// and the a-priori constants never differentiate numerically.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace eqflow {

inline constexpr double kPi = std::numbers::pi;

enum class ModelCase { C1, C2, C3, C4, C5, C6 };

inline std::string_view to_string(ModelCase c) {
  constexpr std::array<std::string_view, 6> names{"C1", "C2", "C3", "C4", "C5", "C6"};
  return names[static_cast<int>(c)];
}

inline ModelCase parse_case(std::string_view tag) {
  constexpr std::array<std::string_view, 6> names{"C1", "C2", "C3", "C4", "C5", "C6"};
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == tag) return static_cast<ModelCase>(i);
  throw std::invalid_argument("unknown model case '" + std::string(tag) + "'");
}

/// Extended positive real: either finite or the explicit unbounded marker.
class Extent {
 public:
  static Extent unbounded() { return Extent{}; }
  static Extent finite(double v) { return Extent{v}; }

  bool is_finite() const { return value_.has_value(); }
  double value() const {
    if (!value_) throw std::logic_error("Extent::value() on unbounded extent");
    return *value_;
  }
  /// min{this, x} with the unbounded branch made explicit.
  double min_with(double x) const { return value_ ? std::min(*value_, x) : x; }

  bool operator==(const Extent&) const = default;

 private:
  Extent() = default;
  explicit Extent(double v) : value_(v) {}
  std::optional<double> value_;
};

/// f, h and their first two derivatives at a point (z, r).
struct WarpValues {
  double f, df, d2f;
  double h, dh, d2h;
};

/// Sectional curvatures of the coordinate planes (z, .), (r, sphere), (sphere, sphere).
struct CurvatureComponents {
  double k_zplane;
  double k_rplane;
  double k_sphere;
};

/// Closed interval of the z axis; endpoints may be infinite.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_open = true;
  bool hi_open = true;

  bool contains(double z) const {
    const bool above = lo_open ? z > lo : z >= lo;
    const bool below = hi_open ? z < hi : z <= hi;
    return above && below;
  }
};

/// Rectangle [a,b] x [rho, d] in the (z, r) half plane.
struct Rect {
  double z_lo, z_hi;
  double r_lo, r_hi;
};

class AmbientSpace {
 public:
  /// Builds one of the six model spaces. `lambda` is ignored by C1 and C2.
  /// `lambda_h`, when set, uses an independent curvature constant inside h
  /// (the mismatched-constant variants of C3 and C6).
  static AmbientSpace make(ModelCase c, double lambda, int n,
                           std::optional<double> lambda_h = std::nullopt) {
    if (n < 2) throw std::invalid_argument("hypersurface dimension n must be >= 2");
    switch (c) {
      case ModelCase::C1:
      case ModelCase::C2:
        if (lambda_h) throw std::invalid_argument("lambda_h is only meaningful for C3 and C6");
        lambda = 0.0;
        break;
      case ModelCase::C3:
      case ModelCase::C4:
      case ModelCase::C5:
        if (!(lambda < 0.0))
          throw std::invalid_argument(std::string(to_string(c)) + " requires lambda < 0");
        if (lambda_h && c != ModelCase::C3)
          throw std::invalid_argument("lambda_h is only meaningful for C3 and C6");
        if (lambda_h && !(*lambda_h < 0.0))
          throw std::invalid_argument("C3 requires lambda_h < 0");
        break;
      case ModelCase::C6:
        if (!(lambda > 0.0)) throw std::invalid_argument("C6 requires lambda > 0");
        if (lambda_h && !(*lambda_h > 0.0))
          throw std::invalid_argument("C6 requires lambda_h > 0");
        break;
    }
    if (!std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite");
    return AmbientSpace(c, lambda, lambda_h.value_or(lambda), n);
  }

  ModelCase model() const { return case_; }
  int n() const { return n_; }
  double lambda() const { return lambda_; }
  double lambda_h() const { return lambda_h_; }
  bool is_space_form() const { return lambda_ == lambda_h_; }
  /// First positive zero of h.
  const Extent& frak_z() const { return frak_z_; }
  const Interval& z_domain() const { return domain_; }

  double f(double z) const { return eval_f(z)[0]; }
  double h(double r) const { return eval_h(r)[0]; }

  WarpValues eval(double z, double r) const {
    if (!domain_.contains(z))
      throw std::domain_error("z = " + std::to_string(z) + " lies outside the model's z interval");
    const auto F = eval_f(z);
    const auto Hh = eval_h(r);
    return {F[0], F[1], F[2], Hh[0], Hh[1], Hh[2]};
  }

  /// (f, f', f'') only; no domain check beyond the caller's.
  std::array<double, 3> eval_f(double z) const {
    const double mu = std::sqrt(std::abs(lambda_));
    switch (case_) {
      case ModelCase::C1: return {1.0, 0.0, 0.0};
      case ModelCase::C2: return {z, 1.0, 0.0};
      case ModelCase::C3: {
        const double ch = std::cosh(mu * z), sh = std::sinh(mu * z);
        return {ch, mu * sh, mu * mu * ch};
      }
      case ModelCase::C4: {
        const double ch = std::cosh(mu * z), sh = std::sinh(mu * z);
        return {sh / mu, ch, mu * sh};
      }
      case ModelCase::C5: {
        const double e = std::exp(mu * z);
        return {e, mu * e, mu * mu * e};
      }
      case ModelCase::C6: {
        const double c = std::cos(mu * z), s = std::sin(mu * z);
        return {c, -mu * s, -mu * mu * c};
      }
    }
    return {};
  }

  /// (h, h', h'').
  std::array<double, 3> eval_h(double r) const {
    const double nu = std::sqrt(std::abs(lambda_h_));
    switch (case_) {
      case ModelCase::C1:
      case ModelCase::C5: return {r, 1.0, 0.0};
      case ModelCase::C2:
      case ModelCase::C4: return {std::sin(r), std::cos(r), -std::sin(r)};
      case ModelCase::C3: {
        const double sh = std::sinh(nu * r), ch = std::cosh(nu * r);
        return {sh / nu, ch, nu * sh};
      }
      case ModelCase::C6: {
        const double s = std::sin(nu * r), c = std::cos(nu * r);
        return {s / nu, c, -nu * s};
      }
    }
    return {};
  }

  CurvatureComponents curvature_components(double z, double r) const {
    require_open_r(r);
    const WarpValues w = eval(z, r);
    return {-w.d2f / w.f,
            -(w.d2h / w.h + w.df * w.df) / (w.f * w.f),
            (1.0 - (w.dh * w.dh + w.h * w.h * w.df * w.df)) / (w.f * w.f * w.h * w.h)};
  }

  /// Eigenvalues of the Ricci operator in the frame {d_z, E_r, E_i}; it is diagonal there.
  std::array<double, 3> ricci_eigenvalues(double z, double r) const {
    const auto k = curvature_components(z, r);
    const double n = n_;
    return {n * k.k_zplane, k.k_zplane + (n - 1.0) * k.k_rplane,
            k.k_zplane + k.k_rplane + (n - 2.0) * k.k_sphere};
  }

  double ricci_norm(double z, double r) const {
    const auto e = ricci_eigenvalues(z, r);
    return std::max({std::abs(e[0]), std::abs(e[1]), std::abs(e[2])});
  }

  /// delta(R) = int_0^R h^{n-1} dr, closed form for every model.
  double delta(double R) const {
    if (R < 0.0) throw std::domain_error("delta: R must be nonnegative");
    if (frak_z_.is_finite() && R > frak_z_.value() * (1.0 + 1e-15))
      throw std::domain_error("delta: R exceeds the first zero of h");
    const int m = n_ - 1;
    const double nu = std::sqrt(std::abs(lambda_h_));
    switch (case_) {
      case ModelCase::C1:
      case ModelCase::C5: return std::pow(R, n_) / n_;
      case ModelCase::C2:
      case ModelCase::C4: return sin_power_integral(m, R);
      case ModelCase::C3: return sinh_power_integral(m, nu * R) / std::pow(nu, n_);
      case ModelCase::C6: return sin_power_integral(m, nu * R) / std::pow(nu, n_);
    }
    return 0.0;
  }

  /// delta(first zero of h); unbounded when h has no zero.
  Extent delta_max() const {
    return frak_z_.is_finite() ? Extent::finite(delta(frak_z_.value())) : Extent::unbounded();
  }

  /// Inverse of delta by safeguarded Newton iteration on the bracket.
  double delta_inverse(double y) const {
    if (y < 0.0) throw std::domain_error("delta_inverse: argument must be nonnegative");
    if (y == 0.0) return 0.0;
    double lo = 0.0, hi;
    if (frak_z_.is_finite()) {
      hi = frak_z_.value();
      const double top = delta(hi);
      if (y > top * (1.0 + 1e-14))
        throw std::domain_error("delta_inverse: argument exceeds delta(first zero of h)");
      if (y >= top) return hi;
    } else {
      hi = 1.0;
      while (delta(hi) < y) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw std::domain_error("delta_inverse: no bracket");
      }
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      const double g = delta(x) - y;
      if (g > 0.0) hi = x; else lo = x;
      const double dg = std::pow(eval_h(x)[0], n_ - 1);
      double next = (dg > 0.0) ? x - g / dg : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x)) || hi - lo <= 1e-15 * hi) {
        x = next;
        break;
      }
      x = next;
    }
    return x;
  }

  bool operator==(const AmbientSpace&) const = default;

 private:
  AmbientSpace(ModelCase c, double lambda, double lambda_h, int n)
      : case_(c), lambda_(lambda), lambda_h_(lambda_h), n_(n), frak_z_(Extent::unbounded()) {
    const double inf = std::numeric_limits<double>::infinity();
    switch (c) {
      case ModelCase::C1:
      case ModelCase::C3:
      case ModelCase::C5:
        domain_ = {-inf, inf, true, true};
        break;
      case ModelCase::C2:
      case ModelCase::C4:
        domain_ = {0.0, inf, true, true};  // f(0) = 0 is excluded
        frak_z_ = Extent::finite(kPi);
        break;
      case ModelCase::C6: {
        const double half = kPi / (2.0 * std::sqrt(lambda));
        domain_ = {-half, half, true, true};
        frak_z_ = Extent::finite(kPi / std::sqrt(lambda_h));
        break;
      }
    }
  }

  void require_open_r(double r) const {
    if (!(r > 0.0)) throw std::domain_error("r must be positive (h vanishes on the axis)");
    if (frak_z_.is_finite() && !(r < frak_z_.value()))
      throw std::domain_error("r must be below the first zero of h");
  }

  // int_0^X sin^m, via the standard reduction formula.
  static double sin_power_integral(int m, double X) {
    if (m == 0) return X;
    if (m == 1) return 1.0 - std::cos(X);
    return -std::pow(std::sin(X), m - 1) * std::cos(X) / m +
           (m - 1.0) / m * sin_power_integral(m - 2, X);
  }
  // int_0^X sinh^m.
  static double sinh_power_integral(int m, double X) {
    if (m == 0) return X;
    if (m == 1) return std::cosh(X) - 1.0;
    return std::pow(std::sinh(X), m - 1) * std::cosh(X) / m -
           (m - 1.0) / m * sinh_power_integral(m - 2, X);
  }

  ModelCase case_;
  double lambda_;
  double lambda_h_;
  int n_;
  Extent frak_z_;
  Interval domain_;
};

/// Named sup norms over a rectangle. Every entry is a supremum of |F|.
struct SupNorms {
  Rect rect;
  double f2 = 0;          // f^2
  double f_inv = 0;       // f^-1
  double f_inv2 = 0;      // f^-2
  double f_inv_n = 0;     // f^-n
  double df_over_f = 0;   // f'/f
  double dh_over_h = 0;   // h'/h
  double dh_over_fh = 0;  // h'/(f h)
  double d2h_over_h = 0;  // h''/h
  double dh2_over_h2 = 0; // h'^2/h^2
  double ricci = 0;       // Ricci operator norm
};

namespace detail {

// Sampled sup of |g| on [lo, hi] with `samples` nodes, refined once on the
// nested grid of 2*samples - 1 nodes. Any growth between the two levels is
// extrapolated forward once.
template <class G>
double refined_sup_1d(G&& g, double lo, double hi, int samples) {
  auto sweep = [&](int m) {
    double best = 0.0;
    for (int i = 0; i < m; ++i) {
      const double x = (m == 1) ? lo : lo + (hi - lo) * i / (m - 1);
      best = std::max(best, std::abs(g(x)));
    }
    return best;
  };
  const double coarse = sweep(samples);
  const double fine = sweep(2 * samples - 1);
  return fine + std::max(0.0, fine - coarse);
}

template <class G>
double refined_sup_2d(G&& g, const Rect& rc, int samples) {
  auto sweep = [&](int m) {
    double best = 0.0;
    for (int i = 0; i < m; ++i) {
      const double z = rc.z_lo + (rc.z_hi - rc.z_lo) * i / (m - 1);
      for (int j = 0; j < m; ++j) {
        const double r = rc.r_lo + (rc.r_hi - rc.r_lo) * j / (m - 1);
        best = std::max(best, std::abs(g(z, r)));
      }
    }
    return best;
  };
  const double coarse = sweep(samples);
  const double fine = sweep(2 * samples - 1);
  return fine + std::max(0.0, fine - coarse);
}

inline void check_rect(const AmbientSpace& sp, const Rect& rc) {
  if (!(rc.z_lo <= rc.z_hi) || !(rc.r_lo <= rc.r_hi))
    throw std::invalid_argument("degenerate rectangle");
  if (!sp.z_domain().contains(rc.z_lo) || !sp.z_domain().contains(rc.z_hi))
    throw std::domain_error("rectangle leaves the z interval of the model");
  if (!(rc.r_lo > 0.0)) throw std::domain_error("rectangle touches the axis r = 0");
  if (sp.frak_z().is_finite() && !(rc.r_hi < sp.frak_z().value()))
    throw std::domain_error("rectangle touches the axis r = first zero of h");
}

}  // namespace detail

inline constexpr int kDefaultSupSamples = 2001;

/// Upper estimate of the Ricci operator norm over `rc`.
inline double ricci_normal_bound(const AmbientSpace& sp, const Rect& rc,
                                 int samples = kDefaultSupSamples) {
  detail::check_rect(sp, rc);
  if (sp.is_space_form()) {
    // constant curvature lambda: |Ric| = n |lambda| everywhere
    return sp.n() * std::abs(sp.lambda());
  }
  return detail::refined_sup_2d([&](double z, double r) { return sp.ricci_norm(z, r); }, rc,
                                samples);
}

/// Sampled sup norms of the expressions entering the a-priori constants.
/// Expressions depending on one variable are swept in 1D; products of
/// one-variable factors use the product of the factor sups (exact for
/// separable |F|). Only the Ricci norm needs a 2D sweep.
inline SupNorms sup_norms(const AmbientSpace& sp, const Rect& rc,
                          int samples = kDefaultSupSamples) {
  detail::check_rect(sp, rc);
  const int n = sp.n();
  auto zsup = [&](auto&& g) { return detail::refined_sup_1d(g, rc.z_lo, rc.z_hi, samples); };
  auto rsup = [&](auto&& g) { return detail::refined_sup_1d(g, rc.r_lo, rc.r_hi, samples); };

  SupNorms s;
  s.rect = rc;
  s.f2 = zsup([&](double z) { const double f = sp.f(z); return f * f; });
  s.f_inv = zsup([&](double z) { return 1.0 / sp.f(z); });
  s.f_inv2 = zsup([&](double z) { const double f = sp.f(z); return 1.0 / (f * f); });
  s.f_inv_n = zsup([&](double z) { return std::pow(sp.f(z), -n); });
  s.df_over_f = zsup([&](double z) { const auto F = sp.eval_f(z); return F[1] / F[0]; });
  s.dh_over_h = rsup([&](double r) { const auto H = sp.eval_h(r); return H[1] / H[0]; });
  s.d2h_over_h = rsup([&](double r) { const auto H = sp.eval_h(r); return H[2] / H[0]; });
  s.dh2_over_h2 = rsup([&](double r) {
    const auto H = sp.eval_h(r);
    return (H[1] * H[1]) / (H[0] * H[0]);
  });
  s.dh_over_fh = s.dh_over_h * s.f_inv;
  s.ricci = ricci_normal_bound(sp, rc, samples);
  return s;
}

/// Volume of the unit (n-1)-sphere, 2 pi^{n/2} / Gamma(n/2).
inline double sphere_volume(int n) {
  return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
}

}  // namespace eqflow
