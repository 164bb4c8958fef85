#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "eqflow/ambient.hpp"
#include "eqflow/curve.hpp"
#include "riemann_oracle.hpp"

using namespace eqflow;
using oracle::Metric;
using oracle::Vec;
using oracle::sectional;
using oracle::warped_metric;

namespace {

struct Sample {
  ModelCase model;
  double lambda;
  double z_lo, z_hi, r_lo, r_hi;
};

// Space forms with their sampling boxes inside the model domains.
std::vector<Sample> space_forms() {
  return {{ModelCase::C1, 0.0, -2.0, 2.0, 0.05, 4.0},
          {ModelCase::C2, 0.0, 0.2, 3.0, 0.05, 3.0},
          {ModelCase::C3, -1.0, -2.0, 2.0, 0.05, 3.0},
          {ModelCase::C4, -1.0, 0.2, 3.0, 0.05, 3.0},
          {ModelCase::C5, -1.0, -2.0, 2.0, 0.05, 3.0},
          {ModelCase::C6, 1.0, -1.4, 1.4, 0.05, 3.0},
          {ModelCase::C3, -0.25, -2.0, 2.0, 0.05, 3.0},
          {ModelCase::C6, 4.0, -0.7, 0.7, 0.05, 1.5}};
}

}  // namespace

TEST(Ambient, SpaceFormComponentsEqualLambda) {
  for (const auto& s : space_forms()) {
    const auto sp = AmbientSpace::make(s.model, s.lambda, 3);
    ASSERT_TRUE(sp.is_space_form());
    double worst = 0.0;
    for (int i = 0; i < 40; ++i)
      for (int j = 0; j < 25; ++j) {
        const double z = s.z_lo + (s.z_hi - s.z_lo) * i / 39.0;
        const double r = s.r_lo + (s.r_hi - s.r_lo) * j / 24.0;
        if (sp.frak_z().is_finite() && r >= sp.frak_z().value()) continue;
        const auto c = sp.curvature_components(z, r);
        for (double v : {c.k_zplane, c.k_rplane, c.k_sphere}) worst = std::max(worst, std::abs(v - sp.lambda()));
      }
    EXPECT_LE(worst, 1e-9) << to_string(s.model) << " lambda " << s.lambda;
  }
}

TEST(Ambient, FiniteDifferenceRiemannOracle) {
  std::vector<AmbientSpace> spaces;
  for (const auto& s : space_forms()) {
    spaces.push_back(AmbientSpace::make(s.model, s.lambda, 2));
    spaces.push_back(AmbientSpace::make(s.model, s.lambda, 3));
  }
  // non-space-form variants exercise all three components independently
  spaces.push_back(AmbientSpace::make(ModelCase::C3, -1.0, 3, -0.25));
  spaces.push_back(AmbientSpace::make(ModelCase::C6, 1.0, 3, 4.0));

  const std::vector<std::pair<double, double>> points{{0.3, 0.4}, {0.5, 0.9}, {0.6, 1.3}};
  for (const auto& sp : spaces) {
    const Metric g = warped_metric(sp);
    for (auto [z, r] : points) {
      Vec x(sp.n() + 1, 1.0);  // theta_k = 1
      x[0] = z;
      x[1] = r;
      const auto c = sp.curvature_components(z, r);
      EXPECT_NEAR(sectional(g, x, 0, 1), c.k_zplane, 1e-5) << to_string(sp.model());
      EXPECT_NEAR(sectional(g, x, 0, 2), c.k_zplane, 1e-5) << to_string(sp.model());
      EXPECT_NEAR(sectional(g, x, 1, 2), c.k_rplane, 1e-5) << to_string(sp.model());
      if (sp.n() >= 3) {
        EXPECT_NEAR(sectional(g, x, 2, 3), c.k_sphere, 1e-5) << to_string(sp.model());
      }
    }
  }
}

TEST(Ambient, FiniteDifferenceOracleSeesNonConstantCurvature) {
  // C3 with lambda_h != lambda is not a space form: k_rplane moves with z.
  const auto sp = AmbientSpace::make(ModelCase::C3, -1.0, 3, -0.25);
  EXPECT_FALSE(sp.is_space_form());
  const auto c0 = sp.curvature_components(0.0, 1.0), c1 = sp.curvature_components(1.0, 1.0);
  EXPECT_GT(std::abs(c0.k_rplane - c1.k_rplane), 1e-3);
}

TEST(Ambient, RicciEigenvaluesInSpaceForms) {
  for (int n : {2, 3, 5}) {
    const auto sp = AmbientSpace::make(ModelCase::C3, -1.0, n);
    const auto e = sp.ricci_eigenvalues(0.4, 0.8);
    for (double v : e) EXPECT_NEAR(v, -n, 1e-12);
    EXPECT_NEAR(sp.ricci_norm(0.4, 0.8), n, 1e-12);
  }
}

TEST(Ambient, ConstructionErrors) {
  EXPECT_THROW(AmbientSpace::make(ModelCase::C3, 1.0, 2), std::invalid_argument);
  EXPECT_THROW(AmbientSpace::make(ModelCase::C4, 0.0, 2), std::invalid_argument);
  EXPECT_THROW(AmbientSpace::make(ModelCase::C5, 0.5, 2), std::invalid_argument);
  EXPECT_THROW(AmbientSpace::make(ModelCase::C6, -1.0, 2), std::invalid_argument);
  EXPECT_THROW(AmbientSpace::make(ModelCase::C1, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(AmbientSpace::make(ModelCase::C1, 0.0, 2, -1.0), std::invalid_argument);
  EXPECT_THROW(AmbientSpace::make(ModelCase::C5, -1.0, 2, -2.0), std::invalid_argument);
  EXPECT_THROW(AmbientSpace::make(ModelCase::C6, 1.0, 2, -2.0), std::invalid_argument);
  EXPECT_THROW(parse_case("C7"), std::invalid_argument);
}

TEST(Ambient, DomainsAndFirstZero) {
  const auto c1 = AmbientSpace::make(ModelCase::C1, 0.0, 2);
  EXPECT_FALSE(c1.frak_z().is_finite());
  const auto c2 = AmbientSpace::make(ModelCase::C2, 0.0, 2);
  EXPECT_DOUBLE_EQ(c2.frak_z().value(), kPi);
  EXPECT_THROW(c2.eval(0.0, 1.0), std::domain_error);
  EXPECT_THROW(c2.eval(-1.0, 1.0), std::domain_error);
  const auto c6 = AmbientSpace::make(ModelCase::C6, 4.0, 2);
  EXPECT_DOUBLE_EQ(c6.frak_z().value(), kPi / 2.0);
  EXPECT_TRUE(c6.z_domain().contains(0.78));
  EXPECT_FALSE(c6.z_domain().contains(kPi / 4.0));
  EXPECT_THROW(c6.eval(0.8, 0.5), std::domain_error);
  EXPECT_THROW(c1.curvature_components(0.0, 0.0), std::domain_error);
  EXPECT_THROW(c2.curvature_components(1.0, kPi), std::domain_error);
}

TEST(Ambient, WarpDerivativesMatchFiniteDifferences) {
  const std::vector<AmbientSpace> spaces{
      AmbientSpace::make(ModelCase::C3, -2.0, 2), AmbientSpace::make(ModelCase::C4, -0.5, 2),
      AmbientSpace::make(ModelCase::C5, -1.5, 2), AmbientSpace::make(ModelCase::C6, 0.7, 2, 1.3)};
  const double e = 1e-4;
  for (const auto& sp : spaces) {
    const double z = 0.6, r = 0.9;
    const auto w = sp.eval(z, r);
    EXPECT_NEAR(w.df, (sp.f(z + e) - sp.f(z - e)) / (2 * e), 1e-7);
    EXPECT_NEAR(w.d2f, (sp.f(z + e) - 2 * sp.f(z) + sp.f(z - e)) / (e * e), 1e-5);
    EXPECT_NEAR(w.dh, (sp.h(r + e) - sp.h(r - e)) / (2 * e), 1e-7);
    EXPECT_NEAR(w.d2h, (sp.h(r + e) - 2 * sp.h(r) + sp.h(r - e)) / (e * e), 1e-5);
    EXPECT_DOUBLE_EQ(sp.h(0.0), 0.0);
  }
}

TEST(Ambient, DeltaMatchesQuadratureOracle) {
  std::vector<AmbientSpace> spaces;
  for (int n : {2, 3, 4, 5})
    for (const auto& s : space_forms()) spaces.push_back(AmbientSpace::make(s.model, s.lambda, n));
  spaces.push_back(AmbientSpace::make(ModelCase::C3, -1.0, 3, -0.3));
  for (const auto& sp : spaces) {
    const double top = sp.frak_z().min_with(2.5);
    for (double R : {0.1, 0.5 * top, 0.9 * top}) {
      const double oracle =
          integrate_function([&](double r) { return std::pow(sp.h(r), sp.n() - 1); }, 0.0, R, 1e-14);
      EXPECT_NEAR(sp.delta(R), oracle, 1e-11 * std::max(1.0, oracle))
          << to_string(sp.model()) << " n=" << sp.n() << " R=" << R;
      EXPECT_NEAR(sp.delta_inverse(sp.delta(R)), R, 1e-12 * std::max(1.0, R));
    }
  }
}

TEST(Ambient, DeltaClosedForms) {
  EXPECT_NEAR(AmbientSpace::make(ModelCase::C1, 0, 2).delta(1.0), 0.5, 1e-15);
  EXPECT_NEAR(AmbientSpace::make(ModelCase::C2, 0, 2).delta(kPi / 2.0), 1.0, 1e-15);
  EXPECT_NEAR(AmbientSpace::make(ModelCase::C3, -1, 2).delta(1.0), std::cosh(1.0) - 1.0, 1e-15);
  EXPECT_NEAR(AmbientSpace::make(ModelCase::C2, 0, 3).delta(kPi), kPi / 2.0, 1e-14);
  const auto c2 = AmbientSpace::make(ModelCase::C2, 0, 2);
  EXPECT_NEAR(c2.delta_max().value(), 2.0, 1e-15);
  EXPECT_FALSE(AmbientSpace::make(ModelCase::C5, -1, 2).delta_max().is_finite());
  EXPECT_THROW(c2.delta_inverse(2.5), std::domain_error);
  EXPECT_THROW(c2.delta(-0.1), std::domain_error);
}

TEST(Ambient, DeltaIsIncreasing) {
  for (const auto& s : space_forms()) {
    const auto sp = AmbientSpace::make(s.model, s.lambda, 3);
    const double top = sp.frak_z().min_with(3.0);
    double prev = 0.0;
    for (int k = 1; k <= 100; ++k) {
      const double v = sp.delta(top * k / 100.0);
      EXPECT_GT(v, prev);
      prev = v;
    }
  }
}

TEST(Ambient, SupNormsClosedFormC1) {
  const auto sp = AmbientSpace::make(ModelCase::C1, 0.0, 2);
  const auto s = sup_norms(sp, {0.0, 1.0, 0.5, 2.0});
  EXPECT_DOUBLE_EQ(s.f2, 1.0);
  EXPECT_DOUBLE_EQ(s.df_over_f, 0.0);
  EXPECT_NEAR(s.dh_over_h, 2.0, 1e-15);
  EXPECT_NEAR(s.dh_over_fh, 2.0, 1e-15);
  EXPECT_NEAR(s.dh2_over_h2, 4.0, 1e-14);
  EXPECT_DOUBLE_EQ(s.d2h_over_h, 0.0);
  EXPECT_DOUBLE_EQ(s.ricci, 0.0);
}

TEST(Ambient, SupNormsRejectAxisRectangles) {
  const auto sp = AmbientSpace::make(ModelCase::C2, 0.0, 2);
  EXPECT_THROW(sup_norms(sp, {1.0, 2.0, 0.0, 1.0}), std::domain_error);
  EXPECT_THROW(sup_norms(sp, {1.0, 2.0, 0.5, kPi}), std::domain_error);
  EXPECT_THROW(sup_norms(sp, {0.0, 2.0, 0.5, 1.0}), std::domain_error);
}

TEST(Ambient, RicciBoundCoversSampledNorm) {
  const auto sp = AmbientSpace::make(ModelCase::C6, 1.0, 3, 2.0);
  const Rect rc{-0.5, 0.5, 0.2, 1.0};
  const double bound = ricci_normal_bound(sp, rc, 201);
  for (int i = 0; i < 37; ++i)
    for (int j = 0; j < 29; ++j) {
      const double z = -0.5 + i / 36.0, r = 0.2 + 0.8 * j / 28.0;
      EXPECT_LE(sp.ricci_norm(z, r), bound + 1e-12);
    }
}

TEST(Ambient, SphereVolume) {
  EXPECT_NEAR(sphere_volume(2), 2 * kPi, 1e-14);
  EXPECT_NEAR(sphere_volume(3), 4 * kPi, 1e-14);
  EXPECT_NEAR(sphere_volume(4), 2 * kPi * kPi, 1e-13);
}
