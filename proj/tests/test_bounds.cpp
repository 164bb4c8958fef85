#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "eqflow/bounds.hpp"
#include "eqflow/reference_cases.hpp"

using namespace eqflow;

namespace {

const AmbientSpace C1n2 = AmbientSpace::make(ModelCase::C1, 0.0, 2);
const AmbientSpace C2n2 = AmbientSpace::make(ModelCase::C2, 0.0, 2);

GraphProfile cylinder(double a, double b, int N, double R) {
  return GraphProfile(a, b, std::vector<double>(N + 1, R));
}

GraphProfile perturbed(const AmbientSpace& sp, double a, double b, int N, double R, double eps, int k = 1) {
  InitialSpec s;
  s.kind = InitialSpec::Kind::Perturbed;
  s.R = R;
  s.epsilon = eps;
  s.k = k;
  return make_initial(sp, s, a, b, N);
}

}  // namespace

TEST(Bounds, RadiusBoundsC1) {
  const auto rb = radius_bounds(C1n2, 0.0, 1.0, kPi, 2 * kPi);
  EXPECT_NEAR(rb.r1, 1.0, 1e-12);
  ASSERT_TRUE(rb.r2.has_value());
  EXPECT_NEAR(*rb.r2, std::sqrt(3.0), 1e-12);
}

TEST(Bounds, RadiusBoundsC2) {
  // int_1^2 z^2 = 7/3, so V/(omega int f^2) = 1 and r1 = delta^{-1}(1) = pi/2.
  // r2 needs delta(r2) = 3 pi * 1 / (2 pi) + 1 = 2.5 > delta(pi) = 2: undefined.
  const auto rb = radius_bounds(C2n2, 1.0, 2.0, 14 * kPi / 3, 3 * kPi);
  EXPECT_NEAR(rb.r1, kPi / 2, 1e-12);
  EXPECT_FALSE(rb.r2.has_value());
  EXPECT_DOUBLE_EQ(rb.effective_r2(C2n2), kPi);
  // a smaller area keeps r2 defined: delta(r2) = 1 + 0.5 * 1.5 = 1.75
  const auto rb2 = radius_bounds(C2n2, 1.0, 2.0, 14 * kPi / 3, 1.5 * kPi);
  ASSERT_TRUE(rb2.r2.has_value());
  EXPECT_NEAR(*rb2.r2, std::acos(1.0 - 1.75), 1e-12);
}

TEST(Bounds, H2ClosedForms) {
  EXPECT_NEAR(h2_bound(C1n2, 0.0, 1.0, 0.5, 2.0), 2.0 + kPi, 1e-12);
  // C2: ||h'/(fh)|| = cot(0.5) / min z, ||f'/f|| = 1 / min z on [1, 2]
  const double oracle = (1 + kPi / 2) / std::tan(0.5) + (kPi / 2 + 2);
  EXPECT_NEAR(h2_bound(C2n2, 1.0, 2.0, 0.5, kPi / 2), oracle, 1e-9);
  EXPECT_NEAR(oracle, 8.276607, 1e-6);
  EXPECT_THROW(h2_bound(C1n2, 0.0, 1.0, 0.0, 1.0), std::domain_error);
  EXPECT_THROW(h2_bound(C1n2, 0.0, 1.0, 2.0, 1.0), std::domain_error);
}

TEST(Bounds, H2MonotoneInRect) {
  const auto sp = AmbientSpace::make(ModelCase::C3, -1.0, 3);
  double prev = std::numeric_limits<double>::infinity();
  for (double rho : {0.1, 0.2, 0.4, 0.8, 1.6}) {
    const double v = h2_bound(sp, -0.5, 0.5, rho, 2.0, 401);
    EXPECT_LE(v, prev + 1e-12);
    prev = v;
  }
  prev = 0.0;
  for (double d : {0.5, 1.0, 2.0, 4.0}) {
    const double v = h2_bound(sp, -0.5, 0.5, 0.3, d, 401);
    EXPECT_GE(v, prev - 1e-12);
    prev = v;
  }
}

TEST(Bounds, GraphBoundC1) {
  const auto g = graph_bound(C1n2, 0.0, 1.0, 0.5, 2.0, std::sqrt(3.0), 1.0);
  EXPECT_NEAR(g.frak_R, 4.0, 1e-12);
  EXPECT_NEAR(g.C, 7.0, 1e-12);
  EXPECT_NEAR(g.C_tilde, 7.0, 1e-12);
  const double frak_h = 7.0 * std::exp(7.0 * std::sqrt(3.0)) * (2.0 + kPi + 7.0);
  EXPECT_NEAR(g.frak_h / frak_h, 1.0, 1e-12);
  EXPECT_NEAR(g.frak_h / 1.566e7, 1.0, 1e-3);
  // e^{14} ~ 1.2e6 < frak_h / 7 ~ 2.24e6
  EXPECT_NEAR(g.v_bound, frak_h / 7.0, 1e-12 * frak_h);
  EXPECT_GE(g.C, 1.0);
}

TEST(Bounds, FlatCasesHaveNoRicciContribution) {
  for (const auto& sp : {C1n2, C2n2}) {
    const double a = sp.model() == ModelCase::C2 ? 1.0 : 0.0;
    EXPECT_EQ(sup_norms(sp, {a, a + 1, 0.5, 1.0}).ricci, 0.0);
  }
}

TEST(Bounds, LongtimeExamples) {
  EXPECT_FALSE(longtime_check(C1n2, 0.0, 1.0, 0.0, 1.0).satisfied);
  EXPECT_EQ(longtime_check(C1n2, 0.0, 1.0, 0.0, 1.0).threshold, 0.0);
  const auto big = longtime_check(C1n2, 0.0, 1.0, 9 * kPi, 6 * kPi);
  EXPECT_NEAR(big.threshold, 9 * kPi, 1e-12);
  EXPECT_TRUE(big.satisfied);
  const auto unit = longtime_check(C1n2, 0.0, 1.0, kPi, 2 * kPi);
  EXPECT_NEAR(unit.threshold, kPi, 1e-12);
  EXPECT_FALSE(unit.satisfied);
}

TEST(Bounds, LongtimeUsesSlabVolumeWhenBounded) {
  // C2 n=2 on [1,2]: vol(G) = 2 pi (7/3) delta(pi) = 28 pi / 3
  const double V = 20 * kPi / 3;
  const auto lc = longtime_check(C2n2, 1.0, 2.0, V, 1.0);
  EXPECT_NEAR(lc.threshold, (28 * kPi / 3 - V) / (7.0 / 3.0), 1e-10);
}

TEST(Bounds, LongtimeMonotoneInArea) {
  bool was = true;
  for (double area = 1.0; area < 60.0; area += 0.5) {
    const bool now = longtime_check(C1n2, 0.0, 1.0, 9 * kPi, area).satisfied;
    EXPECT_FALSE(now && !was);  // shrinking area never loses the property
    was = now;
  }
}

TEST(Bounds, ComputeBoundsForUnitCylinder) {
  const auto bs = compute_bounds(C1n2, cylinder(0.0, 1.0, 200, 1.0));
  EXPECT_NEAR(bs.V, kPi, 1e-12);
  EXPECT_NEAR(bs.area, 2 * kPi, 1e-12);
  EXPECT_NEAR(bs.r1, 1.0, 1e-12);
  ASSERT_TRUE(bs.r2.has_value());
  EXPECT_NEAR(*bs.r2, std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(bs.rho, 0.99, 1e-15);
  EXPECT_NEAR(bs.frak_d, 1.01, 1e-15);
  EXPECT_DOUBLE_EQ(bs.max_v0, 1.0);
  EXPECT_FALSE(bs.vol_G.is_finite());
  EXPECT_GE(bs.graph.C, 1.0);
  EXPECT_GT(bs.graph.v_bound, 0.0);
}

TEST(Bounds, PropertiesOnRandomGraphStates) {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> R(0.4, 2.0), eps(0.0, 0.3), zlo(-0.5, 0.5);
  std::uniform_int_distribution<int> mode(1, 4);
  const std::vector<AmbientSpace> spaces{C1n2, AmbientSpace::make(ModelCase::C3, -1.0, 2),
                                         AmbientSpace::make(ModelCase::C5, -1.0, 3),
                                         AmbientSpace::make(ModelCase::C6, 0.5, 2)};
  for (int trial = 0; trial < 40; ++trial) {
    const auto& sp = spaces[trial % spaces.size()];
    const double a = zlo(rng), R0 = R(rng);
    const auto p = perturbed(sp, a, a + 1.0, 100, R0, eps(rng) * R0, mode(rng));
    const auto g = summarize(sp, p);
    const auto rb = radius_bounds(sp, p.a, p.b, g.volume, g.area);
    const double rmax = *std::max_element(p.r.begin(), p.r.end());
    const double rmin = *std::min_element(p.r.begin(), p.r.end());
    if (rb.r2) {
      EXPECT_LT(rb.r1, *rb.r2);
    }
    EXPECT_LT(rmax, rb.effective_r2(sp));
    EXPECT_LE(std::abs(averaged_H_direct(sp, p)), h2_bound(sp, p.a, p.b, rmin, rmax, 401));
  }
}

TEST(Bounds, BoundaryResidualsVanishOnCylinders) {
  const auto br = boundary_identity_residuals(C1n2, cylinder(0.0, 1.0, 100, 1.0), 1.0);
  for (int e = 0; e < 2; ++e) {
    EXPECT_NEAR(br.res_H[e], 0.0, 1e-12);
    EXPECT_NEAR(br.res_k2[e], 0.0, 1e-12);
  }
  const auto cc = boundary_compat_residual(C1n2, cylinder(0.0, 1.0, 100, 1.0), 1.0);
  EXPECT_NEAR(cc[0], 0.0, 1e-9);
  EXPECT_NEAR(cc[1], 0.0, 1e-9);
}

TEST(Bounds, BoundaryResidualsEquatorialPlane) {
  const auto p = cylinder(1.0, 2.0, 100, kPi / 2);
  const auto cc = boundary_compat_residual(C2n2, p, 0.0);
  EXPECT_NEAR(cc[0], 0.0, 1e-9);
  EXPECT_NEAR(cc[1], 0.0, 1e-9);
}

TEST(Bounds, K2IdentityOnC2ConstantRadius) {
  // d_z k2 = -cot(r0)/z^2 = (f'/f)(k1 - k2): the residual is pure stencil error
  double prev = 0.0;
  for (int N : {50, 100, 200, 400}) {
    const auto br = boundary_identity_residuals(C2n2, cylinder(1.0, 2.0, N, 1.0), 0.0);
    const double res = std::max(std::abs(br.res_k2[0]), std::abs(br.res_k2[1]));
    if (prev > 0) {
      EXPECT_GE(std::log2(prev / res), 1.9);
    }
    prev = res;
  }
}

TEST(Bounds, MonitorsPassOnStationaryCylinder) {
  const auto p = cylinder(0.0, 1.0, 100, 1.0);
  const auto bs = compute_bounds(C1n2, p);
  MonitorState ms(C1n2, p, bs);
  const auto g = summarize(C1n2, p);
  const auto r0 = ms.check(C1n2, p, g, 0.0, 0.0);
  const auto r1 = ms.check(C1n2, p, g, 1e-4, 1e-4);
  EXPECT_EQ(r0.violations(), 0);
  EXPECT_EQ(r1.violations(), 0);
  EXPECT_FALSE(r1.find("dissipation")->applicable);  // zero dissipation is below the floor
}

TEST(Bounds, MonitorCatchesScaledState) {
  const auto p = cylinder(0.0, 1.0, 100, 1.0);
  MonitorState ms(C1n2, p, compute_bounds(C1n2, p));
  auto big = p;
  for (double& x : big.r) x *= 10.0;
  const auto rep = ms.check(C1n2, big, summarize(C1n2, big), 0.0, 0.0);
  EXPECT_TRUE(rep.fails("r2"));
  EXPECT_TRUE(rep.fails("vol_drift"));
}

TEST(Bounds, MonitorCatchesAreaIncrease) {
  const auto p = perturbed(C1n2, 0.0, 1.0, 100, 1.0, 0.05);
  MonitorState ms(C1n2, p, compute_bounds(C1n2, p));
  const auto flat = cylinder(0.0, 1.0, 100, 1.0);
  (void)ms.check(C1n2, flat, summarize(C1n2, flat), 0.0, 0.0);
  const auto rep = ms.check(C1n2, p, summarize(C1n2, p), 1e-3, 1e-3);
  EXPECT_TRUE(rep.fails("area"));
}
