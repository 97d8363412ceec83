#include <cmath>

#include "backorbit/ball_geometry.hpp"
#include "backorbit/errors.hpp"
#include "backorbit/sampling.hpp"
#include "test_support.hpp"

using namespace backorbit;
using backorbit::testing::bd;
using backorbit::testing::pt;
using backorbit::testing::cv;
using backorbit::testing::vec;

namespace {

const Real kLog3 = log(Real(3));

// Brute-force minimum of k(z, gamma(s)) over a uniform grid on [0, hi].
Real grid_distance_to_geodesic(const BallPoint& z, const BoundaryPoint& zeta, const Real& hi,
                               int samples) {
  Real best = kob_dist(z, BallPoint::origin(z.dimension()));
  for (int i = 1; i <= samples; ++i) {
    const Real s = hi * i / samples;
    best = std::min(best, kob_dist(z, geodesic_point(zeta, s)));
  }
  return best;
}

}  // namespace

TEST(KobayashiDistance, ClosedFormExamples) {
  EXPECT_EQ(kob_dist(pt(0, 0), pt(0, 0)), 0);
  EXPECT_REAL_NEAR(kob_dist(pt(0, 0), pt(Real(0.5), 0)), kLog3, Real("1e-30"));
  EXPECT_REAL_NEAR(kob_dist(pt(Real(0.5)), pt(Real(-0.5))), log(Real(9)), Real("1e-30"));
}

TEST(KobayashiDistance, RejectsBadInput) {
  EXPECT_THROW(kob_dist(pt(0, 0), pt(0)), DomainError);
  EXPECT_THROW(pt(1, 0), DomainError);
  EXPECT_THROW(pt(Real(0.8), Real(0.8)), DomainError);
  EXPECT_THROW(BallPoint(vec({Real(1) - Real("1e-30")})), DomainError);
}

TEST(KobayashiDistance, MetricPropertiesOnRandomTriples) {
  Sampler sampler(11);
  for (int i = 0; i < 10000; ++i) {
    const int q = 1 + i % 3;
    const BallPoint x = (i % 4 == 0) ? sampler.shell_point(q, 10) : sampler.ball_point(q);
    const BallPoint y = sampler.ball_point(q);
    const BallPoint z = (i % 5 == 0) ? sampler.shell_point(q, 6) : sampler.ball_point(q);
    const Real xy = kob_dist(x, y);
    const Real yz = kob_dist(y, z);
    const Real xz = kob_dist(x, z);
    ASSERT_GE(xy + yz - xz, Real("-1e-12"));
    ASSERT_LE(abs(xy - kob_dist(y, x)), Real("1e-20") * (1 + xy));
    ASSERT_GT(xy, 0);
  }
}

TEST(KobayashiDistance, NearbyPointsHaveNoCancellation) {
  const BallPoint z = pt(Real(0.3), Complex(0, Real(0.2)));
  const BallPoint w(z.coords() + backorbit::testing::cv(Real("1e-20"), 0));
  const Real d = kob_dist(z, w);
  // Infinitesimal metric: 2 |dz| / (1 - |z|^2) along a direction with no
  // complex-tangential component is bounded by 2|dz|/(1-|z|^2).
  EXPECT_GT(d, 0);
  EXPECT_LT(d, Real(2) * Real("1e-20") / z.one_minus_norm2() * (1 + Real("1e-6")));
}

TEST(MobiusInvolution, DefiningProperties) {
  const BallPoint zero = BallPoint::origin(2);
  const Automorphism id = mobius_involution(zero);
  const BallPoint z = pt(Real(0.1), Complex(Real(0.2), Real(-0.3)));
  EXPECT_REAL_NEAR((id(z).coords() - z.coords()).norm(), 0, Real("1e-30"));

  Sampler sampler(5);
  for (int i = 0; i < 500; ++i) {
    const int q = 1 + i % 3;
    const BallPoint a = sampler.ball_point(q);
    const Automorphism phi = mobius_involution(a);
    EXPECT_LT(phi(a).norm(), Real("1e-25"));
    EXPECT_LT((phi(BallPoint::origin(q)).coords() - a.coords()).norm(), Real("1e-25"));
    const BallPoint w = sampler.ball_point(q);
    const BallPoint v = sampler.ball_point(q);
    EXPECT_LT((phi(phi(w)).coords() - w.coords()).norm(), Real("1e-12"));
    EXPECT_REAL_NEAR(kob_dist(phi(w), phi(v)), kob_dist(w, v), Real("1e-10"));
  }
}

TEST(Horofunction, ClosedFormExamples) {
  const BoundaryPoint e1 = BoundaryPoint::e1(2);
  EXPECT_EQ(horofunction(BallPoint::origin(2), e1), 0);
  EXPECT_REAL_NEAR(horofunction(pt(Real(0.5), 0), e1), -kLog3, Real("1e-30"));
  EXPECT_REAL_NEAR(horofunction(pt(0, Real(0.5)), e1), log(Real(4) / 3), Real("1e-30"));
}

TEST(Horofunction, AgreesWithBusemannLimitOnRandomPoints) {
  // lim_{w -> zeta} k(z, w) - k(0, w), approximated along w = gamma(30).
  Sampler sampler(17);
  const Real s = 30;
  for (int i = 0; i < 10000; ++i) {
    const int q = 1 + i % 3;
    const BoundaryPoint zeta(sampler.direction(q));
    const BallPoint z = sampler.ball_point(q, 0.99);
    const Real limit_form = kob_dist(z, geodesic_point(zeta, s)) - s;
    ASSERT_LE(abs(limit_form - horofunction(z, zeta)), Real("1e-10"));
  }
}

TEST(Horofunction, IsMinusTheParameterOnTheAxis) {
  const BoundaryPoint zeta = bd(Complex(0, 1) / sqrt(Real(2)), Real(1) / sqrt(Real(2)));
  for (int i = 0; i <= 60; ++i) {
    const Real s = Real(i);
    // The point itself carries a rounding error of relative size eps e^s.
    const Real tol = Real("1e-31") * exp(s);
    EXPECT_REAL_NEAR(horofunction(geodesic_point(zeta, s), zeta), -s, tol);
    EXPECT_REAL_NEAR(kob_dist(BallPoint::origin(2), geodesic_point(zeta, s)), s, tol);
  }
}

TEST(Horosphere, MembershipMargins) {
  const BoundaryPoint e1 = BoundaryPoint::e1(1);
  const Real lambda = 3;
  for (int k = 0; k <= 20; ++k) {
    const Real lk = pow(lambda, k);
    const BallPoint rk(vec({(lk - 1) / (lk + 1)}));
    EXPECT_REAL_NEAR(horosphere_contains(rk, horosphere_level(e1, lambda, k)).margin, 0,
                     Real("1e-12"));
  }
  const Horosphere e0{e1, Real(1)};
  EXPECT_EQ(horosphere_contains(BallPoint::origin(1), e0).margin, 0);
  EXPECT_FALSE(horosphere_contains(BallPoint::origin(1), e0).inside);
  const Membership m = horosphere_contains(pt(Real("-0.3")), e0);
  EXPECT_FALSE(m.inside);
  EXPECT_REAL_NEAR(m.margin, -log(Real("1.69") / Real("0.91")), Real("1e-30"));
  EXPECT_THROW(horosphere_contains(pt(0), Horosphere{e1, Real(0)}), DomainError);
}

TEST(Koranyi, RadialPointsAreInsideEveryRegion) {
  const BoundaryPoint zeta = bd(Real(0.6), Complex(0, Real(0.8)));
  for (int i = 0; i <= 40; ++i) {
    const BallPoint z = geodesic_point(zeta, Real(i) * Real(1.5));
    EXPECT_LE(abs(koranyi_functional(z, zeta)), Real("1e-31") * exp(Real(i) * Real(1.5)));
    EXPECT_TRUE(koranyi_contains(z, {zeta, Real("1.0001")}).inside);
  }
  EXPECT_EQ(koranyi_functional(BallPoint::origin(2), zeta), 0);
  EXPECT_THROW(koranyi_contains(BallPoint::origin(2), {zeta, Real(1)}), DomainError);
}

TEST(Koranyi, TubePointsObeyTheTwoLBound) {
  Sampler sampler(3);
  const BoundaryPoint zeta = BoundaryPoint::e1(2);
  for (int i = 0; i < 2000; ++i) {
    const Real L = sampler.uniform(0.1, 3.0);
    const BallPoint z = sampler.tube_point(zeta, sampler.uniform(0.0, 30.0), L);
    EXPECT_LE(koranyi_functional(z, zeta), 2 * L + Real("1e-9"));
  }
}

TEST(Geodesic, PointsAndParametrization) {
  const BoundaryPoint e1 = BoundaryPoint::e1(3);
  EXPECT_EQ(geodesic_point(e1, 0).norm(), 0);
  const BallPoint half = geodesic_point(e1, kLog3);
  EXPECT_REAL_NEAR(half[0].real(), Real(0.5), Real("1e-32"));
  EXPECT_EQ(half[1], Complex(0));
  EXPECT_THROW(geodesic_point(e1, -1), DomainError);

  Sampler sampler(8);
  for (int i = 0; i < 1000; ++i) {
    const Real s = sampler.uniform(0.0, 50.0);
    const Real t = sampler.uniform(0.0, 50.0);
    EXPECT_REAL_NEAR(kob_dist(geodesic_point(e1, s), geodesic_point(e1, t)), abs(s - t),
                     Real("1e-31") * exp(std::max(s, t)));
  }
}

TEST(DistToGeodesic, ZeroOnTheGeodesic) {
  const BoundaryPoint zeta = bd(Real(0.8), Real(0.6));
  for (double s : {0.0, 0.5, 3.0, 17.0, 40.0}) {
    EXPECT_LT(dist_to_geodesic(geodesic_point(zeta, Real(s)), zeta).distance, Real("1e-10"));
  }
}

TEST(DistToGeodesic, MatchesDenseGridOracle) {
  const BoundaryPoint e1 = BoundaryPoint::e1(2);
  Real previous = -1;
  for (int i = 1; i < 20; ++i) {
    const Real t = Real(i) / 20;
    const BallPoint z = pt(0, t);
    const GeodesicProjection p = dist_to_geodesic(z, e1);
    const Real grid = grid_distance_to_geodesic(z, e1, Real(2) * kob_dist(BallPoint::origin(2), z) + 1,
                                                10000);
    EXPECT_REAL_NEAR(p.distance, kob_dist(z, geodesic_point(e1, p.parameter)), Real("1e-25"));
    EXPECT_LE(p.distance, grid + Real("1e-12"));
    EXPECT_REAL_NEAR(p.distance, grid, Real("1e-6"));
    EXPECT_GT(p.distance, previous);
    previous = p.distance;
  }

  Sampler sampler(21);
  for (int i = 0; i < 40; ++i) {
    const BoundaryPoint zeta(sampler.direction(2));
    const BallPoint z = sampler.ball_point(2, 0.95);
    const GeodesicProjection p = dist_to_geodesic(z, zeta);
    const Real grid =
        grid_distance_to_geodesic(z, zeta, Real(2) * kob_dist(BallPoint::origin(2), z) + 1, 10000);
    EXPECT_LE(p.distance, grid + Real("1e-12"));
    EXPECT_REAL_NEAR(p.distance, grid, Real("1e-5"));
  }
}

TEST(DistToGeodesic, TubeMembership) {
  const BoundaryPoint e1 = BoundaryPoint::e1(2);
  Sampler sampler(4);
  for (int i = 0; i < 100; ++i) {
    const Real r = sampler.uniform(0.1, 2.0);
    const BallPoint z = sampler.tube_point(e1, Real(5 + i % 20), r);
    EXPECT_LE(dist_to_geodesic(z, e1).distance, r + Real("1e-12"));
    EXPECT_TRUE(tube_contains(z, {e1, r + Real("1e-6")}).inside);
  }
}

TEST(HyperbolicAutomorphism, DiscClosedForm) {
  const BoundaryPoint one = bd(1);
  const Automorphism g = hyperbolic_automorphism(one, 3);
  Sampler sampler(1);
  for (int i = 0; i < 100; ++i) {
    const BallPoint z = sampler.ball_point(1);
    const Complex expected = (z[0] - Real(0.5)) / (Complex(1) - z[0] / Real(2));
    EXPECT_LT(abs(g(z)[0] - expected), Real("1e-30"));
  }
  EXPECT_REAL_NEAR(kob_dist(BallPoint::origin(1), g(BallPoint::origin(1))), kLog3, Real("1e-30"));
  EXPECT_REAL_NEAR(g.dilation_at(one), Real(3), Real("1e-28"));
  EXPECT_REAL_NEAR(g.dilation_at(bd(-1)), Real(1) / 3, Real("1e-28"));
  EXPECT_THROW(hyperbolic_automorphism(one, 1), DomainError);
}

TEST(HyperbolicAutomorphism, BallPropertiesForArbitraryAxis) {
  Sampler sampler(2);
  for (int i = 0; i < 20; ++i) {
    const BoundaryPoint zeta(sampler.direction(3));
    const Real lambda = sampler.uniform(1.1, 12.0);
    const Automorphism g = hyperbolic_automorphism(zeta, lambda);
    EXPECT_LT((g(zeta).coords() - zeta.coords()).norm(), Real("1e-28"));
    const BoundaryPoint minus(-zeta.coords());
    EXPECT_LT((g(minus).coords() - minus.coords()).norm(), Real("1e-28"));
    EXPECT_REAL_NEAR(g.dilation_at(zeta), lambda, Real("1e-25"));
    // Translation along the axis by log lambda, away from zeta.
    for (double s : {2.0, 7.0, 25.0}) {
      EXPECT_REAL_NEAR(horofunction(g(geodesic_point(zeta, Real(s))), zeta), -Real(s) + log(lambda),
                       Real("1e-20"));
    }
  }
  const Automorphism near_id = hyperbolic_automorphism(BoundaryPoint::e1(2), 1 + Real("1e-12"));
  const BallPoint z = pt(Real(0.3), Real(0.4));
  EXPECT_LT((near_id(z).coords() - z.coords()).norm(), Real("1e-11"));
}

TEST(Automorphism, IsometryAndFactorization) {
  Sampler sampler(9);
  for (int i = 0; i < 200; ++i) {
    const int q = 1 + i % 3;
    const Automorphism g = random_automorphism(sampler, q) * random_automorphism(sampler, q);
    const CMatrix u = g.unitary();
    EXPECT_LT((u.adjoint() * u - CMatrix::Identity(q, q)).norm(), Real("1e-12"));
    const BallPoint a = g.mobius_center();
    EXPECT_LT(g(a).norm(), Real("1e-25"));
    for (int j = 0; j < 10; ++j) {
      const BallPoint z = sampler.ball_point(q);
      const BallPoint w = sampler.ball_point(q);
      EXPECT_REAL_NEAR(kob_dist(g(z), g(w)), kob_dist(z, w), Real("1e-10"));
      // g = U o phi_a with the classical involution.
      const CVector rebuilt = u * mobius_involution(a)(z).coords();
      const CVector direct = g(z).coords();
      if (a.norm() > 0) EXPECT_LT((rebuilt - direct).norm(), Real("1e-25"));
      EXPECT_LT((g.inverse()(g(z)).coords() - z.coords()).norm(), Real("1e-25"));
    }
    EXPECT_LT(g.form_defect(), Real("1e-25"));
  }
  EXPECT_THROW(Automorphism::from_unitary(CMatrix::Constant(2, 2, Complex(1))), DomainError);
}

TEST(Automorphism, JacobianMatchesFiniteDifferences) {
  Sampler sampler(12);
  const Real h("1e-12");
  for (int i = 0; i < 20; ++i) {
    const Automorphism g = random_automorphism(sampler, 2);
    const BallPoint z = sampler.ball_point(2, 0.9);
    const CMatrix j = g.jacobian(z.coords());
    for (int c = 0; c < 2; ++c) {
      const CVector step = unit_vector(2, c) * h;
      const CVector fd = (g.apply_raw(z.coords() + step) - g.apply_raw(z.coords() - step)) / (2 * h);
      EXPECT_LT((fd - j.col(c)).norm(), Real("1e-12") * (1 + j.norm()));
    }
  }
}

TEST(NormalizingAutomorphism, OriginGivesIdentity) {
  const BoundaryPoint e1 = BoundaryPoint::e1(2);
  const NormalizingResult r = normalizing_automorphism(BallPoint::origin(2), e1);
  EXPECT_REAL_NEAR(r.dilation, 1, Real("1e-30"));
  const BallPoint z = pt(Real(0.2), Complex(0, Real(0.5)));
  EXPECT_LT((r.map(z).coords() - z.coords()).norm(), Real("1e-30"));
}

TEST(NormalizingAutomorphism, RadialCenterIsPureHyperbolic) {
  const BoundaryPoint zeta = bd(Real(0.6), Complex(0, Real(0.8)));
  Sampler sampler(13);
  for (double s : {0.5, 1.0, 4.0, 20.0, 40.0}) {
    const NormalizingResult r = normalizing_automorphism(geodesic_point(zeta, Real(s)), zeta);
    EXPECT_REAL_NEAR(r.dilation, exp(Real(s)), Real("1e-31") * exp(Real(2 * s)));
    const Automorphism expected = hyperbolic_automorphism(zeta, exp(Real(s)));
    // Both send a to 0 and fix zeta, so they differ by a unitary fixing zeta.
    const Automorphism u = r.map * expected.inverse();
    EXPECT_LT(u(BallPoint::origin(2)).norm(), Real("1e-12")) << s;
    EXPECT_LT((u(zeta).coords() - zeta.coords()).norm(), Real("1e-12")) << s;
  }
}

TEST(NormalizingAutomorphism, RandomCentersAndHorosphereImages) {
  Sampler sampler(14);
  const Real lambda = 3;
  for (int i = 0; i < 60; ++i) {
    const int q = 1 + i % 3;
    const BoundaryPoint zeta(sampler.direction(q));
    // a in closure(E_0) minus closure(E_1)
    const BallPoint a = sampler.horoball_point(zeta, -to_double(log(lambda)) + 1e-9, 0.0);
    const NormalizingResult r = normalizing_automorphism(a, zeta);
    EXPECT_LT(r.map(a).norm(), Real("1e-20"));
    EXPECT_LT((r.map(zeta).coords() - zeta.coords()).norm(), Real("1e-20"));
    EXPECT_REAL_NEAR(r.dilation, r.map.dilation_at(zeta), Real("1e-20"));
    EXPECT_REAL_NEAR(r.dilation, exp(-horofunction(a, zeta)), Real("1e-25"));
    EXPECT_GE(r.dilation, 1 - Real("1e-20"));
    EXPECT_LT(r.dilation, lambda);
    for (int j = 0; j < 50; ++j) {
      const BallPoint z = sampler.horoball_point(zeta, -8.0, 0.0);  // z in E_0
      EXPECT_LT(horofunction(r.map(z), zeta), log(lambda));            // g(E_0) in E_-1
      EXPECT_LT(horofunction(r.map.inverse()(z), zeta), Real("1e-20"));  // E_0 in g(E_0)
    }
  }
}

TEST(NormalizingAutomorphism, DeepCenter) {
  const BoundaryPoint e1 = BoundaryPoint::e1(2);
  const BallPoint a = Sampler(15).horoball_point(e1, -44.0, -43.0);
  const NormalizingResult r = normalizing_automorphism(a, e1);
  EXPECT_LT(r.map(a).norm(), Real("1e-10"));
  EXPECT_GT(r.dilation, exp(Real(43)));
}

TEST(ParabolicAutomorphism, PreservesHorospheres) {
  Sampler sampler(16);
  const BoundaryPoint zeta(sampler.direction(3));
  const Automorphism p = parabolic_automorphism(zeta, backorbit::testing::cv(Real(0.3), Complex(0, 2)), 1.5);
  EXPECT_REAL_NEAR(p.dilation_at(zeta), 1, Real("1e-25"));
  for (int i = 0; i < 100; ++i) {
    const BallPoint z = sampler.ball_point(3);
    EXPECT_REAL_NEAR(horofunction(p(z), zeta), horofunction(z, zeta), Real("1e-20"));
  }
  EXPECT_THROW(parabolic_automorphism(zeta, backorbit::testing::cv(1), 0), DomainError);
}

TEST(Siegel, RoundTrip) {
  Sampler sampler(18);
  for (int i = 0; i < 200; ++i) {
    const int q = 1 + i % 3;
    const BoundaryPoint zeta(sampler.direction(q));
    const BallPoint z = (i % 2) ? sampler.ball_point(q) : sampler.shell_point(q, 15);
    const CVector w = ball_to_siegel(z, zeta);
    const Real rho = w(0).imag() - w.tail(q - 1).squaredNorm();
    EXPECT_REAL_NEAR(-log(rho), horofunction(z, zeta), Real("1e-12"));
    EXPECT_LT((siegel_to_ball(w, zeta).coords() - z.coords()).norm(), Real("1e-25"));
  }
}

TEST(BoundaryPoint, NormalizesAndValidates) {
  EXPECT_THROW(bd(Real(0.5), 0), DomainError);
  const BoundaryPoint z = bd(Real(1) + Real("1e-14"), 0);
  EXPECT_EQ(z.coords().norm(), 1);
}
