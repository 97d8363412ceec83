#include "backorbit/sampling.hpp"

#include <cmath>

namespace backorbit {

Real Sampler::uniform(double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  return Real(dist(engine_));
}

Real Sampler::normal() {
  std::normal_distribution<double> dist(0.0, 1.0);
  return Real(dist(engine_));
}

int Sampler::uniform_int(int lo, int hi) {
  std::uniform_int_distribution<int> dist(lo, hi);
  return dist(engine_);
}

CVector Sampler::direction(int q) {
  CVector v(q);
  for (int i = 0; i < q; ++i) v(i) = Complex(normal(), normal());
  return v / v.norm();
}

BallPoint Sampler::ball_point(int q, double max_radius) {
  const Real r = uniform(0.0, max_radius);
  return BallPoint(r * direction(q));
}

BallPoint Sampler::shell_point(int q, double decades) {
  const Real gap = pow(Real(10), -uniform(0.0, decades));
  return BallPoint((Real(1) - gap) * direction(q));
}

BallPoint Sampler::horoball_point(const BoundaryPoint& zeta, double h_lo, double h_hi) {
  const int q = zeta.dimension();
  const Real rho = exp(-uniform(h_lo, h_hi));
  CVector w(q);
  Real transverse2 = 0;
  if (q > 1) {
    const Real t = uniform(0.0, 2.0) * rho;
    w.tail(q - 1) = sqrt(t) * direction(q - 1);
    transverse2 = t;
  }
  const Real x = rho * tan(uniform(-1.4, 1.4));
  w(0) = Complex(x, rho + transverse2);
  return siegel_to_ball(w, zeta);
}

BallPoint Sampler::tube_point(const BoundaryPoint& zeta, const Real& s, const Real& radius) {
  const int q = zeta.dimension();
  const BallPoint u(tanh(radius / 2) * direction(q));
  return axial_translation(zeta, s)(u);
}

Automorphism axial_translation(const BoundaryPoint& zeta, const Real& s) {
  const Real lambda = exp(s);
  if (!(lambda > 1)) return Automorphism::identity(zeta.dimension());
  const BoundaryPoint antipode(-zeta.coords());
  return hyperbolic_automorphism(antipode, lambda);
}

Automorphism random_automorphism(Sampler& sampler, int q, double max_radius) {
  const BallPoint a = sampler.ball_point(q, max_radius);
  // Unitary from the QR factorization of a random complex matrix.
  CMatrix m(q, q);
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) m(i, j) = Complex(sampler.normal(), sampler.normal());
  }
  const CMatrix u = Eigen::HouseholderQR<CMatrix>(m).householderQ();
  return Automorphism::from_unitary(u) * mobius_involution(a);
}

}  // namespace backorbit
