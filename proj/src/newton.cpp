#include "backorbit/newton.hpp"

namespace backorbit {

namespace {

bool off_sphere(const CVector& z) { return Real(1) - z.norm() >= kBoundaryGuard; }

}  // namespace

NewtonResult newton_in_ball(const VectorField& F, const MatrixField& J, const CVector& seed,
                            const Real& tol, int max_iterations) {
  CVector z = seed;
  CVector fz = F(z);
  Real res = fz.norm();
  int it = 0;
  for (; it < max_iterations && res > tol; ++it) {
    const CVector step = J(z).partialPivLu().solve(fz);
    if (!step.allFinite()) break;
    Real damping = 1;
    bool accepted = false;
    for (int halving = 0; halving <= 40; ++halving, damping /= 2) {
      const CVector trial = z - damping * step;
      if (!off_sphere(trial)) continue;
      const CVector ft = F(trial);
      const Real rt = ft.norm();
      if (rt < res || (halving == 0 && rt == res)) {
        z = trial;
        fz = ft;
        res = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  // Once inside the tolerance, a couple of full steps are nearly free and
  // bring the root to working precision.
  for (int polish = 0; polish < 2 && res <= tol && res > 0; ++polish) {
    const CVector step = J(z).partialPivLu().solve(fz);
    const CVector trial = z - step;
    if (!step.allFinite() || !off_sphere(trial)) break;
    const CVector ft = F(trial);
    if (!(ft.norm() < res)) break;
    z = trial;
    fz = ft;
    res = ft.norm();
  }
  return {z, res, it, res <= tol};
}

}  // namespace backorbit
