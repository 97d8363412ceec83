#pragma once

#include <functional>

#include "backorbit/scalar.hpp"

namespace backorbit {

using VectorField = std::function<CVector(const CVector&)>;
using MatrixField = std::function<CMatrix(const CVector&)>;

struct NewtonResult {
  CVector z;
  Real residual;
  int iterations;
  bool converged;
};

/// Damped complex Newton for F(z) = 0 on the open ball. A step is halved (up
/// to 40 times) until the trial point stays off the sphere and the residual
/// does not grow. Stops when |F| <= tol.
NewtonResult newton_in_ball(const VectorField& F, const MatrixField& J, const CVector& seed,
                            const Real& tol, int max_iterations = 100);

}  // namespace backorbit
