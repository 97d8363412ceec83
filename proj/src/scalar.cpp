#include "backorbit/scalar.hpp"

#include <quadmath.h>

namespace backorbit {

namespace {

std::string quad_printf(const char* fmt, const Real& x) {
  char buf[128];
  const int n = quadmath_snprintf(buf, sizeof buf, fmt, x.backend().value());
  return std::string(buf, static_cast<std::size_t>(n));
}

}  // namespace

std::string format_real(const Real& x, int digits) {
  // Values below ~1e-300 are irrelevant for reports; flush them so that
  // -0 and denormal noise print as 0.
  Real y = x;
  if (abs(y) < Real("1e-300")) y = 0;
  const std::string fmt = "%." + std::to_string(digits) + "Qg";
  return quad_printf(fmt.c_str(), y);
}

std::string format_exact(const Real& x) {
  Real y = x;
  if (y == 0) y = 0;  // drop the sign of -0
  return quad_printf("%.35Qe", y);
}

CVector unit_vector(int q, int index) {
  CVector e = CVector::Zero(q);
  e(index) = Complex(1);
  return e;
}

}  // namespace backorbit
