#pragma once

#include <complex>
#include <string>

#include <boost/multiprecision/float128.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Dense>

namespace backorbit {

// Points near a boundary repelling fixed point sit at 1-|z| ~ 1e-19 and
// below, which binary64 cannot represent. Everything runs in binary128.
using Real = boost::multiprecision::float128;
using Complex = std::complex<Real>;
using CVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;
using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;

inline const Real kPi = boost::multiprecision::float128(M_PIq);

/// Points with 1 - |z| below this are treated as lying on the sphere.
inline const Real kBoundaryGuard = Real("1e-28");

/// Hermitian product <z, w> = sum z_i conj(w_i).
inline Complex inner(const CVector& z, const CVector& w) { return w.dot(z); }

inline Real norm2(const CVector& z) { return z.squaredNorm(); }

// boost 1.74 float128 wrappers for log1p/atanh fail to compile under gcc,
// so these go through libquadmath directly.
inline Real log1p(const Real& x) { return Real(::log1pq(x.backend().value())); }
inline Real expm1(const Real& x) { return Real(::expm1q(x.backend().value())); }

/// 2 atanh(x) = log((1+x)/(1-x)), accurate for small x.
inline Real two_atanh(const Real& x) { return log1p(x) - log1p(-x); }

inline double to_double(const Real& x) { return static_cast<double>(x); }

/// Fixed number of significant digits for report output.
std::string format_real(const Real& x, int digits = 15);

/// Round-trip representation of a binary128 value.
std::string format_exact(const Real& x);

CVector unit_vector(int q, int index);

}  // namespace backorbit
