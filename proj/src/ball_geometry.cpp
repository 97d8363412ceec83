#include "backorbit/ball_geometry.hpp"

#include <string>

#include "backorbit/errors.hpp"

namespace backorbit {

namespace {

const Complex kI(0, 1);

void require_same_dimension(int a, int b, const char* what) {
  if (a != b) {
    throw DomainError(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                      std::to_string(b) + ")");
  }
}

CMatrix hermitian_form(int q) {
  CMatrix j = CMatrix::Identity(q + 1, q + 1);
  j(q, q) = Complex(-1);
  return j;
}

CMatrix embed_linear(const CMatrix& u) {
  const auto q = u.rows();
  CMatrix m = CMatrix::Identity(q + 1, q + 1);
  m.topLeftCorner(q, q) = u;
  return m;
}

// Orthonormal basis (columns) whose first vector is zeta; its adjoint maps
// zeta to e_1. Modified Gram-Schmidt with one reorthogonalization pass.
CMatrix frame_basis(const BoundaryPoint& zeta) {
  const int q = zeta.dimension();
  CMatrix basis(q, q);
  basis.col(0) = zeta.coords();
  int filled = 1;
  for (int i = 0; i < q && filled < q; ++i) {
    CVector v = unit_vector(q, i);
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < filled; ++j) {
        v -= basis.col(j).dot(v) * basis.col(j);
      }
    }
    const Real n = v.norm();
    if (n > Real("1e-8")) basis.col(filled++) = v / n;
  }
  return basis;
}

bool is_e1(const BoundaryPoint& zeta) {
  if (zeta[0] != Complex(1)) return false;
  for (int i = 1; i < zeta.dimension(); ++i) {
    if (zeta[i] != Complex(0)) return false;
  }
  return true;
}

// Unitary U (q x q) with U zeta = e_1.
CMatrix frame_unitary(const BoundaryPoint& zeta) {
  if (is_e1(zeta)) return CMatrix::Identity(zeta.dimension(), zeta.dimension());
  return frame_basis(zeta).adjoint();
}

// Cayley transform to the Siegel domain, in homogeneous coordinates.
CMatrix cayley(int q) {
  CMatrix c = CMatrix::Zero(q + 1, q + 1);
  c(0, 0) = kI;
  c(0, q) = kI;
  for (int k = 1; k < q; ++k) c(k, k) = kI;
  c(q, 0) = Complex(-1);
  c(q, q) = Complex(1);
  return c;
}

CMatrix cayley_inverse(int q) {
  CMatrix c = CMatrix::Zero(q + 1, q + 1);
  const Real half = Real(1) / 2;
  c(0, 0) = Complex(0, -half);
  c(0, q) = Complex(-half);
  for (int k = 1; k < q; ++k) c(k, k) = -kI;
  c(q, 0) = Complex(0, -half);
  c(q, q) = Complex(half);
  return c;
}

// Siegel-domain matrix expressed in ball coordinates of the e_1 frame.
CMatrix from_siegel(const CMatrix& s) {
  const int q = static_cast<int>(s.rows()) - 1;
  return cayley_inverse(q) * s * cayley(q);
}

CMatrix heisenberg_matrix(const CVector& v, const Real& t) {
  const int q = static_cast<int>(v.size()) + 1;
  CMatrix s = CMatrix::Identity(q + 1, q + 1);
  for (int k = 1; k < q; ++k) {
    s(0, k) = Complex(0, 2) * std::conj(v(k - 1));
    s(k, q) = v(k - 1);
  }
  s(0, q) = Complex(t, v.squaredNorm());
  return s;
}

CMatrix siegel_dilation_matrix(int q, const Real& delta) {
  CMatrix s = CMatrix::Identity(q + 1, q + 1);
  s(0, 0) = Complex(delta * delta);
  for (int k = 1; k < q; ++k) s(k, k) = Complex(delta);
  return s;
}

// Classical involution with phi_0 = -id; used for the U o phi_a split.
CMatrix rudin_involution_matrix(const CVector& a) {
  const int q = static_cast<int>(a.size());
  const Real a2 = a.squaredNorm();
  CMatrix m = CMatrix::Zero(q + 1, q + 1);
  if (a2 == 0) {
    m.topLeftCorner(q, q) = -CMatrix::Identity(q, q);
    m(q, q) = Complex(1);
    return m;
  }
  const Real s = sqrt(Real(1) - a2);
  const CMatrix proj = a * a.adjoint() / a2;
  m.topLeftCorner(q, q) = -(s * CMatrix::Identity(q, q) + (Real(1) - s) * proj);
  m.topRightCorner(q, 1) = a;
  m.bottomLeftCorner(1, q) = -a.adjoint();
  m(q, q) = Complex(1);
  return m;
}

CMatrix normalize_form(const CMatrix& m) {
  const int q = static_cast<int>(m.rows()) - 1;
  const CMatrix k = m.adjoint() * hermitian_form(q) * m;
  const Real c = -k(q, q).real();
  if (!(c > 0)) throw DomainError("automorphism: matrix does not preserve the ball");
  return m / sqrt(c);
}

Real max_abs_entry(const CMatrix& m) {
  Real r = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) r = std::max(r, Real(abs(m(i, j))));
  }
  return r;
}

CVector siegel_coords_e1(const CVector& z) {
  const int q = static_cast<int>(z.size());
  const Complex denom = Complex(1) - z(0);
  CVector w(q);
  w(0) = kI * (Complex(1) + z(0)) / denom;
  for (int k = 1; k < q; ++k) w(k) = kI * z(k) / denom;
  return w;
}

}  // namespace

// ---------------------------------------------------------------- points

BallPoint::BallPoint(CVector coords) : coords_(std::move(coords)) {
  if (coords_.size() < 1) throw DomainError("ball point: dimension must be at least 1");
  const Real n2 = coords_.squaredNorm();
  if (!(n2 < 1) || Real(1) - sqrt(n2) < kBoundaryGuard) {
    throw DomainError("ball point: |z| = " + format_real(sqrt(n2), 20) +
                      " is on or outside the sphere");
  }
}

BallPoint BallPoint::origin(int q) { return BallPoint(CVector::Zero(q)); }

Real BallPoint::norm() const { return coords_.norm(); }

Real BallPoint::one_minus_norm2() const { return Real(1) - coords_.squaredNorm(); }

BoundaryPoint::BoundaryPoint(CVector coords) : coords_(std::move(coords)) {
  if (coords_.size() < 1) throw DomainError("boundary point: dimension must be at least 1");
  const Real n = coords_.norm();
  if (abs(n - 1) > Real("1e-12")) {
    throw DomainError("boundary point: |zeta| = " + format_real(n, 20) + " is not 1");
  }
  coords_ /= n;
}

BoundaryPoint BoundaryPoint::e1(int q) { return BoundaryPoint(unit_vector(q, 0)); }

// ---------------------------------------------------------- automorphism

Automorphism Automorphism::identity(int q) {
  return Automorphism(CMatrix::Identity(q + 1, q + 1));
}

Automorphism Automorphism::from_matrix(const CMatrix& m) {
  if (m.rows() != m.cols() || m.rows() < 2) {
    throw DomainError("automorphism: expected a square (q+1)x(q+1) matrix");
  }
  Automorphism g(normalize_form(m));
  if (g.form_defect() > Real("1e-10")) {
    throw DomainError("automorphism: matrix is not in U(q,1), defect " +
                      format_real(g.form_defect()));
  }
  return g;
}

Automorphism Automorphism::from_unitary(const CMatrix& u) {
  if (u.rows() != u.cols() || u.rows() < 1) throw DomainError("unitary: expected a square matrix");
  const Real defect = max_abs_entry(u.adjoint() * u - CMatrix::Identity(u.rows(), u.rows()));
  if (defect > Real("1e-12")) {
    throw DomainError("unitary: U*U differs from I by " + format_real(defect));
  }
  return Automorphism(embed_linear(u));
}

CVector Automorphism::apply_raw(const CVector& z) const {
  const int q = dimension();
  require_same_dimension(q, static_cast<int>(z.size()), "automorphism");
  const Complex denom = (matrix_.bottomLeftCorner(1, q) * z)(0) + matrix_(q, q);
  return (matrix_.topLeftCorner(q, q) * z + matrix_.topRightCorner(q, 1)) / denom;
}

BallPoint Automorphism::operator()(const BallPoint& z) const {
  return BallPoint(apply_raw(z.coords()));
}

BoundaryPoint Automorphism::operator()(const BoundaryPoint& zeta) const {
  CVector w = apply_raw(zeta.coords());
  w /= w.norm();
  return BoundaryPoint(w);
}

CMatrix Automorphism::jacobian(const CVector& z) const {
  const int q = dimension();
  const Complex denom = (matrix_.bottomLeftCorner(1, q) * z)(0) + matrix_(q, q);
  const CVector gz = apply_raw(z);
  return (matrix_.topLeftCorner(q, q) - gz * matrix_.bottomLeftCorner(1, q)) / denom;
}

Automorphism Automorphism::inverse() const {
  const CMatrix j = hermitian_form(dimension());
  Automorphism inv(normalize_form(j * matrix_.adjoint() * j));
  return inv;
}

BallPoint Automorphism::mobius_center() const {
  const int q = dimension();
  const CMatrix inv = inverse().matrix();
  return BallPoint(inv.topRightCorner(q, 1) / inv(q, q));
}

CMatrix Automorphism::unitary() const {
  const int q = dimension();
  const CMatrix n = matrix_ * rudin_involution_matrix(mobius_center().coords());
  return n.topLeftCorner(q, q) / n(q, q);
}

Automorphism Automorphism::with_normal_form(BoundaryNormalForm form) const {
  Automorphism g = *this;
  g.normal_form_ = std::move(form);
  return g;
}

Real Automorphism::dilation_at(const BoundaryPoint& zeta) const {
  const BoundaryPoint image = (*this)(zeta);
  if ((image.coords() - zeta.coords()).norm() > Real("1e-10")) {
    throw DomainError("dilation_at: automorphism does not fix the boundary point");
  }
  return exp(-horofunction(inverse()(BallPoint::origin(dimension())), zeta));
}

Real Automorphism::form_defect() const {
  const CMatrix j = hermitian_form(dimension());
  return max_abs_entry(matrix_.adjoint() * j * matrix_ - j);
}

Automorphism operator*(const Automorphism& g, const Automorphism& h) {
  require_same_dimension(g.dimension(), h.dimension(), "automorphism composition");
  return Automorphism(normalize_form(g.matrix_ * h.matrix_));
}

// ------------------------------------------------------------ distances

Real kob_dist(const BallPoint& z, const BallPoint& w) {
  require_same_dimension(z.dimension(), w.dimension(), "kob_dist");
  const Complex denom = Complex(1) - inner(w.coords(), z.coords());
  const Real denom2 = std::norm(denom);
  // 1 - |phi_z(w)|^2, exact product form; accurate near the sphere.
  const Real one_minus_rho2 = z.one_minus_norm2() * w.one_minus_norm2() / denom2;
  if (one_minus_rho2 > Real(3) / 4) {
    // |phi_z(w)| = |(P_z + s Q_z)(z - w)| / |1 - <w, z>|, cancellation free
    // for nearby points.
    const CVector diff = z.coords() - w.coords();
    const Real z2 = z.coords().squaredNorm();
    CVector v = diff;
    if (z2 > 0) {
      const Real s = sqrt(Real(1) - z2);
      const CVector p = (z.coords().dot(diff) / z2) * z.coords();
      v = p + s * (diff - p);
    }
    const Real rho = v.norm() / sqrt(denom2);
    return two_atanh(rho);
  }
  const Real rho = sqrt(Real(1) - one_minus_rho2);
  return 2 * log1p(rho) - log(one_minus_rho2);
}

Automorphism mobius_involution(const BallPoint& a) {
  if (a.coords().squaredNorm() == 0) return Automorphism::identity(a.dimension());
  return Automorphism::from_matrix(rudin_involution_matrix(a.coords()));
}

Real horofunction(const BallPoint& z, const BoundaryPoint& zeta) {
  require_same_dimension(z.dimension(), zeta.dimension(), "horofunction");
  const Complex c = Complex(1) - inner(z.coords(), zeta.coords());
  return log(std::norm(c) / z.one_minus_norm2());
}

Horosphere horosphere_level(const BoundaryPoint& zeta, Real lambda, int k) {
  if (!(lambda > 0)) throw DomainError("horosphere: lambda must be positive");
  return Horosphere{zeta, exp(-Real(k) * log(lambda))};
}

Membership horosphere_contains(const BallPoint& z, const Horosphere& h) {
  if (!(h.radius > 0)) throw DomainError("horosphere: radius must be positive");
  const Real margin = log(h.radius) - horofunction(z, h.center);
  return {margin > 0, margin};
}

Real koranyi_functional(const BallPoint& z, const BoundaryPoint& zeta) {
  return kob_dist(BallPoint::origin(z.dimension()), z) + horofunction(z, zeta);
}

Membership koranyi_contains(const BallPoint& z, const KoranyiRegion& k) {
  if (!(k.amplitude > 1)) throw DomainError("Koranyi region: amplitude must exceed 1");
  const Real margin = 2 * log(k.amplitude) - koranyi_functional(z, k.vertex);
  return {margin > 0, margin};
}

BallPoint geodesic_point(const BoundaryPoint& zeta, Real s) {
  if (s < 0) throw DomainError("geodesic_point: parameter must be nonnegative");
  return BallPoint(tanh(s / 2) * zeta.coords());
}

GeodesicProjection dist_to_geodesic(const BallPoint& z, const BoundaryPoint& zeta) {
  require_same_dimension(z.dimension(), zeta.dimension(), "dist_to_geodesic");
  const auto distance_at = [&](const Real& s) { return kob_dist(z, geodesic_point(zeta, s)); };

  // The minimizer satisfies s* <= 2 k(0, z); keep gamma(s) representable.
  const Real s_limit = log(Real(2) / (10 * kBoundaryGuard)) - 1;
  const Real hi = std::min(Real(2) * kob_dist(BallPoint::origin(z.dimension()), z) + 1, s_limit);

  // s -> k(z, gamma(s)) is convex, so golden-section search brackets the
  // minimum directly.
  const Real tol("1e-10");
  constexpr int kMaxIterations = 200;
  const Real ratio = (sqrt(Real(5)) - 1) / 2;
  Real a = 0;
  Real b = hi;
  Real c = b - ratio * (b - a);
  Real d = a + ratio * (b - a);
  Real fc = distance_at(c);
  Real fd = distance_at(d);
  int it = 0;
  while (b - a > tol && it < kMaxIterations) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = distance_at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = distance_at(d);
    }
    ++it;
  }
  if (b - a > tol) throw NumericalError("dist_to_geodesic: golden-section search did not converge");

  GeodesicProjection best{fc, c, it};
  const auto consider = [&](const Real& s) {
    if (s < 0 || s > hi) return;
    const Real v = distance_at(s);
    if (v < best.distance) best = {v, s, it};
  };
  consider(fd > fc ? c : d);
  consider(a);
  consider(b);
  consider(Real(0));
  // Parabolic refinement through the final bracket.
  const Real m = (a + b) / 2;
  const Real fa = distance_at(a);
  const Real fm = distance_at(m);
  const Real fb = distance_at(b);
  const Real denom = (m - a) * (fm - fb) - (m - b) * (fm - fa);
  if (denom != 0) {
    const Real numer = (m - a) * (m - a) * (fm - fb) - (m - b) * (m - b) * (fm - fa);
    consider(m - numer / (2 * denom));
  }
  consider(m);
  return best;
}

Membership tube_contains(const BallPoint& z, const GeodesicTube& tube) {
  if (!(tube.width > 0)) throw DomainError("geodesic tube: width must be positive");
  const Real margin = tube.width - dist_to_geodesic(z, tube.target).distance;
  return {margin > 0, margin};
}

// ------------------------------------------------- special automorphisms

Automorphism rotation_to_e1(const BoundaryPoint& zeta) {
  return Automorphism::from_unitary(frame_unitary(zeta));
}

namespace {

Automorphism in_frame(const CMatrix& frame_matrix, const BoundaryPoint& zeta) {
  const CMatrix v = embed_linear(frame_unitary(zeta));
  return Automorphism::from_matrix(v.adjoint() * frame_matrix * v);
}

}  // namespace

Automorphism hyperbolic_automorphism(const BoundaryPoint& zeta, Real lambda) {
  if (!(lambda > 1)) throw DomainError("hyperbolic_automorphism: dilation must exceed 1");
  const int q = zeta.dimension();
  const Real a = (lambda - 1) / (lambda + 1);
  const Real s = sqrt(Real(1) - a * a);
  CMatrix m = CMatrix::Identity(q + 1, q + 1);
  m(0, q) = Complex(-a);
  m(q, 0) = Complex(-a);
  for (int k = 1; k < q; ++k) m(k, k) = Complex(s);
  return in_frame(m, zeta).with_normal_form({zeta, lambda});
}

Automorphism parabolic_automorphism(const BoundaryPoint& zeta, const CVector& shift, Real t) {
  const int q = zeta.dimension();
  if (shift.size() != q - 1) {
    throw DomainError("parabolic_automorphism: shift must have q-1 = " + std::to_string(q - 1) +
                      " components");
  }
  return in_frame(from_siegel(heisenberg_matrix(shift, t)), zeta)
      .with_normal_form({zeta, Real(1)});
}

NormalizingResult normalizing_automorphism(const BallPoint& a, const BoundaryPoint& zeta) {
  require_same_dimension(a.dimension(), zeta.dimension(), "normalizing_automorphism");
  const int q = a.dimension();
  const CMatrix v = embed_linear(frame_unitary(zeta));
  const CVector a_frame = Automorphism::from_matrix(v).apply_raw(a.coords());

  // Stage 1: Householder reflection of the orthogonal directions, aligning
  // the transverse part of a with e_2. Fixes e_1 and 0.
  CMatrix householder = CMatrix::Identity(q + 1, q + 1);
  if (q > 1) {
    const CVector x = a_frame.tail(q - 1);
    const Real xn = x.norm();
    if (xn > 0) {
      const Complex phase = abs(x(0)) > 0 ? x(0) / Complex(abs(x(0))) : Complex(1);
      CVector u = x;
      u(0) += phase * xn;
      const Real un2 = u.squaredNorm();
      if (un2 > 0) {
        householder.block(1, 1, q - 1, q - 1) -= (2 / un2) * (u * u.adjoint());
      }
    }
  }
  const Automorphism stage1 = Automorphism::from_matrix(householder);
  const CVector a1 = stage1.apply_raw(a_frame);

  // Stage 2: axial hyperbolic map moving a onto the horosphere through 0.
  const CVector w = siegel_coords_e1(a1);
  const Real rho = w(0).imag() - w.tail(q - 1).squaredNorm();
  const Automorphism stage2 =
      Automorphism::from_matrix(from_siegel(siegel_dilation_matrix(q, Real(1) / sqrt(rho))));

  // Stage 3: Heisenberg translation along that horosphere onto 0.
  const CVector w2 = siegel_coords_e1(stage2.apply_raw(a1));
  const CVector shift = -w2.tail(q - 1);
  const Automorphism stage3 =
      Automorphism::from_matrix(from_siegel(heisenberg_matrix(shift, -w2(0).real())));

  const CMatrix g_frame = stage3.matrix() * stage2.matrix() * stage1.matrix();
  const Real mu = rho;  // = exp(-horofunction(a, zeta))
  Automorphism g =
      Automorphism::from_matrix(v.adjoint() * g_frame * v).with_normal_form({zeta, mu});

  const CVector image = g.apply_raw(a.coords());
  if (!(image.norm() < Real("1e-10"))) {
    throw NumericalError("normalizing_automorphism: g(a) = 0 not attained (|g(a)| = " +
                         format_real(image.norm()) + ")");
  }
  return {g, mu};
}

CVector ball_to_siegel(const BallPoint& z, const BoundaryPoint& zeta) {
  require_same_dimension(z.dimension(), zeta.dimension(), "ball_to_siegel");
  return siegel_coords_e1(frame_unitary(zeta) * z.coords());
}

BallPoint siegel_to_ball(const CVector& w, const BoundaryPoint& zeta) {
  const int q = static_cast<int>(w.size());
  require_same_dimension(q, zeta.dimension(), "siegel_to_ball");
  if (!(w(0).imag() - w.tail(q - 1).squaredNorm() > 0)) {
    throw DomainError("siegel_to_ball: point is outside the Siegel domain");
  }
  const Complex denom = w(0) + kI;
  CVector z(q);
  z(0) = Complex(1) - Complex(0, 2) / denom;
  for (int k = 1; k < q; ++k) z(k) = Complex(2) * w(k) / denom;
  return BallPoint(frame_unitary(zeta).adjoint() * z);
}

}  // namespace backorbit
