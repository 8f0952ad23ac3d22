#pragma once

/**
 * \file tensor.hh
 * \brief Symmetric second-order tensors in three dimensions.
 *
 * Only the six independent components are stored. Tensors built from
 * diagonal data carry a diagonal flag; every operation keeps that flag when
 * its inputs are diagonal and then evaluates componentwise, so coaxial load
 * paths never touch the eigen solver.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

#include <icann/autodiff.hh>
#include <icann/errors.hh>
#include <icann/scalar.hh>

namespace icann {

/// Eigenvalues at or below this are rejected by sqrt/log-type functions.
inline constexpr double kEigenvalueFloor = 1e-12;

template <typename T>
using Mat3 = std::array<std::array<T, 3>, 3>;

template <typename T = double>
class SymTensor3
{
public:
  using Scalar = T;

  /// Zero tensor (diagonal).
  SymTensor3() = default;

  static SymTensor3 zero() { return SymTensor3{}; }
  static SymTensor3 identity() { return diagonal(T(1.0), T(1.0), T(1.0)); }

  static SymTensor3 diagonal(const T& a, const T& b, const T& c) {
    SymTensor3 r;
    r.v_ = {a, b, c, T(0.0), T(0.0), T(0.0)};
    return r;
  }

  /// General symmetric tensor; flagged diagonal iff all shear entries are 0.
  static SymTensor3 from_components(const T& xx, const T& yy, const T& zz, const T& yz, const T& xz, const T& xy) {
    SymTensor3 r;
    r.v_        = {xx, yy, zz, yz, xz, xy};
    r.diagonal_ = value_of(yz) == 0.0 && value_of(xz) == 0.0 && value_of(xy) == 0.0;
    return r;
  }

  static SymTensor3 from_matrix(const Mat3<T>& m) {
    return from_components(m[0][0], m[1][1], m[2][2], m[1][2], m[0][2], m[0][1]);
  }

  bool is_diagonal() const noexcept { return diagonal_; }

  const T& operator()(int i, int j) const { return v_[voigt(i, j)]; }
  const T& diag(int i) const { return v_[static_cast<std::size_t>(i)]; }

  /// Components in Voigt order xx, yy, zz, yz, xz, xy.
  const std::array<T, 6>& voigt_components() const noexcept { return v_; }

  Mat3<T> matrix() const {
    Mat3<T> m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = (*this)(i, j);
    return m;
  }

  template <typename U>
  SymTensor3<U> cast() const {
    if (diagonal_)
      return SymTensor3<U>::diagonal(U(v_[0]), U(v_[1]), U(v_[2]));
    return SymTensor3<U>::from_components(U(v_[0]), U(v_[1]), U(v_[2]), U(v_[3]), U(v_[4]), U(v_[5]));
  }

  SymTensor3& operator+=(const SymTensor3& o) { return *this = *this + o; }
  SymTensor3& operator-=(const SymTensor3& o) { return *this = *this - o; }
  SymTensor3& operator*=(const T& s) { return *this = *this * s; }

  friend SymTensor3 operator+(const SymTensor3& a, const SymTensor3& b) {
    return combine(a, b, [](const T& x, const T& y) { return x + y; });
  }
  friend SymTensor3 operator-(const SymTensor3& a, const SymTensor3& b) {
    return combine(a, b, [](const T& x, const T& y) { return x - y; });
  }
  friend SymTensor3 operator-(const SymTensor3& a) { return a * T(-1.0); }
  friend SymTensor3 operator*(const SymTensor3& a, const T& s) {
    SymTensor3 r = a;
    const int n  = a.diagonal_ ? 3 : 6;
    for (int k = 0; k < n; ++k)
      r.v_[static_cast<std::size_t>(k)] = a.v_[static_cast<std::size_t>(k)] * s;
    return r;
  }
  friend SymTensor3 operator*(const T& s, const SymTensor3& a) { return a * s; }
  friend SymTensor3 operator/(const SymTensor3& a, const T& s) { return a * (T(1.0) / s); }

  friend bool operator==(const SymTensor3& a, const SymTensor3& b) { return a.v_ == b.v_; }

  friend std::ostream& operator<<(std::ostream& os, const SymTensor3& a) {
    os << "[[" << value_of(a(0, 0)) << ", " << value_of(a(0, 1)) << ", " << value_of(a(0, 2)) << "], ["
       << value_of(a(1, 0)) << ", " << value_of(a(1, 1)) << ", " << value_of(a(1, 2)) << "], ["
       << value_of(a(2, 0)) << ", " << value_of(a(2, 1)) << ", " << value_of(a(2, 2)) << "]]";
    return os;
  }

private:
  static constexpr std::size_t voigt(int i, int j) {
    if (i == j)
      return static_cast<std::size_t>(i);
    return static_cast<std::size_t>(6 - i - j); // (1,2)->3, (0,2)->4, (0,1)->5
  }

  template <typename Op>
  static SymTensor3 combine(const SymTensor3& a, const SymTensor3& b, Op op) {
    SymTensor3 r;
    r.diagonal_ = a.diagonal_ && b.diagonal_;
    const int n = r.diagonal_ ? 3 : 6;
    for (int k = 0; k < n; ++k)
      r.v_[static_cast<std::size_t>(k)] = op(a.v_[static_cast<std::size_t>(k)], b.v_[static_cast<std::size_t>(k)]);
    return r;
  }

  std::array<T, 6> v_{T(0.0), T(0.0), T(0.0), T(0.0), T(0.0), T(0.0)};
  bool diagonal_ = true;
};

template <typename T>
T trace(const SymTensor3<T>& a) {
  return a.diag(0) + a.diag(1) + a.diag(2);
}

template <typename T>
T det(const SymTensor3<T>& a) {
  if (a.is_diagonal())
    return a.diag(0) * a.diag(1) * a.diag(2);
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(1, 2)) - a(0, 1) * (a(0, 1) * a(2, 2) - a(1, 2) * a(0, 2)) +
         a(0, 2) * (a(0, 1) * a(1, 2) - a(1, 1) * a(0, 2));
}

/// Double contraction A : B.
template <typename T>
T ddot(const SymTensor3<T>& a, const SymTensor3<T>& b) {
  T s = a.diag(0) * b.diag(0) + a.diag(1) * b.diag(1) + a.diag(2) * b.diag(2);
  if (a.is_diagonal() || b.is_diagonal())
    return s;
  return s + T(2.0) * (a(1, 2) * b(1, 2) + a(0, 2) * b(0, 2) + a(0, 1) * b(0, 1));
}

/// Full matrix product (not symmetric in general).
template <typename T>
Mat3<T> product(const SymTensor3<T>& a, const SymTensor3<T>& b) {
  Mat3<T> m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      T s(0.0);
      for (int k = 0; k < 3; ++k)
        s += a(i, k) * b(k, j);
      m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = s;
    }
  return m;
}

/// sym(A B); exact A B when A and B commute.
template <typename T>
SymTensor3<T> coaxial_product(const SymTensor3<T>& a, const SymTensor3<T>& b) {
  if (a.is_diagonal() && b.is_diagonal())
    return SymTensor3<T>::diagonal(a.diag(0) * b.diag(0), a.diag(1) * b.diag(1), a.diag(2) * b.diag(2));
  const Mat3<T> m = product(a, b);
  const T half(0.5);
  return SymTensor3<T>::from_components(m[0][0], m[1][1], m[2][2], half * (m[1][2] + m[2][1]),
                                        half * (m[0][2] + m[2][0]), half * (m[0][1] + m[1][0]));
}

/// A A.
template <typename T>
SymTensor3<T> square(const SymTensor3<T>& a) {
  return coaxial_product(a, a);
}

/// B A B, symmetric for symmetric A and B.
template <typename T>
SymTensor3<T> sandwich(const SymTensor3<T>& b, const SymTensor3<T>& a) {
  if (a.is_diagonal() && b.is_diagonal())
    return SymTensor3<T>::diagonal(b.diag(0) * a.diag(0) * b.diag(0), b.diag(1) * a.diag(1) * b.diag(1),
                                   b.diag(2) * a.diag(2) * b.diag(2));
  Mat3<T> ba = product(b, a);
  Mat3<T> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      T s(0.0);
      for (int k = 0; k < 3; ++k)
        s += ba[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] * b(k, j);
      r[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = s;
    }
  const T half(0.5);
  return SymTensor3<T>::from_components(r[0][0], r[1][1], r[2][2], half * (r[1][2] + r[2][1]),
                                        half * (r[0][2] + r[2][0]), half * (r[0][1] + r[1][0]));
}

/// A - tr(A)/3 I.
template <typename T>
SymTensor3<T> dev(const SymTensor3<T>& a) {
  const T m = trace(a) / T(3.0);
  return a - SymTensor3<T>::identity() * m;
}

template <typename T>
SymTensor3<T> inverse(const SymTensor3<T>& a) {
  using std::abs;
  const T d = det(a);
  double scale = 0.0;
  for (const auto& c : a.voigt_components())
    scale = std::max(scale, std::abs(value_of(c)));
  if (scale == 0.0 || !(std::abs(value_of(d)) > 1e-12 * scale * scale * scale))
    throw DomainError("inverse: singular tensor");
  if (a.is_diagonal())
    return SymTensor3<T>::diagonal(T(1.0) / a.diag(0), T(1.0) / a.diag(1), T(1.0) / a.diag(2));
  const T inv = T(1.0) / d;
  return SymTensor3<T>::from_components((a(1, 1) * a(2, 2) - a(1, 2) * a(1, 2)) * inv,
                                        (a(0, 0) * a(2, 2) - a(0, 2) * a(0, 2)) * inv,
                                        (a(0, 0) * a(1, 1) - a(0, 1) * a(0, 1)) * inv,
                                        (a(0, 2) * a(0, 1) - a(0, 0) * a(1, 2)) * inv,
                                        (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) * inv,
                                        (a(0, 2) * a(1, 2) - a(0, 1) * a(2, 2)) * inv);
}

/// Principal, deviatoric and modified invariants of a symmetric tensor.
template <typename T = double>
struct InvariantSet
{
  T I1, I2, I3;
  T J2, J3;

  /// I1 / I3^(1/3); requires I3 > 0.
  const T& I1_mod() const { return checked(I1_mod_); }
  /// I2 / I3^(2/3); requires I3 > 0.
  const T& I2_mod() const { return checked(I2_mod_); }
  bool has_modified() const noexcept { return has_modified_; }

  T I1_mod_{}, I2_mod_{};
  bool has_modified_ = false;

private:
  const T& checked(const T& x) const {
    if (!has_modified_)
      throw DomainError("modified invariants require I3 > 0");
    return x;
  }
};

template <typename T>
InvariantSet<T> invariants(const SymTensor3<T>& a) {
  using std::pow;
  InvariantSet<T> inv;
  inv.I1 = trace(a);
  inv.I3 = det(a);
  const SymTensor3<T> s = dev(a);
  if (a.is_diagonal()) {
    inv.I2 = a.diag(0) * a.diag(1) + a.diag(1) * a.diag(2) + a.diag(0) * a.diag(2);
    inv.J2 = T(0.5) * (s.diag(0) * s.diag(0) + s.diag(1) * s.diag(1) + s.diag(2) * s.diag(2));
    inv.J3 = (s.diag(0) * s.diag(0) * s.diag(0) + s.diag(1) * s.diag(1) * s.diag(1) +
              s.diag(2) * s.diag(2) * s.diag(2)) /
             T(3.0);
  } else {
    const SymTensor3<T> s2 = square(s);
    inv.I2                 = T(0.5) * (inv.I1 * inv.I1 - ddot(a, a));
    inv.J2                 = T(0.5) * trace(s2);
    inv.J3                 = ddot(s2, s) / T(3.0);
  }
  if (value_of(inv.I3) > 0.0) {
    const T cbrt        = pow(inv.I3, -1.0 / 3.0);
    inv.I1_mod_         = inv.I1 * cbrt;
    inv.I2_mod_         = inv.I2 * cbrt * cbrt;
    inv.has_modified_   = true;
  }
  return inv;
}

/// Eigenvalues and orthonormal eigenvectors (columns of `vectors`).
template <typename T>
struct EigenSystem
{
  std::array<T, 3> values;
  Mat3<T> vectors;
};

/// Cyclic Jacobi iteration. Rotation parameters are built from T arithmetic,
/// so with ad::Var the decomposition is differentiable away from repeated
/// eigenvalues.
template <typename T>
EigenSystem<T> eigen(const SymTensor3<T>& m) {
  using std::abs;
  using std::sqrt;
  EigenSystem<T> es;
  Mat3<T> a = m.matrix();
  Mat3<T>& v = es.vectors;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      v[i][j] = T(i == j ? 1.0 : 0.0);

  if (!m.is_diagonal()) {
    double scale = 0.0;
    for (const auto& c : m.voigt_components())
      scale = std::max(scale, std::abs(value_of(c)));
    for (int sweep = 0; sweep < 64; ++sweep) {
      const double off = std::abs(value_of(a[0][1])) + std::abs(value_of(a[0][2])) + std::abs(value_of(a[1][2]));
      if (off <= 1e-300 || off <= 1e-18 * scale)
        break;
      for (std::size_t p = 0; p < 2; ++p)
        for (std::size_t q = p + 1; q < 3; ++q) {
          if (value_of(a[p][q]) == 0.0)
            continue;
          const T theta = (a[q][q] - a[p][p]) / (T(2.0) * a[p][q]);
          const double sg = value_of(theta) >= 0.0 ? 1.0 : -1.0;
          const T t       = T(sg) / (abs(theta) + sqrt(theta * theta + T(1.0)));
          const T c       = T(1.0) / sqrt(t * t + T(1.0));
          const T s       = t * c;
          for (std::size_t k = 0; k < 3; ++k) {
            const T akp = a[k][p];
            const T akq = a[k][q];
            a[k][p]     = c * akp - s * akq;
            a[k][q]     = s * akp + c * akq;
          }
          for (std::size_t k = 0; k < 3; ++k) {
            const T apk = a[p][k];
            const T aqk = a[q][k];
            a[p][k]     = c * apk - s * aqk;
            a[q][k]     = s * apk + c * aqk;
          }
          for (std::size_t k = 0; k < 3; ++k) {
            const T vkp = v[k][p];
            const T vkq = v[k][q];
            v[k][p]     = c * vkp - s * vkq;
            v[k][q]     = s * vkp + c * vkq;
          }
        }
    }
  }
  for (std::size_t i = 0; i < 3; ++i)
    es.values[i] = a[i][i];
  return es;
}

/// Q f(Λ) Qᵀ; componentwise on diagonal input.
template <typename T, typename F>
SymTensor3<T> apply_spectral(const SymTensor3<T>& a, F&& f) {
  if (a.is_diagonal())
    return SymTensor3<T>::diagonal(f(a.diag(0)), f(a.diag(1)), f(a.diag(2)));
  const EigenSystem<T> es = eigen(a);
  std::array<T, 3> fl{f(es.values[0]), f(es.values[1]), f(es.values[2])};
  Mat3<T> r;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      T s(0.0);
      for (std::size_t k = 0; k < 3; ++k)
        s += es.vectors[i][k] * fl[k] * es.vectors[j][k];
      r[i][j] = s;
    }
  return SymTensor3<T>::from_components(r[0][0], r[1][1], r[2][2], r[1][2], r[0][2], r[0][1]);
}

/// Principal (SPD) square root.
template <typename T>
SymTensor3<T> sym_sqrt(const SymTensor3<T>& a) {
  using std::sqrt;
  return apply_spectral(a, [](const T& x) {
    if (!(value_of(x) > kEigenvalueFloor))
      throw DomainError("sym_sqrt: tensor is not positive definite");
    return sqrt(x);
  });
}

template <typename T>
SymTensor3<T> sym_exp(const SymTensor3<T>& a) {
  using std::exp;
  return apply_spectral(a, [](const T& x) { return exp(x); });
}

/// Smallest eigenvalue (by value).
template <typename T>
double min_eigenvalue(const SymTensor3<T>& a) {
  if (a.is_diagonal())
    return std::min({value_of(a.diag(0)), value_of(a.diag(1)), value_of(a.diag(2))});
  const auto es = eigen(a);
  return std::min({value_of(es.values[0]), value_of(es.values[1]), value_of(es.values[2])});
}

template <typename T>
bool all_finite(const SymTensor3<T>& a) {
  return std::all_of(a.voigt_components().begin(), a.voigt_components().end(),
                     [](const T& c) { return std::isfinite(value_of(c)); });
}

template <typename T>
SymTensor3<double> value_of(const SymTensor3<T>& a) {
  if constexpr (std::is_same_v<T, double>)
    return a;
  else if constexpr (std::is_floating_point_v<T>)
    return a.template cast<double>();
  else {
    const auto& v = a.voigt_components();
    if (a.is_diagonal())
      return SymTensor3<double>::diagonal(v[0].value(), v[1].value(), v[2].value());
    return SymTensor3<double>::from_components(v[0].value(), v[1].value(), v[2].value(), v[3].value(), v[4].value(),
                                               v[5].value());
  }
}

} // namespace icann
