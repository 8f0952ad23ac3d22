#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <icann/autodiff.hh>
#include <icann/tensor.hh>

#include "oracle.hh"

using icann::SymTensor3;
using T3 = SymTensor3<double>;

namespace {

T3 random_symmetric(std::mt19937_64& rng, double bound) {
  std::uniform_real_distribution<double> u(-bound, bound);
  return T3::from_components(u(rng), u(rng), u(rng), u(rng), u(rng), u(rng));
}

T3 random_spd(std::mt19937_64& rng) {
  // A Aᵀ + I stays well conditioned.
  const T3 a = random_symmetric(rng, 1.0);
  return icann::square(a) + T3::identity();
}

void expect_near(const T3& a, const T3& b, double tol) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      EXPECT_NEAR(a(i, j), b(i, j), tol) << "component (" << i << "," << j << ")";
}

T3 from_mat(const icann::Mat3<double>& m) { return T3::from_matrix(m); }

} // namespace

TEST(Invariants, Identity) {
  const auto inv = icann::invariants(T3::identity());
  EXPECT_DOUBLE_EQ(inv.I1, 3.0);
  EXPECT_DOUBLE_EQ(inv.I2, 3.0);
  EXPECT_DOUBLE_EQ(inv.I3, 1.0);
  EXPECT_DOUBLE_EQ(inv.J2, 0.0);
  EXPECT_DOUBLE_EQ(inv.J3, 0.0);
}

TEST(Invariants, UniaxialIsochoric) {
  const auto inv = icann::invariants(T3::diagonal(4.0, 0.5, 0.5));
  EXPECT_DOUBLE_EQ(inv.I3, 1.0);
}

TEST(Invariants, DiagTwoOneOne) {
  const auto inv = icann::invariants(T3::diagonal(2.0, 1.0, 1.0));
  EXPECT_DOUBLE_EQ(inv.I1, 4.0);
  EXPECT_DOUBLE_EQ(inv.I2, 5.0);
  EXPECT_DOUBLE_EQ(inv.I3, 2.0);
  // deviator (2/3, -1/3, -1/3)
  EXPECT_NEAR(inv.J2, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(inv.J3, 2.0 / 27.0, 1e-15);
}

TEST(Invariants, GeneralMatchesRotatedDiagonal) {
  // Rotation about z by 30 degrees of diag(3, 2, 0.5).
  const double c = std::cos(M_PI / 6), s = std::sin(M_PI / 6);
  const double l1 = 3.0, l2 = 2.0, l3 = 0.5;
  const T3 a = T3::from_components(c * c * l1 + s * s * l2, s * s * l1 + c * c * l2, l3, 0.0, 0.0, c * s * (l1 - l2));
  const auto inv = icann::invariants(a);
  const oracle::V3 p{l1, l2, l3};
  EXPECT_NEAR(inv.I1, static_cast<double>(oracle::i1(p)), 1e-13);
  EXPECT_NEAR(inv.I2, static_cast<double>(oracle::i2(p)), 1e-13);
  EXPECT_NEAR(inv.I3, static_cast<double>(oracle::i3(p)), 1e-13);
  EXPECT_NEAR(inv.J2, static_cast<double>(oracle::j2(p)), 1e-13);
  EXPECT_NEAR(inv.J3, static_cast<double>(oracle::j3(p)), 1e-13);
}

TEST(Invariants, ModifiedRequirePositiveDeterminant) {
  const auto inv = icann::invariants(T3::diagonal(1.0, 1.0, -1.0));
  EXPECT_THROW((void)inv.I1_mod(), icann::DomainError);
  EXPECT_THROW((void)inv.I2_mod(), icann::DomainError);
}

TEST(Dev, Examples) {
  expect_near(icann::dev(T3::identity()), T3::zero(), 0.0);
  expect_near(icann::dev(T3::diagonal(3.0, 0.0, 0.0)), T3::diagonal(2.0, -1.0, -1.0), 1e-15);
}

TEST(Dev, TracelessProperty) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 100; ++k)
    EXPECT_NEAR(icann::trace(icann::dev(random_symmetric(rng, 5.0))), 0.0, 1e-14);
}

TEST(SymSqrt, Examples) {
  expect_near(icann::sym_sqrt(T3::identity()), T3::identity(), 0.0);
  expect_near(icann::sym_sqrt(T3::diagonal(4.0, 1.0, 0.25)), T3::diagonal(2.0, 1.0, 0.5), 1e-15);
}

TEST(SymSqrt, SquaresBack) {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 100; ++k) {
    const T3 a = random_spd(rng);
    const T3 r = icann::sym_sqrt(a);
    expect_near(from_mat(icann::product(r, r)), a, 1e-12);
  }
}

TEST(SymSqrt, RejectsIndefinite) {
  EXPECT_THROW(icann::sym_sqrt(T3::diagonal(1.0, -1.0, 1.0)), icann::DomainError);
  EXPECT_THROW(icann::sym_sqrt(T3::diagonal(1.0, 0.0, 1.0)), icann::DomainError);
}

TEST(SymExp, Examples) {
  expect_near(icann::sym_exp(T3::zero()), T3::identity(), 0.0);
  expect_near(icann::sym_exp(T3::diagonal(0.5, -1.0, 2.0)), T3::diagonal(std::exp(0.5), std::exp(-1.0), std::exp(2.0)),
              1e-14);
}

TEST(SymExp, DeterminantIsExpTrace) {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 200; ++k) {
    const T3 a        = random_symmetric(rng, 2.0);
    const double want = std::exp(icann::trace(a));
    EXPECT_NEAR(icann::det(icann::sym_exp(a)) / want, 1.0, 1e-10);
  }
}

TEST(SymExp, MatchesTaylorSeries) {
  std::mt19937_64 rng(14);
  const T3 a = random_symmetric(rng, 0.8);
  icann::Mat3<double> sum{}, term{};
  for (int i = 0; i < 3; ++i)
    sum[i][i] = term[i][i] = 1.0;
  for (int n = 1; n < 40; ++n) {
    icann::Mat3<double> next{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          next[i][j] += term[i][k] * a(k, j) / n;
    term = next;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        sum[i][j] += term[i][j];
  }
  expect_near(icann::sym_exp(a), from_mat(sum), 1e-12);
}

TEST(Inverse, Examples) {
  expect_near(icann::inverse(T3::identity()), T3::identity(), 0.0);
  expect_near(icann::inverse(T3::diagonal(2.0, 4.0, 0.5)), T3::diagonal(0.5, 0.25, 2.0), 0.0);
}

TEST(Inverse, RandomSpd) {
  std::mt19937_64 rng(15);
  for (int k = 0; k < 100; ++k) {
    const T3 a = random_spd(rng);
    expect_near(from_mat(icann::product(a, icann::inverse(a))), T3::identity(), 1e-12);
  }
}

TEST(Inverse, Singular) {
  EXPECT_THROW(icann::inverse(T3::diagonal(1.0, 0.0, 2.0)), icann::DomainError);
  EXPECT_THROW(icann::inverse(T3::from_components(1.0, 1.0, 0.0, 0.0, 0.0, 1.0)), icann::DomainError);
}

TEST(Sandwich, MatchesMatrixProducts) {
  std::mt19937_64 rng(16);
  const T3 a = random_symmetric(rng, 1.0);
  const T3 b = random_symmetric(rng, 1.0);
  icann::Mat3<double> r{};
  const auto ba = icann::product(b, a);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        r[i][j] += ba[i][k] * b(k, j);
  expect_near(icann::sandwich(b, a), from_mat(r), 1e-14);
}

TEST(Autodiff, ExpOfSqrtChain) {
  icann::ad::Tape tape;
  icann::ad::TapeScope scope(tape);
  const auto x = icann::ad::Var::leaf(0.7);
  const auto y = exp(sqrt(x)) * x;
  const auto g = tape.adjoints(y.index());
  const double sx   = std::sqrt(0.7);
  const double want = std::exp(sx) * (1.0 + 0.7 / (2.0 * sx));
  EXPECT_NEAR(g[static_cast<std::size_t>(x.index())], want, 1e-14);
}

TEST(Autodiff, SymExpDerivativeMatchesDifferences) {
  using V = icann::ad::Var;
  icann::ad::Tape tape;
  icann::ad::TapeScope scope(tape);
  const double base[6] = {0.3, -0.2, 0.1, 0.25, -0.15, 0.4};
  std::array<V, 6> x;
  for (int k = 0; k < 6; ++k)
    x[k] = V::leaf(base[k]);
  const auto e = icann::sym_exp(SymTensor3<V>::from_components(x[0], x[1], x[2], x[3], x[4], x[5]));
  const V f    = e(0, 1) + e(2, 2) * e(0, 0);
  const auto g = tape.adjoints(f.index());

  auto eval = [&](int k, double h) {
    double c[6];
    std::copy(base, base + 6, c);
    c[k] += h;
    const T3 r = icann::sym_exp(T3::from_components(c[0], c[1], c[2], c[3], c[4], c[5]));
    return r(0, 1) + r(2, 2) * r(0, 0);
  };
  for (int k = 0; k < 6; ++k) {
    const double fd = (eval(k, 1e-6) - eval(k, -1e-6)) / 2e-6;
    EXPECT_NEAR(g[static_cast<std::size_t>(x[k].index())], fd, 1e-7) << "component " << k;
  }
}
