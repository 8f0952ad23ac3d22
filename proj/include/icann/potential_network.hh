#pragma once

/**
 * \file potential_network.hh
 * \brief Convex, non-negative, zero-valued pseudo-potential network g(Γ).
 *
 * g is a sum of three scalar sub-potentials, one per stress invariant
 * I1, J2, J3. Each sub-potential applies abs(.), ln(cosh(.)) and cosh(.)-1 to
 * the first and second power of its invariant. With non-negative weights
 * every term is convex, non-negative and zero at the origin, so the flow
 * direction ∂g/∂Γ always satisfies Γ : ∂g/∂Γ >= 0.
 *
 * The reduced variant keeps only the abs and ln(cosh) terms of the I1
 * channel and the first power of the J2 channel, evaluated on the scaled
 * invariant 3 J2.
 */

#include <cmath>
#include <array>
#include <span>
#include <string_view>

#include <icann/scalar.hh>
#include <icann/tensor.hh>

namespace icann {

enum class PotentialVariant
{
  full,
  reduced
};

enum class StressChannel
{
  I1,
  J2,
  J3
};

template <typename T = double>
struct PotentialWeights
{
  static constexpr int kFullSlots    = 30;
  static constexpr int kReducedSlots = 9;

  // Reduced slots (table row order).
  struct Reduced
  {
    static constexpr int w1_1 = 0, w1_3 = 1, w1_5_tilde = 2, w2_1 = 3, w2_4 = 4, w2_7_tilde = 5, w2_2 = 6, w2_5 = 7,
                         w2_8 = 8;
  };

  /// Full slots: w1_k at k-1, w2_k at 11+k.
  static constexpr int shape(int k) { return k - 1; }
  static constexpr int scale(int k) { return 11 + k; }

  static constexpr std::array<std::string_view, kReducedSlots> kReducedNames{
      "w1_1", "w1_3", "w1_5_tilde", "w2_1", "w2_4", "w2_7_tilde", "w2_2", "w2_5", "w2_8"};
  static constexpr std::array<std::string_view, kFullSlots> kFullNames{
      "w1_1",  "w1_2",  "w1_3",  "w1_4",  "w1_5",  "w1_6",  "w1_7",  "w1_8",  "w1_9",  "w1_10",
      "w1_11", "w1_12", "w2_1",  "w2_2",  "w2_3",  "w2_4",  "w2_5",  "w2_6",  "w2_7",  "w2_8",
      "w2_9",  "w2_10", "w2_11", "w2_12", "w2_13", "w2_14", "w2_15", "w2_16", "w2_17", "w2_18"};

  PotentialVariant variant = PotentialVariant::reduced;
  std::array<T, kFullSlots> w{};

  PotentialWeights() { w.fill(T(0.0)); }
  explicit PotentialWeights(PotentialVariant v)
      : PotentialWeights() {
    variant = v;
  }

  T& operator[](int slot) { return w[static_cast<std::size_t>(slot)]; }
  const T& operator[](int slot) const { return w[static_cast<std::size_t>(slot)]; }

  std::size_t count() const { return variant == PotentialVariant::full ? kFullSlots : kReducedSlots; }
  std::span<const std::string_view> names() const {
    if (variant == PotentialVariant::full)
      return kFullNames;
    return kReducedNames;
  }
  static constexpr bool sign_constrained(int) { return true; }

  template <typename U>
  PotentialWeights<U> cast() const {
    PotentialWeights<U> r(variant);
    for (int s = 0; s < kFullSlots; ++s)
      r[s] = U(value_of(w[static_cast<std::size_t>(s)]));
    return r;
  }
};

/// Full-form weights equivalent to a reduced set (w2_7 = 3 w̃2_7, w1_5 = 3 w̃1_5).
template <typename T>
PotentialWeights<T> to_full(const PotentialWeights<T>& r) {
  if (r.variant == PotentialVariant::full)
    return r;
  using R  = typename PotentialWeights<T>::Reduced;
  using PW = PotentialWeights<T>;
  PW f(PotentialVariant::full);
  f[PW::shape(1)] = r[R::w1_1];
  f[PW::shape(3)] = r[R::w1_3];
  f[PW::shape(5)] = T(3.0) * r[R::w1_5_tilde];
  f[PW::scale(1)] = r[R::w2_1];
  f[PW::scale(2)] = r[R::w2_2];
  f[PW::scale(4)] = r[R::w2_4];
  f[PW::scale(5)] = r[R::w2_5];
  f[PW::scale(7)] = T(3.0) * r[R::w2_7_tilde];
  f[PW::scale(8)] = r[R::w2_8];
  return f;
}

/// Weights of one scalar sub-potential h(x); `lc` and `ch` pairs are (scale, shape).
template <typename T>
struct ChannelWeights
{
  T abs1{0.0}, lc1_scale{0.0}, lc1_shape{0.0}, ch1_scale{0.0}, ch1_shape{0.0};
  T abs2{0.0}, lc2_scale{0.0}, lc2_shape{0.0}, ch2_scale{0.0}, ch2_shape{0.0};
};

/// Sub-potential weights for `ch`; `arg_factor` is the factor between the
/// invariant and the network input (3 for the reduced J2 channel).
template <typename T>
ChannelWeights<T> channel_weights(const PotentialWeights<T>& w, StressChannel ch, double& arg_factor) {
  using PW = PotentialWeights<T>;
  ChannelWeights<T> c;
  arg_factor = 1.0;
  if (w.variant == PotentialVariant::reduced) {
    using R = typename PW::Reduced;
    if (ch == StressChannel::I1) {
      c.abs1      = w[R::w2_1];
      c.lc1_scale = w[R::w2_2];
      c.lc1_shape = w[R::w1_1];
      c.abs2      = w[R::w2_4];
      c.lc2_scale = w[R::w2_5];
      c.lc2_shape = w[R::w1_3];
    } else if (ch == StressChannel::J2) {
      c.abs1      = w[R::w2_7_tilde];
      c.lc1_scale = w[R::w2_8];
      c.lc1_shape = w[R::w1_5_tilde];
      arg_factor  = 3.0;
    }
    return c;
  }
  const int base2 = ch == StressChannel::I1 ? 1 : (ch == StressChannel::J2 ? 7 : 13);
  const int base1 = ch == StressChannel::I1 ? 1 : (ch == StressChannel::J2 ? 5 : 9);
  c.abs1          = w[PW::scale(base2)];
  c.lc1_scale     = w[PW::scale(base2 + 1)];
  c.lc1_shape     = w[PW::shape(base1)];
  c.ch1_scale     = w[PW::scale(base2 + 2)];
  c.ch1_shape     = w[PW::shape(base1 + 1)];
  c.abs2          = w[PW::scale(base2 + 3)];
  c.lc2_scale     = w[PW::scale(base2 + 4)];
  c.lc2_shape     = w[PW::shape(base1 + 2)];
  c.ch2_scale     = w[PW::scale(base2 + 5)];
  c.ch2_shape     = w[PW::shape(base1 + 3)];
  return c;
}

namespace detail {

/// Structurally zero: a zero constant that carries no derivative.
inline bool is_zero(double x) { return x == 0.0; }
inline bool is_zero(const ad::Var& x) { return x.is_constant() && x.value() == 0.0; }

template <typename T>
T sub_potential(const ChannelWeights<T>& c, const T& x) {
  using std::abs;
  const T x2 = x * x;
  T h(0.0);
  if (!is_zero(c.abs1))
    h += c.abs1 * abs(x);
  if (!is_zero(c.lc1_scale))
    h += c.lc1_scale * log_cosh(c.lc1_shape * x);
  if (!is_zero(c.ch1_scale))
    h += c.ch1_scale * (guarded_cosh(c.ch1_shape * x) - T(1.0));
  if (!is_zero(c.abs2))
    h += c.abs2 * x2;
  if (!is_zero(c.lc2_scale))
    h += c.lc2_scale * log_cosh(c.lc2_shape * x2);
  if (!is_zero(c.ch2_scale))
    h += c.ch2_scale * (guarded_cosh(c.ch2_shape * x2) - T(1.0));
  return h;
}

template <typename T>
T sub_potential_derivative(const ChannelWeights<T>& c, const T& x) {
  using std::tanh;
  const T x2 = x * x;
  T d(0.0);
  if (!is_zero(c.abs1))
    d += c.abs1 * T(sign(x));
  if (!is_zero(c.lc1_scale))
    d += c.lc1_scale * c.lc1_shape * tanh(c.lc1_shape * x);
  if (!is_zero(c.ch1_scale))
    d += c.ch1_scale * c.ch1_shape * guarded_sinh(c.ch1_shape * x);
  T d2(0.0);
  if (!is_zero(c.abs2))
    d2 += c.abs2;
  if (!is_zero(c.lc2_scale))
    d2 += c.lc2_scale * c.lc2_shape * tanh(c.lc2_shape * x2);
  if (!is_zero(c.ch2_scale))
    d2 += c.ch2_scale * c.ch2_shape * guarded_sinh(c.ch2_shape * x2);
  if (!is_zero(d2))
    d += T(2.0) * x * d2;
  return d;
}

} // namespace detail

/// Value of the sub-potential g_k at invariant value x.
template <typename T>
T channel_value(const PotentialWeights<T>& w, StressChannel ch, const T& x) {
  double f          = 1.0;
  const auto c      = channel_weights(w, ch, f);
  return detail::sub_potential(c, T(f) * x);
}

/// dg_k/dx at invariant value x.
template <typename T>
T channel_derivative(const PotentialWeights<T>& w, StressChannel ch, const T& x) {
  double f          = 1.0;
  const auto c      = channel_weights(w, ch, f);
  return T(f) * detail::sub_potential_derivative(c, T(f) * x);
}

template <typename T>
T potential(const PotentialWeights<T>& w, const SymTensor3<T>& gamma) {
  const InvariantSet<T> inv = invariants(gamma);
  T g                       = channel_value(w, StressChannel::I1, inv.I1) + channel_value(w, StressChannel::J2, inv.J2);
  if (w.variant == PotentialVariant::full)
    g += channel_value(w, StressChannel::J3, inv.J3);
  return g;
}

/// Channel invariants and the scalar derivatives g1'(I1), g2'(J2), g3'(J3).
template <typename T>
struct ChannelDerivatives
{
  T I1, J2, J3;
  T dI1, dJ2, dJ3;
};

namespace detail {

/// Relative size below which I1 is cancellation noise of the driving stress.
inline constexpr double kTraceRoundoff = 1e-12;

/// I1 with cancellation noise replaced by an exact zero.
template <typename T>
T resolved_trace(const SymTensor3<T>& gamma, const T& i1) {
  const double scale = std::abs(value_of(gamma.diag(0))) + std::abs(value_of(gamma.diag(1))) +
                       std::abs(value_of(gamma.diag(2)));
  if (std::abs(value_of(i1)) <= kTraceRoundoff * scale)
    return T(0.0);
  return i1;
}

} // namespace detail

/// Channel derivatives at Γ; an I1 that is pure cancellation noise counts as 0,
/// which picks the zero subgradient of the |I1| kink.
template <typename T>
ChannelDerivatives<T> channel_derivatives(const PotentialWeights<T>& w, const SymTensor3<T>& gamma) {
  const InvariantSet<T> inv = invariants(gamma);
  ChannelDerivatives<T> d{detail::resolved_trace(gamma, inv.I1), inv.J2, inv.J3, T(0.0), T(0.0), T(0.0)};
  d.dI1 = channel_derivative(w, StressChannel::I1, d.I1);
  d.dJ2 = channel_derivative(w, StressChannel::J2, inv.J2);
  if (w.variant == PotentialVariant::full)
    d.dJ3 = channel_derivative(w, StressChannel::J3, inv.J3);
  return d;
}

/// ∂g/∂Γ = g1' I + g2' dev Γ + g3' dev((dev Γ)²).
template <typename T>
SymTensor3<T> potential_flow_direction(const PotentialWeights<T>& w, const SymTensor3<T>& gamma) {
  const ChannelDerivatives<T> d = channel_derivatives(w, gamma);
  const SymTensor3<T> s         = dev(gamma);
  SymTensor3<T> flow            = s * d.dJ2;
  if (!detail::is_zero(d.dI1))
    flow += SymTensor3<T>::identity() * d.dI1;
  if (!detail::is_zero(d.dJ3))
    flow += dev(square(s)) * d.dJ3;
  return flow;
}

} // namespace icann
