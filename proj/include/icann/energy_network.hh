#pragma once

/**
 * \file energy_network.hh
 * \brief Polyconvex Helmholtz free-energy network.
 *
 * The full variant reads
 * \f[
 *   \psi = \sum_{k} w_{2,k}\, f_k\big(w_{1,k}, (\tilde I_1-3)^{p_k}\ \mathrm{or}\ (\tilde I_2-3)^{p_k}\big)
 *        + w_{3,2}\big[I_3^{-w_{3,1}} - 1 + w_{3,1}\ln I_3\big]
 * \f]
 * with the eight isochoric terms built from the identity and exp(.)-1
 * activations on the first and second powers of the shifted modified
 * invariants. The equilibrium variant takes the unmodified I1, I2 of its
 * argument and has no volumetric term.
 *
 * Weight slots follow the row order of the published weight tables.
 */

#include <array>
#include <span>
#include <string_view>

#include <icann/scalar.hh>
#include <icann/tensor.hh>

namespace icann {

enum class EnergyVariant
{
  full,
  equilibrium
};

template <typename T = double>
struct EnergyWeights
{
  // Slot indices (table row order).
  static constexpr int w1_1 = 0, w1_3 = 1, w1_2 = 2, w1_4 = 3, w3_1 = 4, w2_1 = 5, w2_5 = 6, w2_3 = 7, w2_7 = 8,
                       w2_2 = 9, w2_6 = 10, w2_4 = 11, w2_8 = 12, w3_2 = 13;
  static constexpr int kSlots = 14;

  static constexpr std::array<std::string_view, kSlots> kNames{"w1_1", "w1_3", "w1_2", "w1_4", "w3_1",
                                                               "w2_1", "w2_5", "w2_3", "w2_7", "w2_2",
                                                               "w2_6", "w2_4", "w2_8", "w3_2"};

  EnergyVariant variant = EnergyVariant::full;
  std::array<T, kSlots> w{};

  EnergyWeights() { w.fill(T(0.0)); }
  explicit EnergyWeights(EnergyVariant v)
      : EnergyWeights() {
    variant = v;
  }

  T& operator[](int slot) { return w[static_cast<std::size_t>(slot)]; }
  const T& operator[](int slot) const { return w[static_cast<std::size_t>(slot)]; }

  /// Slots that exist for this variant, in table order.
  std::span<const int> slots() const { return slots(variant); }
  static std::span<const int> slots(EnergyVariant v) {
    static constexpr std::array<int, 14> full{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13};
    static constexpr std::array<int, 12> eq{0, 1, 2, 3, 5, 6, 7, 8, 9, 10, 11, 12};
    if (v == EnergyVariant::full)
      return full;
    return eq;
  }
  std::size_t count() const { return slots().size(); }

  /// Every weight except the volumetric exponent is non-negative.
  static constexpr bool sign_constrained(int slot) { return slot != w3_1; }

  template <typename U>
  EnergyWeights<U> cast() const {
    EnergyWeights<U> r(variant);
    for (int s = 0; s < kSlots; ++s)
      r[s] = U(value_of(w[static_cast<std::size_t>(s)]));
    return r;
  }
};

namespace detail {

/// ∂ψ/∂(I-3), ∂ψ/∂(II-3), ∂ψ/∂I3 and ψ itself for given invariant shifts.
template <typename T>
struct EnergyScalars
{
  T psi;
  T d_a; // w.r.t. first (modified) invariant
  T d_b; // w.r.t. second (modified) invariant
  T d_x; // w.r.t. I3
};

template <typename T>
EnergyScalars<T> energy_scalars(const EnergyWeights<T>& w, const T& a, const T& b, const T& x, bool volumetric) {
  using std::log;
  using W    = EnergyWeights<T>;
  const T a2 = a * a;
  const T b2 = b * b;

  const T e1 = guarded_exp(w[W::w1_1] * a);
  const T e2 = guarded_exp(w[W::w1_2] * a2);
  const T e3 = guarded_exp(w[W::w1_3] * b);
  const T e4 = guarded_exp(w[W::w1_4] * b2);

  EnergyScalars<T> r;
  r.psi = w[W::w2_1] * a + w[W::w2_2] * (e1 - T(1.0)) + w[W::w2_3] * a2 + w[W::w2_4] * (e2 - T(1.0)) +
          w[W::w2_5] * b + w[W::w2_6] * (e3 - T(1.0)) + w[W::w2_7] * b2 + w[W::w2_8] * (e4 - T(1.0));
  r.d_a = w[W::w2_1] + w[W::w2_2] * w[W::w1_1] * e1 + T(2.0) * a * (w[W::w2_3] + w[W::w2_4] * w[W::w1_2] * e2);
  r.d_b = w[W::w2_5] + w[W::w2_6] * w[W::w1_3] * e3 + T(2.0) * b * (w[W::w2_7] + w[W::w2_8] * w[W::w1_4] * e4);
  r.d_x = T(0.0);

  if (volumetric) {
    const T lx = log(x);
    const T p  = guarded_exp(-w[W::w3_1] * lx); // x^(-w31)
    r.psi += w[W::w3_2] * (p - T(1.0) + w[W::w3_1] * lx);
    r.d_x = w[W::w3_2] * w[W::w3_1] * (T(1.0) - p) / x;
  }
  return r;
}

template <typename T>
InvariantSet<T> checked_invariants(const SymTensor3<T>& c) {
  InvariantSet<T> inv = invariants(c);
  if (!(value_of(inv.I3) > 0.0))
    throw DomainError("energy network: I3 <= 0");
  return inv;
}

} // namespace detail

/// ψ(arg).
template <typename T>
T energy(const EnergyWeights<T>& w, const SymTensor3<T>& arg) {
  const InvariantSet<T> inv = detail::checked_invariants(arg);
  if (w.variant == EnergyVariant::equilibrium)
    return detail::energy_scalars(w, inv.I1 - T(3.0), inv.I2 - T(3.0), inv.I3, false).psi;
  return detail::energy_scalars(w, inv.I1_mod() - T(3.0), inv.I2_mod() - T(3.0), inv.I3, true).psi;
}

/**
 * \brief ∂ψ/∂arg, by the chain rule through the invariants.
 *
 * Uses ∂I1/∂A = I, ∂I2/∂A = I1 I - A, ∂I3/∂A = I3 A⁻¹ and collects the result
 * as α I + β A + γ A⁻¹, which stays diagonal for diagonal arguments.
 */
template <typename T>
SymTensor3<T> energy_derivative(const EnergyWeights<T>& w, const SymTensor3<T>& arg) {
  using std::pow;
  const InvariantSet<T> inv = detail::checked_invariants(arg);
  const SymTensor3<T> id    = SymTensor3<T>::identity();

  if (w.variant == EnergyVariant::equilibrium) {
    const auto s = detail::energy_scalars(w, inv.I1 - T(3.0), inv.I2 - T(3.0), inv.I3, false);
    return id * (s.d_a + s.d_b * inv.I1) - arg * s.d_b;
  }

  const auto s  = detail::energy_scalars(w, inv.I1_mod() - T(3.0), inv.I2_mod() - T(3.0), inv.I3, true);
  const T r     = pow(inv.I3, -1.0 / 3.0);
  const T r2    = r * r;
  const T alpha = s.d_a * r + s.d_b * r2 * inv.I1;
  const T beta  = -s.d_b * r2;
  const T gamma = -s.d_a * r * inv.I1 / T(3.0) - s.d_b * r2 * T(2.0) * inv.I2 / T(3.0) + s.d_x * inv.I3;
  return id * alpha + arg * beta + inverse(arg) * gamma;
}

} // namespace icann
