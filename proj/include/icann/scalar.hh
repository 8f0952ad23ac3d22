#pragma once

/// \file scalar.hh
/// \brief Scalar helpers shared by `double` and `ad::Var` code paths.

#include <cmath>
#include <concepts>
#include <numbers>

#include <icann/autodiff.hh>

namespace icann {

/// Largest argument passed to exp/cosh inside the networks.
inline constexpr double kActivationClamp = 50.0;

/// Counts clamped activation inputs on the calling thread.
///
/// Training can transiently drive a shape weight so high that an exponential
/// activation overflows. Instead of returning inf, the argument is clamped to
/// kActivationClamp and this counter is bumped; step outputs report it.
class ActivationGuard
{
public:
  static long count() noexcept { return counter(); }
  static void reset() noexcept { counter() = 0; }
  static void hit() noexcept { ++counter(); }

private:
  static long& counter() noexcept {
    thread_local long n = 0;
    return n;
  }
};

inline double sign(double x) noexcept { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }
inline double sign(const ad::Var& x) noexcept { return sign(x.value()); }

/// ln(cosh(z)) without overflow for large |z|.
template <std::floating_point F>
F log_cosh(F z) {
  const F a = std::abs(z);
  return a + std::log1p(std::exp(F(-2) * a)) - std::numbers::ln2_v<F>;
}
inline ad::Var log_cosh(const ad::Var& z) {
  return ad::Var::unary(log_cosh(z.value()), z, std::tanh(z.value()));
}

/// |x| clamped to kActivationClamp before applying f; the clamped branch is
/// treated as a constant.
template <typename T, typename F>
T guarded(const T& x, F&& f) {
  if (std::abs(value_of(x)) > kActivationClamp) {
    ActivationGuard::hit();
    return T(f(std::copysign(kActivationClamp, value_of(x))));
  }
  return f(x);
}

template <typename T>
T guarded_exp(const T& x) {
  using std::exp;
  if (value_of(x) > kActivationClamp) {
    ActivationGuard::hit();
    return T(std::exp(kActivationClamp));
  }
  return exp(x);
}

template <typename T>
T guarded_cosh(const T& x) {
  using std::cosh;
  return guarded(x, [](const auto& y) { return cosh(y); });
}

template <typename T>
T guarded_sinh(const T& x) {
  using std::sinh;
  return guarded(x, [](const auto& y) { return sinh(y); });
}

} // namespace icann
