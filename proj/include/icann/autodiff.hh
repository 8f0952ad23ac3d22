#pragma once

/**
 * \file autodiff.hh
 * \brief Minimal reverse-mode automatic differentiation on a linear tape.
 *
 * Every model function in this library is a template on its scalar type. With
 * `double` it evaluates; with `ad::Var` the same code records a tape whose
 * reverse sweep yields the gradient of a scalar output with respect to every
 * leaf. Operations between constants record nothing, so only the part of the
 * graph that actually depends on a leaf costs memory.
 *
 * A tape is made current for the calling thread with a TapeScope. Each thread
 * owns its own tape; variables must not cross tapes.
 */

#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace icann::ad {

class Tape
{
public:
  using Index = std::int32_t;
  static constexpr Index kConstant = -1;

  Tape() = default;
  Tape(const Tape&)            = delete;
  Tape& operator=(const Tape&) = delete;

  Index leaf() { return push(kConstant, 0.0, kConstant, 0.0); }
  Index unary(Index a, double da) { return push(a, da, kConstant, 0.0); }
  Index binary(Index a, double da, Index b, double db) { return push(a, da, b, db); }

  std::size_t size() const noexcept { return nodes_.size(); }
  void clear() noexcept { nodes_.clear(); }
  void reserve(std::size_t n) { nodes_.reserve(n); }

  /// Adjoints of every node with respect to `root` (seeded with 1).
  std::vector<double> adjoints(Index root) const {
    std::vector<double> adj(nodes_.size(), 0.0);
    if (root == kConstant)
      return adj;
    adj[static_cast<std::size_t>(root)] = 1.0;
    for (Index i = root; i >= 0; --i) {
      const double a = adj[static_cast<std::size_t>(i)];
      if (a == 0.0)
        continue;
      const Node& n = nodes_[static_cast<std::size_t>(i)];
      if (n.a != kConstant)
        adj[static_cast<std::size_t>(n.a)] += a * n.da;
      if (n.b != kConstant)
        adj[static_cast<std::size_t>(n.b)] += a * n.db;
    }
    return adj;
  }

  static Tape* active() noexcept { return current(); }

private:
  friend class TapeScope;

  struct Node
  {
    Index a, b;
    double da, db;
  };

  Index push(Index a, double da, Index b, double db) {
    nodes_.push_back({a, b, da, db});
    return static_cast<Index>(nodes_.size() - 1);
  }

  static Tape*& current() noexcept {
    thread_local Tape* tape = nullptr;
    return tape;
  }

  std::vector<Node> nodes_;
};

/// Makes `tape` the recording tape of this thread for the scope's lifetime.
class TapeScope
{
public:
  explicit TapeScope(Tape& tape)
      : previous_{Tape::current()} {
    Tape::current() = &tape;
  }
  ~TapeScope() { Tape::current() = previous_; }
  TapeScope(const TapeScope&)            = delete;
  TapeScope& operator=(const TapeScope&) = delete;

private:
  Tape* previous_;
};

class Var
{
public:
  using Index = Tape::Index;

  Var() = default;
  Var(double v) // NOLINT(google-explicit-constructor): constants mix freely
      : value_{v} {}

  /// New independent variable on the active tape.
  static Var leaf(double v) {
    assert(Tape::active() != nullptr);
    return Var{v, Tape::active()->leaf()};
  }

  double value() const noexcept { return value_; }
  Index index() const noexcept { return index_; }
  bool is_constant() const noexcept { return index_ == Tape::kConstant; }

  /// Result of a unary primitive with local derivative `d`.
  static Var unary(double v, const Var& x, double d) {
    if (x.is_constant())
      return Var{v};
    return Var{v, Tape::active()->unary(x.index_, d)};
  }

  /// Result of a binary primitive with local derivatives `dx`, `dy`.
  static Var binary(double v, const Var& x, double dx, const Var& y, double dy) {
    if (x.is_constant() && y.is_constant())
      return Var{v};
    if (y.is_constant())
      return Var{v, Tape::active()->unary(x.index_, dx)};
    if (x.is_constant())
      return Var{v, Tape::active()->unary(y.index_, dy)};
    return Var{v, Tape::active()->binary(x.index_, dx, y.index_, dy)};
  }

  Var& operator+=(const Var& o) { return *this = *this + o; }
  Var& operator-=(const Var& o) { return *this = *this - o; }
  Var& operator*=(const Var& o) { return *this = *this * o; }
  Var& operator/=(const Var& o) { return *this = *this / o; }

  friend Var operator+(const Var& x, const Var& y) { return binary(x.value_ + y.value_, x, 1.0, y, 1.0); }
  friend Var operator-(const Var& x, const Var& y) { return binary(x.value_ - y.value_, x, 1.0, y, -1.0); }
  friend Var operator*(const Var& x, const Var& y) { return binary(x.value_ * y.value_, x, y.value_, y, x.value_); }
  friend Var operator/(const Var& x, const Var& y) {
    const double inv = 1.0 / y.value_;
    const double q   = x.value_ * inv;
    return binary(q, x, inv, y, -q * inv);
  }
  friend Var operator-(const Var& x) { return unary(-x.value_, x, -1.0); }
  friend Var operator+(const Var& x) { return x; }

  friend bool operator==(const Var& x, const Var& y) { return x.value_ == y.value_; }
  friend auto operator<=>(const Var& x, const Var& y) { return x.value_ <=> y.value_; }

private:
  Var(double v, Index i)
      : value_{v}
      , index_{i} {}

  double value_ = 0.0;
  Index index_  = Tape::kConstant;
};

// Elementary functions, found by ADL from templated model code.

inline Var exp(const Var& x) {
  const double e = std::exp(x.value());
  return Var::unary(e, x, e);
}
inline Var log(const Var& x) { return Var::unary(std::log(x.value()), x, 1.0 / x.value()); }
inline Var sqrt(const Var& x) {
  const double s = std::sqrt(x.value());
  return Var::unary(s, x, 0.5 / s);
}
inline Var pow(const Var& x, double p) {
  const double v = std::pow(x.value(), p);
  return Var::unary(v, x, p * std::pow(x.value(), p - 1.0));
}
inline Var cosh(const Var& x) { return Var::unary(std::cosh(x.value()), x, std::sinh(x.value())); }
inline Var sinh(const Var& x) { return Var::unary(std::sinh(x.value()), x, std::cosh(x.value())); }
inline Var tanh(const Var& x) {
  const double t = std::tanh(x.value());
  return Var::unary(t, x, 1.0 - t * t);
}
/// Subgradient 0 at the kink.
inline Var abs(const Var& x) {
  const double v = x.value();
  return Var::unary(std::abs(v), x, v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0));
}
inline bool isfinite(const Var& x) { return std::isfinite(x.value()); }

inline double value_of(const Var& x) noexcept { return x.value(); }

/// Gradient of `root` with respect to `leaves`, in order.
inline std::vector<double> gradient(const Tape& tape, const Var& root, std::span<const Var> leaves) {
  const auto adj = tape.adjoints(root.index());
  std::vector<double> g(leaves.size(), 0.0);
  for (std::size_t k = 0; k < leaves.size(); ++k)
    if (!leaves[k].is_constant())
      g[k] = adj[static_cast<std::size_t>(leaves[k].index())];
  return g;
}

} // namespace icann::ad

namespace icann {

inline double value_of(double x) noexcept { return x; }
using ad::value_of;

} // namespace icann
