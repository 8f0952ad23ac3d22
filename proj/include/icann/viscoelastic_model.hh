#pragma once

/**
 * \file viscoelastic_model.hh
 * \brief Generalized Maxwell solid built from energy and potential networks,
 * integrated with an explicit exponential scheme in the co-rotated
 * intermediate configuration.
 *
 * Each branch carries the inelastic stretch U_i as hidden state. One step
 *
 *   C̄e_n   = U_i,n⁻¹ C_n U_i,n⁻¹
 *   Γ̄_n    = 2 C̄e_n ∂ψ/∂C̄e
 *   D̄_i,n  = ∂g/∂Γ̄ (Γ̄_n)
 *   C_i,n+1 = U_i,n exp(2 Δt D̄_i,n) U_i,n,   U_i,n+1 = sqrt(C_i,n+1)
 *
 * followed by the branch stress 2 U_i⁻¹ ∂ψ/∂C̄e U_i⁻¹ - p C⁻¹ at C_n+1, where
 * p makes the 33-component vanish (incompressible coaxial loading).
 *
 * Everything is templated on the scalar so the same code runs on `double`
 * and on `ad::Var` for training.
 */

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <icann/energy_network.hh>
#include <icann/errors.hh>
#include <icann/load_path.hh>
#include <icann/potential_network.hh>
#include <icann/tensor.hh>

namespace icann {

/// Tolerance on det(C) = 1 for incompressible steps.
inline constexpr double kIncompressibilityTolerance = 1e-8;

/// Spring (energy network) in series with a dashpot (potential network).
template <typename T = double>
struct MaxwellBranch
{
  using Scalar = T;

  EnergyWeights<T> energy{EnergyVariant::full};
  PotentialWeights<T> potential{PotentialVariant::reduced};

  SymTensor3<T> energy_derivative(const SymTensor3<T>& ce) const { return icann::energy_derivative(energy, ce); }
  SymTensor3<T> flow_direction(const SymTensor3<T>& gamma) const {
    return potential_flow_direction(potential, gamma);
  }
};

/// Parallel Maxwell branches plus an optional equilibrium spring.
template <typename T = double>
struct ViscoSolid
{
  using Scalar = T;

  std::vector<MaxwellBranch<T>> branches;
  std::optional<EnergyWeights<T>> equilibrium;

  static ViscoSolid maxwell(PotentialVariant pv = PotentialVariant::reduced) { return generalized(1, false, pv); }
  static ViscoSolid generalized(std::size_t n_branches, bool with_equilibrium,
                                PotentialVariant pv = PotentialVariant::reduced) {
    ViscoSolid s;
    s.branches.assign(n_branches, MaxwellBranch<T>{EnergyWeights<T>(EnergyVariant::full), PotentialWeights<T>(pv)});
    if (with_equilibrium)
      s.equilibrium = EnergyWeights<T>(EnergyVariant::equilibrium);
    return s;
  }

  template <typename U>
  ViscoSolid<U> cast() const {
    ViscoSolid<U> r;
    for (const auto& b : branches)
      r.branches.push_back({b.energy.template cast<U>(), b.potential.template cast<U>()});
    if (equilibrium)
      r.equilibrium = equilibrium->template cast<U>();
    return r;
  }
};

/// Recurrent hidden state: U_i per branch and the previous total C.
template <typename T = double>
struct MaterialState
{
  std::vector<SymTensor3<T>> inelastic_stretch;
  SymTensor3<T> previous_c = SymTensor3<T>::identity();

  static MaterialState virgin(std::size_t n_branches) {
    return {std::vector<SymTensor3<T>>(n_branches, SymTensor3<T>::identity()), SymTensor3<T>::identity()};
  }
};

template <typename T = double>
struct BranchStep
{
  SymTensor3<T> driving_stress; ///< Γ̄ at the start of the step
  SymTensor3<T> flow;           ///< D̄_i at the start of the step
  T dissipation{0.0};           ///< Γ̄ : D̄_i
  T pressure{0.0};              ///< p_α at the end of the step
  SymTensor3<T> stress;         ///< branch contribution to S, pressure included
};

template <typename T = double>
struct StepOutput
{
  SymTensor3<T> S;
  std::vector<BranchStep<T>> branches;
  T equilibrium_pressure{0.0};
  long clamped_activations = 0;
};

/// C̄e = U_i⁻¹ C U_i⁻¹.
template <typename T>
SymTensor3<T> corotated_elastic_cg(const SymTensor3<T>& c, const SymTensor3<T>& u_i) {
  return sandwich(inverse(u_i), c);
}

/// Γ̄ = 2 C̄e ∂ψ/∂C̄e (symmetric because both factors are coaxial).
template <typename Law, typename T>
SymTensor3<T> driving_stress(const Law& law, const SymTensor3<T>& ce) {
  return coaxial_product(ce, law.energy_derivative(ce)) * T(2.0);
}

template <typename T>
struct BranchEvolution
{
  SymTensor3<T> u_next;
  SymTensor3<T> driving_stress;
  SymTensor3<T> flow;
  T dissipation{0.0};
};

namespace detail {

template <typename T>
std::string describe(const SymTensor3<T>& a) {
  std::string s = "[";
  const auto& v = a.voigt_components();
  for (std::size_t k = 0; k < v.size(); ++k)
    s += (k ? ", " : "") + std::to_string(value_of(v[k]));
  return s + "]";
}

} // namespace detail

/**
 * \brief One explicit exponential update of a branch's inelastic stretch.
 *
 * Evaluates Γ̄ and D̄_i at (C_n, U_i,n) and returns U_i,n+1 together with
 * those quantities. Throws StepError if any intermediate is non-finite or
 * C_i,n+1 is not positive definite.
 */
template <typename Law, typename T>
BranchEvolution<T> evolve_branch(const Law& law, const SymTensor3<T>& u_n, const SymTensor3<T>& c_n, double dt,
                                 long step = 0, int branch = StepError::kNoBranch) {
  if (!(dt >= 0.0))
    throw StepError("negative time increment", step, branch);
  BranchEvolution<T> r;
  try {
    const SymTensor3<T> ce = corotated_elastic_cg(c_n, u_n);
    r.driving_stress       = driving_stress(law, ce);
    r.flow                 = law.flow_direction(r.driving_stress);
    r.dissipation          = ddot(r.driving_stress, r.flow);
    if (!all_finite(r.driving_stress) || !all_finite(r.flow))
      throw StepError("non-finite driving stress or flow " + detail::describe(r.flow), step, branch);
    if (dt == 0.0) {
      r.u_next = u_n;
      return r;
    }
    const SymTensor3<T> c_i = sandwich(u_n, sym_exp(r.flow * T(2.0 * dt)));
    if (!all_finite(c_i) || !(min_eigenvalue(c_i) > kEigenvalueFloor))
      throw StepError("inelastic Cauchy-Green tensor not positive definite " + detail::describe(c_i) +
                          " (dt = " + std::to_string(dt) + ")",
                      step, branch);
    r.u_next = sym_sqrt(c_i);
  } catch (const DomainError& e) {
    throw StepError(e.what(), step, branch);
  }
  return r;
}

/// U_i,n+1 only.
template <typename Law, typename T>
SymTensor3<T> evolve_state(const Law& law, const SymTensor3<T>& u_n, const SymTensor3<T>& c_n, double dt) {
  return evolve_branch(law, u_n, c_n, dt).u_next;
}

namespace detail {

template <typename T>
void require_diagonal(const SymTensor3<T>& a, const char* what) {
  if (!a.is_diagonal())
    throw UnsupportedProtocolError(std::string("pressure solve needs coaxial loading; ") + what + " is not diagonal");
}

} // namespace detail

/**
 * \brief Lagrange pressure of one branch from S33 = 0.
 *
 * With diagonal tensors [2 U_i⁻¹ ∂ψ/∂C̄e U_i⁻¹]33 C33 reduces to
 * 2 (∂ψ/∂C̄e)33 C̄e33 because U_i33² = C33 / C̄e33.
 */
template <typename Law, typename T>
T branch_pressure(const Law& law, const SymTensor3<T>& ce_new, const SymTensor3<T>& c_new) {
  detail::require_diagonal(ce_new, "C̄e");
  detail::require_diagonal(c_new, "C");
  return T(2.0) * law.energy_derivative(ce_new).diag(2) * ce_new.diag(2);
}

/// Branch stress at (C, U_i) with its own pressure.
template <typename Law, typename T>
std::pair<SymTensor3<T>, T> branch_stress(const Law& law, const SymTensor3<T>& u_i, const SymTensor3<T>& c) {
  detail::require_diagonal(c, "C");
  detail::require_diagonal(u_i, "U_i");
  const SymTensor3<T> u_inv = inverse(u_i);
  const SymTensor3<T> ce    = sandwich(u_inv, c);
  const SymTensor3<T> dpsi  = law.energy_derivative(ce);
  const SymTensor3<T> s     = sandwich(u_inv, dpsi) * T(2.0);
  const T p                 = s.diag(2) * c.diag(2);
  return {s - inverse(c) * p, p};
}

/// Equilibrium-spring stress 2 ∂ψ/∂C - p C⁻¹ and its pressure.
template <typename T>
std::pair<SymTensor3<T>, T> equilibrium_stress(const EnergyWeights<T>& w, const SymTensor3<T>& c) {
  detail::require_diagonal(c, "C");
  const SymTensor3<T> s = energy_derivative(w, c) * T(2.0);
  const T p             = s.diag(2) * c.diag(2);
  return {s - inverse(c) * p, p};
}

/**
 * \brief Advance the solid from `state` to C_new over dt.
 *
 * `Solid` needs `branches` (range of branch laws providing
 * energy_derivative and flow_direction) and `equilibrium` (optional
 * EnergyWeights). Errors are rethrown as StepError tagged with `step` and
 * the branch index.
 */
template <typename Solid, typename T = typename Solid::Scalar>
std::pair<StepOutput<T>, MaterialState<T>> solid_step(const Solid& model, const MaterialState<T>& state,
                                                      const SymTensor3<T>& c_new, double dt, long step = 0) {
  const std::size_t n = model.branches.size();
  if (state.inelastic_stretch.size() != n)
    throw StepError("state has " + std::to_string(state.inelastic_stretch.size()) + " branches, model has " +
                        std::to_string(n),
                    step);
  if (!(std::abs(value_of(det(c_new)) - 1.0) <= kIncompressibilityTolerance))
    throw StepError("det(C) = " + std::to_string(value_of(det(c_new))) + " violates incompressibility", step);

  const long clamps_before = ActivationGuard::count();
  StepOutput<T> out;
  MaterialState<T> next;
  next.inelastic_stretch.reserve(n);
  next.previous_c = c_new;
  out.branches.reserve(n);

  for (std::size_t a = 0; a < n; ++a) {
    const int b   = static_cast<int>(a);
    const auto& law = model.branches[a];
    auto ev       = evolve_branch(law, state.inelastic_stretch[a], state.previous_c, dt, step, b);
    BranchStep<T> bs;
    bs.driving_stress = std::move(ev.driving_stress);
    bs.flow           = std::move(ev.flow);
    bs.dissipation    = ev.dissipation;
    try {
      auto [s, p] = branch_stress(law, ev.u_next, c_new);
      bs.stress   = std::move(s);
      bs.pressure = p;
    } catch (const DomainError& e) {
      throw StepError(e.what(), step, b);
    }
    out.S = a == 0 ? bs.stress : out.S + bs.stress;
    next.inelastic_stretch.push_back(std::move(ev.u_next));
    out.branches.push_back(std::move(bs));
  }
  if (model.equilibrium) {
    try {
      auto [s, p]              = equilibrium_stress(*model.equilibrium, c_new);
      out.S                    = n == 0 ? s : out.S + s;
      out.equilibrium_pressure = p;
    } catch (const DomainError& e) {
      throw StepError(e.what(), step);
    }
  }
  if (!all_finite(out.S))
    throw StepError("non-finite stress", step);
  out.clamped_activations = ActivationGuard::count() - clamps_before;
  return {std::move(out), std::move(next)};
}

/**
 * \brief Fold solid_step over a load path from the virgin state.
 *
 * The first sample is taken with Δt = 0; afterwards Δt is the timestamp
 * difference. `visit(k, output)` is called after every step.
 */
template <typename Solid, typename Visit>
void rollout(const Solid& model, const LoadPath& path, Visit&& visit) {
  using T = typename Solid::Scalar;
  path.validate();
  auto state = MaterialState<T>::virgin(model.branches.size());
  for (std::size_t k = 0; k < path.size(); ++k) {
    const double dt = k == 0 ? 0.0 : path.time[k] - path.time[k - 1];
    auto [out, next] = solid_step(model, state, path.C(k).template cast<T>(), dt, static_cast<long>(k));
    visit(k, std::as_const(out));
    state = std::move(next);
  }
}

template <typename Solid>
std::vector<StepOutput<typename Solid::Scalar>> rollout(const Solid& model, const LoadPath& path) {
  std::vector<StepOutput<typename Solid::Scalar>> outs;
  outs.reserve(path.size());
  rollout(model, path, [&](std::size_t, const auto& o) { outs.push_back(o); });
  return outs;
}

/// Predicted S11 series.
template <typename Solid>
std::vector<typename Solid::Scalar> rollout_s11(const Solid& model, const LoadPath& path) {
  std::vector<typename Solid::Scalar> s;
  s.reserve(path.size());
  rollout(model, path, [&](std::size_t, const auto& o) { s.push_back(o.S.diag(0)); });
  return s;
}

// Flat parameter vector ------------------------------------------------------

/// Branch prefixes `neq1`, `neq2`, ... and `eq` for the equilibrium spring.
inline std::string branch_prefix(std::size_t branch) { return "neq" + std::to_string(branch + 1); }

struct ParameterInfo
{
  std::string name;
  bool sign_constrained;
  bool shape; ///< inner-layer (shape) weight rather than outer (scale) weight
};

namespace detail {

template <typename T, typename F>
void for_each_parameter(ViscoSolid<T>& m, F&& f) {
  auto energy = [&](EnergyWeights<T>& w, const std::string& prefix) {
    for (int s : w.slots()) {
      const std::string_view n = EnergyWeights<T>::kNames[static_cast<std::size_t>(s)];
      f(w[s], ParameterInfo{prefix + ".psi." + std::string(n), EnergyWeights<T>::sign_constrained(s),
                            n.starts_with("w1")});
    }
  };
  for (std::size_t a = 0; a < m.branches.size(); ++a) {
    auto& b = m.branches[a];
    energy(b.energy, branch_prefix(a));
    const auto names = b.potential.names();
    for (int s = 0; s < static_cast<int>(b.potential.count()); ++s) {
      const std::string_view n = names[static_cast<std::size_t>(s)];
      f(b.potential[s], ParameterInfo{branch_prefix(a) + ".g." + std::string(n), true, n.starts_with("w1")});
    }
  }
  if (m.equilibrium)
    energy(*m.equilibrium, "eq");
}

} // namespace detail

/// Names and constraints of every trainable weight, in flattening order.
template <typename T>
std::vector<ParameterInfo> parameter_info(const ViscoSolid<T>& model) {
  std::vector<ParameterInfo> r;
  auto copy = model;
  detail::for_each_parameter(copy, [&](T&, const ParameterInfo& p) { r.push_back(p); });
  return r;
}

template <typename T>
std::vector<T> flatten(const ViscoSolid<T>& model) {
  std::vector<T> r;
  auto copy = model;
  detail::for_each_parameter(copy, [&](T& w, const ParameterInfo&) { r.push_back(w); });
  return r;
}

/// `topology` with its weights replaced by `params` (converted to U).
template <typename U, typename T>
ViscoSolid<U> with_parameters(const ViscoSolid<T>& topology, std::span<const U> params) {
  ViscoSolid<U> m = topology.template cast<U>();
  std::size_t k   = 0;
  detail::for_each_parameter(m, [&](U& w, const ParameterInfo& p) {
    if (k >= params.size())
      throw std::invalid_argument("with_parameters: too few values for " + p.name);
    w = params[k++];
  });
  if (k != params.size())
    throw std::invalid_argument("with_parameters: " + std::to_string(params.size()) + " values for " +
                                std::to_string(k) + " weights");
  return m;
}

} // namespace icann
