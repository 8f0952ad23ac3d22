#pragma once

/**
 * \file property_checks.hh
 * \brief Randomized property suites for the thermodynamic restrictions, the
 * determinant identity of the exponential integrator, gradient fidelity and
 * the fit metrics. Shared by `icann check` and the acceptance binary.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <icann/loading_protocols.hh>
#include <icann/potential_network.hh>
#include <icann/training.hh>
#include <icann/viscoelastic_model.hh>

namespace icann::checks {

struct CheckResult
{
  std::string name;
  bool passed = true;
  std::string detail;
};

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

/// Energy weights with roughly half the isochoric terms switched off.
inline EnergyWeights<double> random_energy(Rng& rng, EnergyVariant v) {
  using W = EnergyWeights<double>;
  W w(v);
  for (int s : w.slots()) {
    if (s == W::w3_1)
      w[s] = uniform(rng, -2.0, 2.0);
    else if (W::kNames[static_cast<std::size_t>(s)].starts_with("w1"))
      w[s] = uniform(rng, 0.0, 0.5);
    else
      w[s] = uniform(rng, 0.0, 1.0) < 0.5 ? 0.0 : uniform(rng, 0.0, 3.0);
  }
  if (v == EnergyVariant::full)
    w[W::w2_1] = std::max(w[W::w2_1], 0.5);
  return w;
}

/// Potential weights small enough for the explicit scheme at dt <= 0.05.
inline PotentialWeights<double> random_potential(Rng& rng, PotentialVariant v) {
  PotentialWeights<double> w(v);
  const auto names = w.names();
  for (int s = 0; s < static_cast<int>(w.count()); ++s) {
    if (names[static_cast<std::size_t>(s)].starts_with("w1"))
      w[s] = uniform(rng, 0.0, 0.2);
    else
      w[s] = uniform(rng, 0.0, 1.0) < 0.3 ? 0.0 : uniform(rng, 0.0, 0.02);
  }
  return w;
}

inline ViscoSolid<double> random_solid(Rng& rng, std::size_t branches, bool equilibrium) {
  ViscoSolid<double> m;
  for (std::size_t a = 0; a < branches; ++a) {
    const auto pv = uniform(rng, 0.0, 1.0) < 0.5 ? PotentialVariant::full : PotentialVariant::reduced;
    m.branches.push_back({random_energy(rng, EnergyVariant::full), random_potential(rng, pv)});
  }
  if (equilibrium)
    m.equilibrium = random_energy(rng, EnergyVariant::equilibrium);
  return m;
}

/// Random-walk coaxial path with C11 in [0.5, 2] and variable time steps.
inline LoadPath random_path(Rng& rng, std::size_t steps) {
  LoadPath p;
  const int proto = static_cast<int>(uniform(rng, 0.0, 3.0));
  p.protocol      = proto == 0 ? Protocol::uniaxial : (proto == 1 ? Protocol::equibiaxial : Protocol::pure_shear);
  double t = 0.0, c = 1.0, rate = uniform(rng, -1.0, 1.0);
  for (std::size_t k = 0; k < steps; ++k) {
    p.time.push_back(t);
    p.c11.push_back(c);
    const double dt = uniform(rng, 0.005, 0.05);
    if (uniform(rng, 0.0, 1.0) < 0.1)
      rate = uniform(rng, -1.5, 1.5);
    c = std::clamp(c + rate * dt, 0.5, 2.0);
    t += dt;
  }
  return p;
}

// Thermodynamics --------------------------------------------------------------

/**
 * \brief Dissipation, zero-valuedness, non-negativity, derivative-sign
 * agreement and ray convexity over `instances` random (weights, path) pairs.
 */
inline std::vector<CheckResult> thermodynamics(std::uint64_t seed, int instances, std::size_t steps = 50) {
  Rng rng(seed);
  CheckResult diss{"dissipation >= -1e-12 per step and branch", true, {}};
  CheckResult zero{"g(0) = 0", true, {}};
  CheckResult nonneg{"g >= 0", true, {}};
  CheckResult agree{"sign(g_k') = sign(x)", true, {}};
  CheckResult convex{"ray convexity second difference >= -1e-9", true, {}};
  double worst_diss = 0.0, worst_conv = 0.0;
  int done = 0, failed_rollouts = 0;

  while (done < instances) {
    const auto m    = random_solid(rng, 1 + static_cast<std::size_t>(uniform(rng, 0.0, 3.0)), uniform(rng, 0.0, 1.0) < 0.5);
    const auto path = random_path(rng, steps);
    try {
      rollout(m, path, [&](std::size_t k, const StepOutput<double>& o) {
        for (std::size_t a = 0; a < o.branches.size(); ++a) {
          const double d = o.branches[a].dissipation;
          worst_diss     = std::min(worst_diss, d);
          if (!(d >= -1e-12) && diss.passed) {
            diss.passed = false;
            diss.detail = "instance " + std::to_string(done) + " step " + std::to_string(k) + " branch " +
                          std::to_string(a) + ": " + std::to_string(d);
          }
        }
      });
    } catch (const StepError&) {
      ++failed_rollouts;
      if (failed_rollouts > 10 * instances)
        throw;
      continue;
    }

    for (const auto& b : m.branches) {
      const auto& w = b.potential;
      if (potential(w, SymTensor3<double>::zero()) != 0.0 && zero.passed) {
        zero.passed = false;
        zero.detail = "instance " + std::to_string(done);
      }
      for (int r = 0; r < 5; ++r) {
        const auto g = SymTensor3<double>::from_components(uniform(rng, -10, 10), uniform(rng, -10, 10),
                                                           uniform(rng, -10, 10), uniform(rng, -10, 10),
                                                           uniform(rng, -10, 10), uniform(rng, -10, 10));
        if (!(potential(w, g) >= 0.0) && nonneg.passed) {
          nonneg.passed = false;
          nonneg.detail = "instance " + std::to_string(done);
        }
      }
      for (auto ch : {StressChannel::I1, StressChannel::J2, StressChannel::J3}) {
        if (ch == StressChannel::J3 && w.variant == PotentialVariant::reduced)
          continue;
        const double lim = 10.0, h = 1e-2;
        for (double x = -lim; x <= lim + 1e-12; x += 0.25) {
          const double d = channel_derivative(w, ch, x);
          if (!(d == 0.0 || sign(d) == sign(x)) && agree.passed) {
            agree.passed = false;
            agree.detail = "x = " + std::to_string(x) + ", g' = " + std::to_string(d);
          }
          const double c2 =
              channel_value(w, ch, x + h) - 2.0 * channel_value(w, ch, x) + channel_value(w, ch, x - h);
          worst_conv = std::min(worst_conv, c2);
          if (!(c2 >= -1e-9) && convex.passed) {
            convex.passed = false;
            convex.detail = "x = " + std::to_string(x) + ": " + std::to_string(c2);
          }
        }
      }
    }
    ++done;
  }
  const std::string tail = " (" + std::to_string(done) + " instances, " + std::to_string(failed_rollouts) +
                           " unstable candidates redrawn)";
  if (diss.passed)
    diss.detail = "min " + std::to_string(worst_diss) + tail;
  if (convex.passed)
    convex.detail = "min " + std::to_string(worst_conv) + tail;
  for (auto* c : {&zero, &nonneg, &agree})
    if (c->passed)
      c->detail = tail.substr(1);
  return {diss, zero, nonneg, agree, convex};
}

// Determinant identity --------------------------------------------------------

inline double det_ci(const SymTensor3<double>& u) {
  const double d = det(u);
  return d * d;
}

/**
 * \brief det C_i conservation without I1 channel and the closed-form
 * update det C_i,n+1 = exp(6 Δt g1') det C_i,n with it.
 */
inline std::vector<CheckResult> determinant_identity(std::uint64_t seed, int rollouts = 5, std::size_t steps = 1000) {
  Rng rng(seed);
  CheckResult conserved{"|det C_i - det C_i,0| <= 1e-9 without I1 channel", true, {}};
  CheckResult update{"det C_i,n+1 = exp(6 dt g1') det C_i,n within 1e-9 relative", true, {}};
  double worst_c = 0.0, worst_u = 0.0;

  int redrawn = 0;
  for (int r = 0; r < 2 * rollouts;) {
    const bool with_i1 = r >= rollouts;
    auto m             = random_solid(rng, 3, false);
    for (auto& b : m.branches) {
      auto& w = b.potential;
      if (w.variant == PotentialVariant::reduced) {
        using R        = PotentialWeights<double>::Reduced;
        const double s = with_i1 ? 1.0 : 0.0;
        w[R::w2_1] *= s;
        w[R::w2_2] *= s;
        w[R::w2_4] *= s;
        w[R::w2_5] *= s;
        if (with_i1)
          w[R::w2_4] = std::max(w[R::w2_4], 0.005);
      } else {
        using PW = PotentialWeights<double>;
        for (int k = 1; k <= 6; ++k)
          w[PW::scale(k)] *= with_i1 ? 1.0 : 0.0;
        if (with_i1)
          w[PW::scale(4)] = std::max(w[PW::scale(4)], 0.005);
      }
    }
    const auto path = random_path(rng, steps);
    auto state      = MaterialState<double>::virgin(m.branches.size());
    double worst    = 0.0;
    long worst_step = 0;
    try {
      for (std::size_t k = 0; k < path.size(); ++k) {
        const double dt  = k == 0 ? 0.0 : path.time[k] - path.time[k - 1];
        auto [out, next] = solid_step(m, state, path.C(k), dt, static_cast<long>(k));
        for (std::size_t a = 0; a < m.branches.size(); ++a) {
          const double before = det_ci(state.inelastic_stretch[a]);
          const double after  = det_ci(next.inelastic_stretch[a]);
          double e;
          if (!with_i1) {
            e = std::abs(after - 1.0);
          } else {
            const double g1 = channel_derivatives(m.branches[a].potential, out.branches[a].driving_stress).dI1;
            const double expected = std::exp(6.0 * dt * g1) * before;
            e                     = std::abs(after - expected) / std::abs(expected);
          }
          if (e > worst) {
            worst      = e;
            worst_step = static_cast<long>(k);
          }
        }
        state = std::move(next);
      }
    } catch (const StepError&) {
      if (++redrawn > 100 * rollouts)
        throw;
      continue;
    }
    CheckResult& c = with_i1 ? update : conserved;
    double& w      = with_i1 ? worst_u : worst_c;
    w              = std::max(w, worst);
    if (!(worst <= 1e-9) && c.passed) {
      c.passed = false;
      c.detail = "rollout " + std::to_string(r) + " step " + std::to_string(worst_step) + ": " + std::to_string(worst);
    }
    ++r;
  }
  char buf[96];
  if (conserved.passed) {
    std::snprintf(buf, sizeof buf, "max deviation %.3g (%d unstable candidates redrawn)", worst_c, redrawn);
    conserved.detail = buf;
  }
  if (update.passed) {
    std::snprintf(buf, sizeof buf, "max relative error %.3g (%d unstable candidates redrawn)", worst_u, redrawn);
    update.detail = buf;
  }
  return {conserved, update};
}

// Gradient fidelity -----------------------------------------------------------

/**
 * \brief Random solid with every weight strictly inside the admissible set.
 *
 * Exact zeros are avoided: a vanishing volumetric scale keeps tr Γ̄ at 0,
 * where the abs activation has its kink and the loss is not differentiable.
 */
inline ViscoSolid<double> random_interior_solid(Rng& rng, std::size_t branches, bool equilibrium) {
  auto m = random_solid(rng, branches, equilibrium);
  auto energy = [&](EnergyWeights<double>& w) {
    using W = EnergyWeights<double>;
    for (int s : w.slots()) {
      const bool shape = W::kNames[static_cast<std::size_t>(s)].starts_with("w1");
      if (s == W::w3_1)
        w[s] = (uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0) * uniform(rng, 0.2, 1.5);
      else
        w[s] = shape ? uniform(rng, 0.05, 0.3) : uniform(rng, 0.1, 2.0);
    }
  };
  for (auto& b : m.branches) {
    energy(b.energy);
    const auto names = b.potential.names();
    for (int s = 0; s < static_cast<int>(b.potential.count()); ++s)
      b.potential[s] = names[static_cast<std::size_t>(s)].starts_with("w1") ? uniform(rng, 0.01, 0.1)
                                                                            : uniform(rng, 1e-3, 1e-2);
  }
  if (m.equilibrium)
    energy(*m.equilibrium);
  return m;
}

struct GradientComparison
{
  double worst_relative = 0.0;
  std::size_t compared  = 0;
  std::string worst_name;
};

/// Reverse mode vs central differences on one random 3-branch, `steps`-step instance.
inline GradientComparison compare_gradients(std::uint64_t seed, std::size_t steps = 20, double threshold = 1e-8,
                                            double fd_step = 1e-5) {
  Rng rng(seed);
  const LossOptions opt{1e-3, L2Scope::all, 1e12};
  ViscoSolid<double> m;
  std::vector<Dataset> data(1);
  LossGradient rev;
  for (int attempt = 0;; ++attempt) {
    if (attempt == 100)
      throw std::runtime_error("compare_gradients: no stable instance for seed " + std::to_string(seed));
    m            = random_interior_solid(rng, 3, true);
    Dataset& d   = data[0];
    d.name       = "random";
    d.path       = random_path(rng, steps);
    d.stress     = rollout_s11(ReferenceSolid(ReferenceModel{}), d.path);
    rev          = grad_loss(m, data, opt, GradientMode::reverse);
    if (rev.loss.failed == 0)
      break;
  }
  const auto fd   = grad_loss(m, data, opt, GradientMode::finite_difference, fd_step);
  const auto info = parameter_info(m);
  GradientComparison c;
  for (std::size_t k = 0; k < rev.gradient.size(); ++k) {
    const double scale = std::max(std::abs(rev.gradient[k]), std::abs(fd.gradient[k]));
    if (!(scale > threshold))
      continue;
    ++c.compared;
    const double e = std::abs(rev.gradient[k] - fd.gradient[k]) / scale;
    if (e > c.worst_relative) {
      c.worst_relative = e;
      c.worst_name     = info[k].name;
    }
  }
  return c;
}

inline CheckResult gradient_fidelity(std::uint64_t first_seed, int seeds, double tolerance = 1e-4) {
  CheckResult r{"reverse-mode gradient matches central differences within 1e-4 relative", true, {}};
  double worst = 0.0;
  std::string where;
  for (int s = 0; s < seeds; ++s) {
    const auto c = compare_gradients(first_seed + static_cast<std::uint64_t>(s));
    if (c.worst_relative > worst) {
      worst = c.worst_relative;
      where = "seed " + std::to_string(first_seed + static_cast<std::uint64_t>(s)) + " " + c.worst_name;
    }
  }
  r.passed = worst <= tolerance;
  char buf[64];
  std::snprintf(buf, sizeof buf, "worst %.3g", worst);
  r.detail = std::string(buf) + (where.empty() ? "" : " at " + where) + " over " + std::to_string(seeds) + " seeds";
  return r;
}

// Metrics ---------------------------------------------------------------------

inline std::vector<CheckResult> metrics_conformance() {
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
  std::vector<CheckResult> r;
  {
    const std::vector<double> obs{1.0, 2.0, 3.0}, pred{1.0, 2.0, 3.0};
    const auto m = compute_metrics(pred, obs);
    r.push_back({"metrics: exact prediction gives eps = 0, R2 = 1", m.epsilon == 0.0 && m.r2 == 1.0, {}});
  }
  {
    const std::vector<double> obs{1.0, 2.0, 3.0}, pred{2.0, 2.0, 2.0};
    const auto m = compute_metrics(pred, obs);
    r.push_back({"metrics: constant-mean prediction clamps R2 at 0", m.r2 == 0.0, {}});
  }
  {
    const std::vector<double> obs{1.0, 2.0, 3.0}, pred{1.0, 2.0, 4.0};
    const auto m = compute_metrics(pred, obs);
    // sse = 1, mean|obs| = 2, sst = 2
    const bool ok = near(m.epsilon, 0.5 * std::sqrt(1.0 / 3.0)) && near(m.r2, 0.5);
    r.push_back({"metrics: [1,2,3] vs [1,2,4] gives eps = sqrt(1/3)/2, R2 = 1/2", ok, {}});
  }
  return r;
}

} // namespace icann::checks
