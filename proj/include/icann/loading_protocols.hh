#pragma once

/**
 * \file loading_protocols.hh
 * \brief Classical reference model and the artificial-data experiment set.
 *
 * The reference model is a compressible Neo-Hookean spring
 *
 *   ψ = μ/2 (Ĩ1 - 3) + K/d (J - 1 - ln J),   J = det C̄e,
 *
 * with the quadratic dashpot g = 1/(4μ) tr(dev Σ̄)² + 1/(18K) (tr Σ̄)², scaled
 * by 1/τ. It runs through the same integrator as the networks.
 */

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <icann/energy_network.hh>
#include <icann/load_path.hh>
#include <icann/viscoelastic_model.hh>

namespace icann {

struct ReferenceModel
{
  double mu  = 12.5; ///< shear modulus (kPa)
  double K   = 25.0; ///< bulk modulus (kPa)
  double tau = 10.0; ///< relaxation time (s)
  /// Divisor of the volumetric term (K/d).
  double volumetric_divisor = 25.0;

  void validate() const {
    if (!(mu > 0.0) || !(K > 0.0) || !(tau > 0.0) || !(volumetric_divisor > 0.0))
      throw DomainError("reference model: mu, K, tau and the volumetric divisor must be positive");
  }

  double energy(const SymTensor3<double>& ce) const {
    const auto inv = invariants(ce);
    return 0.5 * mu * (inv.I1_mod() - 3.0) + K / volumetric_divisor * (inv.I3 - 1.0 - std::log(inv.I3));
  }

  SymTensor3<double> energy_derivative(const SymTensor3<double>& ce) const {
    const auto inv     = invariants(ce);
    const auto ce_inv  = inverse(ce);
    const double r     = std::pow(inv.I3, -1.0 / 3.0);
    const auto d_i1mod = (SymTensor3<double>::identity() - ce_inv * (inv.I1 / 3.0)) * r;
    return d_i1mod * (0.5 * mu) + ce_inv * (K / volumetric_divisor * (inv.I3 - 1.0));
  }

  double potential(const SymTensor3<double>& sigma) const {
    const auto s  = dev(sigma);
    const double t = trace(sigma);
    return (ddot(s, s) / (4.0 * mu) + t * t / (18.0 * K)) / tau;
  }

  SymTensor3<double> flow_direction(const SymTensor3<double>& sigma) const {
    return (dev(sigma) / (2.0 * mu) + SymTensor3<double>::identity() * (trace(sigma) / (9.0 * K))) / tau;
  }
};

/// The reference model as a single-branch solid for solid_step / rollout.
struct ReferenceSolid
{
  using Scalar = double;

  std::vector<ReferenceModel> branches;
  std::optional<EnergyWeights<double>> equilibrium;

  explicit ReferenceSolid(const ReferenceModel& m)
      : branches{m} {
    m.validate();
  }
};

inline std::pair<StepOutput<double>, MaterialState<double>>
reference_step(const ReferenceModel& m, const MaterialState<double>& state, const SymTensor3<double>& c_new, double dt,
               long step = 0) {
  return solid_step(ReferenceSolid(m), state, c_new, dt, step);
}

/// One observed stress-time series.
struct Dataset
{
  std::string name;
  LoadPath path;
  std::vector<double> stress; ///< observed S11 per sample
  double c11_max = std::numeric_limits<double>::quiet_NaN();
  double rate    = std::numeric_limits<double>::quiet_NaN();

  void validate() const {
    path.validate();
    if (stress.size() != path.size())
      throw DomainError("dataset '" + name + "': " + std::to_string(stress.size()) + " stresses for " +
                        std::to_string(path.size()) + " samples");
  }
};

/// Sampling and schedule of the artificial experiments.
struct ArtificialProtocol
{
  double dt     = 0.01;
  double ramp_s = 0.5;
  double hold_s = 10.0;

  struct Relaxation
  {
    const char* name;
    Protocol protocol;
    double c11_max;
  };
  std::vector<Relaxation> relaxation{{"uniaxial_tension", Protocol::uniaxial, 1.5},
                                     {"uniaxial_compression", Protocol::uniaxial, 0.6},
                                     {"equibiaxial_tension", Protocol::equibiaxial, 1.8},
                                     {"pure_shear", Protocol::pure_shear, 1.2}};
  std::vector<CyclicSegment> cyclic{{0.4, 1.2}, {1.2, 2.1}, {1.6, 0.5}};
  const char* cyclic_name = "uniaxial_cyclic";
};

/// The four relaxation paths followed by the uniaxial cyclic path.
inline std::vector<std::pair<std::string, LoadPath>> artificial_paths(const ArtificialProtocol& p = {}) {
  std::vector<std::pair<std::string, LoadPath>> r;
  for (const auto& rel : p.relaxation)
    r.emplace_back(rel.name, build_relaxation_path(rel.protocol, rel.c11_max, p.ramp_s, p.hold_s, p.dt));
  r.emplace_back(p.cyclic_name, build_cyclic_path(Protocol::uniaxial, p.cyclic, p.dt));
  return r;
}

/// Reference-model S11 on every artificial path; deterministic.
inline std::vector<Dataset> generate_artificial_dataset(const ReferenceModel& m, const ArtificialProtocol& p = {}) {
  const ReferenceSolid solid(m);
  std::vector<Dataset> out;
  const auto paths = artificial_paths(p);
  for (std::size_t k = 0; k < paths.size(); ++k) {
    Dataset d;
    d.name   = paths[k].first;
    d.path   = paths[k].second;
    d.stress = rollout_s11(solid, d.path);
    if (k < p.relaxation.size())
      d.c11_max = p.relaxation[k].c11_max;
    out.push_back(std::move(d));
  }
  return out;
}

/// The reference model written exactly as single-branch network weights.
inline ViscoSolid<double> reference_as_network(const ReferenceModel& m) {
  using W  = EnergyWeights<double>;
  using R  = PotentialWeights<double>::Reduced;
  auto s   = ViscoSolid<double>::maxwell();
  auto& b  = s.branches[0];
  b.energy[W::w2_1] = 0.5 * m.mu;
  b.energy[W::w3_1] = -1.0;
  b.energy[W::w3_2] = m.K / m.volumetric_divisor;
  b.potential[R::w2_4]       = 1.0 / (18.0 * m.K * m.tau);
  b.potential[R::w2_7_tilde] = 1.0 / (6.0 * m.mu * m.tau);
  return s;
}

} // namespace icann
