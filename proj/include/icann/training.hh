#pragma once

/**
 * \file training.hh
 * \brief Loss, gradients through the unrolled recurrence, projected ADAM and
 * the ε / R² fit metrics.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <icann/autodiff.hh>
#include <icann/errors.hh>
#include <icann/loading_protocols.hh>
#include <icann/viscoelastic_model.hh>

namespace icann {

enum class GradientMode
{
  reverse,
  finite_difference
};

/// Which weights enter the L2 term.
enum class L2Scope
{
  all,       ///< every trainable weight
  scale_only ///< outer-layer weights only (no shape weights, no volumetric exponent)
};

struct TrainConfig
{
  int epochs           = 10000;
  double learning_rate = 1e-3;
  double beta1         = 0.9;
  double beta2         = 0.999;
  double adam_epsilon  = 1e-8;
  double l2            = 1e-3;
  L2Scope l2_scope     = L2Scope::all;
  std::uint64_t seed   = 0;
  /// Failed rollouts cost penalty_factor times the epoch-0 loss.
  double penalty_factor = 1e6;
  GradientMode gradient = GradientMode::reverse;
  /// Relative step of the central differences.
  double fd_step = 1e-5;
  double scale_init_max = 0.1;
  double shape_init_max = 1.0;

  void validate() const {
    if (epochs <= 0)
      throw ConfigError("epochs must be positive");
    if (!(l2 >= 0.0))
      throw ConfigError("l2 must be non-negative");
    if (!(learning_rate > 0.0))
      throw ConfigError("learning rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
      throw ConfigError("ADAM betas must lie in [0, 1)");
    if (!(penalty_factor > 0.0) || !(fd_step > 0.0))
      throw ConfigError("penalty factor and finite-difference step must be positive");
  }
};

struct Metrics
{
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  double r2      = std::numeric_limits<double>::quiet_NaN();
};

/**
 * \brief Normalized RMSE and clamped coefficient of determination.
 *
 *   ε  = sqrt(mean((S - Ŝ)²)) / mean|Ŝ|
 *   R² = max(0, 1 - Σ(S - Ŝ)² / Σ(S̄ - Ŝ)²)
 *
 * with Ŝ observed, S predicted and S̄ the mean observation.
 */
inline Metrics compute_metrics(std::span<const double> predicted, std::span<const double> observed) {
  if (predicted.size() != observed.size())
    throw std::invalid_argument("metrics: " + std::to_string(predicted.size()) + " predictions for " +
                                std::to_string(observed.size()) + " observations");
  const std::size_t n = observed.size();
  if (n < 2)
    throw std::invalid_argument("metrics: need at least two data points");
  const double nd = static_cast<double>(n);
  double mean = 0.0, mean_abs = 0.0;
  for (double s : observed) {
    mean += s;
    mean_abs += std::abs(s);
  }
  mean /= nd;
  mean_abs /= nd;
  if (!(mean_abs > 0.0))
    throw DomainError("metrics: all observations are zero, epsilon is undefined");
  double sse = 0.0, sst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sse += (predicted[k] - observed[k]) * (predicted[k] - observed[k]);
    sst += (mean - observed[k]) * (mean - observed[k]);
  }
  Metrics m;
  m.epsilon = std::sqrt(sse / nd) / mean_abs;
  if (sst == 0.0)
    m.r2 = sse == 0.0 ? 1.0 : 0.0;
  else
    m.r2 = std::max(0.0, 1.0 - sse / sst);
  return m;
}

// Loss ------------------------------------------------------------------------

/// Mask of the weights that enter the L2 term.
inline std::vector<bool> l2_mask(std::span<const ParameterInfo> info, L2Scope scope) {
  std::vector<bool> m(info.size(), true);
  if (scope == L2Scope::scale_only)
    for (std::size_t k = 0; k < info.size(); ++k)
      m[k] = !info[k].shape && info[k].sign_constrained;
  return m;
}

struct LossOptions
{
  double l2      = 1e-3;
  L2Scope scope  = L2Scope::all;
  double penalty = 1e12; ///< contribution of a failed rollout
};

struct LossValue
{
  double value = 0.0;
  int failed   = 0; ///< number of datasets whose rollout failed
  std::string first_failure;
};

namespace detail {

inline void check_datasets(std::span<const Dataset> data) {
  for (const auto& d : data)
    d.validate();
}

inline double regularization(std::span<const double> params, const std::vector<bool>& mask, double l2) {
  double r = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k)
    if (mask[k])
      r += l2 * params[k] * params[k];
  return r;
}

} // namespace detail

namespace detail {

/// Data term of a model already in scalar type `Real`; failures are counted in `r`.
template <typename Real>
Real data_loss(const ViscoSolid<Real>& model, std::span<const Dataset> data, double penalty, LossValue& r) {
  Real total(0);
  for (const auto& d : data) {
    try {
      const auto s = rollout_s11(model, d.path);
      Real sse(0);
      for (std::size_t k = 0; k < s.size(); ++k)
        sse += (s[k] - Real(d.stress[k])) * (s[k] - Real(d.stress[k]));
      total += sse;
    } catch (const StepError& e) {
      if (r.failed++ == 0)
        r.first_failure = d.name + ": " + e.what();
      total += Real(penalty);
    }
  }
  return total;
}

} // namespace detail

/// Σ (S11 - Ŝ11)² over all datasets plus λ Σ w²; failed rollouts cost `penalty`.
/// `Real` selects the arithmetic of the rollout (double or long double).
template <typename Real = double>
LossValue loss(const ViscoSolid<double>& model, std::span<const Dataset> data, const LossOptions& opt) {
  detail::check_datasets(data);
  LossValue r;
  r.value = static_cast<double>(detail::data_loss(model.template cast<Real>(), data, opt.penalty, r));
  r.value += detail::regularization(flatten(model), l2_mask(parameter_info(model), opt.scope), opt.l2);
  return r;
}

struct LossGradient
{
  LossValue loss;
  std::vector<double> gradient;
};

/**
 * \brief Loss and its gradient with respect to flatten(model).
 *
 * Reverse mode records one tape per dataset and sums dataset gradients in
 * dataset order. A failed dataset contributes the penalty and no gradient.
 */
inline LossGradient grad_loss(const ViscoSolid<double>& model, std::span<const Dataset> data, const LossOptions& opt,
                              GradientMode mode = GradientMode::reverse, double fd_step = 1e-5) {
  detail::check_datasets(data);
  const std::vector<double> params = flatten(model);
  const auto info                  = parameter_info(model);
  const std::vector<bool> mask     = l2_mask(info, opt.scope);
  const std::size_t n              = params.size();
  LossGradient r;
  r.gradient.assign(n, 0.0);

  if (mode == GradientMode::finite_difference) {
    // Extended precision keeps rollout roundoff well below the difference quotient.
    using Real = long double;
    r.loss     = loss(model, data, opt);
    std::vector<Real> p(params.begin(), params.end());
    LossValue ignored;
    for (std::size_t k = 0; k < n; ++k) {
      const Real h = Real(fd_step) * std::max(std::abs(p[k]), Real(1));
      const Real w = p[k];
      p[k]         = w + h;
      const Real up = detail::data_loss(with_parameters<Real>(model, std::span<const Real>(p)), data, opt.penalty, ignored);
      p[k]         = w - h;
      const Real dn = detail::data_loss(with_parameters<Real>(model, std::span<const Real>(p)), data, opt.penalty, ignored);
      p[k]         = w;
      r.gradient[k] = static_cast<double>((up - dn) / (Real(2) * h));
      if (mask[k])
        r.gradient[k] += 2.0 * opt.l2 * params[k];
    }
    return r;
  }

  ad::Tape tape;
  for (const auto& d : data) {
    tape.clear();
    ad::TapeScope scope(tape);
    std::vector<ad::Var> leaves;
    leaves.reserve(n);
    for (double p : params)
      leaves.push_back(ad::Var::leaf(p));
    const auto m = with_parameters<ad::Var>(model, std::span<const ad::Var>(leaves));
    try {
      ad::Var sse(0.0);
      rollout(m, d.path, [&](std::size_t k, const StepOutput<ad::Var>& o) {
        const ad::Var e = o.S.diag(0) - d.stress[k];
        sse += e * e;
      });
      const auto g = ad::gradient(tape, sse, leaves);
      for (std::size_t k = 0; k < n; ++k)
        r.gradient[k] += g[k];
      r.loss.value += sse.value();
    } catch (const StepError& e) {
      if (r.loss.failed++ == 0)
        r.loss.first_failure = d.name + ": " + e.what();
      r.loss.value += opt.penalty;
    }
  }
  r.loss.value += detail::regularization(params, mask, opt.l2);
  for (std::size_t k = 0; k < n; ++k)
    if (mask[k])
      r.gradient[k] += 2.0 * opt.l2 * params[k];
  return r;
}

// Optimizer -------------------------------------------------------------------

struct AdamState
{
  std::vector<double> m, v;
  long t = 0;
};

struct AdamHyper
{
  double learning_rate = 1e-3;
  double beta1         = 0.9;
  double beta2         = 0.999;
  double epsilon       = 1e-8;
};

/// One bias-corrected ADAM update, then clamp sign-constrained weights at 0.
inline void adam_step(std::vector<double>& w, std::span<const double> grad, AdamState& st, const AdamHyper& h,
                      std::span<const ParameterInfo> info) {
  if (grad.size() != w.size() || info.size() != w.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  if (st.m.empty()) {
    st.m.assign(w.size(), 0.0);
    st.v.assign(w.size(), 0.0);
  }
  ++st.t;
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(st.t));
  for (std::size_t k = 0; k < w.size(); ++k) {
    st.m[k] = h.beta1 * st.m[k] + (1.0 - h.beta1) * grad[k];
    st.v[k] = h.beta2 * st.v[k] + (1.0 - h.beta2) * grad[k] * grad[k];
    w[k] -= h.learning_rate * (st.m[k] / c1) / (std::sqrt(st.v[k] / c2) + h.epsilon);
    if (info[k].sign_constrained && w[k] < 0.0)
      w[k] = 0.0;
  }
}

/// Random initial weights: scale U[0, scale_init_max], shape U[0, shape_init_max],
/// volumetric exponent 0.
inline ViscoSolid<double> initialize(const ViscoSolid<double>& topology, const TrainConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto info = parameter_info(topology);
  std::vector<double> p(info.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double u = unit(rng);
    if (!info[k].sign_constrained)
      p[k] = 0.0;
    else
      p[k] = u * (info[k].shape ? cfg.shape_init_max : cfg.scale_init_max);
  }
  return with_parameters<double>(topology, std::span<const double>(p));
}

struct DatasetReport
{
  std::string name;
  Metrics metrics;
  bool failed = false;
};

/// Rollout and metrics per dataset; failed rollouts are flagged, not thrown.
/// Metrics stay NaN where they are undefined (all-zero observations).
inline std::vector<DatasetReport> evaluate(const ViscoSolid<double>& model, std::span<const Dataset> data) {
  std::vector<DatasetReport> r;
  for (const auto& d : data) {
    DatasetReport rep{d.name, {}, false};
    try {
      const auto pred = rollout_s11(model, d.path);
      rep.metrics     = compute_metrics(pred, d.stress);
    } catch (const StepError&) {
      rep.failed = true;
    } catch (const DomainError&) {
    }
    r.push_back(std::move(rep));
  }
  return r;
}

struct TrainResult
{
  ViscoSolid<double> model;
  std::vector<double> loss_history; ///< loss at the start of every epoch
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<DatasetReport> reports;
};

/// Called after every epoch with (epoch, loss); return false to stop.
using TrainObserver = std::function<bool(int, double)>;

/**
 * \brief Projected ADAM on the full-curve loss, deterministic for a given seed.
 *
 * `start` fixes the topology; its weights are replaced by initialize() unless
 * `use_start_weights` is set. Throws StepError if the epoch-0 rollout fails.
 */
inline TrainResult train(const ViscoSolid<double>& start, std::span<const Dataset> data, const TrainConfig& cfg,
                         bool use_start_weights = false, const TrainObserver& observer = {}) {
  cfg.validate();
  if (data.empty())
    throw ConfigError("training needs at least one dataset");
  detail::check_datasets(data);

  ViscoSolid<double> model = use_start_weights ? start : initialize(start, cfg);
  const auto info          = parameter_info(model);
  std::vector<double> w    = flatten(model);
  const AdamHyper hyper{cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_epsilon};
  LossOptions opt{cfg.l2, cfg.l2_scope, std::numeric_limits<double>::infinity()};

  TrainResult res;
  res.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));
  AdamState st;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    model  = with_parameters<double>(start, std::span<const double>(w));
    auto g = grad_loss(model, data, opt, cfg.gradient, cfg.fd_step);
    if (epoch == 0) {
      if (g.loss.failed > 0)
        throw StepError("initial weights fail: " + g.loss.first_failure, 0);
      opt.penalty = cfg.penalty_factor * g.loss.value;
    }
    res.loss_history.push_back(g.loss.value);
    res.best_loss = std::min(res.best_loss, g.loss.value);
    adam_step(w, g.gradient, st, hyper, info);
    if (observer && !observer(epoch, g.loss.value))
      break;
  }
  res.model   = with_parameters<double>(start, std::span<const double>(w));
  res.reports = evaluate(res.model, data);
  return res;
}

} // namespace icann
