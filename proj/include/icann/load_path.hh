#pragma once

/// \file load_path.hh
/// \brief Coaxial, isochoric load paths: sampled C11(t) plus a protocol that
/// fills in the other two principal stretches.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <icann/errors.hh>
#include <icann/tensor.hh>

namespace icann {

enum class Protocol
{
  uniaxial,
  equibiaxial,
  pure_shear
};

inline std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::uniaxial:
      return "uniaxial";
    case Protocol::equibiaxial:
      return "equibiaxial";
    case Protocol::pure_shear:
      return "pure_shear";
  }
  return "?";
}

inline Protocol parse_protocol(std::string_view s) {
  if (s == "uniaxial")
    return Protocol::uniaxial;
  if (s == "equibiaxial")
    return Protocol::equibiaxial;
  if (s == "pure_shear")
    return Protocol::pure_shear;
  throw ConfigError("unknown protocol '" + std::string(s) + "'");
}

/// Right Cauchy-Green tensor of the protocol at C11 (det = 1).
inline SymTensor3<double> coaxial_cauchy_green(Protocol p, double c11) {
  switch (p) {
    case Protocol::uniaxial: {
      const double t = 1.0 / std::sqrt(c11);
      return SymTensor3<double>::diagonal(c11, t, t);
    }
    case Protocol::equibiaxial:
      return SymTensor3<double>::diagonal(c11, c11, 1.0 / (c11 * c11));
    case Protocol::pure_shear:
      return SymTensor3<double>::diagonal(c11, 1.0, 1.0 / c11);
  }
  throw UnsupportedProtocolError("unknown protocol");
}

struct LoadPath
{
  Protocol protocol = Protocol::uniaxial;
  std::vector<double> time;
  std::vector<double> c11;

  std::size_t size() const noexcept { return time.size(); }
  SymTensor3<double> C(std::size_t k) const { return coaxial_cauchy_green(protocol, c11[k]); }

  /// Throws DomainError unless times strictly increase from t0 >= 0 and C11 > 0.
  void validate() const {
    if (time.size() != c11.size())
      throw DomainError("load path: time and C11 lengths differ");
    if (time.empty())
      throw DomainError("load path: empty");
    if (!(time.front() >= 0.0))
      throw DomainError("load path: first time stamp is negative");
    for (std::size_t k = 0; k < time.size(); ++k) {
      if (!std::isfinite(time[k]) || !std::isfinite(c11[k]))
        throw DomainError("load path: non-finite sample " + std::to_string(k));
      if (!(c11[k] > 0.0))
        throw DomainError("load path: C11 <= 0 at sample " + std::to_string(k));
      if (k > 0 && !(time[k] > time[k - 1]))
        throw DomainError("load path: time not strictly increasing at sample " + std::to_string(k));
    }
  }
};

namespace detail {

/// Sample times 0, dt, 2 dt, ... with `t_end` always included.
inline std::vector<double> sample_times(double t_end, double dt) {
  if (!(dt > 0.0))
    throw DomainError("load path: dt must be positive");
  const auto n = static_cast<long>(std::floor(t_end / dt + 1e-9));
  std::vector<double> t;
  t.reserve(static_cast<std::size_t>(n) + 2);
  for (long k = 0; k <= n; ++k)
    t.push_back(static_cast<double>(k) * dt);
  if (t_end - t.back() > 1e-9 * dt)
    t.push_back(t_end);
  return t;
}

} // namespace detail

/// Linear ramp of C11 from 1 to `c11_max` over `ramp_s`, then held for `hold_s`.
inline LoadPath build_relaxation_path(Protocol protocol, double c11_max, double ramp_s, double hold_s, double dt) {
  if (!(c11_max > 0.0))
    throw DomainError("relaxation path: C11_max must be positive");
  if (!(ramp_s > 0.0) || !(hold_s >= 0.0))
    throw DomainError("relaxation path: ramp must be positive and hold non-negative");
  LoadPath path{protocol, detail::sample_times(ramp_s + hold_s, dt), {}};
  path.c11.reserve(path.time.size());
  for (double t : path.time)
    path.c11.push_back(1.0 + (c11_max - 1.0) * std::min(t / ramp_s, 1.0));
  return path;
}

/// Piecewise-linear C11 target reached at `t_end`.
struct CyclicSegment
{
  double t_end;
  double c11_target;
};

/// Concatenated linear segments in C11 starting from C11 = 1 at t = 0.
inline LoadPath build_cyclic_path(Protocol protocol, std::span<const CyclicSegment> segments, double dt) {
  if (segments.empty())
    throw DomainError("cyclic path: no segments");
  double t_prev = 0.0;
  for (const auto& s : segments) {
    if (!(s.t_end > t_prev))
      throw DomainError("cyclic path: segment end times must increase");
    if (!(s.c11_target > 0.0))
      throw DomainError("cyclic path: C11 targets must be positive");
    t_prev = s.t_end;
  }
  LoadPath path{protocol, detail::sample_times(segments.back().t_end, dt), {}};
  path.c11.reserve(path.time.size());
  std::size_t seg = 0;
  double t0 = 0.0, c0 = 1.0;
  for (double t : path.time) {
    while (seg + 1 < segments.size() && t > segments[seg].t_end) {
      t0 = segments[seg].t_end;
      c0 = segments[seg].c11_target;
      ++seg;
    }
    const double a = (t - t0) / (segments[seg].t_end - t0);
    path.c11.push_back(c0 + (segments[seg].c11_target - c0) * a);
  }
  return path;
}

/**
 * \brief Constant stretch rate in F11 = sqrt(C11).
 *
 * F11 moves from 1 towards sqrt(c11_max) at |rate| (1/s), then optionally
 * returns to 1 at the same rate, then is held for `hold_s`.
 */
inline LoadPath build_stretch_rate_path(Protocol protocol, double rate, double c11_max, double dt, bool unload,
                                        double hold_s = 0.0) {
  if (!(rate > 0.0) || !(c11_max > 0.0) || !(hold_s >= 0.0))
    throw DomainError("stretch-rate path: rate and C11_max must be positive");
  const double f_max  = std::sqrt(c11_max);
  const double t_load = std::abs(f_max - 1.0) / rate;
  const double dir    = f_max >= 1.0 ? 1.0 : -1.0;
  const double t_end  = t_load * (unload ? 2.0 : 1.0) + hold_s;
  LoadPath path{protocol, detail::sample_times(t_end, dt), {}};
  path.c11.reserve(path.time.size());
  for (double t : path.time) {
    double f;
    if (t <= t_load)
      f = 1.0 + dir * rate * t;
    else if (unload && t <= 2.0 * t_load)
      f = f_max - dir * rate * (t - t_load);
    else
      f = unload ? 1.0 : f_max;
    path.c11.push_back(f * f);
  }
  return path;
}

} // namespace icann
