#pragma once

#include <stdexcept>
#include <string>

namespace icann {

/// Argument outside the domain of a tensor or network function
/// (non-positive eigenvalue, singular tensor, I3 <= 0, ...).
class DomainError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

/// Load path not supported by the closed-form pressure solve.
class UnsupportedProtocolError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Failure inside a recurrent step, tagged with where it happened.
class StepError : public std::runtime_error
{
public:
  static constexpr int kNoBranch = -1;

  StepError(const std::string& what, long step, int branch = kNoBranch)
      : std::runtime_error(format(what, step, branch))
      , step_{step}
      , branch_{branch} {}

  long step() const noexcept { return step_; }
  int branch() const noexcept { return branch_; }

private:
  static std::string format(const std::string& what, long step, int branch) {
    std::string msg = "step " + std::to_string(step);
    if (branch != kNoBranch)
      msg += ", branch " + std::to_string(branch);
    return msg + ": " + what;
  }

  long step_;
  int branch_;
};

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

} // namespace icann
