#pragma once

#include <stdexcept>
#include <string>

namespace ksv {

/// Raised when a caller breaks an operation's precondition (oversize
/// coalition, invalid marginals, malformed game, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A round could not be paid for out of the remaining pull budget.
class BudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration or input file problem. `key()` names the offending key
/// (or file) when one is known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace ksv
