#pragma once

// Flat lookup of V over every feasible coalition, keyed by bitmask. Built
// once on the calling thread, read-only afterwards, so the enumeration
// kernels can share it across OpenMP workers without locking.

#include <bit>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "ksv/error.hpp"
#include "ksv/game.hpp"

namespace ksv::detail {

/// Calls f(mask) for every mask over `n` bits with exactly `k` set bits,
/// in increasing numeric order (Gosper's hack).
template <typename F>
void for_each_mask_of_size(std::size_t n, std::size_t k, F&& f) {
  if (k > n) return;
  if (k == 0) {
    f(std::uint64_t{0});
    return;
  }
  const std::uint64_t limit = std::uint64_t{1} << n;
  std::uint64_t m = (std::uint64_t{1} << k) - 1;
  while (m < limit) {
    f(m);
    const std::uint64_t c = m & (~m + 1);
    const std::uint64_t r = m + c;
    m = (((r ^ m) >> 2) / c) | r;
  }
}

inline void check_limits(const RestrictedGame& game, const EnumerationLimits& limits,
                         const char* what) {
  if (game.arms() > limits.max_arms || game.arms() > 62) {
    throw ContractViolation(std::string(what) + ": M=" + std::to_string(game.arms()) +
                            " exceeds enumeration guard " + std::to_string(limits.max_arms));
  }
  if (game.budget() > limits.max_budget) {
    throw ContractViolation(std::string(what) + ": K=" + std::to_string(game.budget()) +
                            " exceeds enumeration guard " + std::to_string(limits.max_budget));
  }
}

class ValueTable {
 public:
  explicit ValueTable(const RestrictedGame& game)
      : arms_(game.arms()), budget_(game.budget()), dense_(arms_ <= kDenseArms) {
    if (dense_) {
      values_.assign(std::size_t{1} << arms_, std::numeric_limits<double>::quiet_NaN());
    }
    for (std::size_t k = 0; k <= budget_; ++k) {
      for_each_mask_of_size(arms_, k, [&](std::uint64_t m) {
        const double v = game.value(Coalition::from_mask(m));
        if (dense_) {
          values_[m] = v;
        } else {
          sparse_.emplace(m, v);
        }
      });
    }
  }

  double operator[](std::uint64_t mask) const {
    return dense_ ? values_[mask] : sparse_.at(mask);
  }

  std::size_t arms() const noexcept { return arms_; }
  std::size_t budget() const noexcept { return budget_; }

 private:
  static constexpr std::size_t kDenseArms = 22;
  std::size_t arms_;
  std::size_t budget_;
  bool dense_;
  std::vector<double> values_;
  std::unordered_map<std::uint64_t, double> sparse_;
};

/// |S|! (K - |S| - 1)! / K! for |S| = 0..K-1.
inline std::vector<double> subset_weights(std::size_t budget) {
  std::vector<double> fact(budget + 1, 1.0);
  for (std::size_t n = 1; n <= budget; ++n) fact[n] = fact[n - 1] * double(n);
  std::vector<double> w(budget);
  for (std::size_t s = 0; s < budget; ++s) w[s] = fact[s] * fact[budget - s - 1] / fact[budget];
  return w;
}

}  // namespace ksv::detail
