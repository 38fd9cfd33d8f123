#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

#include "ksv/environment.hpp"

namespace testing {

/// Deterministic additive oracle that counts every pull it serves.
class CountingOracle final : public ksv::Oracle {
 public:
  CountingOracle(std::vector<double> weights, std::size_t budget,
                 ksv::QueryLimit limit = ksv::QueryLimit::strict)
      : Oracle(weights.size(), budget, limit), weights_(std::move(weights)) {}

  std::uint64_t pulls() const noexcept { return pulls_.load(); }

 protected:
  double do_pull(std::span<const ksv::Arm> s, ksv::Rng&) const override {
    ++pulls_;
    return do_exact(s);
  }
  double do_exact(std::span<const ksv::Arm> s) const override {
    double v = 0.0;
    for (ksv::Arm a : s) v += weights_[a];
    return v;
  }

 private:
  std::vector<double> weights_;
  mutable std::atomic<std::uint64_t> pulls_{0};
};

}  // namespace testing
