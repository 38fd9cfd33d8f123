#include "ksv/coalition.hpp"

#include <algorithm>
#include <bit>

#include "ksv/error.hpp"

namespace ksv {

Coalition::Coalition(std::initializer_list<Arm> members)
    : Coalition(std::vector<Arm>(members)) {}

Coalition::Coalition(std::vector<Arm> members) : members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  if (std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
    throw ContractViolation("coalition has duplicate members");
  }
}

Coalition Coalition::from_mask(std::uint64_t mask) {
  Coalition c;
  c.members_.reserve(static_cast<std::size_t>(std::popcount(mask)));
  while (mask != 0) {
    c.members_.push_back(static_cast<Arm>(std::countr_zero(mask)));
    mask &= mask - 1;
  }
  return c;
}

std::uint64_t Coalition::mask() const {
  std::uint64_t m = 0;
  for (Arm a : members_) {
    if (a >= 64) throw ContractViolation("coalition member >= 64 has no mask encoding");
    m |= std::uint64_t{1} << a;
  }
  return m;
}

bool Coalition::contains(Arm a) const noexcept {
  return std::binary_search(members_.begin(), members_.end(), a);
}

Coalition Coalition::with(Arm a) const {
  auto pos = std::lower_bound(members_.begin(), members_.end(), a);
  if (pos != members_.end() && *pos == a) {
    throw ContractViolation("arm " + std::to_string(a) + " already in coalition");
  }
  Coalition c;
  c.members_.reserve(members_.size() + 1);
  c.members_.insert(c.members_.end(), members_.begin(), pos);
  c.members_.push_back(a);
  c.members_.insert(c.members_.end(), pos, members_.end());
  return c;
}

Coalition Coalition::without(Arm a) const {
  Coalition c = *this;
  auto pos = std::lower_bound(c.members_.begin(), c.members_.end(), a);
  if (pos != c.members_.end() && *pos == a) c.members_.erase(pos);
  return c;
}

std::string Coalition::to_string() const {
  std::string s = "{";
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(members_[i]);
  }
  return s + "}";
}

std::size_t CoalitionHash::operator()(const Coalition& c) const noexcept {
  // FNV-1a over the member list.
  std::uint64_t h = 1469598103934665603ull;
  for (Arm a : c) {
    h ^= a;
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

}  // namespace ksv
