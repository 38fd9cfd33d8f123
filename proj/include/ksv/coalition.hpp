#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ksv {

using Arm = std::uint32_t;

/// Sorted set of distinct arm indices.
///
/// Membership checks against a game's arm count happen at the game or
/// oracle boundary, not here.
class Coalition {
 public:
  Coalition() = default;
  Coalition(std::initializer_list<Arm> members);
  explicit Coalition(std::vector<Arm> members);

  /// Bit i of `mask` set means arm i is a member.
  static Coalition from_mask(std::uint64_t mask);

  /// Requires every member < 64.
  std::uint64_t mask() const;

  std::span<const Arm> members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  bool contains(Arm a) const noexcept;

  /// Copy with `a` added; throws if `a` is already a member.
  Coalition with(Arm a) const;
  Coalition without(Arm a) const;

  /// Largest member + 1, or 0 when empty.
  std::size_t bound() const noexcept { return members_.empty() ? 0 : members_.back() + 1; }

  std::string to_string() const;

  auto begin() const noexcept { return members_.begin(); }
  auto end() const noexcept { return members_.end(); }

  friend bool operator==(const Coalition&, const Coalition&) = default;

 private:
  std::vector<Arm> members_;
};

struct CoalitionHash {
  std::size_t operator()(const Coalition& c) const noexcept;
};

}  // namespace ksv
