#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ksv/game.hpp"
#include "oracles.hpp"

namespace testing {

/// RestrictedGame over a bitmask-indexed table.
inline ksv::RestrictedGame table_game(std::size_t m, std::size_t k, std::vector<double> table) {
  auto t = std::make_shared<const std::vector<double>>(std::move(table));
  return ksv::RestrictedGame(m, k, [t](std::span<const ksv::Arm> s) {
    std::uint64_t mask = 0;
    for (ksv::Arm a : s) mask |= std::uint64_t{1} << a;
    return (*t)[mask];
  });
}

inline ksv::RestrictedGame random_game(std::size_t m, std::size_t k, std::uint64_t seed) {
  return table_game(m, k, oracle::random_table(static_cast<unsigned>(m), seed));
}

/// oracle::SetValue view of a bitmask table.
inline oracle::SetValue table_value(const std::vector<double>& table) {
  return [&table](const std::vector<unsigned>& s) { return table[oracle::mask_of(s)]; };
}

inline std::filesystem::path data_dir() { return KSV_TEST_DATA_DIR; }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ksv_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
