#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ksv/environment.hpp"
#include "ksv/policies.hpp"

namespace ksv {

/// Flat INI text: `key = value` lines, optional `[section]` headers, '#'
/// or ';' comments. Keys before the first header live in section "".
class IniDocument {
 public:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };

  /// Throws ConfigError on a malformed line or a key repeated in a section.
  static IniDocument parse(std::istream& in, const std::string& source = "<config>");

  bool has(const std::string& section, const std::string& key) const;
  const Entry* find(const std::string& section, const std::string& key) const;
  const std::map<std::string, std::map<std::string, Entry>>& sections() const noexcept {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

enum class EnvKind { synthetic, cascade };

struct EnvConfig {
  EnvKind kind = EnvKind::synthetic;
  std::size_t arms = 0;
  SyntheticParams synthetic;
  std::filesystem::path graph_path;
  double activation_p = 0.1;
  /// Cascades per coalition behind the ground-truth value.
  std::size_t pistar_sims = 10000;
  /// > 0: Monte-Carlo K-Shapley with this many samples per arm for the fair
  /// policy; 0: exact enumeration (requires M within the enumeration guard).
  std::size_t pistar_samples = 0;
  std::uint64_t pistar_seed = 0x5eed;
  /// Guard for exact K-Shapley enumeration behind pi*.
  EnumerationLimits limits;
};

struct RunConfig {
  std::vector<Algorithm> algorithms;
  EnvConfig env;
  PolicyConfig policy;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path out_dir = "results";
};

/// Parses and validates a run configuration. Relative paths resolve against
/// `base_dir`. Throws ConfigError naming the offending key.
RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir,
                           const std::string& source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace ksv
