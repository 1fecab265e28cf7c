#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace capfade::cli {

/// Flat key=value settings. Lines are `key = value`; blank lines and lines
/// starting with '#' are ignored. Later assignments win.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& origin = "<config>");
  static Config load(const std::filesystem::path& path);

  /// Applies one `key=value` override.
  void set(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;

  std::string str(const std::string& key, const std::string& fallback) const;
  std::string require_str(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  long long integer(const std::string& key, long long fallback) const;
  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<int> int_list(const std::string& key, const std::vector<int>& fallback) const;
  std::vector<double> number_list(const std::string& key,
                                  const std::vector<double>& fallback) const;
  std::vector<std::string> str_list(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const noexcept { return values_; }

  /// Directory holding the config file; relative paths resolve against it.
  std::filesystem::path base_dir;

 private:
  std::map<std::string, std::string> values_;
};

/// Reads `prefix + key` first, then `fallback_prefix + key`.
std::optional<std::string> scoped(const Config& c, const std::string& prefix,
                                  const std::string& fallback_prefix, const std::string& key);

/// Defaults for the public datasets: nominal capacity, slope reference cycle
/// and EOL threshold.
struct DatasetProfile {
  double nominal_ah;
  int slope_reference_cycle;
  double eol_threshold;
};
std::optional<DatasetProfile> dataset_profile(const std::string& name);

}  // namespace capfade::cli
