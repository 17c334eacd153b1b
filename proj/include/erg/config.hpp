#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace erg {

/// Sectioned key-value override file. Lines are `key = value` under
/// `[section]` headers; values are scalars or whitespace-separated numbers;
/// `#` starts a comment. Keys may repeat (used by [reference] at = ...).
/// All parsing uses std::from_chars, so it is locale-independent.
class OverrideConfig {
 public:
  OverrideConfig() = default;

  static OverrideConfig parse_file(const std::filesystem::path& path);
  static OverrideConfig parse_string(const std::string& text, const std::string& origin = "<string>");

  bool empty() const { return entries_.empty(); }

  /// Scalar lookup; marks the key consumed. Throws ScenarioError on parse
  /// failure or duplicate scalar keys.
  std::optional<double> scalar(const std::string& section, const std::string& key) const;
  double scalar_or(const std::string& section, const std::string& key, double fallback) const;

  /// Vector-valued lookup; marks the key consumed.
  std::optional<Eigen::VectorXd> vector(const std::string& section, const std::string& key) const;

  /// All values for a repeated key, in file order; marks them consumed.
  std::vector<Eigen::VectorXd> repeated(const std::string& section, const std::string& key) const;

  /// Throws ScenarioError listing any key never consumed by the builder.
  void check_fully_consumed() const;

 private:
  struct Entry {
    std::string section;
    std::string key;
    std::string value;
    int line = 0;
    mutable bool consumed = false;
  };
  std::vector<Entry> entries_;
  std::string origin_;
};

/// Locale-independent double parse of a full token. Throws ScenarioError.
double parse_double(const std::string& token, const std::string& context);

}  // namespace erg
