#include "erg/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "erg/errors.hpp"

namespace erg {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

}  // namespace

double parse_double(const std::string& token, const std::string& context) {
  double value{};
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ScenarioError("invalid number '" + token + "' in " + context);
  }
  return value;
}

OverrideConfig OverrideConfig::parse_string(const std::string& text, const std::string& origin) {
  OverrideConfig cfg;
  cfg.origin_ = origin;
  std::istringstream stream(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(stream, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ScenarioError(origin + ":" + std::to_string(lineno) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ScenarioError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    Entry e;
    e.section = section;
    e.key = trim(line.substr(0, eq));
    e.value = trim(line.substr(eq + 1));
    e.line = lineno;
    if (e.key.empty() || e.value.empty()) {
      throw ScenarioError(origin + ":" + std::to_string(lineno) + ": empty key or value");
    }
    cfg.entries_.push_back(std::move(e));
  }
  return cfg;
}

OverrideConfig OverrideConfig::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open override file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path.string());
}

std::optional<double> OverrideConfig::scalar(const std::string& section,
                                             const std::string& key) const {
  const Entry* found = nullptr;
  for (const Entry& e : entries_) {
    if (e.section == section && e.key == key) {
      if (found) {
        throw ScenarioError(origin_ + ": duplicate key '" + section + "." + key + "'");
      }
      found = &e;
    }
  }
  if (!found) return std::nullopt;
  found->consumed = true;
  return parse_double(found->value, origin_ + ":" + std::to_string(found->line));
}

double OverrideConfig::scalar_or(const std::string& section, const std::string& key,
                                 double fallback) const {
  return scalar(section, key).value_or(fallback);
}

std::optional<Eigen::VectorXd> OverrideConfig::vector(const std::string& section,
                                                      const std::string& key) const {
  const Entry* found = nullptr;
  for (const Entry& e : entries_) {
    if (e.section == section && e.key == key) {
      if (found) {
        throw ScenarioError(origin_ + ": duplicate key '" + section + "." + key + "'");
      }
      found = &e;
    }
  }
  if (!found) return std::nullopt;
  found->consumed = true;
  const auto tokens = split_ws(found->value);
  Eigen::VectorXd v(static_cast<Eigen::Index>(tokens.size()));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] =
        parse_double(tokens[i], origin_ + ":" + std::to_string(found->line));
  }
  return v;
}

std::vector<Eigen::VectorXd> OverrideConfig::repeated(const std::string& section,
                                                      const std::string& key) const {
  std::vector<Eigen::VectorXd> out;
  for (const Entry& e : entries_) {
    if (e.section != section || e.key != key) continue;
    e.consumed = true;
    const auto tokens = split_ws(e.value);
    Eigen::VectorXd v(static_cast<Eigen::Index>(tokens.size()));
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      v[static_cast<Eigen::Index>(i)] =
          parse_double(tokens[i], origin_ + ":" + std::to_string(e.line));
    }
    out.push_back(std::move(v));
  }
  return out;
}

void OverrideConfig::check_fully_consumed() const {
  std::string unknown;
  for (const Entry& e : entries_) {
    if (!e.consumed) {
      if (!unknown.empty()) unknown += ", ";
      unknown += "[" + e.section + "] " + e.key + " (line " + std::to_string(e.line) + ")";
    }
  }
  if (!unknown.empty()) {
    throw ScenarioError(origin_ + ": unknown override keys: " + unknown);
  }
}

}  // namespace erg
