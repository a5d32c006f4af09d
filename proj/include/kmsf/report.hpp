#pragma once

#include <json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "kmsf/check.hpp"

namespace kmsf {

/// Ordered check results plus named data sections.
struct Report {
  std::string command;
  std::string subject;
  nlohmann::json environment = nlohmann::json::object();
  std::vector<CheckResult> checks;
  /// Command-specific tables (fit rows, deformation values, ...).
  nlohmann::json data = nlohmann::json::object();

  void add(CheckResult c) { checks.push_back(std::move(c)); }
  void add(const std::vector<CheckResult>& cs) { checks.insert(checks.end(), cs.begin(), cs.end()); }
  /// Prefixes every id with `prefix` + ".".
  void add(const std::string& prefix, const std::vector<CheckResult>& cs);

  bool failed() const;
  int exit_code() const { return failed() ? 1 : 0; }

  /// Keys sorted, at most `max_residuals` residuals per check.
  nlohmann::json to_json(std::size_t max_residuals = 20) const;
  /// One line per check: status, id, detail.
  void print(std::ostream& os) const;
};

nlohmann::json to_json(const Residual& r);

}  // namespace kmsf
