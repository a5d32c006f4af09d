#pragma once

#include <string>
#include <vector>

#include "kmsf/frame.hpp"

namespace kmsf {

enum class Status { Pass, Fail, Skipped, Vacuous };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Skipped: return "skipped";
    case Status::Vacuous: return "vacuous";
  }
  return "?";
}

/// Outcome of one named verification.
struct CheckResult {
  std::string id;
  Status status = Status::Pass;
  std::string detail;
  std::vector<Residual> residuals;
};

inline CheckResult from_residuals(std::string id, std::vector<Residual> residuals, std::string detail = {}) {
  CheckResult c{std::move(id), residuals.empty() ? Status::Pass : Status::Fail, std::move(detail), std::move(residuals)};
  return c;
}

inline CheckResult skipped(std::string id, std::string why) { return {std::move(id), Status::Skipped, std::move(why), {}}; }

}  // namespace kmsf
