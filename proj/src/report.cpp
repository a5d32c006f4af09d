#include "kmsf/report.hpp"

#include <algorithm>
#include <iomanip>
#include <map>

namespace kmsf {

void Report::add(const std::string& prefix, const std::vector<CheckResult>& cs) {
  for (auto c : cs) {
    c.id = prefix + "." + c.id;
    checks.push_back(std::move(c));
  }
}

bool Report::failed() const {
  return std::any_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.status == Status::Fail; });
}

nlohmann::json to_json(const Residual& r) {
  return {{"identity", r.identity}, {"index", r.index}, {"value", r.value.str()}};
}

nlohmann::json Report::to_json(std::size_t max_residuals) const {
  nlohmann::json out;
  out["command"] = command;
  out["subject"] = subject;
  out["environment"] = environment;
  out["data"] = data;
  std::map<std::string, int> counts{{"pass", 0}, {"fail", 0}, {"skipped", 0}, {"vacuous", 0}};
  auto arr = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json e{{"check_id", c.id}, {"status", kmsf::to_string(c.status)}, {"details", c.detail}};
    if (!c.residuals.empty()) {
      auto rs = nlohmann::json::array();
      for (std::size_t i = 0; i < std::min(max_residuals, c.residuals.size()); ++i) rs.push_back(kmsf::to_json(c.residuals[i]));
      e["residuals"] = rs;
      e["residual_count"] = c.residuals.size();
    }
    ++counts[kmsf::to_string(c.status)];
    arr.push_back(std::move(e));
  }
  out["checks"] = std::move(arr);
  out["summary"] = counts;
  out["status"] = failed() ? "fail" : "pass";
  return out;
}

void Report::print(std::ostream& os) const {
  for (const auto& c : checks) {
    std::string status = kmsf::to_string(c.status);
    std::transform(status.begin(), status.end(), status.begin(), ::toupper);
    os << std::left << std::setw(8) << status << c.id;
    if (!c.detail.empty()) os << "  " << c.detail;
    if (!c.residuals.empty())
      os << "  [" << c.residuals.size() << " residual(s); first " << c.residuals.front().identity << " = "
         << c.residuals.front().value << "]";
    os << "\n";
  }
}

}  // namespace kmsf
