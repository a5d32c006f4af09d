#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kmsf/deform.hpp"
#include "kmsf/manifest.hpp"
#include "kmsf/report.hpp"

namespace kmsf {

enum class Suite { All, Structure, Curvature, Fit, Identities, Ricci };
Suite parse_suite(const std::string& s);
std::string to_string(Suite s);

struct VerifyOptions {
  Suite suite = Suite::All;
  /// Replaces the manifest's sample points.
  std::optional<std::vector<Point>> points;
  int jobs = 1;
  DEtaConvention convention = DEtaConvention::Half;
  /// Seed of the random unit vectors used by the sectional checks.
  unsigned seed = 1;
};

/// Structure invariants, brackets, connection, curvature, h, predicates,
/// fit, kappa/mu, sectional formulas, identities, Ricci/tau, 3-D
/// reconstruction and classification, then the manifest's expected values.
Report cmd_verify(const Manifest& m, const VerifyOptions& o = {});

struct FitOptions {
  /// Default: the manifest's gauge, else three_d_reduced in dimension 3.
  std::optional<Gauge> gauge;
  std::optional<std::vector<Point>> points;
  int jobs = 1;
};

Report cmd_fit(const Manifest& m, const FitOptions& o = {});

struct DeformOptions {
  std::optional<Rational> a;
  /// a = (kappa - 1)/(mu - 2).
  bool automatic = false;
  /// Point at which closed forms are compared with the rebuilt curvature.
  std::optional<Point> point;
  Rebuild rebuild = Rebuild::WhenRational;
  DEtaConvention convention = DEtaConvention::Half;
};

Report cmd_deform(const Manifest& m, const DeformOptions& o);
Report cmd_deform(const Rational& kappa, const Rational& mu, const DeformOptions& o);

Report cmd_construct(const Rational& f6);

/// Environment block shared by all reports.
nlohmann::json report_environment(DEtaConvention c, const std::string& gauge);

}  // namespace kmsf
