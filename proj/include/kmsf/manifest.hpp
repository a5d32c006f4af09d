#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kmsf/acm.hpp"
#include "kmsf/errors.hpp"
#include "kmsf/spaceform.hpp"

namespace kmsf {

/// Malformed manifest. `where` is "line L, column C" for syntax errors and a
/// JSON pointer such as "/chart/frame/1/0" for field errors.
class ManifestError : public ParseError {
 public:
  ManifestError(std::string source, std::string where, const std::string& what);
  const std::string& source() const { return source_; }
  const std::string& where() const { return where_; }

 private:
  std::string source_;
  std::string where_;
};

/// A vector quantity attached to a tuple of one-based legs, e.g.
/// [e_i, e_j] or R(e_i, e_j)e_k.
struct LegEntry {
  std::vector<int> legs;
  Vec<Expr> value;
  std::string field;
};

struct ExpectedPointFit {
  Point point;
  /// Coefficients by zero-based index; unspecified ones are not compared.
  std::map<int, Rational> f;
  std::string field;
};

struct ExpectedMatrix {
  Point point;
  Mat<Expr> value;
  std::string field;
};

struct Expected {
  std::vector<LegEntry> brackets;
  std::vector<LegEntry> connection;
  std::vector<LegEntry> curvature;
  /// Complete tables: entries not listed must vanish.
  bool brackets_complete = false, connection_complete = false, curvature_complete = false;
  std::optional<Mat<Expr>> h;
  std::optional<Expr> kappa, mu, lambda, tau;
  std::map<int, Expr> f;
  std::vector<ExpectedPointFit> fit_points;
  std::optional<int> kernel_dim;
  std::vector<ExpectedMatrix> ricci;
  std::map<std::string, bool> predicates;
  std::optional<std::string> classification;
  std::optional<Expr> deformed_kappa, deformed_mu;
  std::optional<Expr> c_s;
  std::optional<Rational> constructed_kappa, constructed_mu, constructed_c;

  bool empty() const;
};

struct Manifest {
  std::string name;
  std::string description;
  /// File path or "registry:<name>".
  std::string source;

  /// Absent for data-only manifests.
  std::optional<FramedChart> chart;
  Mat<Expr> phi;
  Vec<Expr> xi;

  std::vector<Point> sample_points;
  std::optional<Gauge> gauge;
  /// Symbolic coefficients to verify against the curvature.
  std::optional<Coeffs<Expr>> ansatz;
  /// Coefficient functions of a data-only manifest.
  std::optional<Coeffs<Expr>> data;
  std::vector<std::string> data_coordinates;
  std::optional<std::pair<Expr, Expr>> trans_sasakian;
  std::optional<Rational> deformation_a;
  std::optional<Rational> construction_f6;
  Expected expected;

  bool data_only() const { return !chart; }
  int dim() const;
  /// Chart coordinates, or the data block's.
  const std::vector<std::string>& coordinates() const;
  /// Coordinate that a bare point value assigns: the one every sample point
  /// uses, else the only coordinate; empty when ambiguous.
  std::string default_coordinate() const;
  /// Builds the structure; the geometry is computed here.
  AcmStructure structure() const;
};

Manifest parse_manifest(std::string_view text, const std::string& source);
/// A registry name or a path to a manifest file.
Manifest load_manifest(const std::string& name_or_path);

/// Bundled manifests, sorted by name.
std::vector<std::string> registry_names();
std::optional<std::string_view> registry_text(std::string_view name);

/// Parses "x3=1" or "u=1:v=2"; a bare rational assigns `default_coordinate`.
Point parse_point(std::string_view text, const std::string& default_coordinate = {});
std::string to_string(const Point& p);

}  // namespace kmsf
