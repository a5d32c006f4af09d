#include "kmsf/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "kmsf/errors.hpp"

namespace kmsf {

namespace detail {
struct RegistryEntry {
  std::string_view name;
  std::string_view text;
};
extern const RegistryEntry kRegistry[];
extern const int kRegistrySize;
}  // namespace detail

ManifestError::ManifestError(std::string source, std::string where, const std::string& what)
    : ParseError(source + ": " + where + ": " + what), source_(std::move(source)), where_(std::move(where)) {}

bool Expected::empty() const {
  return brackets.empty() && connection.empty() && curvature.empty() && !h && !kappa && !mu && !lambda && !tau &&
         f.empty() && fit_points.empty() && !kernel_dim && ricci.empty() && predicates.empty() && !classification &&
         !deformed_kappa && !deformed_mu && !c_s && !constructed_kappa && !constructed_mu && !constructed_c;
}

int Manifest::dim() const {
  if (chart) return chart->dim();
  return static_cast<int>(xi.size());
}

const std::vector<std::string>& Manifest::coordinates() const { return chart ? chart->coordinates() : data_coordinates; }

std::string Manifest::default_coordinate() const {
  std::set<std::string> used;
  for (const auto& p : sample_points)
    for (const auto& [k, v] : p) used.insert(k);
  if (used.size() == 1) return *used.begin();
  if (coordinates().size() == 1) return coordinates().front();
  return {};
}

AcmStructure Manifest::structure() const {
  if (!chart) throw InvalidArgument(name + " has no chart");
  return AcmStructure(std::make_shared<const FrameGeometry>(*chart), phi, xi);
}

namespace {

using nlohmann::json;

/// Walks a JSON tree keeping the JSON pointer of the current node.
class Reader {
 public:
  Reader(const std::string& source, std::set<std::string> symbols) : source_(source), symbols_(std::move(symbols)) {}

  [[noreturn]] void fail(const std::string& where, const std::string& what) const {
    throw ManifestError(source_, where.empty() ? "/" : where, what);
  }

  void set_symbols(std::set<std::string> s) { symbols_ = std::move(s); }

  const json& field(const json& obj, const std::string& where, const char* key) const {
    if (!obj.is_object()) fail(where, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(where, std::string("missing field '") + key + "'");
    return *it;
  }

  const json* optional(const json& obj, const char* key) const {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  void only(const json& obj, const std::string& where, std::initializer_list<const char*> keys) const {
    if (!obj.is_object()) fail(where, "expected an object");
    for (const auto& [k, v] : obj.items())
      if (std::none_of(keys.begin(), keys.end(), [&](const char* x) { return k == x; }))
        fail(where + "/" + k, "unknown field");
  }

  std::string string(const json& v, const std::string& where) const {
    if (!v.is_string()) fail(where, "expected a string");
    return v.get<std::string>();
  }

  Expr expr(const json& v, const std::string& where) const {
    std::string text;
    if (v.is_number_integer())
      text = v.dump();
    else if (v.is_string())
      text = v.get<std::string>();
    else
      fail(where, v.is_number_float() ? "exact rational literals only (no floating point)" : "expected an expression string");
    Expr e;
    try {
      e = Expr::parse(text);
    } catch (const Error& ex) {
      fail(where, ex.what());
    }
    for (const auto& s : e.free_symbols())
      if (!symbols_.count(s)) fail(where, "unknown symbol '" + s + "'");
    return e;
  }

  Rational rational(const json& v, const std::string& where) const {
    if (v.is_number_integer()) return Rational::parse(v.dump());
    if (v.is_number_float()) fail(where, "exact rational literals only (no floating point)");
    if (!v.is_string()) fail(where, "expected a rational");
    try {
      return Rational::parse(v.get<std::string>());
    } catch (const Error& ex) {
      fail(where, ex.what());
    }
  }

  int integer(const json& v, const std::string& where) const {
    if (!v.is_number_integer()) fail(where, "expected an integer");
    return v.get<int>();
  }

  bool boolean(const json& v, const std::string& where) const {
    if (!v.is_boolean()) fail(where, "expected true or false");
    return v.get<bool>();
  }

  const json& array(const json& v, const std::string& where, std::optional<std::size_t> size = std::nullopt) const {
    if (!v.is_array()) fail(where, "expected an array");
    if (size && v.size() != *size) fail(where, "expected " + std::to_string(*size) + " entries, got " + std::to_string(v.size()));
    return v;
  }

  Vec<Expr> vector(const json& v, const std::string& where, int n) const {
    array(v, where, n);
    Vec<Expr> out(n);
    for (int i = 0; i < n; ++i) out(i) = expr(v[i], where + "/" + std::to_string(i));
    return out;
  }

  Mat<Expr> matrix(const json& v, const std::string& where, int n) const {
    array(v, where, n);
    Mat<Expr> out(n, n);
    for (int i = 0; i < n; ++i) {
      const std::string w = where + "/" + std::to_string(i);
      array(v[i], w, n);
      for (int j = 0; j < n; ++j) out(i, j) = expr(v[i][j], w + "/" + std::to_string(j));
    }
    return out;
  }

  Point point(const json& v, const std::string& where) const {
    if (!v.is_object()) fail(where, "expected an object of coordinate values");
    Point p;
    for (const auto& [k, x] : v.items()) {
      if (!symbols_.count(k)) fail(where + "/" + k, "unknown coordinate");
      p[k] = rational(x, where + "/" + k);
    }
    return p;
  }

  std::vector<int> legs(const json& v, const std::string& where, std::size_t count, int n) const {
    array(v, where, count);
    std::vector<int> out;
    for (std::size_t i = 0; i < count; ++i) {
      const int l = integer(v[i], where + "/" + std::to_string(i));
      if (l < 1 || l > n) fail(where + "/" + std::to_string(i), "leg out of range 1.." + std::to_string(n));
      out.push_back(l);
    }
    return out;
  }

  /// "f1".."f6" -> 0..5
  int coefficient(const std::string& key, const std::string& where) const {
    if (key.size() == 2 && key[0] == 'f' && key[1] >= '1' && key[1] <= '6') return key[1] - '1';
    fail(where, "expected a coefficient name f1..f6");
  }

 private:
  std::string source_;
  std::set<std::string> symbols_;
};

void read_table(const Reader& rd, const json& v, const std::string& where, std::size_t legs, int n,
                std::vector<LegEntry>& out, bool& complete) {
  rd.only(v, where, {"complete", "entries"});
  if (auto* c = rd.optional(v, "complete")) complete = rd.boolean(*c, where + "/complete");
  const auto& entries = rd.array(rd.field(v, where, "entries"), where + "/entries");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string w = where + "/entries/" + std::to_string(i);
    rd.only(entries[i], w, {"legs", "value"});
    LegEntry e;
    e.legs = rd.legs(rd.field(entries[i], w, "legs"), w + "/legs", legs, n);
    e.value = rd.vector(rd.field(entries[i], w, "value"), w + "/value", n);
    e.field = w;
    out.push_back(std::move(e));
  }
}

void read_expected(const Reader& rd, const json& v, int n, Expected& ex) {
  const std::string where = "/expected";
  rd.only(v, where,
          {"brackets", "connection", "curvature", "h", "kappa", "mu", "lambda", "tau", "f", "fit_points", "kernel_dim",
           "ricci", "predicates", "classification", "deformation", "construction"});
  if (auto* t = rd.optional(v, "brackets")) read_table(rd, *t, where + "/brackets", 2, n, ex.brackets, ex.brackets_complete);
  if (auto* t = rd.optional(v, "connection"))
    read_table(rd, *t, where + "/connection", 2, n, ex.connection, ex.connection_complete);
  if (auto* t = rd.optional(v, "curvature"))
    read_table(rd, *t, where + "/curvature", 3, n, ex.curvature, ex.curvature_complete);
  if (auto* h = rd.optional(v, "h")) ex.h = rd.matrix(*h, where + "/h", n);
  if (auto* x = rd.optional(v, "kappa")) ex.kappa = rd.expr(*x, where + "/kappa");
  if (auto* x = rd.optional(v, "mu")) ex.mu = rd.expr(*x, where + "/mu");
  if (auto* x = rd.optional(v, "lambda")) ex.lambda = rd.expr(*x, where + "/lambda");
  if (auto* x = rd.optional(v, "tau")) ex.tau = rd.expr(*x, where + "/tau");
  if (auto* f = rd.optional(v, "f")) {
    if (!f->is_object()) rd.fail(where + "/f", "expected an object f1..f6");
    for (const auto& [k, x] : f->items()) ex.f[rd.coefficient(k, where + "/f/" + k)] = rd.expr(x, where + "/f/" + k);
  }
  if (auto* fp = rd.optional(v, "fit_points")) {
    rd.array(*fp, where + "/fit_points");
    for (std::size_t i = 0; i < fp->size(); ++i) {
      const std::string w = where + "/fit_points/" + std::to_string(i);
      rd.only((*fp)[i], w, {"point", "f"});
      ExpectedPointFit e;
      e.point = rd.point(rd.field((*fp)[i], w, "point"), w + "/point");
      const auto& f = rd.field((*fp)[i], w, "f");
      if (!f.is_object()) rd.fail(w + "/f", "expected an object f1..f6");
      for (const auto& [k, x] : f.items()) e.f[rd.coefficient(k, w + "/f/" + k)] = rd.rational(x, w + "/f/" + k);
      e.field = w;
      ex.fit_points.push_back(std::move(e));
    }
  }
  if (auto* k = rd.optional(v, "kernel_dim")) ex.kernel_dim = rd.integer(*k, where + "/kernel_dim");
  if (auto* r = rd.optional(v, "ricci")) {
    rd.array(*r, where + "/ricci");
    for (std::size_t i = 0; i < r->size(); ++i) {
      const std::string w = where + "/ricci/" + std::to_string(i);
      rd.only((*r)[i], w, {"point", "Q"});
      ExpectedMatrix e;
      e.point = rd.point(rd.field((*r)[i], w, "point"), w + "/point");
      e.value = rd.matrix(rd.field((*r)[i], w, "Q"), w + "/Q", n);
      e.field = w;
      ex.ricci.push_back(std::move(e));
    }
  }
  if (auto* p = rd.optional(v, "predicates")) {
    rd.only(*p, where + "/predicates", {"contact_metric", "k_contact", "sasakian", "trans_sasakian"});
    for (const auto& [k, x] : p->items()) ex.predicates[k] = rd.boolean(x, where + "/predicates/" + k);
  }
  if (auto* c = rd.optional(v, "classification")) {
    ex.classification = rd.string(*c, where + "/classification");
    static const std::set<std::string> labels{"SU2_or_SO3", "SL2R_or_O12", "E2", "E11", "Unclassified"};
    if (!labels.count(*ex.classification)) rd.fail(where + "/classification", "unknown label '" + *ex.classification + "'");
  }
  if (auto* d = rd.optional(v, "deformation")) {
    rd.only(*d, where + "/deformation", {"kappa", "mu"});
    if (auto* x = rd.optional(*d, "kappa")) ex.deformed_kappa = rd.expr(*x, where + "/deformation/kappa");
    if (auto* x = rd.optional(*d, "mu")) ex.deformed_mu = rd.expr(*x, where + "/deformation/mu");
  }
  if (auto* c = rd.optional(v, "construction")) {
    const std::string w = where + "/construction";
    rd.only(*c, w, {"c_s", "kappa", "mu", "c"});
    if (auto* x = rd.optional(*c, "c_s")) ex.c_s = rd.expr(*x, w + "/c_s");
    if (auto* x = rd.optional(*c, "kappa")) ex.constructed_kappa = rd.rational(*x, w + "/kappa");
    if (auto* x = rd.optional(*c, "mu")) ex.constructed_mu = rd.rational(*x, w + "/mu");
    if (auto* x = rd.optional(*c, "c")) ex.constructed_c = rd.rational(*x, w + "/c");
  }
}

FramedChart read_chart(Reader& rd, const json& v, std::set<std::string>& symbols) {
  const std::string where = "/chart";
  rd.only(v, where, {"coordinates", "frame", "nonvanishing", "dimension", "lie_brackets"});
  if (auto* lb = rd.optional(v, "lie_brackets")) {
    if (rd.optional(v, "frame") || rd.optional(v, "coordinates"))
      rd.fail(where, "give either a frame with coordinates or lie_brackets, not both");
    const int n = rd.integer(rd.field(v, where, "dimension"), where + "/dimension");
    if (n < 1) rd.fail(where + "/dimension", "dimension must be positive");
    rd.set_symbols({});
    StructureCoefficients c(n);
    std::vector<std::vector<bool>> given(n, std::vector<bool>(n, false));
    rd.array(*lb, where + "/lie_brackets");
    for (std::size_t e = 0; e < lb->size(); ++e) {
      const std::string w = where + "/lie_brackets/" + std::to_string(e);
      rd.only((*lb)[e], w, {"legs", "value"});
      const auto legs = rd.legs(rd.field((*lb)[e], w, "legs"), w + "/legs", 2, n);
      const int i = legs[0] - 1, j = legs[1] - 1;
      if (i == j) rd.fail(w + "/legs", "[e_i, e_i] is always zero");
      if (given[i][j]) rd.fail(w + "/legs", "bracket given twice");
      given[i][j] = given[j][i] = true;
      const Vec<Expr> val = rd.vector(rd.field((*lb)[e], w, "value"), w + "/value", n);
      for (int k = 0; k < n; ++k) {
        c(i, j, k) = val(k);
        c(j, i, k) = -val(k);
      }
    }
    return FramedChart::from_structure_constants(std::move(c));
  }
  const auto& coords = rd.array(rd.field(v, where, "coordinates"), where + "/coordinates");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    names.push_back(rd.string(coords[i], where + "/coordinates/" + std::to_string(i)));
    if (!symbols.insert(names.back()).second) rd.fail(where + "/coordinates/" + std::to_string(i), "duplicate coordinate");
  }
  rd.set_symbols(symbols);
  const int n = static_cast<int>(names.size());
  if (auto* d = rd.optional(v, "dimension"); d && rd.integer(*d, where + "/dimension") != n)
    rd.fail(where + "/dimension", "dimension does not match the number of coordinates");
  const Mat<Expr> frame = rd.matrix(rd.field(v, where, "frame"), where + "/frame", n);
  std::vector<Expr> nonvanishing;
  if (auto* nv = rd.optional(v, "nonvanishing")) {
    rd.array(*nv, where + "/nonvanishing");
    for (std::size_t i = 0; i < nv->size(); ++i)
      nonvanishing.push_back(rd.expr((*nv)[i], where + "/nonvanishing/" + std::to_string(i)));
  }
  try {
    return FramedChart::from_frame(std::move(names), frame, std::move(nonvanishing));
  } catch (const Error& e) {
    rd.fail(where + "/frame", e.what());
  }
}

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

Manifest parse_manifest(std::string_view text, const std::string& source) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::string what = e.what();
    if (auto p = what.find("syntax error"); p != std::string::npos) what = what.substr(p);
    throw ManifestError(source, line_column(text, e.byte), what);
  }

  std::set<std::string> symbols;
  Reader rd(source, symbols);
  rd.only(root, "", {"name", "description", "chart", "structure", "sample_points", "fit", "data", "trans_sasakian",
                     "deformation", "construction", "expected"});
  Manifest m;
  m.source = source;
  m.name = rd.string(rd.field(root, "", "name"), "/name");
  if (auto* d = rd.optional(root, "description")) m.description = rd.string(*d, "/description");

  int n = 0;
  if (auto* c = rd.optional(root, "chart")) {
    m.chart = read_chart(rd, *c, symbols);
    n = m.chart->dim();
    const auto& s = rd.field(root, "", "structure");
    rd.only(s, "/structure", {"phi", "xi"});
    m.phi = rd.matrix(rd.field(s, "/structure", "phi"), "/structure/phi", n);
    m.xi = rd.vector(rd.field(s, "/structure", "xi"), "/structure/xi", n);
    if (rd.optional(root, "data")) rd.fail("/data", "a manifest with a chart derives its data; remove this block");
  } else {
    const auto& d = rd.field(root, "", "data");
    rd.only(d, "/data", {"coordinates", "dimension", "f"});
    if (auto* cs = rd.optional(d, "coordinates")) {
      rd.array(*cs, "/data/coordinates");
      for (std::size_t i = 0; i < cs->size(); ++i) {
        m.data_coordinates.push_back(rd.string((*cs)[i], "/data/coordinates/" + std::to_string(i)));
        symbols.insert(m.data_coordinates.back());
      }
    }
    rd.set_symbols(symbols);
    n = rd.integer(rd.field(d, "/data", "dimension"), "/data/dimension");
    if (n < 3 || n % 2 == 0) rd.fail("/data/dimension", "dimension must be odd and at least 3");
    const auto& f = rd.array(rd.field(d, "/data", "f"), "/data/f", 6);
    Coeffs<Expr> fc;
    for (int i = 0; i < 6; ++i) fc[i] = rd.expr(f[i], "/data/f/" + std::to_string(i));
    m.data = fc;
    m.xi = unit(n, 0);
    if (rd.optional(root, "structure")) rd.fail("/structure", "a data-only manifest has no structure block");
  }

  if (auto* sp = rd.optional(root, "sample_points")) {
    rd.array(*sp, "/sample_points");
    for (std::size_t i = 0; i < sp->size(); ++i) m.sample_points.push_back(rd.point((*sp)[i], "/sample_points/" + std::to_string(i)));
  }
  if (auto* f = rd.optional(root, "fit")) {
    rd.only(*f, "/fit", {"gauge", "ansatz"});
    if (auto* g = rd.optional(*f, "gauge")) {
      try {
        m.gauge = parse_gauge(rd.string(*g, "/fit/gauge"));
      } catch (const Error& e) {
        rd.fail("/fit/gauge", e.what());
      }
    }
    if (auto* a = rd.optional(*f, "ansatz")) {
      rd.array(*a, "/fit/ansatz", 6);
      Coeffs<Expr> c;
      for (int i = 0; i < 6; ++i) c[i] = rd.expr((*a)[i], "/fit/ansatz/" + std::to_string(i));
      m.ansatz = c;
    }
  }
  if (auto* t = rd.optional(root, "trans_sasakian")) {
    rd.only(*t, "/trans_sasakian", {"alpha", "beta"});
    m.trans_sasakian = {rd.expr(rd.field(*t, "/trans_sasakian", "alpha"), "/trans_sasakian/alpha"),
                        rd.expr(rd.field(*t, "/trans_sasakian", "beta"), "/trans_sasakian/beta")};
  }
  if (auto* d = rd.optional(root, "deformation")) {
    rd.only(*d, "/deformation", {"a"});
    m.deformation_a = rd.rational(rd.field(*d, "/deformation", "a"), "/deformation/a");
    if (m.deformation_a->sign() <= 0) rd.fail("/deformation/a", "a must be positive");
  }
  if (auto* c = rd.optional(root, "construction")) {
    rd.only(*c, "/construction", {"f6"});
    m.construction_f6 = rd.rational(rd.field(*c, "/construction", "f6"), "/construction/f6");
  }
  if (auto* e = rd.optional(root, "expected")) read_expected(rd, *e, n, m.expected);
  return m;
}

std::vector<std::string> registry_names() {
  std::vector<std::string> out;
  for (int i = 0; i < detail::kRegistrySize; ++i) out.emplace_back(detail::kRegistry[i].name);
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<std::string_view> registry_text(std::string_view name) {
  for (int i = 0; i < detail::kRegistrySize; ++i)
    if (detail::kRegistry[i].name == name) return detail::kRegistry[i].text;
  return std::nullopt;
}

Manifest load_manifest(const std::string& name_or_path) {
  if (auto text = registry_text(name_or_path)) return parse_manifest(*text, "registry:" + name_or_path);
  std::ifstream in(name_or_path);
  if (!in) throw InvalidArgument("no bundled manifest or readable file named '" + name_or_path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), name_or_path);
}

Point parse_point(std::string_view text, const std::string& default_coordinate) {
  Point p;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(':', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view item = text.substr(start, end - start);
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      if (default_coordinate.empty() || !p.empty() || end != text.size())
        throw InvalidArgument("point '" + std::string(text) + "' must be name=value[:name=value...]");
      p[default_coordinate] = Rational::parse(item);
    } else {
      const std::string name(item.substr(0, eq));
      if (name.empty() || p.count(name)) throw InvalidArgument("bad coordinate in point '" + std::string(text) + "'");
      p[name] = Rational::parse(item.substr(eq + 1));
    }
    start = end + 1;
  }
  return p;
}

std::string to_string(const Point& p) {
  std::string out;
  for (const auto& [k, v] : p) {
    if (!out.empty()) out += ":";
    out += k + "=" + v.str();
  }
  return out.empty() ? "{}" : out;
}

}  // namespace kmsf
