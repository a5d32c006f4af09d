#include "kmsf/pipeline.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "kmsf/errors.hpp"

namespace kmsf {

Suite parse_suite(const std::string& s) {
  if (s == "all") return Suite::All;
  if (s == "structure") return Suite::Structure;
  if (s == "curvature") return Suite::Curvature;
  if (s == "fit") return Suite::Fit;
  if (s == "identities") return Suite::Identities;
  if (s == "ricci") return Suite::Ricci;
  throw InvalidArgument("unknown suite '" + s + "' (all, structure, curvature, fit, identities, ricci)");
}

std::string to_string(Suite s) {
  switch (s) {
    case Suite::All: return "all";
    case Suite::Structure: return "structure";
    case Suite::Curvature: return "curvature";
    case Suite::Fit: return "fit";
    case Suite::Identities: return "identities";
    case Suite::Ricci: return "ricci";
  }
  return "?";
}

nlohmann::json report_environment(DEtaConvention c, const std::string& gauge) {
  return {
      {"d_eta_convention", to_string(c)},
      {"curvature_convention", "R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]; R(a,b,c,d) = g(R(e_a,e_b)e_c, e_d)"},
      {"block_labels", "R4 is linear in h, R5 is quadratic in h"},
      {"legs", "one-based"},
      {"gauge", gauge},
  };
}

namespace {

using json = nlohmann::json;

std::string tuple_str(const Coeffs<Rational>& f) {
  std::string s = "(";
  for (int i = 0; i < 6; ++i) s += (i ? ", " : "") + f[i].str();
  return s + ")";
}

json coeffs_json(const Coeffs<Rational>& f) {
  json a = json::array();
  for (const auto& x : f) a.push_back(x.str());
  return a;
}

std::string kernel_str(const Mat<Rational>& k) {
  std::string s;
  for (Eigen::Index c = 0; c < k.cols(); ++c) {
    s += c ? ", (" : ": (";
    for (Eigen::Index r = 0; r < k.rows(); ++r) s += (r ? ", " : "") + k(r, c).str();
    s += ")";
  }
  return s;
}

json kernel_json(const Mat<Rational>& k) {
  json a = json::array();
  for (Eigen::Index c = 0; c < k.cols(); ++c) {
    json col = json::array();
    for (Eigen::Index r = 0; r < k.rows(); ++r) col.push_back(k(r, c).str());
    a.push_back(col);
  }
  return a;
}

std::vector<Residual> one_based(std::vector<Residual> rs) {
  for (auto& r : rs)
    for (auto& i : r.index) ++i;
  return rs;
}

CheckResult check(std::string id, std::vector<Residual> rs, std::string detail = {}) {
  return from_residuals(std::move(id), one_based(std::move(rs)), std::move(detail));
}

CheckResult info(std::string id, std::string detail) { return {std::move(id), Status::Pass, std::move(detail), {}}; }

CheckResult vacuous(std::string id, std::string why) { return {std::move(id), Status::Vacuous, std::move(why), {}}; }

CheckResult failed(std::string id, std::string why) { return {std::move(id), Status::Fail, std::move(why), {}}; }

CheckResult equal(std::string id, const Expr& got, const Expr& want) {
  const Expr d = got - want;
  if (d.is_zero()) return info(std::move(id), got.str());
  return {std::move(id), Status::Fail, "computed " + got.str() + ", expected " + want.str(), {{"difference", {}, d}}};
}

bool same_point(const Point& a, const Point& b) { return a == b; }

/// There is t with A (f + K t) = b.
bool affine_admits(const Coeffs<Rational>& f, const Mat<Rational>& kernel, const Mat<Rational>& a, const Vec<Rational>& b) {
  Vec<Rational> fv(6);
  for (int i = 0; i < 6; ++i) fv(i) = f[i];
  const Vec<Rational> rhs = b - a * fv;
  if (kernel.cols() == 0) return is_zero_matrix<Rational>(Mat<Rational>(rhs));
  return solve<Rational>(Mat<Rational>(a * kernel), rhs).has_value();
}

/// Everything the later stages need from the fit.
struct FitState {
  Gauge gauge = Gauge::None;
  SpaceFormFit fit;
  /// Symbolic coefficients when available (ansatz or a constant Lie fit).
  std::optional<Coeffs<Expr>> symbolic;
  std::string symbolic_source;
};

class Verifier {
 public:
  Verifier(const Manifest& m, const VerifyOptions& o) : m_(m), o_(o) {}

  Report run() {
    r_.command = "verify";
    r_.subject = m_.name;
    if (m_.data_only()) {
      r_.environment = report_environment(o_.convention, "three_d_reduced");
      verify_data();
      return std::move(r_);
    }
    s_.emplace(m_.structure());
    gauge_ = m_.gauge ? *m_.gauge : (m_.dim() == 3 ? Gauge::ThreeDReduced : Gauge::None);
    r_.environment = report_environment(o_.convention, to_string(gauge_));
    r_.environment["suite"] = to_string(o_.suite);
    contact_ = s_->is_contact_metric(o_.convention);

    if (want(Suite::Structure)) structure();
    if (want(Suite::Curvature)) curvature();
    const bool needs_fit = want(Suite::Fit) || want(Suite::Identities) || want(Suite::Ricci);
    if (needs_fit) {
      if (!contact_) {
        for (const char* id : {"fit", "km", "identities", "ricci"})
          r_.add(skipped(id, "structure is not contact metric"));
      } else {
        fit();
        if (want(Suite::Fit)) km();
        if (want(Suite::Identities)) identities();
        if (want(Suite::Ricci)) ricci();
      }
    }
    expected();
    return std::move(r_);
  }

 private:
  bool want(Suite s) const { return o_.suite == Suite::All || o_.suite == s; }

  std::vector<Point> points() const {
    if (o_.points) return *o_.points;
    if (!m_.sample_points.empty()) return m_.sample_points;
    return {Point{}};
  }

  // ------------------------------------------------------------ structure

  void structure() {
    const auto& s = *s_;
    r_.add(check("structure.almost_contact", s.structure_residuals()));
    r_.add(check("h.properties", s.h_residuals()));
    r_.add(check("predicate.contact_metric", s.contact_residuals(o_.convention), "d eta = Phi"));
    if (contact_)
      r_.add(check("h.nabla_xi", s.nabla_xi_residuals()));
    else
      r_.add(skipped("h.nabla_xi", "needs a contact metric structure"));
    k_contact_ = s.is_k_contact();
    sasakian_ = s.is_sasakian();
    r_.add(info("predicate.k_contact", k_contact_ ? "true" : "false"));
    r_.add(info("predicate.sasakian", sasakian_ ? "true" : "false"));
    if (sasakian_ && !k_contact_) r_.add(failed("predicate.sasakian_implies_k_contact", "Sasakian but not K-contact"));
    if (m_.trans_sasakian) {
      const auto& [alpha, beta] = *m_.trans_sasakian;
      const auto ts = check_trans_sasakian(s, alpha, beta, o_.convention);
      trans_ = ts.holds;
      r_.add(info("predicate.trans_sasakian",
                  std::string(ts.holds ? "true" : "false") + " for alpha = " + alpha.str() + ", beta = " + beta.str()));
      if (ts.holds)
        r_.add(check("trans_sasakian.consequences", ts.violated_consequences, "h = 0 and the derived identities"));
      else
        r_.add(vacuous("trans_sasakian.consequences", "structure is not trans-Sasakian for these alpha, beta"));
    }
  }

  // ------------------------------------------------------------ curvature

  void curvature() {
    const auto& g = s_->geometry();
    r_.add(check("brackets.antisymmetry", check_bracket_antisymmetry(g.c)));
    r_.add(check("brackets.jacobi", check_jacobi(g.chart, g.c)));
    r_.add(check("connection.metric", check_metric_compatibility(g.gamma)));
    r_.add(check("connection.torsion_free", check_torsion_free(g.gamma, g.c)));
    r_.add(check("curvature.symmetries", check_curvature_symmetries(g.r)));
    r_.add(check("curvature.bianchi", check_first_bianchi(g.r)));
  }

  // ------------------------------------------------------------------ fit

  void fit() {
    const auto& s = *s_;
    blocks_ = build_blocks(s);
    fs_.gauge = gauge_;
    fs_.fit = fit_coefficients(s.geometry(), blocks_, points(), gauge_, o_.jobs);
    for (const auto& p : fs_.fit.points) {
      const std::string id = "fit.point[" + to_string(p.point) + "]";
      switch (p.state) {
        case PointFit::State::Ok:
          if (want(Suite::Fit))
            r_.add(info(id, "f = " + tuple_str(p.f) + ", kernel dim " + std::to_string(p.kernel.cols())));
          break;
        case PointFit::State::NoFit: r_.add(failed(id, p.message)); break;
        case PointFit::State::DomainError: r_.add(skipped(id, "domain error: " + p.message)); break;
        case PointFit::State::Irrational: r_.add(skipped(id, "irrational value: " + p.message)); break;
      }
    }
    zero_ = form_data(s, Coeffs<Expr>{}, o_.convention);

    if (m_.ansatz) {
      if (want(Suite::Fit)) {
        r_.add(check("fit.ansatz", ansatz_residuals(s.geometry().r, blocks_, *m_.ansatz)));
        std::vector<Residual> off;
        for (const auto& p : fs_.fit.points) {
          if (!p.ok()) continue;
          Coeffs<Rational> a;
          for (int i = 0; i < 6; ++i) a[i] = (*m_.ansatz)[i].eval(p.point);
          Mat<Rational> id6 = Mat<Rational>::Identity(6, 6);
          Vec<Rational> zero6 = Vec<Rational>::Constant(6, Rational(0));
          Coeffs<Rational> diff;
          for (int i = 0; i < 6; ++i) diff[i] = a[i] - p.f[i];
          if (!affine_admits(diff, p.kernel, id6, zero6))
            off.push_back({"ansatz - fit outside the kernel at " + to_string(p.point), {}, Expr(0)});
        }
        r_.add(from_residuals("fit.ansatz_matches_points", std::move(off)));
      }
      fs_.symbolic = m_.ansatz;
      fs_.symbolic_source = "ansatz";
    } else if (s.geometry().chart.is_lie() && fs_.fit.points.size() == 1 && fs_.fit.points[0].ok()) {
      Coeffs<Expr> f;
      for (int i = 0; i < 6; ++i) f[i] = Expr(fs_.fit.points[0].f[i]);
      fs_.symbolic = f;
      fs_.symbolic_source = "constant fit";
    }
    if (fs_.symbolic) sym_ = form_data(s, *fs_.symbolic, o_.convention);

    for (const auto& p : fs_.fit.points)
      if (p.ok()) pointwise_.push_back({p.point, evaluate(zero_, p.point, p.f)});
  }

  // ---------------------------------------------------------- kappa, mu

  void km() {
    const auto direct = read_km(*s_);
    if (direct) {
      km_ = direct;
      r_.add(info("km.read_from_curvature", "kappa = " + direct->kappa.str() + ", mu = " + direct->mu.str()));
    } else {
      r_.add(failed("km.read_from_curvature", "R(X,Y)xi is not of generalized (kappa,mu) form"));
    }
    if (sym_) {
      try {
        const auto km = extract_km(*sym_);
        std::vector<Residual> res;
        if (direct && (km.kappa != direct->kappa || (!is_zero_matrix(s_->h()) && km.mu != direct->mu)))
          res.push_back({"f1 - f3, f4 - f6 against R(X,xi)xi", {}, km.kappa - direct->kappa});
        r_.add(from_residuals("km.extraction", std::move(res), "kappa = f1 - f3 = " + km.kappa.str() + ", mu = f4 - f6 = " + km.mu.str()));
      } catch (const InternalInconsistency& e) {
        r_.add(failed("km.extraction", e.what()));
      }
    }
    for (const auto& [p, d] : pointwise_) {
      const auto v = km_of(d.f);
      r_.add(check("km.pointwise[" + to_string(p) + "]", km_residuals(d, v.kappa, v.mu),
                   "kappa = " + v.kappa.str() + ", mu = " + v.mu.str()));
      auto b = kappa_bound(d);
      b.id += "[" + to_string(p) + "]";
      r_.add(std::move(b));
    }
    theorems();
  }

  /// Sasakian and K-contact coefficient relations, allowing any
  /// representative of the fit.
  void theorems() {
    Mat<Rational> f3f1 = Mat<Rational>::Zero(1, 6);  // f1 - f3 = 1
    f3f1(0, 0) = 1;
    f3f1(0, 2) = -1;
    Vec<Rational> one = Vec<Rational>::Constant(1, Rational(1));
    Mat<Rational> sas = Mat<Rational>::Zero(2, 6);  // f1 - f2 = 1, f2 - f3 = 0
    sas(0, 0) = 1;
    sas(0, 1) = -1;
    sas(1, 1) = 1;
    sas(1, 2) = -1;
    Vec<Rational> sas_b(2);
    sas_b << Rational(1), Rational(0);

    const bool kc = s_->is_k_contact(), sa = s_->is_sasakian();
    std::vector<Residual> a, b, c;
    bool any_f3 = false;
    for (const auto& p : fs_.fit.points) {
      if (!p.ok()) continue;
      const bool has_f3 = affine_admits(p.f, p.kernel, f3f1, one);
      any_f3 = any_f3 || has_f3;
      if (kc && !has_f3) a.push_back({"K-contact without f3 = f1 - 1 at " + to_string(p.point), {}, Expr(0)});
      if (sa && !affine_admits(p.f, p.kernel, sas, sas_b))
        b.push_back({"Sasakian without f2 = f3 = f1 - 1 at " + to_string(p.point), {}, Expr(0)});
      if (has_f3 && !sa) c.push_back({"f3 = f1 - 1 but not Sasakian at " + to_string(p.point), {}, Expr(0)});
    }
    if (kc) {
      r_.add(from_residuals("theorems.k_contact_gives_f3", std::move(a), "f3 = f1 - 1"));
      r_.add(sa ? info("theorems.k_contact_gives_sasakian", "true")
                : failed("theorems.k_contact_gives_sasakian", "K-contact space form that is not Sasakian"));
    } else {
      r_.add(vacuous("theorems.k_contact_gives_f3", "not K-contact"));
    }
    if (sa)
      r_.add(from_residuals("theorems.sasakian_coefficients", std::move(b), "f2 = f3 = f1 - 1 for some representative"));
    else
      r_.add(vacuous("theorems.sasakian_coefficients", "not Sasakian"));
    if (any_f3)
      r_.add(from_residuals("theorems.f3_gives_sasakian", std::move(c)));
    else
      r_.add(vacuous("theorems.f3_gives_sasakian", "no representative with f3 = f1 - 1"));
  }

  // ---------------------------------------------------------- identities

  void identities() {
    if (sym_) {
      r_.add(sectional_suite(*sym_, o_.seed));
      r_.add(identity_suite(*sym_));
      r_.add(constant_km_suite(*sym_));
      return;
    }
    if (pointwise_.empty()) {
      r_.add(skipped("identities", "no point with a fit"));
      return;
    }
    for (const auto& [p, d] : pointwise_) {
      const std::string at = "@" + to_string(p);
      for (auto c : sectional_suite(d, o_.seed)) r_.add(CheckResult{c.id + at, c.status, c.detail, c.residuals});
      for (auto c : identity_suite(d)) r_.add(CheckResult{c.id + at, c.status, c.detail, c.residuals});
    }
    r_.add(skipped("eigen", "constant (kappa, mu) checks need symbolic coefficients"));
  }

  // --------------------------------------------------------------- Ricci

  void ricci() {
    if (sym_) {
      r_.add(ricci_suite(*sym_));
      r_.add(three_d_suite(*sym_));
    } else {
      for (const auto& [p, d] : pointwise_) {
        const std::string at = "@" + to_string(p);
        for (auto c : ricci_suite(d)) r_.add(CheckResult{c.id + at, c.status, c.detail, c.residuals});
        for (auto c : three_d_suite(d)) r_.add(CheckResult{c.id + at, c.status, c.detail, c.residuals});
      }
    }
    classification();
  }

  void classification() {
    if (m_.dim() != 3) return;
    const auto km = km_ ? km_ : read_km(*s_);
    if (!km) {
      r_.add(skipped("classify", "not a generalized (kappa,mu)-space"));
      return;
    }
    const auto k = km->kappa.constant_value(), u = km->mu.constant_value();
    if (!k || !u) {
      r_.add(skipped("classify", "kappa, mu are not constant"));
      return;
    }
    try {
      const auto c = classify_3d(*k, *u, sym_ ? &sym_->f : nullptr);
      label_ = to_string(c.label);
      r_.add(info("classify.label", *label_ + " (lambda = " + c.lambda.str() + ")"));
      if (*k != Rational(1)) r_.add(c.checks);
    } catch (const Error& e) {
      r_.add(failed("classify", e.what()));
    }
  }

  // ------------------------------------------------------------ expected

  void table(const std::string& id, const std::vector<LegEntry>& entries, bool complete, int legs,
             const std::function<Expr(const std::vector<int>&, int)>& get, bool antisymmetric) {
    const int n = m_.dim();
    std::vector<Residual> res;
    std::set<std::vector<int>> listed;
    for (const auto& e : entries) {
      std::vector<int> idx;
      for (int l : e.legs) idx.push_back(l - 1);
      listed.insert(idx);
      if (antisymmetric) {
        auto sw = idx;
        std::swap(sw[0], sw[1]);
        listed.insert(sw);
      }
      for (int k = 0; k < n; ++k) {
        const Expr d = get(idx, k) - e.value(k);
        if (!d.is_zero()) {
          auto i1 = e.legs;
          i1.push_back(k + 1);
          res.push_back({e.field, i1, d});
        }
      }
    }
    if (complete) {
      std::vector<int> idx(legs, 0);
      std::function<void(int)> rec = [&](int pos) {
        if (pos == legs) {
          if (listed.count(idx)) return;
          for (int k = 0; k < n; ++k) {
            const Expr v = get(idx, k);
            if (!v.is_zero()) {
              std::vector<int> i1;
              for (int x : idx) i1.push_back(x + 1);
              i1.push_back(k + 1);
              res.push_back({"unlisted entry must vanish", i1, v});
            }
          }
          return;
        }
        for (int i = 0; i < n; ++i) {
          idx[pos] = i;
          rec(pos + 1);
        }
      };
      rec(0);
    }
    r_.add(from_residuals(id, std::move(res),
                          std::to_string(entries.size()) + " entries" + (complete ? ", all others zero" : "")));
  }

  void expected() {
    const Expected& ex = m_.expected;
    const auto& s = *s_;
    const auto& g = s.geometry();
    if (want(Suite::Curvature)) {
      if (!ex.brackets.empty() || ex.brackets_complete)
        table("expected.brackets", ex.brackets, ex.brackets_complete, 2,
              [&](const std::vector<int>& i, int k) { return g.c(i[0], i[1], k); }, true);
      if (!ex.connection.empty() || ex.connection_complete)
        table("expected.connection", ex.connection, ex.connection_complete, 2,
              [&](const std::vector<int>& i, int k) { return g.gamma(i[0], i[1], k); }, false);
      if (!ex.curvature.empty() || ex.curvature_complete)
        table("expected.curvature", ex.curvature, ex.curvature_complete, 3,
              [&](const std::vector<int>& i, int k) { return g.r(i[0], i[1], i[2], k); }, true);
    }
    if (want(Suite::Structure)) {
      if (ex.h) {
        std::vector<Residual> res;
        for (int i = 0; i < m_.dim(); ++i)
          for (int j = 0; j < m_.dim(); ++j)
            if (const Expr d = s.h()(i, j) - (*ex.h)(i, j); !d.is_zero()) res.push_back({"h", {i + 1, j + 1}, d});
        r_.add(from_residuals("expected.h", std::move(res)));
      }
      for (const auto& [name, want_value] : ex.predicates) {
        bool got = false;
        if (name == "contact_metric") got = contact_;
        if (name == "k_contact") got = s.is_k_contact();
        if (name == "sasakian") got = s.is_sasakian();
        if (name == "trans_sasakian") {
          if (!trans_) {
            r_.add(failed("expected.predicates." + name, "manifest has no trans_sasakian block"));
            continue;
          }
          got = *trans_;
        }
        const std::string detail = std::string(got ? "true" : "false");
        r_.add(got == want_value ? info("expected.predicates." + name, detail)
                                 : failed("expected.predicates." + name, "computed " + detail));
      }
    }
    if (contact_ && want(Suite::Fit)) expected_fit();
    if (contact_ && want(Suite::Ricci)) expected_ricci();
    if (o_.suite == Suite::All) {
      if (m_.deformation_a) deformation();
      if (m_.construction_f6) construction();
    }
  }

  void expected_fit() {
    const Expected& ex = m_.expected;
    const auto km = km_ ? km_ : read_km(*s_);
    if (ex.kappa) r_.add(km ? equal("expected.kappa", km->kappa, *ex.kappa) : failed("expected.kappa", "no kappa"));
    if (ex.mu) r_.add(km ? equal("expected.mu", km->mu, *ex.mu) : failed("expected.mu", "no mu"));
    if (ex.lambda) {
      if (!km) {
        r_.add(failed("expected.lambda", "no kappa"));
      } else {
        const Expr lambda = Expr::sqrt(Expr(1) - km->kappa);
        auto c = equal("expected.lambda", lambda, *ex.lambda);
        if (c.status == Status::Pass && !is_zero_matrix(s_->h())) {
          // lambda is also the eigenvalue of h on the first leg it scales
          bool seen = false;
          for (int i = 0; i < m_.dim() && !seen; ++i)
            if (!s_->h()(i, i).is_zero()) {
              seen = true;
              if (s_->h()(i, i) != lambda && s_->h()(i, i) != -lambda) {
                c.status = Status::Fail;
                c.detail = "h(" + std::to_string(i + 1) + "," + std::to_string(i + 1) + ") = " + s_->h()(i, i).str() +
                           " is not +-lambda";
              }
            }
        }
        r_.add(std::move(c));
      }
    }
    if (!ex.f.empty()) {
      std::vector<Residual> res;
      for (const auto& p : fs_.fit.points) {
        if (!p.ok()) continue;
        for (const auto& [i, e] : ex.f)
          if (const Rational d = p.f[i] - e.eval(p.point); !d.is_zero())
            res.push_back({"f" + std::to_string(i + 1) + " at " + to_string(p.point), {}, Expr(d)});
      }
      if (ex.f.size() == 6) {
        Coeffs<Expr> f;
        for (const auto& [i, e] : ex.f) f[i] = e;
        for (auto& r : one_based(ansatz_residuals(s_->geometry().r, blocks_, f))) res.push_back(r);
      }
      r_.add(from_residuals("expected.f", std::move(res), "in gauge " + to_string(gauge_)));
    }
    if (!ex.fit_points.empty()) {
      std::vector<Residual> res;
      for (const auto& e : ex.fit_points) {
        const PointFit* p = nullptr;
        for (const auto& q : fs_.fit.points)
          if (same_point(q.point, e.point)) p = &q;
        SpaceFormFit extra;
        if (!p) {
          extra = fit_coefficients(s_->geometry(), blocks_, {e.point}, gauge_);
          p = &extra.points[0];
        }
        if (!p->ok()) {
          res.push_back({e.field + ": " + p->message, {}, Expr(0)});
          continue;
        }
        for (const auto& [i, v] : e.f)
          if (const Rational d = p->f[i] - v; !d.is_zero())
            res.push_back({e.field + " f" + std::to_string(i + 1), {}, Expr(d)});
      }
      r_.add(from_residuals("expected.fit_points", std::move(res), std::to_string(ex.fit_points.size()) + " points"));
    }
    if (ex.kernel_dim) {
      std::vector<Residual> res;
      for (const auto& p : fs_.fit.points)
        if (p.ok() && p.kernel.cols() != *ex.kernel_dim)
          res.push_back({"kernel dimension at " + to_string(p.point), {}, Expr(static_cast<long>(p.kernel.cols()))});
      r_.add(from_residuals("expected.kernel_dim", std::move(res), std::to_string(*ex.kernel_dim)));
    }
  }

  void expected_ricci() {
    const Expected& ex = m_.expected;
    if (ex.tau) {
      if (sym_) {
        auto c = equal("expected.tau", tau_formula(sym_->f), *ex.tau);
        if (c.status == Status::Pass && tau_sectional(*sym_) != *ex.tau) {
          c.status = Status::Fail;
          c.detail = "sectional average " + tau_sectional(*sym_).str();
        }
        r_.add(std::move(c));
      } else {
        std::vector<Residual> res;
        for (const auto& [p, d] : pointwise_) {
          const Rational want = ex.tau->eval(p);
          if (tau_formula(d.f) != want || tau_sectional(d) != want)
            res.push_back({"tau at " + to_string(p), {}, Expr(tau_formula(d.f) - want)});
        }
        r_.add(from_residuals("expected.tau", std::move(res)));
      }
    }
    if (!ex.ricci.empty()) {
      std::vector<Residual> res;
      for (const auto& e : ex.ricci) {
        try {
          s_->geometry().chart.check_point(e.point);
          const Mat<Rational> q = ricci_trace(eval(s_->geometry().r, e.point));
          const Mat<Rational> want = eval(e.value, e.point);
          for (int i = 0; i < q.rows(); ++i)
            for (int j = 0; j < q.cols(); ++j)
              if (const Rational d = q(i, j) - want(i, j); !d.is_zero()) res.push_back({e.field, {i + 1, j + 1}, Expr(d)});
        } catch (const Error& err) {
          res.push_back({e.field + ": " + err.what(), {}, Expr(0)});
        }
      }
      r_.add(from_residuals("expected.ricci", std::move(res)));
    }
    if (ex.classification) {
      if (!label_)
        r_.add(failed("expected.classification", "no label computed"));
      else
        r_.add(*label_ == *ex.classification ? info("expected.classification", *label_)
                                             : failed("expected.classification", "computed " + *label_));
    }
  }

  void deformation() {
    const Expected& ex = m_.expected;
    try {
      const auto d = d_homothetic(*s_, *m_.deformation_a, o_.convention);
      std::string detail = "a = " + d.a.str() + ": kappa' = " + d.deformed.kappa.str() + ", mu' = " + d.deformed.mu.str();
      if (d.tensor_level()) {
        std::vector<Residual> res = d.contact;
        res.insert(res.end(), d.km_check.begin(), d.km_check.end());
        r_.add(check("deformation.rebuilt", std::move(res), detail));
      } else {
        r_.add(skipped("deformation.rebuilt", "sqrt(a) is irrational; " + detail));
      }
      if (ex.deformed_kappa) r_.add(equal("expected.deformation.kappa", d.deformed.kappa, *ex.deformed_kappa));
      if (ex.deformed_mu) r_.add(equal("expected.deformation.mu", d.deformed.mu, *ex.deformed_mu));
    } catch (const Error& e) {
      r_.add(failed("deformation", e.what()));
    }
  }

  void construction() {
    const Expected& ex = m_.expected;
    try {
      const auto c = construct(*m_.construction_f6);
      r_.add("construction", c.checks);
      if (ex.c_s) r_.add(equal("expected.construction.c_s", c.c_s.to_expr(), *ex.c_s));
      const auto& bar = c.deformation.deformed;
      if (ex.constructed_kappa) r_.add(equal("expected.construction.kappa", bar.kappa.to_expr(), Expr(*ex.constructed_kappa)));
      if (ex.constructed_mu) r_.add(equal("expected.construction.mu", bar.mu.to_expr(), Expr(*ex.constructed_mu)));
      if (ex.constructed_c) r_.add(equal("expected.construction.c", c.deformation.c.to_expr(), Expr(*ex.constructed_c)));
    } catch (const Error& e) {
      r_.add(failed("construction", e.what()));
    }
  }

  // ------------------------------------------------------------ data only

  void verify_data() {
    const Coeffs<Expr>& f = *m_.data;
    const Expected& ex = m_.expected;
    const Expr kappa = f[0] - f[2], mu = f[3] - f[5];
    r_.add(skipped("structure", "no frame is given; only coefficient relations are checked"));
    if (ex.kappa) r_.add(equal("data.kappa", kappa, *ex.kappa));
    if (ex.mu) r_.add(equal("data.mu", mu, *ex.mu));
    const Expr lambda = Expr::sqrt(Expr(1) - kappa);
    if (ex.lambda) {
      auto c = equal("data.lambda", lambda, *ex.lambda);
      if (c.status == Status::Pass && ((*ex.lambda) * (*ex.lambda) + kappa - Expr(1)).is_zero() == false) c.status = Status::Fail;
      r_.add(std::move(c));
    }
    if (!lambda.free_symbols().empty() || lambda.is_constant())
      r_.add(info("data.tau", "tau = " + tau_formula(f).str()));
    if (m_.dim() == 3) {
      const Expr c = 2 * f[0] + 3 * f[1] - f[2] + f[3] - f[5];
      if (kappa.is_constant() && mu.is_constant())
        r_.add(c.is_zero() ? info("data.constraint_3d", "2f1 + 3f2 - f3 + f4 - f6 = 0")
                           : failed("data.constraint_3d", "2f1 + 3f2 - f3 + f4 - f6 = " + c.str()));
      else
        r_.add(vacuous("data.constraint_3d", "kappa, mu are not constant"));
    }
    for (const auto& p : points()) {
      const std::string at = "[" + to_string(p) + "]";
      try {
        const Rational k = kappa.eval(p);
        const Rational l = lambda.eval(p);
        std::string detail = "kappa = " + k.str() + ", lambda = " + l.str();
        const bool ok = k < Rational(1) && l.sign() > 0 && l * l == 1 - k;
        r_.add(ok ? info("data.pointwise" + at, detail) : failed("data.pointwise" + at, detail));
      } catch (const Error& e) {
        r_.add(skipped("data.pointwise" + at, e.what()));
      }
    }
  }

  const Manifest& m_;
  const VerifyOptions& o_;
  Report r_;
  std::optional<AcmStructure> s_;
  Gauge gauge_ = Gauge::None;
  bool contact_ = false, k_contact_ = false, sasakian_ = false;
  std::optional<bool> trans_;
  BlockTensors<Expr> blocks_;
  FitState fs_;
  FormData<Expr> zero_;
  std::optional<FormData<Expr>> sym_;
  std::vector<std::pair<Point, FormData<Rational>>> pointwise_;
  std::optional<KmValues<Expr>> km_;
  std::optional<std::string> label_;
};

}  // namespace

Report cmd_verify(const Manifest& m, const VerifyOptions& o) { return Verifier(m, o).run(); }

Report cmd_fit(const Manifest& m, const FitOptions& o) {
  if (m.data_only()) throw InvalidArgument(m.name + " has no chart to fit");
  const Gauge gauge = o.gauge ? *o.gauge : (m.gauge ? *m.gauge : (m.dim() == 3 ? Gauge::ThreeDReduced : Gauge::None));
  Report r;
  r.command = "fit";
  r.subject = m.name;
  r.environment = report_environment(DEtaConvention::Half, to_string(gauge));
  const auto s = m.structure();
  std::vector<Point> pts = o.points ? *o.points : m.sample_points;
  if (pts.empty()) pts.push_back({});
  const auto fit = fit_coefficients(s.geometry(), build_blocks(s), pts, gauge, o.jobs);
  json rows = json::array();
  for (const auto& p : fit.points) {
    json row{{"point", to_string(p.point)}};
    const std::string id = "fit.point[" + to_string(p.point) + "]";
    switch (p.state) {
      case PointFit::State::Ok:
        row["state"] = "ok";
        row["f"] = coeffs_json(p.f);
        row["kernel"] = kernel_json(p.kernel);
        r.add(info(id, "f = " + tuple_str(p.f) + ", kernel dim " + std::to_string(p.kernel.cols()) + kernel_str(p.kernel)));
        break;
      case PointFit::State::NoFit: {
        row["state"] = "no_fit";
        json idx = json::array();
        for (int i : p.inconsistent) idx.push_back(i + 1);
        row["inconsistent_component"] = idx;
        row["message"] = p.message;
        r.add(failed(id, p.message));
        break;
      }
      case PointFit::State::DomainError:
      case PointFit::State::Irrational:
        row["state"] = p.state == PointFit::State::DomainError ? "domain_error" : "irrational";
        row["message"] = p.message;
        r.add(skipped(id, row["state"].get<std::string>() + ": " + p.message));
        break;
    }
    rows.push_back(std::move(row));
  }
  r.data["rows"] = std::move(rows);
  return r;
}

namespace {

void classify_into(Report& r, const Rational& kappa, const Rational& mu) {
  if (kappa >= Rational(1)) {
    r.add(skipped("deform.classification", "kappa' = " + kappa.str() + " is not below 1"));
    return;
  }
  const auto c = classify_3d(kappa, mu);
  r.data["label"] = to_string(c.label);
  r.add(info("deform.classification", to_string(c.label) + " (3-D reading of kappa', mu')"));
}

Rational constant_of(const Expr& e, const std::optional<Point>& p, const char* what) {
  if (auto v = e.constant_value()) return *v;
  if (!p) throw InvalidArgument(std::string(what) + " = " + e.str() + " is not constant; give --point");
  return e.eval(*p);
}

}  // namespace

Report cmd_deform(const Rational& kappa, const Rational& mu, const DeformOptions& o) {
  Report r;
  r.command = "deform";
  r.subject = "kappa = " + kappa.str() + ", mu = " + mu.str();
  r.environment = report_environment(o.convention, "none");
  Rational a;
  if (o.automatic) {
    const auto c = choose_a(kappa, mu);
    a = c.a;
    r.add(info("deform.choose_a", "a = (kappa - 1)/(mu - 2) = " + a.str()));
    r.add(info("deform.mu_is_kappa_plus_one", "mu' = kappa' + 1 = " + c.deformed.mu.str()));
    r.data["c"] = c.c.str();
  } else {
    if (!o.a) throw InvalidArgument("give --a or --auto");
    a = *o.a;
  }
  const auto d = d_homothetic(KmValues<Expr>{Expr(kappa), Expr(mu)}, a);
  const Rational kb = *d.deformed.kappa.constant_value(), mb = *d.deformed.mu.constant_value();
  r.data["a"] = a.str();
  r.data["kappa"] = kb.str();
  r.data["mu"] = mb.str();
  r.add(info("deform.closed_form", "kappa' = " + kb.str() + ", mu' = " + mb.str()));
  // the closed forms composed with 1/a must return the input
  const auto back = deform_km(KmValues<Rational>{kb, mb}, 1 / a);
  r.add(back.kappa == kappa && back.mu == mu ? info("deform.round_trip", "a then 1/a restores (kappa, mu)")
                                              : failed("deform.round_trip", "a then 1/a does not restore (kappa, mu)"));
  r.add(skipped("deform.rebuilt", "parameter algebra only (no structure given)"));
  classify_into(r, kb, mb);
  return r;
}

Report cmd_deform(const Manifest& m, const DeformOptions& o) {
  if (m.data_only()) throw InvalidArgument(m.name + " has no chart to deform");
  const auto s = m.structure();
  Report r;
  r.command = "deform";
  r.subject = m.name;
  r.environment = report_environment(o.convention, "none");
  const auto km = read_km(s);
  if (!km) throw InvalidArgument(m.name + " is not a generalized (kappa,mu)-space");
  Rational a;
  if (o.automatic) {
    const auto c = choose_a(constant_of(km->kappa, o.point, "kappa"), constant_of(km->mu, o.point, "mu"));
    a = c.a;
    r.add(info("deform.choose_a", "a = " + a.str()));
  } else {
    if (!o.a) throw InvalidArgument("give --a or --auto");
    a = *o.a;
  }
  const auto d = d_homothetic(s, a, o.convention, o.rebuild);
  r.data["a"] = a.str();
  r.data["kappa"] = d.deformed.kappa.str();
  r.data["mu"] = d.deformed.mu.str();
  r.data["tensor_level"] = d.tensor_level();
  r.add(info("deform.closed_form", "kappa' = " + d.deformed.kappa.str() + ", mu' = " + d.deformed.mu.str()));
  if (!d.tensor_level()) {
    r.add(skipped("deform.rebuilt", "sqrt(" + a.str() + ") is irrational; parameter algebra only"));
  } else {
    r.add(check("deform.contact_metric", d.contact));
    r.add(check("deform.rebuilt", d.km_check, "R(X,Y)xi of the rebuilt frame against the closed forms"));
    if (o.point) {
      const auto again = read_km(*d.structure);
      if (!again) {
        r.add(failed("deform.at_point", "rebuilt structure is not a generalized (kappa,mu)-space"));
      } else {
        const Rational kc = d.deformed.kappa.eval(*o.point), kr = again->kappa.eval(*o.point);
        const Rational mc = d.deformed.mu.eval(*o.point), mr = again->mu.eval(*o.point);
        const std::string detail = "at " + to_string(*o.point) + ": closed form (" + kc.str() + ", " + mc.str() +
                                   "), recomputed (" + kr.str() + ", " + mr.str() + ")";
        r.add(kc == kr && mc == mr ? info("deform.at_point", detail) : failed("deform.at_point", detail));
        r.data["at_point"] = {{"point", to_string(*o.point)}, {"kappa", kc.str()}, {"mu", mc.str()}};
      }
    }
  }
  if (m.dim() == 3) {
    const auto kb = d.deformed.kappa.constant_value(), mb = d.deformed.mu.constant_value();
    if (kb && mb) classify_into(r, *kb, *mb);
  }
  return r;
}

Report cmd_construct(const Rational& f6) {
  const auto c = construct(f6);
  Report r;
  r.command = "construct";
  r.subject = "f6 = " + f6.str();
  r.environment = report_environment(DEtaConvention::Half, "none");
  r.add(c.checks);
  std::string tuple;
  for (const auto& x : c.system.f) tuple += (tuple.empty() ? "" : ", ") + x.str();
  r.add(info("construct.result", "c_s = " + c.c_s.str() + ", a = " + c.deformation.a.str() + ", (kappa, mu, c) = (" +
                                     c.deformation.deformed.kappa.str() + ", " + c.deformation.deformed.mu.str() + ", " +
                                     c.deformation.c.str() + "), f = (" + tuple + ")"));
  json roots = json::array();
  for (const auto& x : c.cs.roots) roots.push_back(x.str());
  r.data["c_s_roots"] = roots;
  r.data["c_s"] = c.c_s.str();
  r.data["kappa"] = c.km.kappa.str();
  r.data["mu"] = c.km.mu.str();
  r.data["a"] = c.deformation.a.str();
  r.data["kappa_bar"] = c.deformation.deformed.kappa.str();
  r.data["mu_bar"] = c.deformation.deformed.mu.str();
  r.data["c_bar"] = c.deformation.c.str();
  json f = json::array();
  for (const auto& x : c.system.f) f.push_back(x.str());
  r.data["dim5_f"] = f;
  return r;
}

}  // namespace kmsf
