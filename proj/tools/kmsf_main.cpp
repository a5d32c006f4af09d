#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "kmsf/errors.hpp"
#include "kmsf/pipeline.hpp"

using namespace kmsf;

namespace {

constexpr int kInputError = 2;

std::vector<Point> parse_points(const std::string& list, const Manifest& m) {
  const std::string first = m.default_coordinate();
  std::vector<Point> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto end = std::min(list.find(',', start), list.size());
    if (end > start) out.push_back(parse_point(std::string_view(list).substr(start, end - start), first));
    start = end + 1;
  }
  if (out.empty()) throw InvalidArgument("--points is empty");
  return out;
}

DEtaConvention parse_convention(const std::string& s) {
  if (s == "half") return DEtaConvention::Half;
  if (s == "full") return DEtaConvention::Full;
  throw InvalidArgument("unknown d eta convention '" + s + "' (half, full)");
}

struct Output {
  std::string out;
  bool json = false;
  int residuals = 20;

  int emit(const Report& r) const {
    const auto j = r.to_json(static_cast<std::size_t>(residuals));
    if (!out.empty()) {
      std::ofstream f(out);
      if (!f) throw InvalidArgument("cannot write " + out);
      f << j.dump(2) << "\n";
    }
    if (json) {
      std::cout << j.dump(2) << "\n";
    } else {
      r.print(std::cout);
      const auto& s = j["summary"];
      std::cout << r.command << " " << r.subject << ": " << (r.failed() ? "FAIL" : "PASS") << " (" << s["pass"]
                << " pass, " << s["fail"] << " fail, " << s["skipped"] << " skipped, " << s["vacuous"] << " vacuous)\n";
    }
    return r.exit_code();
  }
};

void add_output(CLI::App* app, Output& o) {
  app->add_option("--out", o.out, "Write the JSON report to this file");
  app->add_flag("--json", o.json, "Print the JSON report instead of text");
  app->add_option("--max-residuals", o.residuals, "Residuals kept per check in the JSON report")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact verification of generalized (kappa,mu)-space forms"};
  app.require_subcommand(1);

  Output out;
  std::string manifest, suite = "all", points, gauge, convention = "half", km_text, a_text, point_text, f6_text;
  int jobs = 1;
  unsigned seed = 1;
  std::vector<std::string> km;
  bool automatic = false, rebuild_always = false;

  auto* verify = app.add_subcommand("verify", "Run the verification pipeline on a manifest");
  verify->add_option("manifest", manifest, "Registry name or manifest path")->required();
  verify->add_option("--suite", suite, "all|structure|curvature|fit|identities|ricci");
  verify->add_option("--points", points, "Comma-separated points, e.g. 1,2 or x3=1,x3=2 or u=1:v=2");
  verify->add_option("--jobs", jobs, "Threads for per-point fits")->check(CLI::PositiveNumber);
  verify->add_option("--convention", convention, "d eta normalization: half|full");
  verify->add_option("--seed", seed, "Seed of the random test vectors");
  add_output(verify, out);

  auto* fit = app.add_subcommand("fit", "Fit the space-form coefficients pointwise");
  fit->add_option("manifest", manifest, "Registry name or manifest path")->required();
  fit->add_option("--gauge", gauge, "none|three_d_reduced");
  fit->add_option("--points", points, "Comma-separated points");
  fit->add_option("--jobs", jobs, "Threads")->check(CLI::PositiveNumber);
  add_output(fit, out);

  auto* deform = app.add_subcommand("deform", "D_a-homothetic deformation");
  deform->add_option("manifest", manifest, "Registry name or manifest path");
  deform->add_option("--km", km, "kappa and mu as rationals")->expected(2);
  auto* a_opt = deform->add_option("--a", a_text, "Deformation constant a > 0");
  auto* auto_opt = deform->add_flag("--auto", automatic, "Use a = (kappa - 1)/(mu - 2)");
  a_opt->excludes(auto_opt);
  deform->add_option("--point", point_text, "Compare closed forms with the rebuilt curvature here");
  deform->add_flag("--rebuild-always", rebuild_always, "Rebuild the frame even when sqrt(a) is irrational");
  deform->add_option("--convention", convention, "d eta normalization: half|full");
  add_output(deform, out);

  auto* construct = app.add_subcommand("construct", "Build (kappa, mu) = (-f6, 1 - f6) from f6");
  construct->add_option("--f6", f6_text, "Rational f6 > -1")->required();
  add_output(construct, out);

  auto* list = app.add_subcommand("list", "List bundled manifests");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  try {
    if (list->parsed()) {
      for (const auto& n : registry_names()) {
        const auto m = load_manifest(n);
        std::cout << n << "  " << m.description << "\n";
      }
      return 0;
    }
    if (verify->parsed()) {
      const auto m = load_manifest(manifest);
      VerifyOptions o;
      o.suite = parse_suite(suite);
      if (!points.empty()) o.points = parse_points(points, m);
      o.jobs = jobs;
      o.convention = parse_convention(convention);
      o.seed = seed;
      return out.emit(cmd_verify(m, o));
    }
    if (fit->parsed()) {
      const auto m = load_manifest(manifest);
      FitOptions o;
      if (!gauge.empty()) o.gauge = parse_gauge(gauge);
      if (!points.empty()) o.points = parse_points(points, m);
      o.jobs = jobs;
      return out.emit(cmd_fit(m, o));
    }
    if (deform->parsed()) {
      DeformOptions o;
      if (!a_text.empty()) o.a = Rational::parse(a_text);
      o.automatic = automatic;
      if (!o.a && !automatic) throw InvalidArgument("give --a or --auto");
      o.rebuild = rebuild_always ? Rebuild::Always : Rebuild::WhenRational;
      o.convention = parse_convention(convention);
      if (!km.empty()) {
        if (!manifest.empty()) throw InvalidArgument("give a manifest or --km, not both");
        if (!point_text.empty()) throw InvalidArgument("--point needs a manifest");
        return out.emit(cmd_deform(Rational::parse(km[0]), Rational::parse(km[1]), o));
      }
      if (manifest.empty()) throw InvalidArgument("give a manifest or --km");
      const auto m = load_manifest(manifest);
      if (!point_text.empty()) o.point = parse_points(point_text, m).front();
      return out.emit(cmd_deform(m, o));
    }
    if (construct->parsed()) return out.emit(cmd_construct(Rational::parse(f6_text)));
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
