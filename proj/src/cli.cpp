#include "disconj/cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "disconj/catalog.hpp"
#include "disconj/criteria.hpp"
#include "disconj/errors.hpp"
#include "disconj/factorization.hpp"
#include "disconj/green.hpp"
#include "disconj/periodic.hpp"
#include "disconj/report.hpp"
#include "disconj/text.hpp"

namespace disconj {
namespace {

// bad flags or request contents; maps to exit 64
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// numbers may be written as constant expressions ("2*pi")
double parse_number(const std::string& s, const std::string& key, const ParamMap& params) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (s.find_first_not_of(" \t", pos) == std::string::npos) return v;
  } catch (const std::exception&) {
  }
  if (s == "inf" || s == "+inf") return kInf;
  if (s == "-inf") return -kInf;
  try {
    const auto c = CoeffExpr::parse(s).compile(params);
    if (c.is_constant()) return c(0.0);
  } catch (const Error&) {
  }
  throw UsageError("--" + key + ": not a number: '" + s + "'");
}

// The merged request: request-file values overlaid with explicit flags.
// Keys are flag names without the dashes.
class Request {
 public:
  explicit Request(Json j) : j_(std::move(j)) {
    if (j_.contains("params")) {
      if (!j_["params"].is_object()) throw UsageError("request: \"params\" must be an object");
      for (const auto& [k, v] : j_["params"].items()) params_[k] = number_from_json(v);
    }
    if (has("param")) {
      for (const auto& kv : list("param")) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--param expects name=value, got '" + kv + "'");
        const std::string name = kv.substr(0, eq);
        params_[name] = parse_number(kv.substr(eq + 1), "param", {});
      }
    }
  }

  [[nodiscard]] bool has(const std::string& k) const { return j_.contains(k) && !j_[k].is_null(); }
  [[nodiscard]] const ParamMap& params() const { return params_; }

  [[nodiscard]] std::string str(const std::string& k, const std::string& def = {}) const {
    if (!has(k)) return def;
    const auto& v = j_[k];
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return format_number(v.get<double>());
    throw UsageError("--" + k + ": expected text");
  }

  [[nodiscard]] double num(const std::string& k, double def) const { return has(k) ? need_num(k) : def; }

  [[nodiscard]] double need_num(const std::string& k) const {
    if (!has(k)) throw UsageError("--" + k + " is required");
    const auto& v = j_[k];
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_number(v.get<std::string>(), k, params_);
    throw UsageError("--" + k + ": expected a number");
  }

  [[nodiscard]] int integer(const std::string& k, int def) const {
    const double v = num(k, def);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw UsageError("--" + k + ": expected an integer");
    return static_cast<int>(v);
  }

  [[nodiscard]] bool flag(const std::string& k) const {
    if (!has(k)) return false;
    const auto& v = j_[k];
    if (v.is_boolean()) return v.get<bool>();
    throw UsageError("\"" + k + "\": expected true or false");
  }

  [[nodiscard]] std::vector<std::string> list(const std::string& k) const {
    std::vector<std::string> out;
    if (!has(k)) return out;
    const auto& v = j_[k];
    if (!v.is_array()) return {str(k)};
    for (const auto& e : v) {
      if (e.is_string()) out.push_back(e.get<std::string>());
      else if (e.is_number()) out.push_back(format_number(e.get<double>()));
      else throw UsageError("--" + k + ": expected a list of values");
    }
    return out;
  }

  [[nodiscard]] std::pair<double, double> pair(const std::string& k) const {
    const auto v = list(k);
    if (v.size() != 2) throw UsageError("--" + k + " expects two numbers");
    const double lo = parse_number(v[0], k, params_);
    const double hi = parse_number(v[1], k, params_);
    if (!(lo < hi)) throw UsageError("--" + k + ": need lo < hi");
    return {lo, hi};
  }

  [[nodiscard]] Interval interval(const std::string& k = "interval") const {
    if (!has(k)) throw UsageError("--" + k + " is required");
    return Interval::parse(str(k));
  }

 private:
  Json j_;
  ParamMap params_;
};

Equation make_equation(const Request& r) {
  if (!r.has("p") || !r.has("q")) throw UsageError("--p and --q are required");
  const Interval dom = r.has("domain") ? r.interval("domain") : Interval::real_line();
  return Equation::parse(r.str("p"), r.str("q"), dom, r.params());
}

ShootOptions shoot_options(const Request& r) {
  ShootOptions o;
  o.tol.rel = r.num("rtol", o.tol.rel);
  o.tol.abs = r.num("atol", o.tol.abs);
  o.window_half = r.num("window-half", o.window_half);
  o.window_length = r.num("window-length", o.window_length);
  o.margin_rel = r.num("margin-rel", o.margin_rel);
  o.endpoint_rel = r.num("endpoint-rel", o.endpoint_rel);
  if (!(o.tol.rel > 0 && o.tol.abs > 0)) throw UsageError("tolerances must be positive");
  return o;
}

CriteriaOptions criteria_options(const Request& r) {
  CriteriaOptions o;
  o.shoot = shoot_options(r);
  o.grid.points = r.integer("grid", o.grid.points);
  o.grid.slack_rel = r.num("slack-rel", o.grid.slack_rel);
  if (o.grid.points < 8) throw UsageError("--grid must be at least 8");
  return o;
}

Json equation_json(const Request& r, const Equation& eq) {
  Json params = Json::object();
  for (const auto& [k, v] : eq.params()) params[k] = json_number(v);
  return Json{{"p", r.str("p")}, {"q", r.str("q")}, {"params", params}, {"domain", to_json(eq.domain())}};
}

Json envelope(const std::string& command) { return Json{{"schema_version", kSchemaVersion}, {"command", command}}; }

void csv_metadata(std::ostream& os, const std::string& command, const Request& r, const Equation* eq) {
  os << "# disconj " << command << "\n# schema_version: " << kSchemaVersion << '\n';
  if (eq) {
    os << "# p: " << r.str("p") << "\n# q: " << r.str("q") << '\n';
    if (!eq->params().empty()) {
      os << "# params:";
      for (const auto& [k, v] : eq->params()) os << ' ' << k << '=' << format_number(v);
      os << '\n';
    }
    os << "# domain: " << eq->domain().to_string() << '\n';
  }
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c == '\n' ? ' ' : c;
  }
  return q + '"';
}

void strip_timing(Json& j) {
  if (j.is_object()) {
    j.erase("elapsed_ms");
    for (auto& [k, v] : j.items()) strip_timing(v);
  } else if (j.is_array()) {
    for (auto& v : j) strip_timing(v);
  }
}

// What a command produces: a JSON report, optionally a CSV rendering, and
// the exit code.
struct Outcome {
  Json report;
  std::function<void(std::ostream&)> csv;
  int code = exit_code::ok;
};

// --- commands ---

Outcome cmd_oracle(const Request& r) {
  const Equation eq = make_equation(r);
  const Interval iv = r.interval();
  const ShootOptions so = shoot_options(r);
  const Verdict v = is_disconjugate(eq, iv, so);
  Outcome o;
  o.report = envelope("oracle");
  o.report["equation"] = equation_json(r, eq);
  o.report["interval"] = to_json(iv);
  o.report["verdict"] = to_json(v);
  if (r.has("bruteforce")) {
    const int n = r.integer("bruteforce", 0);
    if (n < 2) throw UsageError("--bruteforce needs at least 2 angles");
    const auto b = crosscheck_bruteforce(eq, iv, n, so);
    o.report["bruteforce"] = Json{{"n_angles", b.n_angles},
                                  {"max_zero_count", b.max_zero_count},
                                  {"worst_angle", b.worst_angle},
                                  {"oracle_disconjugate", b.oracle_disconjugate},
                                  {"agrees", b.agrees}};
    // sampled angles can miss a narrow band of two-zero solutions, so only a
    // two-zero solution against a positive verdict is a contradiction
    const bool contradiction = b.oracle_disconjugate && b.max_zero_count >= 2;
    o.report["bruteforce"]["contradiction"] = contradiction;
    if (contradiction) o.code = exit_code::violation;
  }
  o.csv = [r, eq, v](std::ostream& os) {
    csv_metadata(os, "oracle", r, &eq);
    os << "# interval: " << r.str("interval") << '\n';
    os << "verdict,criterion,z1,z2,window_limited\n";
    os << to_string(v.kind) << ',' << v.criterion << ',';
    if (v.witness) os << format_number(v.witness->z1) << ',' << format_number(v.witness->z2);
    else os << ',';
    os << ',' << (v.window_limited ? "true" : "false") << '\n';
  };
  return o;
}

Outcome cmd_rho(const Request& r) {
  const Equation eq = make_equation(r);
  const double from = r.need_num("from");
  const double to = r.need_num("to");
  const double step = r.num("step", 0.05);
  const double window = r.num("window", 200.0);
  if (!(step > 0)) throw UsageError("--step must be positive");
  if (!(to >= from)) throw UsageError("--to must not be below --from");
  if (!(window > 0)) throw UsageError("--window must be positive");
  if ((to - from) / step > 1e6) throw UsageError("too many sweep points");
  const ShootOptions so = shoot_options(r);
  struct Row {
    double a;
    ExtendedPoint plus, minus;
  };
  std::vector<Row> rows;
  const double lo = eq.domain().lo(), hi = eq.domain().hi();
  for (long i = 0;; ++i) {
    const double a = from + static_cast<double>(i) * step;
    if (a > to + 1e-9 * step) break;
    rows.push_back({a, rho_plus(eq, a, std::min(a + window, hi), so), rho_minus(eq, a, std::max(a - window, lo), so)});
  }
  Outcome o;
  o.report = envelope("rho");
  o.report["equation"] = equation_json(r, eq);
  o.report["window"] = window;
  Json arr = Json::array();
  for (const auto& row : rows) {
    arr.push_back(Json{{"a", row.a}, {"rho_plus", to_json(row.plus)}, {"rho_minus", to_json(row.minus)}});
  }
  o.report["rows"] = arr;
  o.csv = [r, eq, rows, window](std::ostream& os) {
    csv_metadata(os, "rho", r, &eq);
    os << "# window: " << format_number(window) << " (inf / -inf: no conjugate point inside the window)\n";
    os << "a,rho_plus,rho_minus\n";
    for (const auto& row : rows) {
      os << format_number(row.a) << ',' << (row.plus.finite() ? format_number(row.plus.value) : "inf") << ','
         << (row.minus.finite() ? format_number(row.minus.value) : "-inf") << '\n';
    }
  };
  return o;
}

Outcome cmd_criteria(const Request& r) {
  const Equation eq = make_equation(r);
  Interval iv = Interval::real_line();
  if (r.has("window")) {
    const auto [lo, hi] = r.pair("window");
    iv = Interval::closed(lo, hi);
  } else {
    iv = r.interval();
  }
  RunOptions ro;
  ro.criteria = criteria_options(r);
  if (r.has("v")) ro.test_function = CoeffExpr::parse(r.str("v"));
  if (r.has("r")) ro.main.r = CoeffExpr::parse(r.str("r"));
  if (r.has("P")) ro.P = r.need_num("P");
  if (r.has("Q")) ro.Q = r.need_num("Q");
  ro.parallel = !r.flag("sequential");
  const CriteriaReport rep = run_all(eq, iv, ro);

  Outcome o;
  o.report = envelope("criteria");
  o.report["equation"] = equation_json(r, eq);
  o.report["interval"] = to_json(rep.interval);
  o.report["examined"] = to_json(rep.examined);
  o.report["results"] = rep.to_json();
  Json decided = Json::array();
  for (const auto& e : rep.entries) {
    if (e.verdict.kind != VerdictKind::Inconclusive) decided.push_back(e.name);
  }
  o.report["decided"] = decided;
  Json viol = Json::array();
  for (const auto& v : rep.violations) {
    viol.push_back(Json{{"criterion", v.criterion}, {"interval", to_json(v.interval)}, {"oracle", to_json(v.oracle)}});
  }
  o.report["violations"] = viol;
  o.report["sound"] = rep.sound();
  if (!rep.sound()) o.code = exit_code::violation;
  else if (decided.empty()) o.code = exit_code::inconclusive;
  const bool timing = !r.flag("no-timing");
  o.csv = [r, eq, rep, timing](std::ostream& os) {
    csv_metadata(os, "criteria", r, &eq);
    os << "# interval: " << rep.interval.to_string() << "\n# examined: " << rep.examined.to_string() << '\n';
    os << "criterion,verdict,claim" << (timing ? ",elapsed_ms" : "") << ",note\n";
    for (const auto& e : rep.entries) {
      os << e.name << ',' << to_string(e.verdict.kind) << ','
         << csv_cell(e.verdict.examined ? e.verdict.examined->to_string() : "");
      if (timing) os << ',' << format_number(e.elapsed_ms);
      os << ',' << csv_cell(e.verdict.note) << '\n';
    }
  };
  return o;
}

Outcome cmd_green(const Request& r) {
  const Equation eq = make_equation(r);
  double a = 0, b = 0;
  if (r.has("a") || r.has("b")) {
    a = r.need_num("a");
    b = r.need_num("b");
  } else {
    const Interval iv = r.interval();
    a = iv.lo();
    b = iv.hi();
  }
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) throw UsageError("green needs a finite a < b");
  GreenOptions go;
  go.tol.rel = r.num("green-rtol", go.tol.rel);
  go.tol.abs = r.num("green-atol", go.tol.abs);
  go.quad_abs = r.num("quad-abs", go.quad_abs);
  const int n = r.integer("n", 16);
  if (n < 2) throw UsageError("--n must be at least 2");
  auto g = std::make_shared<GreenFunction>(green_function(eq, a, b, go));
  const bool p_zero = eq.p_constant() && eq.p(0.5 * (a + b)) == 0.0;
  const GreenCheck c = verify_green(*g, n, p_zero);

  Outcome o;
  o.report = envelope("green");
  o.report["equation"] = equation_json(r, eq);
  o.report["a"] = a;
  o.report["b"] = b;
  Json cj{{"boundary", c.boundary},
          {"continuity", c.continuity},
          {"jump_error", c.jump_error},
          {"operator_residual", c.operator_residual},
          {"max_interior", c.max_interior}};
  if (p_zero) cj["identity_gap"] = c.identity_gap;
  o.report["check"] = cj;
  o.report["negative_inside"] = c.max_interior < 0;

  std::shared_ptr<BvpSolution> bvp;
  if (r.has("f")) {
    const CoeffExpr f = CoeffExpr::parse(r.str("f"));
    bvp = std::make_shared<BvpSolution>(solve_bvp(eq, f, a, b, go, r.integer("nodes", 256)));
    const auto fc = std::make_shared<CompiledExpr>(f.compile(eq.params()));
    const Trajectory ref = shoot_bvp(eq, [fc](double t) { return (*fc)(t); }, a, b, go.tol);
    double worst = 0.0, gap = 0.0, scale = 0.0;
    Json samples = Json::array();
    for (int i = 0; i <= n; ++i) {
      const double t = a + (b - a) * i / n;
      const double x = bvp->x(t);
      const double rr = (i == 0 || i == n) ? 0.0 : bvp->relative_residual(t);
      worst = std::max(worst, rr);
      gap = std::max(gap, std::abs(x - ref.x(t)));
      scale = std::max(scale, std::abs(x));
      samples.push_back(Json{{"t", t}, {"x", x}, {"dx", bvp->dx(t)}, {"relative_residual", rr}});
    }
    o.report["bvp"] = Json{{"f", r.str("f")},
                           {"max_relative_residual", worst},
                           {"shooting_gap", gap},
                           {"scale", scale},
                           {"samples", samples}};
  }
  o.csv = [r, eq, g, bvp, n, a, b](std::ostream& os) {
    csv_metadata(os, "green", r, &eq);
    if (!bvp) {
      g->write_csv(os, n);
      return;
    }
    os << "# f: " << r.str("f") << '\n';
    os << "t,x,dx,relative_residual\n";
    for (int i = 0; i <= n; ++i) {
      const double t = a + (b - a) * i / n;
      const double rr = (i == 0 || i == n) ? 0.0 : bvp->relative_residual(t);
      os << format_number(t) << ',' << format_number(bvp->x(t)) << ',' << format_number(bvp->dx(t)) << ','
         << format_number(rr) << '\n';
    }
  };
  return o;
}

Outcome cmd_factorize(const Request& r) {
  const Equation eq = make_equation(r);
  const Interval iv = r.interval();
  const ShootOptions so = shoot_options(r);
  const int n = r.integer("n", 512);
  if (n < 2) throw UsageError("--n must be at least 2");
  auto f = std::make_shared<Factorization>(build_factorization(eq, iv, so));
  const FactorizationCheck c = check_factorization(*f, n);

  Outcome o;
  o.report = envelope("factorize");
  o.report["equation"] = equation_json(r, eq);
  o.report["interval"] = to_json(f->interval());
  o.report["check"] = Json{{"product_error", c.product_error},
                           {"min_factor", c.min_factor},
                           {"wronskian_gap", c.wronskian_gap},
                           {"holds", c.holds()}};
  if (!c.holds()) o.code = exit_code::numerical;
  if (r.has("u")) {
    const CoeffExpr u = CoeffExpr::parse(r.str("u"));
    const FactoredResidual fr = verify_factorization(*f, u, n);
    o.report["verify"] = Json{{"u", r.str("u")},
                              {"max_abs", fr.max_abs},
                              {"max_rel", fr.max_rel},
                              {"scale", fr.scale},
                              {"ok", fr.max_abs <= 1e-6 * (1 + fr.scale)}};
    const RolleCount rc = generalized_rolle_check(eq, iv, u, r.integer("samples", 8192), so);
    o.report["rolle"] = Json{
        {"zeros_u", rc.zeros_u}, {"zeros_Lu", rc.zeros_Lu}, {"m", rc.m}, {"k", rc.k}, {"holds", rc.holds()}};
    if (!rc.holds()) o.code = exit_code::violation;
  }
  o.csv = [r, eq, f, n](std::ostream& os) {
    csv_metadata(os, "factorize", r, &eq);
    f->write_csv(os, n);
  };
  return o;
}

Outcome cmd_periodic(const Request& r) {
  const Equation eq = make_equation(r);
  const double T = r.need_num("period");
  PeriodicOptions po;
  po.a = r.num("a", po.a);
  po.has_below = r.num("has-below", po.has_below);
  po.none_above = r.num("none-above", po.none_above);
  po.criteria = criteria_options(r);
  if (!(po.has_below < po.none_above)) throw UsageError("--has-below must be below --none-above");
  Interval window = Interval::closed(-20, 20);
  if (r.has("window")) {
    const auto [lo, hi] = r.pair("window");
    window = Interval::closed(lo, hi);
  }
  const PeriodicVerdict v = check_theorem_periodic(eq, T, window, po);
  Outcome o;
  o.report = envelope("periodic");
  o.report["equation"] = equation_json(r, eq);
  o.report["period"] = T;
  o.report["a"] = po.a;
  o.report["window"] = to_json(window);
  const Json vj = to_json(v);
  for (const auto& [k, val] : vj.items()) o.report[k] = val;
  // the theorem and the monodromy disagreeing is a soundness problem
  if (v.cross_validated && !*v.cross_validated) o.code = exit_code::violation;
  return o;
}

Json equation_text(const Equation& e) {
  return Json{{"p", e.p_bound().to_string()}, {"q", e.q_bound().to_string()}, {"domain", to_json(e.domain())}};
}

Outcome cmd_transform(const Request& r) {
  const Equation eq = make_equation(r);
  const double a = r.need_num("a");
  const HalfLineSubstitution s = substitute_half_line(eq, a);
  Outcome o;
  o.report = envelope("transform");
  o.report["equation"] = equation_json(r, eq);
  o.report["a"] = a;
  o.report["composed"] = equation_text(s.composed);
  o.report["chain_rule"] = equation_text(s.chain_rule);
  o.report["note"] =
      "composed: coefficients evaluated at a + t^2 as written; chain_rule: the equation satisfied by "
      "y(tau) = x(a + tau^2)";
  if (r.has("compare")) {
    const double length = r.need_num("compare");
    if (!(length > 0)) throw UsageError("--compare must be positive");
    const auto c = compare_half_line(eq, a, length, shoot_options(r));
    o.report["comparison"] = Json{{"length", length},
                                  {"original", to_json(c.original)},
                                  {"composed", to_json(c.composed)},
                                  {"chain_rule", to_json(c.chain_rule)},
                                  {"composed_agrees", c.composed_agrees},
                                  {"chain_rule_agrees", c.chain_rule_agrees}};
  }
  return o;
}

Outcome cmd_catalog(const Request& r) {
  const auto entries = catalog_list(r.params());
  const bool timing = !r.flag("no-timing");
  Outcome o;
  o.report = envelope("catalog");
  if (!r.has("run")) {
    Json arr = Json::array();
    for (const auto& e : entries) arr.push_back(to_json(e));
    o.report["entries"] = arr;
    o.csv = [entries](std::ostream& os) {
      os << "# disconj catalog\n# schema_version: " << kSchemaVersion << '\n';
      os << "id,disconjugate_on,facts,description\n";
      for (const auto& e : entries) {
        os << e.id << ',' << csv_cell(e.disconjugate_on.to_string()) << ',' << e.facts.size() << ','
           << csv_cell(e.description) << '\n';
      }
    };
    return o;
  }
  std::vector<std::string> ids = r.list("run");
  if (ids.size() == 1 && ids[0] == "all") ids.clear();
  for (const auto& id : ids) {
    const bool known = std::any_of(entries.begin(), entries.end(), [&](const auto& e) { return e.id == id; });
    if (!known) throw UsageError("unknown catalog entry '" + id + "'");
  }
  const auto runs = run_catalog(entries, ids, !r.flag("sequential"));
  Json arr = Json::array();
  int failed = 0;
  for (const auto& run : runs) {
    arr.push_back(to_json(run, timing));
    if (!run.result.pass) ++failed;
  }
  o.report["runs"] = arr;
  o.report["passed"] = static_cast<int>(runs.size()) - failed;
  o.report["failed"] = failed;
  if (failed > 0) o.code = exit_code::violation;
  o.csv = [runs, timing](std::ostream& os) {
    os << "# disconj catalog\n# schema_version: " << kSchemaVersion << '\n';
    os << "entry,fact,pass" << (timing ? ",elapsed_ms" : "") << ",detail\n";
    for (const auto& run : runs) {
      os << run.entry << ',' << run.fact << ',' << (run.result.pass ? "true" : "false");
      if (timing) os << ',' << format_number(run.elapsed_ms);
      os << ',' << csv_cell(run.result.detail) << '\n';
    }
  };
  return o;
}

const std::map<std::string, std::function<Outcome(const Request&)>>& commands() {
  static const std::map<std::string, std::function<Outcome(const Request&)>> table{
      {"oracle", cmd_oracle},     {"rho", cmd_rho},           {"criteria", cmd_criteria},
      {"green", cmd_green},       {"factorize", cmd_factorize}, {"periodic", cmd_periodic},
      {"transform", cmd_transform}, {"catalog", cmd_catalog}};
  return table;
}

std::string default_format(const std::string& command) { return command == "rho" ? "csv" : "json"; }

// --- flag registration ---

class Flags {
 public:
  void text(CLI::App* app, const std::string& name, const std::string& help) {
    auto* opt = app->add_option("--" + name, texts_[name], help);
    regs_.push_back({name, opt, Kind::Text});
  }
  void many(CLI::App* app, const std::string& name, const std::string& help, int expected = -1) {
    auto* opt = app->add_option("--" + name, lists_[name], help);
    if (expected > 0) opt->expected(expected);
    regs_.push_back({name, opt, Kind::List});
  }
  void toggle(CLI::App* app, const std::string& name, const std::string& help) {
    auto* opt = app->add_flag("--" + name, toggles_[name], help);
    regs_.push_back({name, opt, Kind::Toggle});
  }

  // explicit flags over `base`
  void overlay(Json& base) const {
    for (const auto& reg : regs_) {
      if (reg.opt->count() == 0) continue;
      switch (reg.kind) {
        case Kind::Text: base[reg.name] = texts_.at(reg.name); break;
        case Kind::List: {
          if (reg.name == "param" && base.contains("param") && base["param"].is_array()) {
            for (const auto& s : lists_.at(reg.name)) base["param"].push_back(s);
          } else {
            base[reg.name] = lists_.at(reg.name);
          }
          break;
        }
        case Kind::Toggle: base[reg.name] = toggles_.at(reg.name); break;
      }
    }
  }

 private:
  enum class Kind { Text, List, Toggle };
  struct Reg {
    std::string name;
    CLI::Option* opt;
    Kind kind;
  };
  std::map<std::string, std::string> texts_;
  std::map<std::string, std::vector<std::string>> lists_;
  std::map<std::string, bool> toggles_;
  std::vector<Reg> regs_;
};

// Each subcommand keeps its own storage; only one of them is parsed.
struct Parser {
  CLI::App app{"Disconjugacy analysis of x'' + p(t) x' + q(t) x = 0", "disconj"};
  Flags common;
  std::map<std::string, std::pair<CLI::App*, std::unique_ptr<Flags>>> subs;

  Parser() {
    app.require_subcommand(0, 1);
    common.text(&app, "p", "coefficient p(t)");
    common.text(&app, "q", "coefficient q(t)");
    common.many(&app, "param", "parameter binding name=value (repeatable)");
    common.text(&app, "domain", "domain of the coefficients, e.g. \"(0,inf)\" (default: the real line)");
    common.text(&app, "request", "JSON request file; explicit flags override its values");
    common.text(&app, "output", "output file (default: standard output)");
    common.text(&app, "format", "json or csv");
    common.text(&app, "rtol", "integrator relative tolerance (1e-10)");
    common.text(&app, "atol", "integrator absolute tolerance (1e-12)");
    common.text(&app, "window-half", "truncation [-w, w] of the real line (50)");
    common.text(&app, "window-length", "truncation length of half-lines (100)");
    common.text(&app, "margin-rel", "distance kept from singular endpoints, relative (1e-6)");
    common.text(&app, "endpoint-rel", "zeros this close to a closed end count as on it, relative (1e-9)");
    common.text(&app, "grid", "grid points of the pointwise checks (2048)");
    common.text(&app, "slack-rel", "slack of non-strict grid inequalities, relative (1e-9)");
    common.toggle(&app, "no-timing", "omit elapsed times so reports are byte-reproducible");
    common.toggle(&app, "sequential", "do not run independent checks concurrently");

    auto* s = sub("oracle", "decide disconjugacy by shooting");
    flags("oracle").text(s, "interval", "interval, e.g. \"[0,3]\"");
    flags("oracle").text(s, "bruteforce", "cross-check with N initial angles");

    s = sub("rho", "sweep the conjugate points rho+ and rho-");
    flags("rho").text(s, "from", "first base point");
    flags("rho").text(s, "to", "last base point");
    flags("rho").text(s, "step", "spacing (0.05)");
    flags("rho").text(s, "window", "search distance on each side (200)");

    s = sub("criteria", "evaluate every sufficient criterion");
    flags("criteria").text(s, "interval", "interval");
    flags("criteria").many(s, "window", "finite window lo hi instead of --interval", 2);
    flags("criteria").text(s, "v", "Vallee-Poussin test function");
    flags("criteria").text(s, "r", "auxiliary function for condition 6");
    flags("criteria").text(s, "P", "auxiliary constant P (XA1, XA2)");
    flags("criteria").text(s, "Q", "auxiliary constant Q (XA1)");

    s = sub("green", "Green's function of the Dirichlet problem");
    flags("green").text(s, "a", "left end");
    flags("green").text(s, "b", "right end");
    flags("green").text(s, "interval", "alternative to --a/--b");
    flags("green").text(s, "n", "mesh size (16)");
    flags("green").text(s, "f", "right-hand side: solve Lx = f, x(a) = x(b) = 0");
    flags("green").text(s, "nodes", "interpolation nodes of the solution (256)");
    flags("green").text(s, "green-rtol", "relative tolerance of the fundamental solutions (1e-12)");
    flags("green").text(s, "green-atol", "absolute tolerance of the fundamental solutions (1e-14)");
    flags("green").text(s, "quad-abs", "absolute quadrature tolerance (1e-10)");

    s = sub("factorize", "factorization Lx = h2 (h1 (h0 x)')'");
    flags("factorize").text(s, "interval", "interval of disconjugacy");
    flags("factorize").text(s, "n", "grid size (512)");
    flags("factorize").text(s, "u", "test function: factored residual and zero counts");
    flags("factorize").text(s, "samples", "sampling cells for zero counting (8192)");

    s = sub("periodic", "monodromy and the test for T-periodic solutions");
    flags("periodic").text(s, "period", "period T");
    flags("periodic").text(s, "a", "base point (0)");
    flags("periodic").many(s, "window", "window lo hi for the hypotheses ([-20, 20])", 2);
    flags("periodic").text(s, "has-below", "distance below which a periodic solution is reported (1e-8)");
    flags("periodic").text(s, "none-above", "distance above which none is reported (1e-6)");

    s = sub("transform", "half-line substitution t -> a + t^2");
    flags("transform").text(s, "a", "left end of the half-line");
    flags("transform").text(s, "compare", "also compare verdicts over this length");

    s = sub("catalog", "reference equations and their known facts");
    flags("catalog").toggle(s, "list", "list the entries (default)");
    flags("catalog").many(s, "run", "run the facts of these entries, or all");
  }

  CLI::App* sub(const std::string& name, const std::string& help) {
    auto* s = app.add_subcommand(name, help);
    s->fallthrough();
    subs[name] = {s, std::make_unique<Flags>()};
    return s;
  }
  Flags& flags(const std::string& name) { return *subs.at(name).second; }
};

Json load_request_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read request file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("request file '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw UsageError("request file must hold a JSON object");
  return j;
}

void emit(const Outcome& o, const Request& r, const std::string& command, std::ostream& out) {
  const std::string format = r.str("format", default_format(command));
  if (format != "json" && format != "csv") throw UsageError("--format must be json or csv");
  if (format == "csv" && !o.csv) throw UsageError(command + " has no CSV form");
  std::ofstream file;
  std::ostream* os = &out;
  const std::string path = r.str("output");
  if (!path.empty() && path != "-") {
    file.open(path);
    if (!file) throw UsageError("cannot write '" + path + "'");
    os = &file;
  }
  if (format == "csv") {
    o.csv(*os);
  } else {
    Json rep = o.report;
    if (r.flag("no-timing")) strip_timing(rep);
    *os << rep.dump(2) << '\n';
  }
  os->flush();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Parser parser;
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    parser.app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << parser.app.help();
    return exit_code::ok;
  } catch (const CLI::ParseError& e) {
    err << "disconj: " << e.what() << '\n';
    return exit_code::usage;
  }
  try {
    // file first, then the flags given explicitly
    Json merged = Json::object();
    std::string file;
    {
      Json probe = Json::object();
      parser.common.overlay(probe);
      if (probe.contains("request")) file = probe["request"].get<std::string>();
    }
    if (!file.empty()) merged = load_request_file(file);
    parser.common.overlay(merged);
    std::string command;
    for (const auto& [name, entry] : parser.subs) {
      if (entry.first->parsed()) {
        command = name;
        entry.second->overlay(merged);
      }
    }
    if (command.empty()) {
      if (!merged.contains("command") || !merged["command"].is_string()) {
        err << "disconj: no command given\n" << parser.app.help();
        return exit_code::usage;
      }
      command = merged["command"].get<std::string>();
    }
    merged["command"] = command;
    const auto it = commands().find(command);
    if (it == commands().end()) throw UsageError("unknown command '" + command + "'");
    const Request req(merged);
    const Outcome o = it->second(req);
    emit(o, req, command, out);
    return o.code;
  } catch (const UsageError& e) {
    err << "disconj: " << e.what() << '\n';
    return exit_code::usage;
  } catch (const ParseError& e) {
    err << "disconj: parse error: " << e.what() << '\n';
    return exit_code::usage;
  } catch (const Error& e) {
    err << "disconj: " << e.what() << '\n';
    return exit_code::numerical;
  }
}

}  // namespace disconj
