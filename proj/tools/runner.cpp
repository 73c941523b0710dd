#include "runner.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "artifacts.hpp"
#include "scenario.hpp"
#include "schema.hpp"
#include "schemas.hpp"
#include "subeq/audit.hpp"
#include "subeq/errors.hpp"
#include "subeq/khasminskii.hpp"
#include "subeq/properties.hpp"
#include "subeq/solver.hpp"

namespace subeq::app {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename T>
T param(const json& doc, const char* key, T fallback) {
  if (!doc.contains("params") || !doc["params"].contains(key)) return fallback;
  return doc["params"][key].get<T>();
}

bool has_param(const json& doc, const char* key) { return doc.contains("params") && doc["params"].contains(key); }

json verdict_json(const Verdict& v) {
  json j = {{"property", v.property}, {"result", to_string(v.result)}, {"provenance", v.provenance},
            {"notes", v.notes}, {"trace", v.trace}, {"has_witness", v.witness.has_value()}};
  if (v.certificate) j["certificate"] = certificate_json(*v.certificate);
  return j;
}

int verdict_exit(Result r) {
  switch (r) {
    case Result::Holds: return kPass;
    case Result::Fails: return kPropertyFails;
    default: return kNumericalFailure;
  }
}

const char* status_of(int code) {
  switch (code) {
    case kPass: return "pass";
    case kPropertyFails: return "property_fails";
    case kNumericalFailure: return "numerical_failure";
    default: return "input_error";
  }
}

// K = {K_inner <= r <= K_radius}; a ball unless K_inner is given (annuli for punctured models)
std::vector<std::size_t> compact_set(const ModelManifold& M, const json& doc) {
  const double outer = param(doc, "K_radius", 1.0), inner = param(doc, "K_inner", -1.0);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < M.size(); ++i)
    if (M.radius(i) <= outer + 1e-12 && M.radius(i) >= inner - 1e-12) out.push_back(i);
  return out;
}

/// One task's working state: output directory, report fields, artifact list.
class Task {
public:
  Task(const json& doc, const RunOptions& opt, fs::path dir) : doc_(doc), opt_(opt), dir_(std::move(dir)) {}

  json results = json::object();
  std::optional<Certificate> cert;
  std::optional<Verdict> verdict;
  std::vector<std::string> artifacts;
  std::map<std::string, double> timing;
  std::string manifold_text, subequation_text;

  const json& doc() const { return doc_; }
  std::uint64_t seed() const { return opt_.seed.value_or(doc_.value("seed", std::uint64_t{0})); }
  double tol(double fallback) const { return opt_.tol.value_or(fallback); }

  ManifoldPtr manifold() {
    if (!doc_.contains("manifold")) throw InputError("task '" + doc_["task"].get<std::string>() + "' needs a manifold");
    auto M = parse_manifold(doc_["manifold"]);
    manifold_text = M->describe();
    return M;
  }
  Subequation subequation(const ManifoldPtr& M) {
    if (!doc_.contains("subequation"))
      throw InputError("task '" + doc_["task"].get<std::string>() + "' needs a subequation");
    Subequation F = parse_subequation(doc_["subequation"], M->dim(), M);
    subequation_text = F.describe();
    return F;
  }
  Field field(const char* key, const ManifoldPtr& M, const json& fallback) {
    return parse_field(doc_.contains(key) ? doc_[key] : fallback, M);
  }
  SolverParams solver() const {
    SolverParams p;
    p.membership_tol = tol(p.membership_tol);
    p.threads = opt_.threads;
    p.max_sweeps = param(doc_, "max_sweeps", p.max_sweeps);
    p.scheme.radius = param(doc_, "stencil_radius", p.scheme.radius);
    return p;
  }
  Exhaustion exhaustion(const ModelManifold& M, int fallback_levels) const {
    if (has_param(doc_, "radii")) return make_radial_exhaustion(M, doc_["params"]["radii"].get<std::vector<double>>());
    return make_exhaustion(M, param(doc_, "levels", fallback_levels));
  }

  /// Node table: coordinates, boundary tag, then the named columns.
  void grid_csv(const std::string& name, const ModelManifold& M,
                const std::vector<std::pair<std::string, std::vector<double>>>& columns) {
    std::vector<std::string> head = {"node"};
    std::vector<std::vector<double>> cols(1);
    const int coords = M.kind() == ManifoldKind::FlatBox ? M.dim() : 1;
    for (int a = 0; a < coords; ++a) head.push_back(coords == 1 && M.kind() != ManifoldKind::FlatBox ? "r" : "x" + std::to_string(a + 1));
    head.push_back("tag");
    cols.resize(head.size());
    for (std::size_t i = 0; i < M.size(); ++i) {
      const Point x = M.point(i);
      cols[0].push_back(static_cast<double>(i));
      for (int a = 0; a < coords; ++a) cols[1 + a].push_back(x.coords(a));
      cols[1 + coords].push_back(static_cast<double>(M.tag(i)));
    }
    for (const auto& [h, c] : columns) {
      head.push_back(h);
      cols.push_back(c);
    }
    write_csv(dir_ / name, head, cols);
    artifacts.push_back(name);
  }

  void csv(const std::string& name, const std::vector<std::string>& head, const std::vector<std::vector<double>>& cols) {
    write_csv(dir_ / name, head, cols);
    artifacts.push_back(name);
  }

  /// Line plot against the distance coordinate on radial kinds and segments, heatmap on planar boxes.
  void plot(const std::string& name, const std::string& title, const ModelManifold& M,
            const std::vector<std::pair<std::string, std::vector<double>>>& series) {
    if (!opt_.plots || series.empty()) return;
    if (M.kind() == ManifoldKind::FlatBox && M.dim() == 2) {
      const auto& shape = M.shape();
      const auto& b = M.bounds();
      svg_heatmap(dir_ / name, title + ": " + series.front().first, shape[0], shape[1], series.front().second,
                  b[0].first, b[0].second, b[1].first, b[1].second);
    } else if (M.kind() != ManifoldKind::FlatBox || M.dim() == 1) {
      std::vector<Series> s;
      for (const auto& [label, v] : series) {
        Series one{label, {}, {}};
        for (std::size_t i = 0; i < M.size(); ++i) {
          one.x.push_back(M.kind() == ManifoldKind::FlatBox ? M.point(i).coords(0) : M.radius(i));
          one.y.push_back(v[i]);
        }
        s.push_back(std::move(one));
      }
      svg_line_plot(dir_ / name, title, M.kind() == ManifoldKind::FlatBox ? "x" : "r", "value", s);
    } else {
      return;  // three-dimensional boxes: CSV only
    }
    artifacts.push_back(name);
  }

  void trace_plot(const std::string& name, const std::string& title, const std::string& xlabel,
                  const std::vector<double>& trace) {
    if (!opt_.plots || trace.empty()) return;
    Series s{title, {}, {}};
    for (std::size_t i = 0; i < trace.size(); ++i) {
      s.x.push_back(static_cast<double>(i + 1));
      s.y.push_back(trace[i] > 0 ? std::log10(trace[i]) : std::nan(""));
    }
    svg_line_plot(dir_ / name, title, xlabel, "log10", {s});
    artifacts.push_back(name);
  }

private:
  const json& doc_;
  const RunOptions& opt_;
  fs::path dir_;
};

std::vector<double> values(const GridFunction& u) { return u.values(); }

int solution_exit(const Certificate& c) { return c.pass() ? kPass : kNumericalFailure; }

// ---- tasks -------------------------------------------------------------------------------

int task_dirichlet(Task& t, bool with_obstacle) {
  const ManifoldPtr M = t.manifold();
  ProblemSpec spec{t.subequation(M), M};
  spec.boundary = t.field("boundary", M, 0.0);
  if (with_obstacle) {
    if (!t.doc().contains("obstacle")) throw InputError("obstacle task needs an obstacle field");
    spec.obstacle = GridFunction::from(M, t.field("obstacle", M, 0.0));
  }
  spec.params = t.solver();
  spec.label = with_obstacle ? "obstacle" : "dirichlet";
  const Solution s = with_obstacle ? solve_obstacle(spec) : perron_dirichlet(spec);
  t.timing[spec.label] = s.cert.wall_time;
  std::vector<std::pair<std::string, std::vector<double>>> cols = {
      {"u", values(s.u)}, {"residual", s.cert.residual}, {"dual_residual", s.cert.dual_residual}};
  int code = solution_exit(s.cert);
  if (with_obstacle) cols.emplace_back("obstacle", values(*spec.obstacle));
  if (t.doc().contains("oracle")) {
    const Field exact = t.field("oracle", M, 0.0);
    std::vector<double> err(M->size());
    double worst = 0;
    for (std::size_t i = 0; i < M->size(); ++i) {
      err[i] = s.u[i] - exact(M->point(i));
      worst = std::max(worst, std::abs(err[i]));
    }
    cols.emplace_back("error", err);
    t.results["max_error"] = worst;
    if (has_param(t.doc(), "oracle_tol")) {
      const double allowed = param(t.doc(), "oracle_tol", 0.0);
      t.results["oracle_tol"] = allowed;
      t.results["oracle_pass"] = worst <= allowed;
      if (worst > allowed && code == kPass) code = kNumericalFailure;
    }
  }
  t.results["sweeps"] = s.cert.metrics.count("sweeps") ? s.cert.metrics.at("sweeps") : 0.0;
  t.results["u_min"] = s.u.min();
  t.results["u_max"] = s.u.max();
  t.grid_csv("u.csv", *M, cols);
  t.csv("trace.csv", {"sweep", "max_change"}, {[&] {
                                                  std::vector<double> k;
                                                  for (std::size_t i = 0; i < s.cert.trace.size(); ++i) k.push_back(i + 1.0);
                                                  return k;
                                                }(),
                                                s.cert.trace});
  t.plot("u.svg", "solution", *M, {{"u", values(s.u)}});
  t.plot("residual.svg", "residuals", *M, {{"F residual", s.cert.residual}, {"dual residual", s.cert.dual_residual}});
  t.trace_plot("trace.svg", "max change per sweep", "sweep", s.cert.trace);
  t.cert = s.cert;
  return code;
}

int task_khasminskii(Task& t) {
  const ManifoldPtr M = t.manifold();
  const Subequation F = t.subequation(M);
  const auto K = compact_set(*M, t.doc());
  const GridFunction h = GridFunction::from(M, t.field("comparison", M, json{{"kind", "radial"}, {"fn", "log1p"}, {"b", -1}}));
  const PairKh pair = PairKh::make(K, h, t.exhaustion(*M, 30));
  Schedule sched;
  sched.epsilon = param(t.doc(), "epsilon", sched.epsilon);
  sched.stages = param(t.doc(), "stages", sched.stages);
  sched.psi_count = param(t.doc(), "psi_count", sched.psi_count);
  if (has_param(t.doc(), "gap_levels")) sched.gap_levels = t.doc()["params"]["gap_levels"].get<std::vector<int>>();
  sched.solver = t.solver();
  const Potential P = build_potential(F, pair, sched);
  t.timing["khasminskii"] = P.cert.wall_time;
  json records = json::array();
  std::vector<std::vector<double>> rc(8);
  for (const StageRecord& r : P.records) {
    records.push_back({{"stage", r.stage}, {"level", r.level}, {"gap", r.gap}, {"pinch_margin", r.pinch_margin},
                       {"escape", r.escape}, {"monotone", r.monotone}, {"psi_monotone", r.psi_monotone},
                       {"candidates", r.candidates}});
    const double row[] = {double(r.stage), double(r.level), r.gap, r.pinch_margin, r.escape, r.monotone, r.psi_monotone,
                          double(r.candidates)};
    for (int c = 0; c < 8; ++c) rc[c].push_back(row[c]);
  }
  t.results["stages"] = records;
  t.results["w_min"] = P.w.min();
  t.results["w_max"] = P.w.max();
  std::vector<std::pair<std::string, std::vector<double>>> cols = {{"w", values(P.w)}, {"h", values(h)}};
  for (std::size_t i = 0; i < P.stages.size(); ++i) cols.emplace_back("w" + std::to_string(i + 1), values(P.stages[i]));
  t.grid_csv("w.csv", *M, cols);
  t.csv("stages.csv", {"stage", "level", "gap", "pinch_margin", "escape", "monotone", "psi_monotone", "candidates"}, rc);
  t.plot("w.svg", "potential and comparison function", *M, cols);
  t.cert = P.cert;
  return solution_exit(P.cert);
}

int task_ahlfors(Task& t) {
  const ManifoldPtr M = t.manifold();
  const Subequation F = t.subequation(M);
  const auto K = compact_set(*M, t.doc());
  const Verdict v = ahlfors_search(F, K, t.exhaustion(*M, 6), M, t.seed(), param(t.doc(), "candidates", 12));
  if (v.witness) {
    t.grid_csv("witness.csv", *M, {{"u", values(*v.witness)}});
    t.plot("witness.svg", "maximum-principle violation", *M, {{"u", values(*v.witness)}});
  }
  t.verdict = v;
  if (v.certificate) t.cert = v.certificate;
  return verdict_exit(v.result);
}

int task_capacity(Task& t) {
  const ManifoldPtr M = t.manifold();
  const auto K = compact_set(*M, t.doc());
  const CapacityEstimate c = inf_capacity(K, t.exhaustion(*M, 20), M, t.solver());
  t.timing["capacity"] = c.cert.wall_time;
  const double zero_tol = param(t.doc(), "zero_tol", 1e-2);
  t.results["estimate"] = c.estimate;
  t.results["non_increasing"] = c.non_increasing;
  t.results["zero_tol"] = zero_tol;
  t.results["trace"] = c.trace;
  t.results["levels"] = c.levels;
  std::vector<double> lv(c.levels.begin(), c.levels.end());
  t.csv("capacity.csv", {"level", "lipschitz"}, {lv, c.trace});
  t.trace_plot("capacity.svg", "capacitor Lipschitz constants", "capacitor", c.trace);
  t.cert = c.cert;
  if (!c.cert.pass() || !c.non_increasing) return kNumericalFailure;
  Verdict v;
  v.property = "infinity-capacity of K vanishes";
  v.trace = c.trace;
  v.result = c.estimate <= zero_tol ? Result::Holds : Result::Fails;
  v.provenance = "infimum over capacitors of the exhaustion";
  if (v.result == Result::Fails) v.notes.push_back("every capacitor has Lipschitz constant above zero_tol");
  t.verdict = v;
  return verdict_exit(v.result);
}

int task_stochastic(Task& t) {
  Warp warp;
  int m = 0;
  if (t.doc().contains("manifold")) {
    const ManifoldPtr M = t.manifold();
    if (M->kind() != ManifoldKind::Radial) throw InputError("stochastic completeness needs a radial model");
    warp = M->warp();
    m = M->dim();
  }
  if (has_param(t.doc(), "warp")) warp = parse_warp(t.doc()["params"]["warp"]);
  m = param(t.doc(), "m", m);
  if (!warp.g || m < 2) throw InputError("stochastic task needs a warp and m >= 2 (params or a radial manifold)");
  StochasticOptions so;
  so.lambda = param(t.doc(), "lambda", so.lambda);
  so.ode.lambda = so.lambda;
  so.ode.r_max = param(t.doc(), "r_max", so.ode.r_max);
  so.witness_radius = param(t.doc(), "witness_radius", so.witness_radius);
  so.witness_intervals = param(t.doc(), "witness_intervals", so.witness_intervals);
  const Verdict v = stochastic_completeness(warp, m, so);
  if (v.witness) {
    const ManifoldPtr W = v.witness->manifold();
    t.grid_csv("witness.csv", *W, {{"u", values(*v.witness)}});
    t.plot("witness.svg", "bounded non-constant member", *W, {{"u", values(*v.witness)}});
  }
  t.results["warp"] = warp.name;
  t.results["m"] = m;
  t.verdict = v;
  if (v.certificate) t.cert = v.certificate;
  return verdict_exit(v.result);
}

int audit_exit(const Certificate& c) { return c.pass() ? kPass : kPropertyFails; }

int task_duality(Task& t) {
  const double tol = t.tol(1e-9);
  const auto jets = param(t.doc(), "jets", std::size_t{10000});
  Certificate c;
  if (t.doc().contains("subequation")) {
    const int m = param(t.doc(), "m", 2);
    Subequation F = parse_subequation(t.doc()["subequation"], m, nullptr);
    t.subequation_text = F.describe();
    c = duality_audit({F}, jets, t.seed(), tol);
  } else {
    std::vector<Subequation> family;
    for (int m : param(t.doc(), "dims", std::vector<int>{2, 3, 4}))
      for (Subequation& F : audit_catalog(m)) family.push_back(std::move(F));
    c = duality_audit(family, jets, t.seed(), tol);
  }
  t.timing["duality_audit"] = c.wall_time;
  t.cert = c;
  return audit_exit(c);
}

int task_garding(Task& t) {
  const Certificate c = garding_audit(param(t.doc(), "trials", std::size_t{1000}), t.seed(), t.tol(1e-9));
  t.timing["garding_audit"] = c.wall_time;
  t.cert = c;
  return audit_exit(c);
}

int task_ekeland(Task& t) {
  const ManifoldPtr M = t.manifold();
  const auto K = compact_set(*M, t.doc());
  const GridFunction h = GridFunction::from(M, t.field("comparison", M, json{{"kind", "radial"}, {"fn", "identity"}, {"b", -1}}));
  const PairKh pair = PairKh::make(K, h, t.exhaustion(*M, 20));
  const Solution s = ekeland_potential(pair);
  t.grid_csv("w.csv", *M, {{"w", values(s.u)}, {"h", values(h)}});
  t.plot("w.svg", "Lipschitz potential", *M, {{"w", values(s.u)}, {"h", values(h)}});
  t.cert = s.cert;
  return solution_exit(s.cert);
}

int task_log_transform(Task& t) {
  const ManifoldPtr M = t.manifold();
  const GridFunction g = GridFunction::from(M, t.field("comparison", M, json{{"kind", "radial"}, {"fn", "cosh"}}));
  const Solution s = log_transform(g, param(t.doc(), "lambda", 1.0), param(t.doc(), "mu", 0.5), t.tol(1e-6));
  t.grid_csv("w.csv", *M, {{"w", values(s.u)}, {"g", values(g)}});
  t.plot("w.svg", "log transform", *M, {{"w", values(s.u)}});
  t.cert = s.cert;
  return solution_exit(s.cert);
}

int task_punctured(Task& t) {
  const ManifoldPtr M = t.manifold();
  if (M->kind() != ManifoldKind::Punctured) throw InputError("punctured_check needs a punctured manifold");
  const double lambda = param(t.doc(), "lambda", 1.0);
  const Certificate c = punctured_example_check(M->dim(), lambda, *M, t.tol(1e-8));
  std::vector<double> w(M->size());
  for (std::size_t i = 0; i < M->size(); ++i) w[i] = punctured_potential(M->dim(), M->radius(i));
  t.grid_csv("w.csv", *M, {{"w", w}});
  t.plot("w.svg", "explicit potential", *M, {{"w", w}});
  t.cert = c;
  return audit_exit(c);
}

int dispatch(Task& t) {
  const std::string task = t.doc()["task"].get<std::string>();
  if (task == "dirichlet") return task_dirichlet(t, false);
  if (task == "obstacle") return task_dirichlet(t, true);
  if (task == "khasminskii") return task_khasminskii(t);
  if (task == "ahlfors") return task_ahlfors(t);
  if (task == "capacity") return task_capacity(t);
  if (task == "stochastic") return task_stochastic(t);
  if (task == "duality_audit") return task_duality(t);
  if (task == "garding_audit") return task_garding(t);
  if (task == "ekeland") return task_ekeland(t);
  if (task == "log_transform") return task_log_transform(t);
  if (task == "punctured_check") return task_punctured(t);
  throw InputError("unknown task '" + task + "'");
}

void write_json(const fs::path& file, const json& j) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  os << j.dump(2) << "\n";
}

// tr A >= r whose dual drops the outer sign: G(-J) in place of -G(-J)
struct SignDropped : Subequation::Node {
  struct Reflect : Subequation::Node {
    explicit Reflect(Subequation g) : G(std::move(g)) {}
    double eval(const Point& x, const Jet& j) const override {
      Jet n = j;
      n.r = -j.r, n.p = -j.p, n.A = -j.A;
      return -G.value(x, n);
    }
    Subequation dual_of(const Subequation& self) const override {
      return Subequation(self.dim(), self.meta(), std::make_shared<Reflect>(self));
    }
    std::string describe() const override { return "reflected " + G.describe(); }
    Subequation G;
  };
  struct Wrong : Subequation::Node {
    double eval(const Point&, const Jet& j) const override { return j.r - j.A.trace(); }
    Subequation dual_of(const Subequation& self) const override {
      return Subequation(self.dim(), self.meta(), std::make_shared<Reflect>(self));
    }
    std::string describe() const override { return "laplace dual with dropped sign"; }
  };
  double eval(const Point&, const Jet& j) const override { return j.A.trace() - j.r; }
  Subequation dual_of(const Subequation& self) const override {
    return Subequation(self.dim(), self.meta(), std::make_shared<Wrong>());
  }
  std::string describe() const override { return "laplace(r) [mutated dual]"; }
};

}  // namespace

const json& scenario_schema() {
  static const json s = json::parse(kScenarioSchema);
  return s;
}

const json& report_schema() {
  static const json s = json::parse(kReportSchema);
  return s;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json certificate_json(const Certificate& c) {
  return {{"name", c.name},
          {"pass", c.pass()},
          {"tolerance", c.tolerance},
          {"worst_violation", c.checks ? json(c.worst_violation) : json(nullptr)},
          {"checks", c.checks},
          {"violation_count", c.violation_count},
          {"violations", c.violations},
          {"hard_failure", c.hard_failure},
          {"notes", c.notes},
          {"metrics", c.metrics}};
}

Outcome run_scenario(const json& doc, const RunOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  json& rep = out.report;
  rep["schema"] = "subeq/report";
  rep["version"] = 1;
  rep["task"] = doc.is_object() && doc.contains("task") && doc["task"].is_string() ? doc["task"] : json(nullptr);
  rep["scenario"] = doc;

  const auto problems = validate(scenario_schema(), doc);
  fs::path dir = opt.out.value_or(doc.is_object() && doc.contains("output") && doc["output"].is_string()
                                      ? fs::path(doc["output"].get<std::string>())
                                      : fs::path("subeq_out"));
  rep["threads"] = opt.threads;
  std::optional<Task> task;
  std::string error;
  if (!problems.empty()) {
    out.exit_code = kInputError;
    std::ostringstream os;
    os << "scenario does not match the schema:";
    for (const auto& p : problems) os << "\n  " << p;
    error = os.str();
  } else {
    try {
      fs::create_directories(dir);
      task.emplace(doc, opt, dir);
      rep["seed"] = task->seed();
      out.exit_code = dispatch(*task);
    } catch (const InputError& e) {
      out.exit_code = kInputError, error = e.what();
    } catch (const DomainError& e) {
      out.exit_code = kInputError, error = e.what();
    } catch (const PreconditionError& e) {
      out.exit_code = kInputError, error = std::string("precondition: ") + e.what();
    } catch (const ScheduleError& e) {
      out.exit_code = kNumericalFailure, error = e.what();
      rep["results"]["best_gap"] = e.achieved();
    } catch (const NumericalError& e) {
      out.exit_code = kNumericalFailure, error = e.what();
    } catch (const json::exception& e) {
      out.exit_code = kInputError, error = e.what();
    } catch (const std::invalid_argument& e) {
      out.exit_code = kInputError, error = e.what();
    } catch (const std::exception& e) {
      out.exit_code = kNumericalFailure, error = e.what();
    }
  }
  if (task) {
    if (!task->manifold_text.empty()) rep["manifold"] = task->manifold_text;
    if (!task->subequation_text.empty()) rep["subequation"] = task->subequation_text;
    if (task->cert) rep["certificate"] = certificate_json(*task->cert);
    if (task->verdict) rep["verdict"] = verdict_json(*task->verdict);
    for (auto& [k, v] : task->results.items()) rep["results"][k] = v;
    rep["artifacts"] = task->artifacts;
  }
  if (!rep.contains("results")) rep["results"] = json::object();
  if (!rep.contains("artifacts")) rep["artifacts"] = json::array();
  rep["exit_code"] = out.exit_code;
  rep["status"] = status_of(out.exit_code);
  if (!error.empty()) rep["error"] = error;
  out.wall_time = seconds_since(t0);

  const auto report_problems = validate(report_schema(), rep);
  if (!report_problems.empty()) {
    // a report that breaks its own schema is a defect here, not in the scenario
    std::ostringstream os;
    os << "report does not match its schema:";
    for (const auto& p : report_problems) os << "\n  " << p;
    rep["error"] = (rep.contains("error") ? rep["error"].get<std::string>() + "\n" : std::string()) + os.str();
  }
  try {
    fs::create_directories(dir);
    json stamped = rep;
    stamped["timestamp"] = utc_timestamp();
    write_json(dir / "report.json", stamped);
    json timing = {{"wall_time_s", out.wall_time}};
    if (task)
      for (const auto& [k, v] : task->timing) timing["phases"][k] = v;
    write_json(dir / "timing.json", timing);
  } catch (const std::exception& e) {
    std::cerr << "subeq: " << e.what() << "\n";
  }
  if (rep.contains("error")) std::cerr << "subeq: " << rep["error"].get<std::string>() << "\n";
  return out;
}

Outcome run_file(const fs::path& file, const RunOptions& opt) {
  std::ifstream is(file);
  if (!is) {
    std::cerr << "subeq: cannot read " << file << "\n";
    return {kInputError, json::object(), 0};
  }
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& e) {
    std::cerr << "subeq: " << file.string() << ": " << e.what() << "\n";
    Outcome out{kInputError, json::object(), 0};
    if (opt.out) {
      out.report = {{"schema", "subeq/report"}, {"version", 1},       {"task", nullptr},
                    {"status", "input_error"},  {"exit_code", kInputError}, {"error", e.what()},
                    {"results", json::object()}, {"artifacts", json::array()}, {"threads", opt.threads}};
      fs::create_directories(*opt.out);
      json stamped = out.report;
      stamped["timestamp"] = utc_timestamp();
      write_json(*opt.out / "report.json", stamped);
    }
    return out;
  }
  return run_scenario(doc, opt);
}

json audit_report(const AuditOptions& opt, bool with_timing) {
  struct Suite {
    const char* name;
    std::function<Certificate()> run;
  };
  const double jet_tol = opt.tol.value_or(1e-9), grid_tol = opt.tol.value_or(1e-8);
  const std::vector<Suite> suites = {
      {"duality_involution",
       [&] {
         std::vector<Subequation> family;
         for (int m = 2; m <= 4; ++m)
           for (Subequation& F : audit_catalog(m)) family.push_back(std::move(F));
         if (opt.inject_dual_sign_bug)
           for (int m = 2; m <= 4; ++m) family.push_back(Subequation(m, {"mutant"}, std::make_shared<SignDropped>()));
         return duality_audit(family, 10000, opt.seed, jet_tol);
       }},
      {"garding_identity", [&] { return garding_audit(1000, opt.seed, jet_tol); }},
      {"axioms_PNT", [&] { return axiom_audit(2000, opt.seed, jet_tol); }},
      {"dirichlet_annulus", [&] { return dirichlet_annulus_oracle(1.0 / 200, grid_tol, opt.threads); }},
      {"obstacle_oracles", [&] { return obstacle_oracle(grid_tol, opt.threads); }},
      {"comparison_matrix", [&] { return comparison_matrix(grid_tol, opt.threads); }},
  };
  json rep = {{"schema", "subeq/audit"}, {"version", 1}, {"seed", opt.seed}, {"threads", opt.threads},
              {"tolerance", opt.tol ? json(*opt.tol) : json("per suite")}, {"suites", json::array()}};
  bool all = true;
  for (const Suite& s : suites) {
    json entry = {{"suite", s.name}};
    try {
      const Certificate c = s.run();
      entry["pass"] = c.pass();
      entry["certificate"] = certificate_json(c);
      if (with_timing) entry["wall_time_s"] = c.wall_time;
    } catch (const std::exception& e) {
      entry["pass"] = false;
      entry["error"] = e.what();
    }
    all = all && entry["pass"].get<bool>();
    rep["suites"].push_back(entry);
  }
  rep["pass"] = all;
  return rep;
}

int print_audit(const json& report, std::ostream& os) {
  os << std::left << std::setw(22) << "suite" << std::setw(7) << "result" << std::setw(9) << "checks" << std::setw(14)
     << "worst" << std::setw(10) << "seconds" << "detail\n";
  for (const auto& s : report["suites"]) {
    os << std::setw(22) << s["suite"].get<std::string>() << std::setw(7) << (s["pass"].get<bool>() ? "PASS" : "FAIL");
    std::string detail;
    if (s.contains("certificate")) {
      const json& c = s["certificate"];
      std::ostringstream worst;
      if (c["worst_violation"].is_null()) worst << "-";
      else worst << std::setprecision(3) << c["worst_violation"].get<double>();
      os << std::setw(9) << c["checks"].get<std::size_t>() << std::setw(14) << worst.str();
      if (!c["violations"].empty()) detail = c["violations"][0].get<std::string>();
      else if (!c["pass"].get<bool>()) detail = "worst above tolerance " + c["tolerance"].dump();
    } else {
      os << std::setw(9) << "-" << std::setw(14) << "-";
      detail = s.value("error", "");
    }
    std::ostringstream secs;
    if (s.contains("wall_time_s")) secs << std::fixed << std::setprecision(2) << s["wall_time_s"].get<double>();
    os << std::setw(10) << secs.str() << detail << "\n";
  }
  const bool pass = report["pass"].get<bool>();
  os << (pass ? "all suites pass" : "audit FAILED") << " (tolerance " << report["tolerance"].dump() << ")\n";
  return pass ? kPass : kAuditFailed;
}

}  // namespace subeq::app
