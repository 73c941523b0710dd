#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "runner.hpp"
#include "scenario.hpp"
#include "schema.hpp"
#include "subeq/errors.hpp"

using namespace subeq;
using namespace subeq::app;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json load(const fs::path& p) {
  std::ifstream is(p);
  return json::parse(is);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("subeq_test_app_" + name);
  fs::remove_all(p);
  return p;
}

RunOptions quiet(const fs::path& out) {
  RunOptions o;
  o.out = out;
  o.plots = false;
  return o;
}

Jet sample_jet(int m) {
  Jet j = Jet::zero(m);
  j.r = 0.3;
  j.p = Vector::Constant(m, 0.7);
  j.A = Matrix::Identity(m, m) * 0.4;
  j.A(0, m - 1) = j.A(m - 1, 0) = -0.2;
  return j;
}

}  // namespace

TEST_CASE("schema subset") {
  const json schema = json::parse(R"({
    "type": "object", "required": ["a"], "additionalProperties": false,
    "properties": {
      "a": {"enum": [1, 2]},
      "b": {"$ref": "#/$defs/list", "minItems": 2},
      "c": {"oneOf": [{"type": "number"}, {"type": "object", "required": ["k"]}]},
      "d": {"type": "integer", "minimum": 0, "exclusiveMinimum": 0}
    },
    "$defs": {"list": {"type": "array", "items": {"type": "number"}}}
  })");
  CHECK(validate(schema, json::parse(R"({"a": 1, "b": [1, 2], "c": 3, "d": 2})")).empty());
  CHECK(validate(schema, json::parse(R"({"a": 3})")).size() == 1);
  CHECK(validate(schema, json::parse(R"({})")).size() == 1);
  CHECK(validate(schema, json::parse(R"({"a": 1, "zz": 0})")).size() == 1);
  // the sibling of $ref still applies
  CHECK(!validate(schema, json::parse(R"({"a": 1, "b": [1]})")).empty());
  CHECK(!validate(schema, json::parse(R"({"a": 1, "b": [1, "x"]})")).empty());
  CHECK(!validate(schema, json::parse(R"({"a": 1, "c": {"j": 1}})")).empty());
  CHECK(!validate(schema, json::parse(R"({"a": 1, "d": 0})")).empty());
  CHECK(!validate(schema, json::parse(R"({"a": 1, "d": 1.5})")).empty());
  CHECK(validate(schema, json::parse(R"({"a": 1, "d": 3.0})")).empty());
}

TEST_CASE("shipped scenarios against the shipped schema") {
  int seen = 0;
  for (const auto& e : fs::directory_iterator(SCENARIO_DIR)) {
    if (e.path().extension() != ".json") continue;
    ++seen;
    const auto problems = validate(scenario_schema(), load(e.path()));
    INFO(e.path().filename().string());
    if (e.path().filename() == "malformed.json")
      CHECK(!problems.empty());
    else
      CHECK(problems.empty());
  }
  CHECK(seen >= 10);
}

TEST_CASE("profiles, fields and subequations from JSON") {
  CHECK(parse_profile(json(2.5))(7.0) == 2.5);
  CHECK(parse_profile(json::parse(R"({"linear": 3})"))(2.0) == 6.0);
  CHECK(parse_profile(json::parse(R"({"table": {"x": [0, 1], "y": [0, 2]}})"))(1.0) == doctest::Approx(2.0));

  const auto P = ModelManifold::punctured(3, 1, 2, 10);
  const Field inv = parse_field(json::parse(R"({"kind": "radial", "fn": "inverse", "a": -1, "b": 2})"), P);
  CHECK(inv(P->point(0)) == doctest::Approx(1.0));
  CHECK(inv(P->point(P->size() - 1)) == doctest::Approx(0.0));
  const Field tags = parse_field(json::parse(R"({"kind": "by_tag", "inner": 1, "outer": 5})"), P);
  CHECK(tags(P->point(0)) == 1.0);
  CHECK(tags(P->point(P->size() - 1)) == 5.0);
  CHECK(tags(P->point(3)) == 0.0);

  const auto B = ModelManifold::flat_box(2, {{0, 1}, {0, 1}}, 0.5);
  const Field q = parse_field(json::parse(R"({"kind": "quadratic", "c": 1, "grad": [2, 0], "diag": [0, -1], "center": [0, 0.5]})"), B);
  Point x = Point::origin(2);
  x.coords << 0.5, 1.0;
  CHECK(q(x) == doctest::Approx(1 + 1 - 0.25));

  const Jet j = sample_jet(3);
  const Point o = Point::origin(3);
  const Subequation L = parse_subequation(json::parse(R"({"kind": "laplace", "f": {"linear": 1}})"), 3, nullptr);
  const Subequation D = parse_subequation(
      json::parse(R"({"kind": "dual", "of": {"kind": "laplace", "f": {"linear": 1}}})"), 3, nullptr);
  CHECK(D.value(o, j) == doctest::Approx(L.dual().value(o, j)));
  const Subequation E = parse_subequation(json::parse(R"({"kind": "linear_jetequiv", "f": {"linear": 1}})"), 3, nullptr);
  CHECK(E.value(o, j) == doctest::Approx(L.value(o, j)));
  const Subequation I = parse_subequation(
      json::parse(R"({"kind": "intersect", "of": [{"kind": "laplace"}, {"kind": "eikonal", "xi": 2}]})"), 3, nullptr);
  CHECK(I.value(o, j) <= L.value(o, j) + 1.0);
  CHECK_THROWS_AS(parse_subequation(json::parse(R"({"kind": "hessian_branch"})"), 3, nullptr), InputError);
  CHECK_THROWS_AS(parse_subequation(json::parse(R"({"kind": "nope"})"), 3, nullptr), InputError);
}

TEST_CASE("run reports are reproducible and schema-valid") {
  const json doc = load(fs::path(SCENARIO_DIR) / "annulus_dirichlet.json");
  const fs::path a = scratch("a"), b = scratch("b");
  const Outcome first = run_scenario(doc, quiet(a));
  const Outcome second = run_scenario(doc, quiet(b));
  CHECK(first.exit_code == kPass);
  CHECK(first.report == second.report);
  CHECK(slurp(a / "u.csv") == slurp(b / "u.csv"));
  json ra = load(a / "report.json"), rb = load(b / "report.json");
  CHECK(validate(report_schema(), ra).empty());
  ra.erase("timestamp");
  rb.erase("timestamp");
  CHECK(ra == rb);
  CHECK(ra["results"]["max_error"].get<double>() <= 5e-3);
  CHECK(fs::exists(a / "timing.json"));
  CHECK(!ra.contains("wall_time_s"));
}

TEST_CASE("exit codes") {
  SUBCASE("input errors inside a task") {
    json doc = load(fs::path(SCENARIO_DIR) / "stochastic_hyperbolic.json");
    doc["manifold"] = json::parse(R"({"kind": "flat_box", "m": 2, "bounds": [[0, 1], [0, 1]], "h": 0.5})");
    CHECK(run_scenario(doc, quiet(scratch("flat"))).exit_code == kInputError);

    json ek = load(fs::path(SCENARIO_DIR) / "ekeland_hyperbolic.json");
    ek["manifold"] = json::parse(R"({"kind": "punctured", "m": 3, "r_min": 0.1, "r_max": 10, "intervals": 100})");
    ek["params"]["K_inner"] = 0.9;
    // h -> -inf at both ends of the annulus
    ek["comparison"] = json::parse(
        R"({"kind": "sum", "of": [{"kind": "radial", "fn": "identity", "b": -1}, {"kind": "radial", "fn": "inverse", "b": -1}]})");
    const Outcome o = run_scenario(ek, quiet(scratch("ekeland")));
    CHECK(o.exit_code == kInputError);
    CHECK(o.report["error"].get<std::string>().find("precondition") != std::string::npos);
  }
  SUBCASE("sweep budget") {
    json doc = load(fs::path(SCENARIO_DIR) / "square_convex.json");
    doc["params"] = json::parse(R"({"max_sweeps": 1})");
    doc["params"]["max_sweeps"] = 1;
    const Outcome o = run_scenario(doc, quiet(scratch("budget")));
    CHECK(o.exit_code == kNumericalFailure);
    CHECK(o.report["status"] == "numerical_failure");
  }
  SUBCASE("oracle mismatch") {
    json doc = load(fs::path(SCENARIO_DIR) / "annulus_dirichlet.json");
    doc["oracle"] = json::parse(R"({"kind": "radial", "fn": "inverse", "a": -1, "b": 2.1})");
    CHECK(run_scenario(doc, quiet(scratch("oracle"))).exit_code == kNumericalFailure);
  }
  SUBCASE("certified property failures carry a witness") {
    const fs::path out = scratch("cube");
    const Outcome o = run_scenario(load(fs::path(SCENARIO_DIR) / "stochastic_exp_cube.json"), quiet(out));
    CHECK(o.exit_code == kPropertyFails);
    CHECK(o.report["verdict"]["has_witness"] == true);
    CHECK(fs::exists(out / "witness.csv"));
  }
}

TEST_CASE("audit report") {
  AuditOptions opt;
  const json r = audit_report(opt);
  CHECK(r["pass"] == true);
  CHECK(r["suites"].size() == 6);
  for (const auto& s : r["suites"]) CHECK(!s.contains("wall_time_s"));
  opt.inject_dual_sign_bug = true;
  const json bad = audit_report(opt);
  CHECK(bad["pass"] == false);
  CHECK(bad["suites"][0]["suite"] == "duality_involution");
  CHECK(bad["suites"][0]["pass"] == false);
  CHECK(bad["suites"][1]["pass"] == true);
}
