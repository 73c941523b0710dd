#include "scenario.hpp"

#include <cmath>

#include "subeq/errors.hpp"
#include "subeq/spectral.hpp"

namespace subeq::app {

using nlohmann::json;

namespace {

std::vector<double> numbers(const json& j) { return j.get<std::vector<double>>(); }

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw InputError(where + " needs '" + key + "'");
  return j.at(key);
}

std::function<double(double)> radial_fn(const std::string& fn, double p) {
  if (fn == "identity") return [](double r) { return r; };
  if (fn == "square") return [](double r) { return r * r; };
  if (fn == "inverse") return [](double r) { return 1 / r; };
  if (fn == "log") return [](double r) { return std::log(r); };
  if (fn == "log1p") return [](double r) { return std::log1p(r); };
  if (fn == "cosh") return [](double r) { return std::cosh(r); };
  if (fn == "exp") return [](double r) { return std::exp(r); };
  if (fn == "power") return [p](double r) { return std::pow(r, p); };
  throw InputError("unknown radial function '" + fn + "'");
}

AProfile parse_aprofile(const json& j) {
  if (j.is_string()) {
    if (j == "laplacian") return AProfile::laplacian();
    if (j == "mean_curvature") return AProfile::mean_curvature();
    throw InputError("unknown quasilinear profile " + j.dump());
  }
  return AProfile::k_laplacian(j.at("k_laplacian").get<double>());
}

Matrix to_matrix(const json& rows, int m) {
  Matrix T(m, m);
  if (static_cast<int>(rows.size()) != m) throw InputError("T must be " + std::to_string(m) + " x " + std::to_string(m));
  for (int a = 0; a < m; ++a) {
    const auto row = numbers(rows[a]);
    if (static_cast<int>(row.size()) != m) throw InputError("T must be square");
    for (int b = 0; b < m; ++b) T(a, b) = row[b];
  }
  return T;
}

}  // namespace

double distance_of(const ModelManifold* M, const Point& x) {
  if (!M) return x.coords.norm();
  if (x.node) return M->radius(*x.node);
  return M->kind() == ManifoldKind::FlatBox ? x.coords.norm() : x.coords(0);
}

Warp parse_warp(const json& j) {
  if (j.is_string()) return Warp::by_name(j.get<std::string>());
  return Warp::table(numbers(j.at("table").at("r")), numbers(j.at("table").at("g")));
}

ManifoldPtr parse_manifold(const json& j) {
  const std::string kind = need(j, "kind", "manifold").get<std::string>();
  const int m = need(j, "m", "manifold").get<int>();
  if (kind == "flat_box") {
    std::vector<std::pair<double, double>> bounds;
    for (const auto& b : j.at("bounds")) bounds.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
    return ModelManifold::flat_box(m, bounds, j.at("h").get<double>());
  }
  const double r_min = j.at("r_min").get<double>(), r_max = j.at("r_max").get<double>();
  const auto n = j.at("intervals").get<std::size_t>();
  if (kind == "radial") return ModelManifold::radial(m, parse_warp(j.at("warp")), r_min, r_max, n);
  if (kind == "punctured") return ModelManifold::punctured(m, r_min, r_max, n, get_or(j, "log_spaced", true));
  throw InputError("unknown manifold kind '" + kind + "'");
}

Profile parse_profile(const json& j) {
  if (j.is_number()) return Profile::constant(j.get<double>());
  if (j.contains("linear")) return Profile::linear(j["linear"].get<double>());
  if (j.contains("constant")) return Profile::constant(j["constant"].get<double>());
  if (j.contains("table")) return Profile::tabulated(numbers(j["table"].at("x")), numbers(j["table"].at("y")));
  throw InputError("unrecognized profile " + j.dump());
}

Field parse_field(const json& j, const ManifoldPtr& M) {
  if (j.is_number()) {
    const double c = j.get<double>();
    return [c](const Point&) { return c; };
  }
  const std::string kind = need(j, "kind", "field").get<std::string>();
  if (kind == "constant") {
    const double c = j.at("value").get<double>();
    return [c](const Point&) { return c; };
  }
  if (kind == "quadratic") {
    const double c = get_or(j, "c", 0.0);
    const auto grad = get_or(j, "grad", std::vector<double>{});
    const auto diag = get_or(j, "diag", std::vector<double>{});
    const auto center = get_or(j, "center", std::vector<double>{});
    return [=](const Point& x) {
      double v = c;
      for (std::size_t a = 0; a < grad.size() && a < static_cast<std::size_t>(x.coords.size()); ++a)
        v += grad[a] * x.coords(a);
      for (std::size_t a = 0; a < diag.size() && a < static_cast<std::size_t>(x.coords.size()); ++a) {
        const double d = x.coords(a) - (a < center.size() ? center[a] : 0.0);
        v += diag[a] * d * d;
      }
      return v;
    };
  }
  if (kind == "radial") {
    const auto fn = radial_fn(j.at("fn").get<std::string>(), get_or(j, "p", 1.0));
    const double a = get_or(j, "a", 0.0), b = get_or(j, "b", 1.0);
    return [=](const Point& x) { return a + b * fn(distance_of(M.get(), x)); };
  }
  if (kind == "sum") {
    std::vector<Field> parts;
    for (const auto& c : need(j, "of", "sum field")) parts.push_back(parse_field(c, M));
    return [parts](const Point& x) {
      double v = 0;
      for (const Field& f : parts) v += f(x);
      return v;
    };
  }
  if (kind == "by_tag") {
    const double interior = get_or(j, "interior", 0.0);
    const double inner = get_or(j, "inner", interior), outer = get_or(j, "outer", interior);
    const double side = get_or(j, "side", interior);
    return [=](const Point& x) {
      if (!M || !x.node) return interior;
      switch (M->tag(*x.node)) {
        case BoundaryTag::Inner: return inner;
        case BoundaryTag::Outer: return outer;
        case BoundaryTag::Side: return side;
        default: return interior;
      }
    };
  }
  throw InputError("unknown field kind '" + kind + "'");
}

Subequation parse_subequation(const json& j, int m, const ManifoldPtr& M) {
  const std::string kind = need(j, "kind", "subequation").get<std::string>();
  const std::string where = "subequation '" + kind + "'";
  auto f = [&] { return j.contains("f") ? parse_profile(j["f"]) : Profile::constant(0.0); };
  auto children = [&] {
    std::vector<Subequation> out;
    const json& of = need(j, "of", where);
    if (of.is_array())
      for (const auto& c : of) out.push_back(parse_subequation(c, m, M));
    else
      out.push_back(parse_subequation(of, m, M));
    return out;
  };
  if (kind == "eikonal") return eikonal(m, j.contains("xi") ? parse_profile(j["xi"]) : Profile::constant(1.0));
  if (kind == "laplace") return laplace(m, f());
  if (kind == "hessian_branch") return hessian_branch(m, need(j, "k", where).get<int>(), f());
  if (kind == "sigma_branch")
    return sigma_branch(m, need(j, "j", where).get<int>(), need(j, "k", where).get<int>(), f());
  if (kind == "plurisub") return plurisub_trace(m, need(j, "k", where).get<int>(), f(), get_or(j, "upper", false));
  if (kind == "quasilinear") return quasilinear(m, parse_aprofile(need(j, "a", where)), f());
  if (kind == "inf_laplacian") return inf_laplacian(m, f());
  if (kind == "full_space") return full_space(m);
  if (kind == "empty_set") return empty_set(m);
  if (kind == "linear_jetequiv") {
    // {tr(T D^2u) + <W, Du> + B >= b f(u)} with constant coefficients
    const Matrix T = j.contains("T") ? to_matrix(j["T"], m) : Matrix(Matrix::Identity(m, m));
    Vector W = Vector::Zero(m);
    if (j.contains("W")) {
      const auto w = numbers(j["W"]);
      if (static_cast<int>(w.size()) != m) throw InputError("W must have " + std::to_string(m) + " entries");
      for (int a = 0; a < m; ++a) W(a) = w[a];
    }
    const double B = get_or(j, "B", 0.0), b = get_or(j, "b", 1.0);
    const JetEquivalence psi = JetEquivalence::linear_operator(
        m, [T](const Point&) { return T; }, [W](const Point&) { return W; }, [B](const Point&) { return B; },
        [b](const Point&) { return b; });
    return apply_jet_equivalence(psi, laplace(m, f()));
  }
  if (kind == "intersect" || kind == "union") {
    auto parts = children();
    Subequation out = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) out = kind == "union" ? unite(out, parts[i]) : intersect(out, parts[i]);
    return out;
  }
  if (kind == "dual") {
    auto parts = children();
    if (parts.size() != 1) throw InputError("dual takes one subequation");
    return parts.front().dual();
  }
  if (kind == "obstacle") {
    auto parts = children();
    if (parts.size() != 1) throw InputError("obstacle takes one subequation");
    return obstacle(parts.front(), PointField{"g", parse_field(need(j, "g", where), M)});
  }
  throw InputError("unknown subequation kind '" + kind + "'");
}

}  // namespace subeq::app
