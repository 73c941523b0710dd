#include <doctest.h>

#include <cmath>

#include "subeq/errors.hpp"
#include "subeq/properties.hpp"

using namespace subeq;

namespace {

std::vector<std::size_t> where(const ModelManifold& M, const std::function<bool(double)>& keep) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < M.size(); ++i)
    if (keep(M.radius(i))) out.push_back(i);
  return out;
}

std::vector<std::size_t> all_nodes(const ModelManifold& M) {
  return where(M, [](double) { return true; });
}

}  // namespace

TEST_CASE("Ahlfors check on a segment") {
  const auto M = ModelManifold::flat_box(1, {{0, 1}}, 0.01);
  const Subequation dual_r = laplace(1, Profile::linear(1)).dual();
  const GridFunction kink = GridFunction::from(M, [](const Point& x) { return std::max(x.coords(0) - 0.5, 0.0); });

  SUBCASE("affine ramp is not a member of tr A >= r where positive") {
    const Verdict v = ahlfors_violation_check(dual_r, all_nodes(*M), kink);
    CHECK(v.result == Result::Inconclusive);
    REQUIRE(!v.notes.empty());
    CHECK(v.notes.front().find("membership") != std::string::npos);
  }
  SUBCASE("the same ramp under the zero profile certifies with equality") {
    const Verdict v = ahlfors_violation_check(laplace(1, Profile::constant(0)).dual(), all_nodes(*M), kink);
    CHECK(v.result == Result::Holds);
    CHECK(v.trace[0] == doctest::Approx(0.5));
    CHECK(v.trace[1] == doctest::Approx(0.5));
  }
  SUBCASE("constants") {
    const GridFunction one = GridFunction::constant(M, 1.0);
    CHECK(ahlfors_violation_check(laplace(1, Profile::constant(0)).dual(), all_nodes(*M), one).result == Result::Holds);
    CHECK(ahlfors_violation_check(dual_r, all_nodes(*M), one).result != Result::Fails);
  }
  SUBCASE("interior bump reports membership, not a violation") {
    const GridFunction bump =
        GridFunction::from(M, [](const Point& x) { return std::exp(-50 * std::pow(x.coords(0) - 0.5, 2)); });
    const Verdict v = ahlfors_violation_check(dual_r, all_nodes(*M), bump);
    CHECK(v.result == Result::Inconclusive);
    CHECK(v.notes.front().find("membership") != std::string::npos);
  }
  SUBCASE("a convex member peaking inside a region whose boundary is low") {
    // u = cosh(x - 1/2) - 1 + 0.01 satisfies u'' >= u; sub-region excluding the ends of its sup
    const GridFunction u = GridFunction::from(M, [](const Point& x) { return std::cosh(x.coords(0) - 0.5) - 0.99; });
    const Verdict v = ahlfors_violation_check(dual_r, all_nodes(*M), u);
    CHECK(v.result == Result::Holds);
  }
  SUBCASE("NaN is an input error") {
    GridFunction bad = kink;
    bad[3] = std::nan("");
    CHECK_THROWS_AS(ahlfors_violation_check(dual_r, all_nodes(*M), bad), InputError);
  }
}

TEST_CASE("Liouville witnesses") {
  const Subequation dual_r = laplace(2, Profile::linear(1)).dual();
  SUBCASE("constants are never witnesses") {
    const auto M = ModelManifold::radial(2, Warp::hyperbolic(), 0, 5, 100);
    const Verdict v = liouville_check(laplace(2, Profile::constant(0)).dual(), GridFunction::constant(M, 2.0));
    CHECK(v.result == Result::Holds);
    CHECK(!v.witness);
  }
  SUBCASE("bounded Perron solutions on the hyperbolic plane are constant") {
    const auto M = ModelManifold::radial(2, Warp::hyperbolic(), 0, 6, 120);
    ProblemSpec spec{laplace(2, Profile::linear(1)), M};
    spec.boundary = [](const Point&) { return 0.0; };
    const Solution s = perron_dirichlet(spec);
    CHECK(s.u.max() - s.u.min() <= 1e-8);
  }
  SUBCASE("fast-growing warp carries a bounded nonconstant member") {
    const auto M = ModelManifold::radial(2, Warp::exp_cube(), 0, 4, 1000);
    const GridFunction w = bounded_radial_solution(M);
    CHECK(w.max() == doctest::Approx(1.0));
    CHECK(w.min() > 0.3);
    for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i] >= w[i - 1]);
    const Verdict v = liouville_check(dual_r, w);
    CHECK(v.result == Result::Fails);
    REQUIRE(v.witness);
    // the same witness violates the maximum principle outside a ball once the far end is at infinity
    AhlforsOptions opt;
    opt.outer_is_infinity = true;
    const Verdict a = ahlfors_violation_check(dual_r, where(*M, [](double r) { return r >= 1; }), w, opt);
    CHECK(a.result == Result::Fails);
  }
}

TEST_CASE("infinity capacity dichotomy") {
  SUBCASE("complete hyperbolic model") {
    const auto M = ModelManifold::radial(2, Warp::hyperbolic(), 0, 200, 400);
    const auto K = where(*M, [](double r) { return r <= 1 + 1e-12; });
    const CapacityEstimate c = inf_capacity(K, make_exhaustion(*M, 100), M);
    CHECK(c.estimate <= 1e-2);
    CHECK(c.non_increasing);
    CHECK(c.cert.pass());
    CHECK(c.estimate == doctest::Approx(1.0 / 199).epsilon(1e-6));
  }
  SUBCASE("truncated flat ball") {
    const auto M = ModelManifold::radial(2, Warp::euclidean(), 0, 3, 300);
    const auto K = where(*M, [](double r) { return r <= 1 + 1e-12; });
    std::vector<double> radii;
    for (int q = 11; q <= 30; ++q) radii.push_back(q / 10.0);
    const CapacityEstimate c = inf_capacity(K, make_radial_exhaustion(*M, radii), M);
    CHECK(c.estimate >= 0.49);
    CHECK(c.estimate == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(c.non_increasing);
  }
  SUBCASE("K covering the grid") {
    const auto M = ModelManifold::radial(2, Warp::euclidean(), 0, 3, 30);
    CHECK(inf_capacity(all_nodes(*M), make_exhaustion(*M, 3), M).estimate == 0.0);
  }
}

TEST_CASE("truncation and profile transport") {
  const auto M = ModelManifold::flat_box(1, {{-1, 1}}, 0.01);
  const GridFunction u = GridFunction::from(M, [](const Point& x) { return std::cosh(2 * x.coords(0)); });
  CHECK(truncate_shift(u, u.max()).max() == 0.0);
  const GridFunction pos = GridFunction::from(M, [](const Point& x) { return x.coords(0) * x.coords(0); });
  const GridFunction same = truncate_shift(pos, 0.0);
  for (std::size_t i = 0; i < pos.size(); ++i) CHECK(same[i] == pos[i]);

  // u'' = 4u >= u: a member of dual(laplace r); after the shift it is a member of dual(laplace 3r)
  const Profile g = Profile::linear(1), gbar = Profile::linear(3);
  const auto c = transport_shift(g, gbar, u.max());
  REQUIRE(c);
  CHECK(*c >= 0.75 * u.max() - 1e-2);
  const GridFunction t = truncate_shift(u, *c);
  std::vector<std::size_t> positive;
  for (std::size_t i = 1; i + 1 < t.size(); ++i)
    if (t[i] > 1e-8) positive.push_back(i);
  CHECK(verify_subharmonic(laplace(1, Profile::linear(1)).dual(), u, positive).pass());
  CHECK(verify_subharmonic(laplace(1, Profile::linear(3)).dual(), t, positive).pass());
  CHECK(!transport_shift(Profile::constant(-1), Profile::constant(0), 1.0));
}

TEST_CASE("f-independence of violations") {
  const auto M = ModelManifold::radial(2, Warp::exp_cube(), 0, 4, 1000);
  const GridFunction w = bounded_radial_solution(M);
  const auto U = where(*M, [](double r) { return r >= 1; });
  AhlforsOptions opt;
  opt.outer_is_infinity = true;
  REQUIRE(ahlfors_violation_check(laplace(2, Profile::linear(1)).dual(), U, w, opt).result == Result::Fails);
  const auto c = transport_shift(Profile::linear(1), Profile::linear(2), w.max());
  REQUIRE(c);
  const Verdict v = ahlfors_violation_check(laplace(2, Profile::linear(2)).dual(), U, truncate_shift(w, *c), opt);
  CHECK(v.result == Result::Fails);
}

TEST_CASE("stochastic completeness triple") {
  const Verdict flat = stochastic_completeness(Warp::euclidean(), 3);
  CHECK(flat.result == Result::Holds);
  CHECK(flat.certificate);
  const Verdict hyp = stochastic_completeness(Warp::hyperbolic(), 2);
  CHECK(hyp.result == Result::Holds);
  const Verdict cube = stochastic_completeness(Warp::exp_cube(), 2);
  INFO(cube.provenance);
  CHECK(cube.result == Result::Fails);
  CHECK(cube.witness);
  // oracle agreement: the volume test never claims completeness against a bounded ODE solution
  for (const Warp& w : {Warp::euclidean(), Warp::hyperbolic(), Warp::exp_cube()})
    for (int m : {2, 3}) CHECK(stochastic_completeness(w, m).result != Result::InternalError);
}

TEST_CASE("no Ahlfors violation where a potential exists") {
  const auto M = ModelManifold::radial(2, Warp::hyperbolic(), 0, 12, 120);
  const auto K = where(*M, [](double r) { return r <= 1 + 1e-12; });
  const Verdict v = ahlfors_search(laplace(2, Profile::linear(1)), K, make_exhaustion(*M, 6), M, 0, 8);
  INFO((v.notes.empty() ? std::string() : v.notes.back()));
  CHECK(v.result == Result::Holds);
  // deterministic in the seed
  const Verdict again = ahlfors_search(laplace(2, Profile::linear(1)), K, make_exhaustion(*M, 6), M, 0, 8);
  CHECK(again.trace == v.trace);

  const auto C = ModelManifold::radial(2, Warp::exp_cube(), 0, 4, 400);
  const auto KC = where(*C, [](double r) { return r <= 1 + 1e-12; });
  CHECK(ahlfors_search(laplace(2, Profile::linear(1)), KC, make_exhaustion(*C, 4), C, 0, 2).result == Result::Fails);
}
