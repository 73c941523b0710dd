#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "subeq/subequation.hpp"

using namespace subeq;

namespace {

Jet make_jet(double r, std::vector<double> p, std::vector<double> diag) {
  const int m = static_cast<int>(p.size());
  Jet j = Jet::zero(m);
  j.r = r;
  for (int i = 0; i < m; ++i) {
    j.p(i) = p[i];
    j.A(i, i) = diag[i];
  }
  return j;
}

std::vector<Subequation> catalog(int m) {
  const Profile lin = Profile::linear(1.0), zero = Profile::constant(0.0);
  const Profile table = Profile::tabulated({-2, -1, 0, 1, 3}, {-3, -1.5, 0, 0.5, 2});
  const Profile xi = Profile::tabulated({-2, 0, 2}, {3, 1, 0.5});
  std::vector<Subequation> out = {
      eikonal(m, Profile::constant(1.0)),
      eikonal(m, xi),
      laplace(m, lin),
      laplace(m, table),
      hessian_branch(m, 1, zero),
      hessian_branch(m, m, lin),
      plurisub_trace(m, 1, table),
      plurisub_trace(m, m > 1 ? m - 1 : 1, lin),
      quasilinear(m, AProfile::mean_curvature(), lin),
      quasilinear(m, AProfile::laplacian(), table),
      inf_laplacian(m, zero),
      inf_laplacian(m, lin),
  };
  for (int k = 1; k <= m; ++k)
    for (int j = 1; j <= k; ++j) out.push_back(sigma_branch(m, j, k, lin));
  return out;
}

// Classifications of two subequations agree on n random jets, ignoring jets within tol of either boundary.
int disagreements(const Subequation& a, const Subequation& b, std::size_t n, std::uint64_t seed, double tol = 1e-9) {
  std::mt19937_64 rng(seed);
  const JetSampler s = gaussian_jet_sampler(a.dim());
  const Point x = Point::origin(a.dim());
  int bad = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Jet j = s(rng);
    const double ga = a.value(x, j), gb = b.value(x, j);
    if (std::abs(ga) <= tol || std::abs(gb) <= tol) continue;
    if ((ga > 0) != (gb > 0)) ++bad;
  }
  return bad;
}

}  // namespace

TEST_CASE("contains: spec examples") {
  const Subequation E = eikonal(2, Profile::constant(1.0));
  const Point x = Point::origin(2);
  CHECK(contains(E, x, make_jet(0, {0.5, 0}, {0, 0}), 1e-9) == Membership::Interior);
  CHECK(contains(E, x, make_jet(0, {0.6, 0.8}, {0, 0}), 1e-9) == Membership::Boundary);
  CHECK(contains(E, x, make_jet(0, {2, 0}, {0, 0}), 1e-9) == Membership::Exterior);
  const Subequation L = laplace(2, Profile::linear(1.0));
  CHECK(contains(L, x, make_jet(-2, {0, 0}, {0, 0}), 1e-9) == Membership::Interior);
  CHECK_THROWS_AS(L.value(Point::origin(3), Jet::zero(3)), InputError);
}

TEST_CASE("dual of the eikonal is the reverse gradient constraint") {
  const Subequation E = eikonal(3, Profile::constant(1.0));
  const Subequation D = E.dual();
  CHECK(D.tag() == "eikonal_dual");
  std::mt19937_64 rng(1);
  const JetSampler s = gaussian_jet_sampler(3);
  const Point x = Point::origin(3);
  for (int i = 0; i < 2000; ++i) {
    const Jet j = s(rng);
    CHECK(D.value(x, j) == doctest::Approx(j.p.norm() - 1.0));
  }
  const Subequation Exi = eikonal(2, Profile::tabulated({-1, 0, 1}, {2, 1, 0.5}));
  const Subequation Dxi = Exi.dual();
  for (int i = 0; i < 200; ++i) {
    Jet j = gaussian_jet_sampler(2)(rng);
    const double expected = j.p.norm() - (*Exi.meta().xi)(-j.r);
    CHECK(Dxi.value(Point::origin(2), j) == doctest::Approx(expected));
  }
}

TEST_CASE("dual of a Hessian branch is the reflected branch with the reflected profile") {
  const Profile f = Profile::tabulated({-1, 0, 2}, {-2, 0.5, 1});
  for (int m = 1; m <= 4; ++m)
    for (int k = 1; k <= m; ++k) {
      const Subequation D = hessian_branch(m, k, f).dual();
      std::mt19937_64 rng(2 + m * 10 + k);
      const JetSampler s = gaussian_jet_sampler(m);
      for (int i = 0; i < 300; ++i) {
        const Jet j = s(rng);
        const EigenList lam = eigenvalues_sym(j.A);
        const double expected = lam(m - k) + f(-j.r);  // lambda_{m-k+1} - (-f(-r))
        CHECK(D.value(Point::origin(m), j) == doctest::Approx(expected).epsilon(1e-12));
      }
    }
}

TEST_CASE("catalog duals equal the generic formula -G(-J) away from p = 0") {
  std::mt19937_64 rng(3);
  for (int m = 2; m <= 4; ++m) {
    const Point x = Point::origin(m);
    for (const Subequation& F : catalog(m)) {
      const Subequation D = F.dual();
      const JetSampler s = gaussian_jet_sampler(m);
      for (int i = 0; i < 200; ++i) {
        const Jet j = s(rng);
        if (j.p.norm() == 0) continue;
        const double generic = -F.value(x, -j);
        CHECK_MESSAGE(std::abs(D.value(x, j) - generic) <= 1e-9 * (1 + std::abs(generic)), F.describe());
      }
    }
  }
}

TEST_CASE("duality is an involution on the catalog") {
  for (int m = 2; m <= 4; ++m)
    for (const Subequation& F : catalog(m)) {
      const Subequation DD = F.dual().dual();
      CHECK_MESSAGE(disagreements(F, DD, 2000, 4 + m) == 0, F.describe());
    }
}

TEST_CASE("the infinity Laplacian is self-dual") {
  for (int m = 2; m <= 4; ++m) {
    const Subequation F = inf_laplacian(m, Profile::constant(0.0));
    CHECK(disagreements(F, F.dual(), 10000, 5) == 0);
  }
}

TEST_CASE("intersect and union duality, identity elements") {
  const int m = 3;
  const Subequation F = laplace(m, Profile::linear(1.0));
  const Subequation E = eikonal(m, Profile::constant(1.0));
  CHECK(disagreements(intersect(F, E).dual(), unite(F.dual(), E.dual()), 10000, 6) == 0);
  CHECK(disagreements(unite(F, E).dual(), intersect(F.dual(), E.dual()), 10000, 7) == 0);
  CHECK(disagreements(intersect(F, full_space(m)), F, 10000, 8) == 0);
  CHECK(disagreements(unite(F, empty_set(m)), F, 10000, 9) == 0);
  CHECK(intersect(F, E).meta().depends_on_gradient);

  const Subequation Fxi = laplace(2, Profile::linear(1.0));
  const Profile xi = Profile::tabulated({-2, 0, 2}, {3, 1, 0.5});
  const double bound = xi(-1.0) + 0.1;
  const Jet j = make_jet(-1.0, {bound, 0}, {0, 0});
  CHECK(contains(intersect(Fxi, eikonal(2, xi)), Point::origin(2), j, 1e-9) == Membership::Exterior);
}

TEST_CASE("order reversal under duality") {
  const int m = 3;
  const Subequation small = hessian_branch(m, 1, Profile::constant(0.0));
  const Subequation big = laplace(m, Profile::constant(0.0));
  std::mt19937_64 rng(10);
  const JetSampler s = gaussian_jet_sampler(m);
  const Point x = Point::origin(m);
  const Subequation dsmall = small.dual(), dbig = big.dual();
  for (int i = 0; i < 5000; ++i) {
    const Jet j = s(rng);
    if (small.value(x, j) > 0) CHECK(big.value(x, j) > 0);
    if (dbig.value(x, j) > 0) CHECK(dsmall.value(x, j) > 0);
  }
}

TEST_CASE("obstacle restriction and its dual") {
  const int m = 2;
  const Subequation F = laplace(m, Profile::linear(1.0));
  const PointField none = PointField::constant(std::numeric_limits<double>::infinity());
  CHECK(disagreements(obstacle(F, none), F, 10000, 11) == 0);

  const PointField g{"1-|x|^2", [](const Point& x) { return 1.0 - x.coords.squaredNorm(); }};
  const Subequation Fg = obstacle(F, g);
  Point x{Eigen::VectorXd::Constant(2, 0.5), std::nullopt};
  std::mt19937_64 rng(12);
  const JetSampler s = gaussian_jet_sampler(m);
  for (int i = 0; i < 1000; ++i) {
    Jet j = s(rng);
    j.r = g.eval(x) + 0.01 + std::abs(j.r);
    CHECK(contains(Fg, x, j, 1e-9) == Membership::Exterior);
  }
  const Subequation expected = unite(F.dual(), value_cap(m, {"-g", [g](const Point& p) { return -g.eval(p); }}));
  const Subequation got = Fg.dual();
  for (int i = 0; i < 5000; ++i) {
    const Jet j = s(rng);
    const double a = got.value(x, j), b = expected.value(x, j);
    CHECK(a == doctest::Approx(b));
    CHECK(a == doctest::Approx(-Fg.value(x, -j)));
  }
}

TEST_CASE("catalog constructor examples") {
  const Point x = Point::origin(3);
  const Subequation H = hessian_branch(3, 1, Profile::constant(0.0));
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    Jet j = Jet::zero(3);
    j.A = SymMatrix(oracle::random_psd(3, rng));
    CHECK(contains(H, x, j, 1e-9) != Membership::Exterior);
  }
  CHECK(contains(H, x, Jet::zero(3), 1e-9) == Membership::Boundary);

  const Subequation Q = quasilinear(3, AProfile::laplacian(), Profile::linear(1.0));
  const Subequation L = laplace(3, Profile::linear(1.0));
  CHECK(disagreements(Q, L, 10000, 14) == 0);

  const Subequation inf = inf_laplacian(3, Profile::constant(0.0));
  CHECK(contains(inf, x, make_jet(0, {1, 0, 0}, {1, -5, -5}), 1e-9) == Membership::Interior);
  CHECK(contains(inf, x, make_jet(0, {0, 0, 0}, {1, -5, -5}), 1e-9) == Membership::Interior);
  CHECK(contains(inf, x, make_jet(0, {0, 1, 0}, {1, -5, -5}), 1e-9) == Membership::Exterior);

  CHECK_THROWS_AS(laplace(2, Profile::linear(-1.0)), InputError);
  CHECK_THROWS_AS(eikonal(2, Profile::constant(-1.0)), InputError);
  CHECK_THROWS_AS(eikonal(2, Profile::linear(1.0)), InputError);
  CHECK_THROWS_AS(hessian_branch(2, 3, Profile::constant(0.0)), InputError);
  CHECK_THROWS_AS(sigma_branch(3, 3, 2, Profile::constant(0.0)), InputError);
  const AProfile broken{"broken", [](double) { return -1.0; }, [](double) { return 0.0; }};
  CHECK_THROWS_AS(quasilinear(2, broken, Profile::constant(0.0)), InputError);
}

TEST_CASE("quasilinear closure at p = 0 is the limsup") {
  const Subequation Q = quasilinear(2, AProfile::mean_curvature(), Profile::constant(0.0));
  const Point x = Point::origin(2);
  const Jet j0 = make_jet(0, {0, 0}, {1, -3});
  // mean curvature: lambda1(0) = lambda2(0) = 1, so the limit is tr A from every direction
  CHECK(Q.value(x, j0) == doctest::Approx(-2.0));
  double sup = -1e300;
  for (int i = 0; i < 360; ++i) {
    const double th = i * M_PI / 180;
    sup = std::max(sup, Q.value(x, make_jet(0, {1e-7 * std::cos(th), 1e-7 * std::sin(th)}, {1, -3})));
  }
  CHECK(Q.value(x, j0) == doctest::Approx(sup).epsilon(1e-6));

  const Subequation K = quasilinear(2, AProfile::k_laplacian(3), Profile::constant(-1.0));
  CHECK(K.value(x, j0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("profiles: flags and reflection") {
  const Profile lin = Profile::linear(2.0);
  CHECK(lin.flags().f1);
  CHECK(lin.flags().strictly_increasing);
  CHECK_FALSE(lin.flags().f1_prime);
  CHECK(lin.reflected()(3.0) == doctest::Approx(6.0));
  const Profile zero = Profile::constant(0.0);
  CHECK(zero.flags().f1_prime);
  CHECK_FALSE(zero.flags().f1);
  CHECK(zero.flags().non_increasing);
  const Profile xi = Profile::tabulated({-1, 0, 1}, {1, 0, 0});
  CHECK(xi.flags().xi1);
  CHECK_FALSE(xi.flags().xi0);
  CHECK(Profile::constant(1.0).flags().xi0);
  const Profile t = Profile::tabulated({-2, -1, 0, 1, 3}, {-3, -1.5, 0, 0.5, 2});
  CHECK(t.flags().non_decreasing);
  for (double r : {-5.0, -1.7, -0.3, 0.0, 0.9, 2.2, 7.0}) CHECK(t.reflected()(r) == doctest::Approx(-t(-r)));
  CHECK(t(-10) == -3.0);
  CHECK(t(10) == 2.0);
  CHECK_THROWS_AS(Profile::tabulated({0, 0}, {1, 2}), InputError);
}

TEST_CASE("jet equivalence: identity and trivial transports") {
  const int m = 3;
  const Subequation L = laplace(m, Profile::linear(1.0));
  const Subequation same = apply_jet_equivalence(JetEquivalence::identity(m), L);
  CHECK(disagreements(L, same, 5000, 15) == 0);
  JetEquivalence psi = JetEquivalence::identity(m);
  psi.L = [m](const Point&, const Vector&) { return SymMatrix(SymMatrix::Zero(m, m)); };
  CHECK(disagreements(L, apply_jet_equivalence(psi, L), 5000, 16) == 0);

  JetEquivalence singular = JetEquivalence::identity(m);
  singular.h = [m](const Point&) { return Matrix(Matrix::Zero(m, m)); };
  CHECK_THROWS_AS(apply_jet_equivalence(singular, L), InputError);
}

TEST_CASE("linear operator equivalence reproduces tr(T A) >= b f(r) + ...") {
  const int m = 2;
  SymMatrix T = SymMatrix::Zero(2, 2);
  T(0, 0) = 4;
  T(1, 1) = 1;
  const JetEquivalence psi = JetEquivalence::linear_operator(
      m, [T](const Point&) { return T; }, [](const Point&) { return Vector(Vector::Zero(2)); },
      [](const Point&) { return 0.0; }, [](const Point&) { return 1.0; });
  const Subequation F = apply_jet_equivalence(psi, laplace(m, Profile::linear(1.0)));
  std::mt19937_64 rng(17);
  const JetSampler s = gaussian_jet_sampler(m);
  const Point x = Point::origin(m);
  int bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const Jet j = s(rng);
    const double direct = 4 * j.A(0, 0) + j.A(1, 1) - j.r;
    if (std::abs(direct) < 1e-9) continue;
    if ((F.value(x, j) > 0) != (direct > 0)) ++bad;
  }
  CHECK(bad == 0);

  // full operator with drift, potential and b
  Vector W(2);
  W << 1.0, -2.0;
  const JetEquivalence full = JetEquivalence::linear_operator(
      m, [T](const Point&) { return T; }, [W](const Point&) { return W; }, [](const Point&) { return 0.7; },
      [](const Point&) { return 2.0; });
  const Subequation G = apply_jet_equivalence(full, laplace(m, Profile::linear(1.0)));
  for (int i = 0; i < 1000; ++i) {
    const Jet j = s(rng);
    const double Lu = 4 * j.A(0, 0) + j.A(1, 1) + W.dot(j.p) + 0.7;
    CHECK(G.value(x, j) == doctest::Approx(Lu / 2.0 - j.r).epsilon(1e-12));
  }
}

TEST_CASE("duality commutes with jet equivalence") {
  const int m = 2;
  SymMatrix T = SymMatrix::Identity(2, 2);
  T(0, 1) = T(1, 0) = 0.3;
  Vector W(2);
  W << 0.5, 0.25;
  const JetEquivalence psi = JetEquivalence::linear_operator(
      m, [T](const Point&) { return T; }, [W](const Point&) { return W; }, [](const Point&) { return 1.5; },
      [](const Point&) { return 1.0; });
  const Subequation F = laplace(m, Profile::linear(1.0));
  const Subequation transported_dual = apply_jet_equivalence(psi, F).dual();
  const Subequation dual_transported = apply_jet_equivalence(psi.dual_induced(), F.dual());
  CHECK(disagreements(transported_dual, dual_transported, 10000, 18) == 0);
  // and both agree with the generic formula
  std::mt19937_64 rng(19);
  const Subequation TF = apply_jet_equivalence(psi, F);
  for (int i = 0; i < 1000; ++i) {
    const Jet j = gaussian_jet_sampler(m)(rng);
    CHECK(transported_dual.value(Point::origin(m), j) == doctest::Approx(-TF.value(Point::origin(m), -j)));
  }
}

TEST_CASE("distance to the boundary") {
  const Subequation E = eikonal(2, Profile::constant(1.0));
  const Point x = Point::origin(2);
  const BoundaryDistance d = distance_to_boundary(E, x, make_jet(0, {0.25, 0}, {0, 0}));
  CHECK(d.found);
  CHECK(std::abs(d.distance - 0.75) <= 1e-6);

  const Subequation L = laplace(2, Profile::constant(0.0));
  const Jet j = make_jet(0, {0, 0}, {1, 1});
  const BoundaryDistance dl = distance_to_boundary(L, x, j);
  // dense-ray oracle along the normalized direction -(A11 + A22)
  double oracle_t = 0;
  for (int i = 0; i <= 200000; ++i) {
    const double t = i * 1e-5;
    if (2 - 2 * t / std::sqrt(2.0) <= 0) {
      oracle_t = t;
      break;
    }
  }
  CHECK(std::abs(dl.distance - oracle_t) <= 1e-4);
  CHECK(std::abs(dl.distance - std::sqrt(2.0)) <= 1e-6);

  const BoundaryDistance zero = distance_to_boundary(E, x, make_jet(0, {1, 0}, {0, 0}));
  CHECK(zero.found);
  CHECK(zero.distance <= 1e-9);

  const BoundaryDistance none = distance_to_boundary(full_space(2), x, Jet::zero(2));
  CHECK_FALSE(none.found);
  CHECK(std::isinf(none.distance));
}

TEST_CASE("audit of (P), (N), (T)") {
  const Certificate ok = audit_PNT(laplace(3, Profile::linear(1.0)), gaussian_jet_sampler(3), 100000, 1);
  CHECK(ok.pass());
  CHECK(ok.metrics.at("violations_P") == 0);
  CHECK(ok.metrics.at("violations_N") == 0);
  CHECK(ok.metrics.at("violations_T") == 0);

  SubequationMeta meta;
  meta.tag = "broken";
  const Subequation broken = custom(2, [](const Point&, const Jet& j) { return j.r; }, meta);
  const Certificate bad = audit_PNT(broken, gaussian_jet_sampler(2), 1000, 2);
  CHECK_FALSE(bad.pass());
  CHECK(bad.metrics.at("violations_N") > 0);

  const Subequation both = intersect(hessian_branch(3, 1, Profile::linear(1.0)), eikonal(3, Profile::constant(1.0)));
  const Certificate c = audit_PNT(both, gaussian_jet_sampler(3), 20000, 3);
  CHECK(c.pass());

  for (int m = 2; m <= 3; ++m)
    for (const Subequation& F : catalog(m)) {
      const Certificate a = audit_PNT(F, gaussian_jet_sampler(m), 2000, 4);
      CHECK_MESSAGE(a.pass(), F.describe());
      const Certificate b = audit_PNT(F.dual(), gaussian_jet_sampler(m), 2000, 5);
      CHECK_MESSAGE(b.pass(), (std::string("dual of ") + F.describe()));
    }
}
