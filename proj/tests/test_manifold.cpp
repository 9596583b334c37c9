#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rcpa/errors.hpp"
#include "rcpa/manifold.hpp"
#include "support.hpp"

using namespace rcpa;
using test::vec;

namespace {

constexpr double kPi = std::numbers::pi;

// tr(X p^-1 Y p^-1) evaluated directly with an explicit inverse.
double spd_inner_direct(const Vec& p, const Vec& X, const Vec& Y, int n) {
  const Mat pi = test::vec_mat(p, n).inverse();
  return (test::vec_mat(X, n) * pi * test::vec_mat(Y, n) * pi).trace();
}

}  // namespace

TEST_CASE("exp and log closed forms") {
  const auto E2 = Manifold::euclidean(2);
  CHECK(E2.exp(vec({1, 2}), vec({3, -1})).isApprox(vec({4, 1})));
  CHECK(E2.log(vec({1, 2}), vec({4, 1})).isApprox(vec({3, -1})));

  const auto S = Manifold::sphere2();
  CHECK((S.exp(vec({1, 0, 0}), vec({0, kPi / 2, 0})) - vec({0, 1, 0}))
            .norm() < 1e-15);
  CHECK((S.log(vec({1, 0, 0}), vec({0, 1, 0})) - vec({0, kPi / 2, 0}))
            .norm() < 1e-15);

  const auto P = Manifold::spd(3);
  const Vec I = test::identity(3);
  Mat X = Mat::Zero(3, 3);
  X(0, 0) = std::log(2.0);
  Mat expected = Mat::Identity(3, 3);
  expected(0, 0) = 2.0;
  CHECK((P.exp(I, test::mat_vec(X)) - test::mat_vec(expected)).norm() < 1e-14);

  Mat q = Mat::Identity(3, 3);
  q(0, 0) = std::exp(1.0);
  Mat L = Mat::Zero(3, 3);
  L(0, 0) = 1.0;
  CHECK((P.log(I, test::mat_vec(q)) - test::mat_vec(L)).norm() < 1e-14);
}

TEST_CASE("distances") {
  const Vec p = vec({1, 1, 0}) / std::sqrt(2.0);
  const Vec q = vec({1, -1, 0}) / std::sqrt(2.0);
  CHECK(Manifold::sphere2().dist(p, q) == doctest::Approx(kPi / 2).epsilon(1e-15));
  CHECK(Manifold::euclidean(3).dist(p, q) == doctest::Approx(std::sqrt(2.0)));

  Mat e2 = Mat::Identity(3, 3);
  e2(0, 0) = std::exp(2.0);
  CHECK(Manifold::spd(3).dist(test::identity(3), test::mat_vec(e2)) ==
        doctest::Approx(2.0).epsilon(1e-14));

  // Nearby sphere points where acos loses half the digits.
  const auto S = Manifold::sphere2();
  const Vec a = vec({1, 0, 0});
  const Vec b = vec({std::cos(1e-9), std::sin(1e-9), 0});
  CHECK(S.dist(a, b) == doctest::Approx(1e-9).epsilon(1e-6));
  CHECK(S.dist(a, a) == 0.0);
}

TEST_CASE("inner products") {
  const auto P = Manifold::spd(3);
  Mat X = Mat::Zero(3, 3);
  X(0, 0) = 1;
  CHECK(P.inner(test::identity(3), test::mat_vec(X), test::mat_vec(X)) ==
        doctest::Approx(1.0));
  CHECK(Manifold::sphere2().inner(vec({1, 0, 0}), vec({0, 2, 0}),
                                  vec({0, 0, 3})) == 0.0);
  CHECK(Manifold::euclidean(2).inner(vec({0, 0}), vec({1, 2}), vec({3, 4})) ==
        11.0);
}

TEST_CASE("parallel transport examples") {
  const auto S = Manifold::sphere2();
  CHECK((S.transport(vec({1, 0, 0}), vec({0, 1, 0}), vec({0, 0, 1})) -
         vec({0, 0, 1}))
            .norm() < 1e-15);
  // Along the great circle the velocity rotates with it.
  CHECK((S.transport(vec({1, 0, 0}), vec({0, 1, 0}), vec({0, 1, 0})) -
         vec({-1, 0, 0}))
            .norm() < 1e-15);

  const auto E = Manifold::euclidean(3);
  CHECK(E.transport(vec({1, 2, 3}), vec({-1, 0, 5}), vec({7, 8, 9})) ==
        vec({7, 8, 9}));

  // From I on SPD the transport is X -> q^{1/2} X q^{1/2}.
  std::mt19937_64 rng(3);
  const auto P = Manifold::spd(3);
  const Vec I = test::identity(3);
  for (int t = 0; t < 20; ++t) {
    const Vec q = P.random_point(rng);
    const Vec X = P.random_tangent(I, rng);
    Eigen::SelfAdjointEigenSolver<Mat> es(test::vec_mat(q, 3));
    const Mat E = es.operatorSqrt();
    const Vec expected = test::mat_vec(E * test::vec_mat(X, 3) * E);
    const Vec got = P.transport(I, q, X);
    CHECK((got - expected).norm() <= 1e-12 * (1 + expected.norm()));
    CHECK(spd_inner_direct(q, got, got, 3) ==
          doctest::Approx(spd_inner_direct(I, X, X, 3)).epsilon(1e-12));
  }
}

TEST_CASE("musical isomorphisms on SPD") {
  std::mt19937_64 rng(5);
  const auto P = Manifold::spd(3);
  const Vec p = P.random_point(rng);
  const Vec X = P.random_tangent(p, rng);
  const Vec Y = P.random_tangent(p, rng);
  const Mat pi = test::vec_mat(p, 3).inverse();
  const Vec expected = test::mat_vec(pi * test::vec_mat(X, 3) * pi);
  CHECK((P.flat(p, X) - expected).norm() < 1e-10 * expected.norm());
  CHECK(P.pairing(P.flat(p, X), Y) ==
        doctest::Approx(spd_inner_direct(p, X, Y, 3)).epsilon(1e-12));
  // Euclidean and sphere charts: identity.
  CHECK(Manifold::euclidean(2).flat(vec({0, 0}), vec({1, 2})) == vec({1, 2}));
  CHECK(Manifold::sphere2().flat(vec({1, 0, 0}), vec({0, 1, 2})) ==
        vec({0, 1, 2}));
}

TEST_CASE("membership and domain errors") {
  const auto S = Manifold::sphere2();
  CHECK(S.is_point(vec({0, 0, 1})));
  CHECK_FALSE(S.is_point(vec({0, 0, 1.001})));
  CHECK_THROWS_AS(S.log(vec({1, 0, 0}), vec({-1, 0, 0})), DomainError);
  CHECK_THROWS_AS(S.transport(vec({1, 0, 0}), vec({-1, 0, 0}), vec({0, 1, 0})),
                  DomainError);
  CHECK(S.is_tangent(vec({1, 0, 0}), vec({0, 1, 1})));
  CHECK_FALSE(S.is_tangent(vec({1, 0, 0}), vec({1e-3, 1, 1})));

  const auto P = Manifold::spd(2);
  CHECK_FALSE(P.is_point(vec({1, 0, 0, -1})));
  CHECK_FALSE(P.is_point(vec({1, 0.5, 0, 1})));  // not symmetric
  CHECK_THROWS_AS(P.check_point(vec({1, 0, 0, 0})), DomainError);
  CHECK_THROWS_AS(P.log(test::identity(2), vec({1, 2, 2, 1})), DomainError);
  CHECK_FALSE(P.is_tangent(test::identity(2), vec({1, 1, 0, 1})));

  CHECK_THROWS(Manifold::euclidean(0));
  CHECK_THROWS_AS(Manifold::parse("torus"), ConfigError);
  CHECK(Manifold::parse("spd3") == Manifold::spd(3));
  CHECK(Manifold::parse("euclidean3") == Manifold::euclidean(3));
  CHECK(Manifold::parse("sphere2").name() == "sphere2");
}

TEST_CASE("typed interface checks bases") {
  const auto S = Manifold::sphere2();
  const ManifoldPoint p{vec({1, 0, 0})};
  const ManifoldPoint q{vec({0, 1, 0})};
  const TangentVector X{p, vec({0, 0, 1})};
  const TangentVector Xq{q, vec({0, 0, 1})};
  CHECK(exp(S, p, X).coords.isApprox(S.exp(p.coords, X.coords)));
  CHECK_THROWS_AS(exp(S, q, X), ContractError);
  CHECK_THROWS_AS(inner(S, p, X, Xq), ContractError);
  CHECK_THROWS_AS(flat(S, q, X), ContractError);
  CHECK(norm(S, X) == doctest::Approx(1.0));
  CHECK(log(S, p, q).base.coords == p.coords);
  const auto Y = parallel_transport(S, p, q, X);
  CHECK(Y.base.coords == q.coords);
  const CotangentVector xi = flat(S, p, X);
  CHECK(pairing(xi, X) == doctest::Approx(1.0));
  CHECK_THROWS_AS(pairing(xi, Xq), ContractError);
  CHECK(parallel_transport(S, p, q, xi).base.coords == q.coords);
  CHECK(dist(S, p, q) == doctest::Approx(kPi / 2));
}

TEST_CASE("bundle log and exp") {
  const auto E = Manifold::euclidean(2);
  const BundlePoint x{{vec({0, 0})}, {{vec({0, 0})}, vec({1, 1})}};
  const BundlePoint same{{vec({0, 0})}, {{vec({0, 0})}, vec({3, -1})}};
  auto d = bundle_log(E, x, same);
  CHECK(d.horizontal.coords.isZero());
  CHECK(d.vertical.coords == vec({2, -2}));
  const BundlePoint moved{{vec({2, 5})}, {{vec({2, 5})}, vec({1, 1})}};
  d = bundle_log(E, x, moved);
  CHECK(d.horizontal.coords == vec({2, 5}));
  CHECK(d.vertical.coords.isZero());

  std::mt19937_64 rng(11);
  const auto S = Manifold::sphere2();
  for (int t = 0; t < 200; ++t) {
    const Vec b = S.random_point(rng);
    const Vec b2 = S.exp(b, S.random_tangent(b, rng, 1.0));
    const BundlePoint a{{b}, {{b}, S.random_tangent(b, rng)}};
    const BundlePoint c{{b2}, {{b2}, S.random_tangent(b2, rng)}};
    const BundlePoint back = bundle_exp(S, a, bundle_log(S, a, c));
    CHECK((back.base.coords - b2).norm() <= 1e-10);
    CHECK((back.vector.coords - c.vector.coords).norm() <= 1e-10);
    CHECK(bundle_dist(S, a, c) >= S.dist(b, b2) - 1e-15);
  }
}

// Property suite: 1000 seeded instances per manifold for each invariant.
TEST_CASE("geometry invariants on random instances") {
  for (const auto& M : test::all_manifolds()) {
    CAPTURE(M.name());
    std::mt19937_64 rng(2024);
    for (int t = 0; t < 1000; ++t) {
      const Vec p = M.random_point(rng);
      Vec q = M.random_point(rng);
      if (M.kind() == ManifoldKind::Sphere2 && M.dist(p, q) > 3.0)
        q = M.exp(p, M.random_tangent(p, rng, 1.0));
      // exp/log round trip and the norm of log.
      const Vec V = M.log(p, q);
      REQUIRE(M.dist(M.exp(p, V), q) <= 1e-9);
      REQUIRE(std::abs(M.norm(p, V) - M.dist(p, q)) <= 1e-9);
      REQUIRE(M.is_point(M.exp(p, V)));

      // Geodesic speed.
      Vec X = M.random_tangent(p, rng);
      if (M.kind() == ManifoldKind::Sphere2) X *= 1.0 / (1.0 + M.norm(p, X));
      const double t1 = std::uniform_real_distribution<>(-1, 1)(rng);
      const double t2 = std::uniform_real_distribution<>(-1, 1)(rng);
      REQUIRE(std::abs(M.dist(M.exp(p, t1 * X), M.exp(p, t2 * X)) -
                       std::abs(t1 - t2) * M.norm(p, X)) <= 1e-9);

      // Transport: isometry, identity at p == q, inverse.
      const Vec Y = M.random_tangent(p, rng);
      const Vec Z = M.transport(p, q, Y);
      REQUIRE(M.is_tangent(q, Z));
      REQUIRE(std::abs(M.norm(q, Z) - M.norm(p, Y)) <= 1e-9 * (1 + M.norm(p, Y)));
      REQUIRE(std::abs(M.inner(q, Z, M.transport(p, q, X)) - M.inner(p, Y, X)) <=
              1e-9 * (1 + M.norm(p, X) * M.norm(p, Y)));
      REQUIRE((M.transport(q, p, Z) - Y).norm() <= 1e-9 * (1 + Y.norm()));
      REQUIRE((M.transport(p, p, Y) - Y).norm() <= 1e-12 * (1 + Y.norm()));

      // Musical isomorphisms.
      const Vec xi = M.flat(p, X);
      REQUIRE((M.sharp(p, xi) - X).norm() <= 1e-10 * (1 + X.norm()));
      REQUIRE(std::abs(M.pairing(xi, Y) - M.inner(p, X, Y)) <=
              1e-10 * (1 + M.norm(p, X) * M.norm(p, Y)));
      REQUIRE(std::abs(M.dual_norm(p, xi) - M.norm(p, X)) <= 1e-10 * (1 + M.norm(p, X)));
    }
  }
}

TEST_CASE("tangent basis is orthonormal") {
  std::mt19937_64 rng(8);
  for (const auto& M : test::all_manifolds()) {
    const Vec p = M.random_point(rng);
    const auto B = M.tangent_basis(p);
    REQUIRE(static_cast<int>(B.size()) == M.dimension());
    for (std::size_t i = 0; i < B.size(); ++i)
      for (std::size_t j = 0; j < B.size(); ++j)
        CHECK(M.inner(p, B[i], B[j]) ==
              doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
  }
}

TEST_CASE("geodesic endpoints") {
  std::mt19937_64 rng(9);
  for (const auto& M : test::all_manifolds()) {
    const Vec p = M.random_point(rng, 0.5);
    const Vec q = M.random_point(rng, 0.5);
    CHECK((M.geodesic(p, q, 0.0) - p).norm() < 1e-12);
    CHECK(M.dist(M.geodesic(p, q, 1.0), q) < 1e-9);
    CHECK(M.dist(p, M.geodesic(p, q, 0.5)) ==
          doctest::Approx(M.dist(p, q) / 2).epsilon(1e-9));
  }
}

TEST_CASE("chart round trip") {
  std::mt19937_64 rng(12);
  for (const auto& M : test::all_manifolds()) {
    const Vec p = M.random_point(rng);
    const auto c = M.to_chart(p);
    CHECK(static_cast<int>(c.size()) == M.chart_size());
    CHECK((M.from_chart(c) - p).norm() == 0.0);
  }
}
