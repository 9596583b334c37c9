#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "rcpa/diffops.hpp"
#include "rcpa/duality.hpp"
#include "support.hpp"

using namespace rcpa;
using test::vec;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ScalarFunctionOnManifold scalar_fn(const Manifold& M,
                                   std::function<double(const Vec&)> f) {
  return {M, std::move(f), std::nullopt, 0.0};
}

// Random coefficient vector with entries uniform in [-r, r].
Vec random_coeffs(int d, double r, std::mt19937_64& rng) {
  std::uniform_real_distribution<> U(-r, r);
  Vec a(d);
  for (int k = 0; k < d; ++k) a(k) = U(rng);
  return a;
}

}  // namespace

TEST_CASE("TangentGrid contracts and layout") {
  const auto E = Manifold::euclidean(2);
  CHECK_THROWS_AS(TangentGrid(E, vec({0, 0}), 1.0, 2), ContractError);
  CHECK_THROWS_AS(TangentGrid(E, vec({0, 0}), 1.0, 42), ContractError);
  CHECK_THROWS_AS(TangentGrid(E, vec({0, 0}), 0.0, 5), ContractError);
  CHECK_THROWS_AS(TangentGrid(Manifold::spd(3), test::identity(3), 1.0, 5),
                  ContractError);
  const TangentGrid g(E, vec({0, 0}), 1.0, 5);
  CHECK(g.size() == 25);
  CHECK(g.spacing() == 0.5);
  CHECK(g.coefficients(0) == vec({-1, -1}));
  CHECK(g.coefficients(24) == vec({1, 1}));
  CHECK(g.forward_neighbours(0).size() == 2);
  CHECK(g.forward_neighbours(24).empty());
  CHECK(g.covering_radius() == doctest::Approx(std::sqrt(2.0) * 0.25));

  std::mt19937_64 rng(1);
  const auto P = Manifold::spd(2);
  const Vec m = P.random_point(rng);
  const TangentGrid h(P, m, 1.0, 3);
  const Vec X = P.random_tangent(m, rng);
  const Vec Y = P.random_tangent(m, rng);
  CHECK((h.from_coefficients(h.tangent_coefficients(X)) - X).norm() < 1e-12);
  // Cotangent coefficients pair with tangent coefficients like the metric.
  CHECK(h.cotangent_coefficients(P.flat(m, X)).dot(h.tangent_coefficients(Y)) ==
        doctest::Approx(P.inner(m, X, Y)).epsilon(1e-12));
}

TEST_CASE("conjugate oracle examples") {
  const auto E1 = Manifold::euclidean(1);
  const TangentGrid g(E1, vec({0}), 4.0, 41);
  // Conjugate of |x| is the indicator of [-1, 1].
  auto absF = scalar_fn(E1, [](const Vec& x) { return std::abs(x(0)); });
  auto r = m_conjugate_bruteforce(absF, g, vec({0.5}));
  CHECK(r.status == OracleStatus::Finite);
  CHECK(r.value == doctest::Approx(0.0).epsilon(1e-15));
  r = m_conjugate_bruteforce(absF, g, vec({1.5}));
  CHECK(r.value == doctest::Approx(2.0));  // grows with the radius: 0.5 * 4

  const auto c = example_constant(E1, vec({0}), 3.25);
  r = m_conjugate_bruteforce(c.function, g, vec({0}));
  CHECK(r.value == -3.25);

  // Improper on the grid.
  const auto inf = scalar_fn(E1, [](const Vec&) { return kInf; });
  r = m_conjugate_bruteforce(inf, g, vec({0.3}));
  CHECK(r.status == OracleStatus::ImproperOnGrid);
  CHECK(r.value == -kInf);
}

TEST_CASE("squared-distance conjugate approaches the closed form") {
  std::mt19937_64 rng(2);
  const auto P = Manifold::spd(2);
  const Vec m = P.random_point(rng);
  const auto F = example_sqdist(P, m).function;
  const Vec xi = P.flat(m, P.random_tangent(m, rng, 0.5));
  const double exact = conjugate_sqdist_closed_form(P, m, xi);
  double prev = -kInf;
  for (int res : {11, 21, 41}) {
    const TangentGrid g(P, m, 2.0, res);
    const auto r = m_conjugate_bruteforce(F, g, xi);
    CHECK(r.value >= prev);  // nested grids
    CHECK(std::abs(r.value - exact) <= r.tolerance);
    CHECK(r.value <= exact + 1e-12);
    prev = r.value;
  }
  // Closed-form examples.
  CHECK(conjugate_sqdist_closed_form(Manifold::euclidean(2), vec({1, 1}),
                                     vec({2, 0})) == 2.0);
  const Vec m0 = vec({1, 1}), x = vec({2, 0});
  CHECK(0.5 * (x + m0).squaredNorm() - 0.5 * m0.squaredNorm() - x.dot(m0) == 2.0);
  CHECK(conjugate_sqdist_closed_form(P, test::identity(2), test::identity(2)) ==
        doctest::Approx(1.0));
  CHECK(conjugate_sqdist_closed_form(P, m, P.zero_vector()) == 0.0);
}

TEST_CASE("Fenchel-Young inequality") {
  std::mt19937_64 rng(3);
  for (const auto& M : {Manifold::euclidean(1), Manifold::euclidean(2),
                        Manifold::spd(2)}) {
    CAPTURE(M.name());
    const Vec m = M.random_point(rng, 0.5);
    const TangentGrid g(M, m, 2.0, M.dimension() == 3 ? 21 : 41);
    for (const auto& ex : {example_sqdist(M, m), example_distance(M, m)}) {
      const auto f = sample_pullback(ex.function, g);
      for (int t = 0; t < 1000; ++t) {
        const Vec a = random_coeffs(g.dimension(), 2.0, rng);
        const Vec p = M.exp(m, g.from_coefficients(a));
        const Vec c = random_coeffs(g.dimension(), 1.5, rng);
        const auto conj = conjugate_on_grid(f, c);
        const double gap = fenchel_young_gap(M, m, ex.function.evaluate(p),
                                             conj.value, p,
                                             g.cotangent_from_coefficients(c));
        REQUIRE(gap >= -conj.tolerance);
      }
    }
    // Closed form conjugate: the inequality holds to rounding and is tight
    // at xi = flat(log_m p).
    for (int t = 0; t < 200; ++t) {
      const Vec p = M.random_point(rng);
      const Vec xi = M.flat(m, M.random_tangent(m, rng));
      const double Fp = 0.5 * std::pow(M.dist(m, p), 2);
      CHECK(fenchel_young_gap(M, m, Fp, conjugate_sqdist_closed_form(M, m, xi),
                              p, xi) >= -1e-9);
      const Vec tight = M.flat(m, M.log(m, p));
      CHECK(std::abs(fenchel_young_gap(M, m, Fp,
                                       conjugate_sqdist_closed_form(M, m, tight),
                                       p, tight)) <= 1e-9 * (1 + Fp));
    }
    const auto zero = example_constant(M, m, 0.0);
    CHECK(fenchel_young_gap(M, m, 0.0,
                            m_conjugate_bruteforce(zero.function, g,
                                                   M.zero_vector())
                                .value,
                            M.random_point(rng), M.zero_vector()) == 0.0);
  }
}

TEST_CASE("biconjugate lies below F") {
  std::mt19937_64 rng(4);
  for (const auto& M : {Manifold::euclidean(1), Manifold::euclidean(2),
                        Manifold::spd(2)}) {
    CAPTURE(M.name());
    const Vec m = M.random_point(rng, 0.5);
    const int res = M.dimension() == 3 ? 21 : 41;
    const TangentGrid primal(M, m, 2.0, res);
    const TangentGrid dual(M, m, 2.0, res);
    for (const auto& ex : {example_sqdist(M, m), example_distance(M, m)}) {
      const auto f = sample_pullback(ex.function, primal);
      const auto table = tabulate_conjugate(f, dual);
      const auto bi = biconjugate_at_samples(table, primal);
      for (std::size_t i = 0; i < primal.size(); ++i)
        REQUIRE(bi[i] <= f.values[i] + table.primal_tolerance + 1e-12);
      // At the base point the envelope touches F.
      const auto at_m = biconjugate_on_grid(table, Vec::Zero(primal.dimension()));
      CHECK(std::abs(at_m.value - ex.function.evaluate(m)) <= at_m.tolerance);
    }
  }
}

TEST_CASE("squared distance biconjugate on SPD(2)") {
  std::mt19937_64 rng(5);
  const auto P = Manifold::spd(2);
  const Vec m = P.random_point(rng);
  const auto F = example_sqdist(P, m).function;
  const TangentGrid primal(P, m, 1.0, 21);
  const TangentGrid dual(P, m, 1.0, 21);
  const auto table = tabulate_conjugate(sample_pullback(F, primal), dual);
  for (int t = 0; t < 50; ++t) {
    const Vec a = random_coeffs(3, 1.0, rng);
    const Vec p = P.exp(m, primal.from_coefficients(a));
    const auto r = biconjugate_on_grid(table, primal.tangent_coefficients(P.log(m, p)));
    CHECK(std::abs(r.value - F.evaluate(p)) <= 1e-2);
    CHECK(std::abs(r.value - F.evaluate(p)) <= r.tolerance);
  }
  // The convenience entry point agrees.
  const Vec p = P.exp(m, primal.from_coefficients(vec({0.3, -0.2, 0.1})));
  CHECK(biconjugate_bruteforce(F, primal, dual, p).value ==
        biconjugate_on_grid(table, primal.tangent_coefficients(P.log(m, p))).value);
}

TEST_CASE("biconjugate of a concave bump is its convex envelope") {
  const auto E1 = Manifold::euclidean(1);
  const auto F = scalar_fn(E1, [](const Vec& x) {
    return std::abs(x(0)) <= 1.0 ? -x(0) * x(0) : kInf;
  });
  const TangentGrid primal(E1, vec({0}), 2.0, 41);
  const TangentGrid dual(E1, vec({0}), 4.0, 41);
  const auto r = biconjugate_bruteforce(F, primal, dual, vec({0}));
  CHECK(r.value == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("triconjugate equals the conjugate") {
  std::mt19937_64 rng(6);
  for (const auto& M : {Manifold::euclidean(1), Manifold::euclidean(2),
                        Manifold::spd(2)}) {
    CAPTURE(M.name());
    const Vec m = M.random_point(rng, 0.5);
    const int res = M.dimension() == 3 ? 21 : 41;
    const TangentGrid primal(M, m, 2.0, res);
    const TangentGrid dual(M, m, 2.0, res);
    for (const auto& ex : {example_sqdist(M, m), example_distance(M, m)}) {
      const auto f = sample_pullback(ex.function, primal);
      const auto table = tabulate_conjugate(f, dual);
      const auto bi = biconjugate_at_samples(table, primal);
      for (int t = 0; t < 100; ++t) {
        const Vec c = random_coeffs(primal.dimension(), 2.0, rng);
        const auto r = triconjugate_from_tables(f, table, bi, c);
        REQUIRE(r.gap <= r.tolerance);
        if (ex.name == "sqdist") REQUIRE(r.gap <= 1e-2);
      }
      // On dual samples the identity holds to rounding.
      for (std::size_t j = 0; j < dual.size(); j += 97) {
        const auto r = triconjugate_from_tables(f, table, bi, dual.coefficients(j));
        CHECK(r.gap <= 1e-12 * (1 + std::abs(r.conjugate)));
      }
    }
  }
  // Linear pullback and the zero function.
  const auto P = Manifold::spd(2);
  const Vec m = test::identity(2);
  const TangentGrid primal(P, m, 1.0, 11);
  const TangentGrid dual(P, m, 1.0, 11);
  const Vec eta = dual.cotangent_from_coefficients(dual.coefficients(400));
  auto r = triconjugate_check(example_linear(P, m, eta).function, primal, dual, eta);
  CHECK(r.gap <= 1e-12);
  r = triconjugate_check(example_constant(P, m, 0.0).function, primal, dual,
                         P.zero_vector());
  CHECK(r.gap == 0.0);
  CHECK(r.conjugate == 0.0);
  CHECK_THROWS_AS(triconjugate_check(example_constant(Manifold::sphere2(),
                                                      vec({0, 0, 1}), 0.0)
                                         .function,
                                     TangentGrid(Manifold::sphere2(), vec({0, 0, 1}), 1.0, 5),
                                     TangentGrid(Manifold::sphere2(), vec({0, 0, 1}), 1.0, 5),
                                     vec({0, 0, 0})),
                  ContractError);
}

TEST_CASE("conjugate calculus on oracle grids") {
  std::mt19937_64 rng(7);
  const auto P = Manifold::spd(2);
  const Vec m = P.random_point(rng);
  const TangentGrid g(P, m, 2.0, 21);
  const auto F = example_sqdist(P, m);
  const auto f = sample_pullback(F.function, g);

  SUBCASE("order reversal") {
    auto G = f;
    for (std::size_t i = 0; i < g.size(); ++i)
      G.values[i] += 0.1 * g.coefficients(i).norm();
    for (std::size_t i = 0; i < g.size(); ++i) REQUIRE(f.values[i] <= G.values[i]);
    for (int t = 0; t < 200; ++t) {
      const Vec c = random_coeffs(3, 2.0, rng);
      CHECK(conjugate_on_grid(f, c).value >= conjugate_on_grid(G, c).value);
    }
  }

  SUBCASE("adding a constant") {
    // Dyadic samples and shift keep every operation exact.
    const auto q = sample_pullback(
        [&](const Vec& X) {
          const Vec a = g.tangent_coefficients(X);
          return std::round(4 * a.squaredNorm()) / 8;
        },
        g);
    const double alpha = 0.75;
    auto shifted = q;
    for (double& v : shifted.values) v += alpha;
    for (std::size_t j = 0; j < g.size(); j += 13) {
      const Vec c = g.coefficients(j);
      CHECK(conjugate_on_grid(shifted, c).value ==
            conjugate_on_grid(q, c).value - alpha);
    }
    // General values and shifts: equal up to rounding.
    auto fs = f;
    for (double& v : fs.values) v += std::numbers::pi;
    for (int t = 0; t < 200; ++t) {
      const Vec c = random_coeffs(3, 2.0, rng);
      const double a = conjugate_on_grid(fs, c).value;
      const double b = conjugate_on_grid(f, c).value - std::numbers::pi;
      CHECK(std::abs(a - b) <= 8 * std::numeric_limits<double>::epsilon() *
                                   (std::abs(b) + std::numbers::pi));
    }
  }

  SUBCASE("positive scaling") {
    for (double lambda : {0.25, 2.0, 8.0}) {
      auto scaled = f;
      for (double& v : scaled.values) v *= lambda;
      for (int t = 0; t < 200; ++t) {
        const Vec c = random_coeffs(3, 2.0, rng);
        CHECK(conjugate_on_grid(scaled, c).value ==
              lambda * conjugate_on_grid(f, c / lambda).value);
      }
    }
    for (double lambda : {0.3, 3.0}) {
      auto scaled = f;
      for (double& v : scaled.values) v *= lambda;
      for (int t = 0; t < 200; ++t) {
        const Vec c = random_coeffs(3, 2.0, rng);
        const double a = conjugate_on_grid(scaled, c).value;
        const double b = lambda * conjugate_on_grid(f, c / lambda).value;
        CHECK(std::abs(a - b) <= 1e-13 * (1 + std::abs(b)));
      }
    }
  }

  SUBCASE("convexity in the dual argument") {
    for (int t = 0; t < 200; ++t) {
      const Vec c1 = random_coeffs(3, 2.0, rng);
      const Vec c2 = random_coeffs(3, 2.0, rng);
      for (double s : {0.25, 0.5, 0.75})
        CHECK(conjugate_on_grid(f, s * c1 + (1 - s) * c2).value <=
              s * conjugate_on_grid(f, c1).value +
                  (1 - s) * conjugate_on_grid(f, c2).value + 1e-9);
    }
  }

  SUBCASE("subdifferential at the maximizer") {
    for (int t = 0; t < 200; ++t) {
      const Vec c = random_coeffs(3, 1.0, rng);
      const auto r = conjugate_on_grid(f, c);
      const Vec a = g.coefficients(r.argmax);
      CHECK(F.pullback(g.from_coefficients(a)) + r.value - c.dot(a) <=
            r.tolerance);
    }
  }
}

TEST_CASE("TV norm is convex on fields at a common base") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<> U(0, 1);
  for (const auto& M : test::all_manifolds())
    for (int q : {1, 2}) {
      const auto base = test::random_grid(M, 3, 3, rng);
      for (int t = 0; t < 50; ++t) {
        const auto Y = test::random_field(base, 2, rng);
        const auto Z = test::random_field(base, 2, rng);
        const double s = U(rng);
        CHECK(tv_norm((1 - s) * Y + s * Z, q) <=
              (1 - s) * tv_norm(Y, q) + s * tv_norm(Z, q) + 1e-9);
      }
    }
}

TEST_CASE("example functions") {
  const auto S = Manifold::sphere2();
  const auto d = example_distance(S, vec({1, 0, 0}));
  CHECK(d.pullback(vec({0, std::numbers::pi / 4, 0})) ==
        doctest::Approx(std::numbers::pi / 4));

  const Vec I3 = test::identity(3);
  const auto ld = example_log_det(3, 1.0, 0.0, I3);
  Mat X = Mat::Identity(3, 3);
  X(2, 2) = 0;
  CHECK(ld.pullback(test::mat_vec(X)) == doctest::Approx(4.0));
  Mat Y = Mat::Zero(3, 3);
  Y(0, 0) = 1;
  CHECK(ld.hessian_form(I3, test::mat_vec(Y)) == doctest::Approx(2.0));

  // Closed-form pullbacks agree with F o exp_m, and Hessian forms with
  // second differences of the pullback.
  std::mt19937_64 rng(9);
  const auto P = Manifold::spd(3);
  const Vec m = P.random_point(rng);
  Mat w = Mat::Random(3, 3);
  w = w + w.transpose();
  for (const auto& ex :
       {example_log_det(3, 1.3, 0.4, m), example_trace(3, w, m),
        example_sqdist(P, m), example_distance(P, m), example_constant(P, m, 2.0),
        example_linear(P, m, P.flat(m, P.random_tangent(m, rng)))}) {
    CAPTURE(ex.name);
    for (int t = 0; t < 20; ++t) {
      const Vec V = P.random_tangent(m, rng, 0.8);
      CHECK(ex.pullback(V) ==
            doctest::Approx(ex.function.evaluate(P.exp(m, V))).epsilon(1e-9));
      if (ex.hessian_form) {
        const Vec W = P.random_tangent(m, rng);
        const double h = 1e-3;
        const double second = (ex.pullback(V + h * W) - 2 * ex.pullback(V) +
                               ex.pullback(V - h * W)) /
                              (h * h);
        CHECK(ex.hessian_form(V, W) ==
              doctest::Approx(second).epsilon(1e-5).scale(1.0));
      }
    }
  }
  CHECK(std::isinf(example_log_det(2, 1, 0, test::identity(2))
                       .function.evaluate(vec({1, 0, 0, -1}))));
}
