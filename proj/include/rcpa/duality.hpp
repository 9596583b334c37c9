#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rcpa/manifold.hpp"

namespace rcpa {

// An extended-real valued function on a manifold. evaluate may return
// +infinity outside its domain; it must never return -infinity.
struct ScalarFunctionOnManifold {
  Manifold manifold;
  std::function<double(const Vec&)> evaluate;
  // Optional domain hint: F is finite on the closed ball of this radius.
  std::optional<Vec> center;
  double radius = 0.0;
};

// Regular sample grid on T_m M in an orthonormal basis e_1..e_d of T_m:
// coefficient vectors a in [-radius, radius]^d with `resolution` points per
// axis, X = sum_i a_i e_i. Because the basis is orthonormal, a cotangent xi
// at m acts on X through its coefficients c_i = xi(e_i) as c . a.
class TangentGrid {
 public:
  TangentGrid(Manifold manifold, Vec base, double radius, int resolution);

  const Manifold& manifold() const { return manifold_; }
  const Vec& base() const { return base_; }
  double radius() const { return radius_; }
  int resolution() const { return resolution_; }
  int dimension() const { return static_cast<int>(basis_.size()); }
  std::size_t size() const { return coeffs_.size(); }
  double spacing() const { return 2.0 * radius_ / (resolution_ - 1); }
  // Largest distance from any point of the cube to its nearest sample.
  double covering_radius() const;

  const Vec& coefficients(std::size_t i) const { return coeffs_[i]; }
  Vec tangent(std::size_t i) const { return from_coefficients(coeffs_[i]); }

  Vec from_coefficients(const Vec& a) const;
  Vec tangent_coefficients(const Vec& X) const;
  Vec cotangent_coefficients(const Vec& xi) const;
  // Cotangent at the base whose coefficients are c.
  Vec cotangent_from_coefficients(const Vec& c) const;

  // Indices of the grid neighbours of sample i along each axis (+1 steps).
  std::vector<std::size_t> forward_neighbours(std::size_t i) const;

 private:
  Manifold manifold_;
  Vec base_;
  double radius_;
  int resolution_;
  std::vector<Vec> basis_;
  std::vector<Vec> coeffs_;
};

// The pullback f_m = F o exp_m sampled on a tangent grid.
struct SampledPullback {
  TangentGrid grid;
  std::vector<double> values;
  // Largest finite slope between neighbouring samples.
  double lipschitz = 0.0;
};

SampledPullback sample_pullback(const ScalarFunctionOnManifold& F,
                                const TangentGrid& grid);
// Same, from a closed-form pullback on coefficient vectors.
SampledPullback sample_pullback(const std::function<double(const Vec&)>& f,
                                const TangentGrid& grid);

enum class OracleStatus { Finite, ImproperOnGrid };

struct OracleValue {
  double value = 0.0;
  OracleStatus status = OracleStatus::Finite;
  // Index of the maximizing sample, when finite.
  std::size_t argmax = 0;
  // Bound on the discretization error of `value` against the continuous
  // supremum over the sampled cube.
  double tolerance = 0.0;
};

// max_i <xi, X_i> - f_m(X_i) for xi given by its coefficients. Returns
// -infinity with status ImproperOnGrid when every sample is +infinity.
OracleValue conjugate_on_grid(const SampledPullback& f, const Vec& xi_coeffs);

// F*_m(xi) for a cotangent xi at the grid's base.
OracleValue m_conjugate_bruteforce(const ScalarFunctionOnManifold& F,
                                   const TangentGrid& grid, const Vec& xi);

// Conjugate values of f tabulated on every sample of a dual grid (a tangent
// grid at the same base whose samples are read as cotangent coefficients).
struct ConjugateTable {
  TangentGrid dual_grid;
  std::vector<double> values;
  double primal_tolerance = 0.0;
  double lipschitz = 0.0;
};

ConjugateTable tabulate_conjugate(const SampledPullback& f,
                                  const TangentGrid& dual_grid);

// sup over the dual grid of <xi, X> - F*_m(xi) at the tangent vector with
// coefficients a.
OracleValue biconjugate_on_grid(const ConjugateTable& table, const Vec& a);

// F**_{mm}(p): m_conjugate over the primal grid, then conjugate again over
// the dual grid, evaluated at log_m p.
OracleValue biconjugate_bruteforce(const ScalarFunctionOnManifold& F,
                                   const TangentGrid& primal,
                                   const TangentGrid& dual, const Vec& p);

struct TriconjugateReport {
  double triconjugate = 0.0;
  double conjugate = 0.0;
  double gap = 0.0;
  double tolerance = 0.0;
};

// F**_{mm} at every sample of the primal grid.
std::vector<double> biconjugate_at_samples(const ConjugateTable& table,
                                           const TangentGrid& primal);

// F***_{mmm} against F*_m at the cotangent with coefficients c, from
// precomputed tables.
TriconjugateReport triconjugate_from_tables(
    const SampledPullback& f, const ConjugateTable& table,
    const std::vector<double>& biconjugate, const Vec& c);

// Compares F***_{mmm}(xi) with F*_m(xi), where the outer supremum runs over
// the primal samples. Only defined on Hadamard manifolds.
TriconjugateReport triconjugate_check(const ScalarFunctionOnManifold& F,
                                      const TangentGrid& primal,
                                      const TangentGrid& dual, const Vec& xi);

// Conjugate of p -> 1/2 d(p,m)^2 at base m: 1/2 |xi|^2_m.
double conjugate_sqdist_closed_form(const Manifold& M, const Vec& m,
                                    const Vec& xi);

// F(p) + F*_m(xi) - <xi, log_m p>.
double fenchel_young_gap(const Manifold& M, const Vec& m, double F_p,
                         double conjugate_xi, const Vec& p, const Vec& xi);

// Test fixtures: a function, its pullback at `base` in closed form on tangent
// coordinates, and optionally the second derivative of the pullback as a
// quadratic form.
struct ExampleFunction {
  std::string name;
  ScalarFunctionOnManifold function;
  Vec base;
  std::function<double(const Vec&)> pullback;
  std::function<double(const Vec&, const Vec&)> hessian_form;
};

ExampleFunction example_sqdist(const Manifold& M, const Vec& m);
// F(p) = d(m', p); the pullback at m' is the tangent norm.
ExampleFunction example_distance(const Manifold& M, const Vec& m_prime);
// F(p) = a ln^2 det p - b ln det p on SPD(n), pullback at m.
ExampleFunction example_log_det(int n, double a, double b, const Vec& m);
// F(p) = tr(w p) on SPD(n) for symmetric w, pullback at m.
ExampleFunction example_trace(int n, const Mat& w, const Vec& m);
ExampleFunction example_constant(const Manifold& M, const Vec& m, double c);
// F(p) = <eta, log_m p>, whose pullback at m is linear.
ExampleFunction example_linear(const Manifold& M, const Vec& m,
                               const Vec& eta);

}  // namespace rcpa
