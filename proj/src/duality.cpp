#include "rcpa/duality.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>

#include "rcpa/errors.hpp"

namespace rcpa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxOracleDimension = 3;
constexpr int kMaxResolution = 41;

double max_slope(const TangentGrid& grid, const std::vector<double>& values) {
  double best = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(values[i])) continue;
    for (std::size_t j : grid.forward_neighbours(i))
      if (std::isfinite(values[j]))
        best = std::max(best, std::abs(values[j] - values[i]) / grid.spacing());
  }
  return best;
}

}  // namespace

TangentGrid::TangentGrid(Manifold manifold, Vec base, double radius,
                         int resolution)
    : manifold_(std::move(manifold)),
      base_(std::move(base)),
      radius_(radius),
      resolution_(resolution) {
  if (!(radius > 0.0)) throw ContractError("TangentGrid: radius must be > 0");
  if (resolution < 3 || resolution > kMaxResolution)
    throw ContractError("TangentGrid: resolution must lie in [3, 41]");
  manifold_.check_point(base_);
  basis_ = manifold_.tangent_basis(base_);
  const int d = dimension();
  if (d > kMaxOracleDimension)
    throw ContractError("TangentGrid: tangent dimension above 3");

  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(resolution);
  coeffs_.reserve(total);
  for (std::size_t n = 0; n < total; ++n) {
    Vec a(d);
    std::size_t rest = n;
    for (int k = 0; k < d; ++k) {
      const auto idx = static_cast<int>(rest % resolution);
      rest /= resolution;
      a(k) = -radius + idx * spacing();
    }
    coeffs_.push_back(std::move(a));
  }
}

double TangentGrid::covering_radius() const {
  return std::sqrt(static_cast<double>(dimension())) * spacing() / 2.0;
}

Vec TangentGrid::from_coefficients(const Vec& a) const {
  Vec X = manifold_.zero_vector();
  for (int k = 0; k < dimension(); ++k) X += a(k) * basis_[k];
  return X;
}

Vec TangentGrid::tangent_coefficients(const Vec& X) const {
  Vec a(dimension());
  for (int k = 0; k < dimension(); ++k)
    a(k) = manifold_.inner(base_, basis_[k], X);
  return a;
}

Vec TangentGrid::cotangent_coefficients(const Vec& xi) const {
  Vec c(dimension());
  for (int k = 0; k < dimension(); ++k) c(k) = manifold_.pairing(xi, basis_[k]);
  return c;
}

Vec TangentGrid::cotangent_from_coefficients(const Vec& c) const {
  return manifold_.flat(base_, from_coefficients(c));
}

std::vector<std::size_t> TangentGrid::forward_neighbours(std::size_t i) const {
  std::vector<std::size_t> out;
  std::size_t stride = 1;
  std::size_t rest = i;
  const auto res = static_cast<std::size_t>(resolution_);
  for (int k = 0; k < dimension(); ++k) {
    if (rest % res + 1 < res) out.push_back(i + stride);
    rest /= res;
    stride *= res;
  }
  return out;
}

SampledPullback sample_pullback(const ScalarFunctionOnManifold& F,
                                const TangentGrid& grid) {
  if (F.manifold != grid.manifold())
    throw ContractError("sample_pullback: manifold mismatch");
  std::vector<double> values;
  values.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v =
        F.evaluate(grid.manifold().exp(grid.base(), grid.tangent(i)));
    if (v == -kInf) throw ContractError("sample_pullback: F is -infinity");
    values.push_back(v);
  }
  const double lip = max_slope(grid, values);
  return {grid, std::move(values), lip};
}

SampledPullback sample_pullback(const std::function<double(const Vec&)>& f,
                                const TangentGrid& grid) {
  std::vector<double> values;
  values.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    values.push_back(f(grid.tangent(i)));
  const double lip = max_slope(grid, values);
  return {grid, std::move(values), lip};
}

OracleValue conjugate_on_grid(const SampledPullback& f, const Vec& xi_coeffs) {
  OracleValue out;
  out.value = -kInf;
  out.status = OracleStatus::ImproperOnGrid;
  for (std::size_t i = 0; i < f.grid.size(); ++i) {
    if (f.values[i] == kInf) continue;
    const double v = xi_coeffs.dot(f.grid.coefficients(i)) - f.values[i];
    if (out.status == OracleStatus::ImproperOnGrid || v > out.value) {
      out.value = v;
      out.argmax = i;
      out.status = OracleStatus::Finite;
    }
  }
  out.tolerance =
      f.grid.covering_radius() * (xi_coeffs.norm() + f.lipschitz);
  return out;
}

OracleValue m_conjugate_bruteforce(const ScalarFunctionOnManifold& F,
                                   const TangentGrid& grid, const Vec& xi) {
  grid.manifold().check_tangent(grid.base(), xi);
  return conjugate_on_grid(sample_pullback(F, grid),
                           grid.cotangent_coefficients(xi));
}

ConjugateTable tabulate_conjugate(const SampledPullback& f,
                                  const TangentGrid& dual_grid) {
  if (f.grid.manifold() != dual_grid.manifold() ||
      !(f.grid.base().array() == dual_grid.base().array()).all())
    throw ContractError("tabulate_conjugate: grids must share their base");
  std::vector<double> values;
  values.reserve(dual_grid.size());
  double tol = 0.0;
  for (std::size_t j = 0; j < dual_grid.size(); ++j) {
    const OracleValue c = conjugate_on_grid(f, dual_grid.coefficients(j));
    if (c.status == OracleStatus::ImproperOnGrid)
      throw ContractError("tabulate_conjugate: F is +infinity on the grid");
    values.push_back(c.value);
    tol = std::max(tol, c.tolerance);
  }
  const double lip = max_slope(dual_grid, values);
  return {dual_grid, std::move(values), tol, lip};
}

OracleValue biconjugate_on_grid(const ConjugateTable& table, const Vec& a) {
  OracleValue out;
  out.value = -kInf;
  for (std::size_t j = 0; j < table.dual_grid.size(); ++j) {
    const double v = table.dual_grid.coefficients(j).dot(a) - table.values[j];
    if (j == 0 || v > out.value) {
      out.value = v;
      out.argmax = j;
    }
  }
  out.tolerance =
      table.dual_grid.covering_radius() * (a.norm() + table.lipschitz) +
      table.primal_tolerance;
  return out;
}

OracleValue biconjugate_bruteforce(const ScalarFunctionOnManifold& F,
                                   const TangentGrid& primal,
                                   const TangentGrid& dual, const Vec& p) {
  const ConjugateTable table = tabulate_conjugate(sample_pullback(F, primal), dual);
  const Vec X = primal.manifold().log(primal.base(), p);
  return biconjugate_on_grid(table, primal.tangent_coefficients(X));
}

std::vector<double> biconjugate_at_samples(const ConjugateTable& table,
                                           const TangentGrid& primal) {
  std::vector<double> out;
  out.reserve(primal.size());
  for (std::size_t i = 0; i < primal.size(); ++i)
    out.push_back(biconjugate_on_grid(table, primal.coefficients(i)).value);
  return out;
}

TriconjugateReport triconjugate_from_tables(
    const SampledPullback& f, const ConjugateTable& table,
    const std::vector<double>& biconjugate, const Vec& c) {
  const TangentGrid& primal = f.grid;
  double tri = -kInf;
  for (std::size_t i = 0; i < primal.size(); ++i)
    tri = std::max(tri, c.dot(primal.coefficients(i)) - biconjugate[i]);
  TriconjugateReport report;
  report.triconjugate = tri;
  report.conjugate = conjugate_on_grid(f, c).value;
  report.gap = std::abs(report.triconjugate - report.conjugate);
  // Exact up to rounding when c is a dual sample; otherwise bounded through
  // the distance from c to the nearest dual sample.
  const double sup_norm =
      std::sqrt(static_cast<double>(primal.dimension())) * primal.radius();
  report.tolerance =
      table.dual_grid.covering_radius() * (sup_norm + table.lipschitz) +
      1e-12 * (1.0 + std::abs(report.conjugate));
  return report;
}

TriconjugateReport triconjugate_check(const ScalarFunctionOnManifold& F,
                                      const TangentGrid& primal,
                                      const TangentGrid& dual, const Vec& xi) {
  if (!primal.manifold().is_hadamard())
    throw ContractError("triconjugate_check: manifold must be Hadamard");
  const SampledPullback f = sample_pullback(F, primal);
  const ConjugateTable table = tabulate_conjugate(f, dual);
  return triconjugate_from_tables(f, table,
                                  biconjugate_at_samples(table, primal),
                                  primal.cotangent_coefficients(xi));
}

double conjugate_sqdist_closed_form(const Manifold& M, const Vec& m,
                                    const Vec& xi) {
  const double n = M.dual_norm(m, xi);
  return 0.5 * n * n;
}

double fenchel_young_gap(const Manifold& M, const Vec& m, double F_p,
                         double conjugate_xi, const Vec& p, const Vec& xi) {
  return F_p + conjugate_xi - M.pairing(xi, M.log(m, p));
}

ExampleFunction example_sqdist(const Manifold& M, const Vec& m) {
  return {
      .name = "sqdist",
      .function = {M,
                   [M, m](const Vec& p) {
                     const double d = M.dist(m, p);
                     return 0.5 * d * d;
                   },
                   m, 0.0},
      .base = m,
      .pullback = [M, m](const Vec& X) { return 0.5 * M.inner(m, X, X); },
      .hessian_form = [M, m](const Vec&, const Vec& Y) {
        return M.inner(m, Y, Y);
      }};
}

ExampleFunction example_distance(const Manifold& M, const Vec& m_prime) {
  return {.name = "distance",
          .function = {M,
                       [M, m_prime](const Vec& p) {
                         return M.dist(m_prime, p);
                       },
                       m_prime, 0.0},
          .base = m_prime,
          .pullback = [M, m_prime](const Vec& X) { return M.norm(m_prime, X); },
          .hessian_form = {}};
}

ExampleFunction example_log_det(int n, double a, double b, const Vec& m) {
  const Manifold M = Manifold::spd(n);
  M.check_point(m);
  const Mat mm = detail::as_matrix(m, n);
  const Mat m_inv = mm.inverse();
  const double log_det_m = std::log(mm.determinant());
  return {
      .name = "log_det",
      .function = {M,
                   [n, a, b](const Vec& p) {
                     const Vec ev =
                         detail::sym_eig(detail::as_matrix(p, n)).values;
                     if (ev.minCoeff() <= 0.0) return kInf;
                     const double ld = ev.array().log().sum();
                     return a * ld * ld - b * ld;
                   },
                   std::nullopt, 0.0},
      .base = m,
      // ln det exp_m X = ln det m + tr(m^-1 X).
      .pullback =
          [n, a, b, m_inv, log_det_m](const Vec& X) {
            const double ld =
                log_det_m + (m_inv * detail::as_matrix(X, n)).trace();
            return a * ld * ld - b * ld;
          },
      .hessian_form = [n, a, m_inv](const Vec&, const Vec& Y) {
        const double t = (m_inv * detail::as_matrix(Y, n)).trace();
        return 2.0 * a * t * t;
      }};
}

ExampleFunction example_trace(int n, const Mat& w, const Vec& m) {
  const Manifold M = Manifold::spd(n);
  return {.name = "trace",
          .function = {M,
                       [n, w](const Vec& p) {
                         return (w * detail::as_matrix(p, n)).trace();
                       },
                       std::nullopt, 0.0},
          .base = m,
          .pullback =
              [n, w, M, m](const Vec& X) {
                return (w * detail::as_matrix(M.exp(m, X), n)).trace();
              },
          .hessian_form = {}};
}

ExampleFunction example_constant(const Manifold& M, const Vec& m, double c) {
  return {.name = "constant",
          .function = {M, [c](const Vec&) { return c; }, std::nullopt, 0.0},
          .base = m,
          .pullback = [c](const Vec&) { return c; },
          .hessian_form = [](const Vec&, const Vec&) { return 0.0; }};
}

ExampleFunction example_linear(const Manifold& M, const Vec& m,
                               const Vec& eta) {
  return {.name = "linear",
          .function = {M,
                       [M, m, eta](const Vec& p) {
                         return M.pairing(eta, M.log(m, p));
                       },
                       std::nullopt, 0.0},
          .base = m,
          .pullback = [M, eta](const Vec& X) { return M.pairing(eta, X); },
          .hessian_form = [](const Vec&, const Vec&) { return 0.0; }};
}

}  // namespace rcpa
