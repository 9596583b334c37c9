#include "rcpa/diffops.hpp"

#include <cmath>
#include <random>

#include "rcpa/errors.hpp"

namespace rcpa {

namespace {

// Jacobi coefficients as functions of the curvature eigenvalue kappa of
// W -> R(W,V)V along a geodesic of length |V|, with s = sqrt(|kappa|):
//   J(0)=0, J'(0)=w:  J(1) = w sin(s)/s      (d exp, inverse gives d2_log)
//   J(0)=x, J(1)=0:   J'(0) = -x s cot(s)    (d1_log)
// with sinh/coth for negative kappa.
constexpr double kSmallArc = 1e-6;

double d2_coeff(double kappa) {
  const double s = std::sqrt(std::abs(kappa));
  if (s < kSmallArc) return 1.0 + (kappa > 0 ? 1.0 : -1.0) * s * s / 6.0;
  return kappa > 0 ? s / std::sin(s) : s / std::sinh(s);
}

double d1_coeff(double kappa) {
  const double s = std::sqrt(std::abs(kappa));
  if (s < kSmallArc) return -1.0 + (kappa > 0 ? 1.0 : -1.0) * s * s / 3.0;
  return kappa > 0 ? -s * std::cos(s) / std::sin(s)
                   : -s * std::cosh(s) / std::sinh(s);
}

// Neighbour of pixel (i,j) in direction k, or false at the boundary.
bool neighbour(const ManifoldGrid& m, int i, int j, int k, int& ni, int& nj) {
  ni = i + (k == 0 ? 1 : 0);
  nj = j + (k == 1 ? 1 : 0);
  return ni < m.rows() && nj < m.cols();
}

// Cotangent adjoint of a linear map op: T_from -> T_to, taking xi at the
// target to a cotangent at `from`.
Vec cotangent_adjoint_from_basis(const Manifold& M, const Vec& from,
                                 const Vec& xi,
                                 const std::function<Vec(const Vec&)>& op) {
  const auto basis = M.tangent_basis(from);
  Vec out = Vec::Zero(M.coord_size());
  for (const Vec& e : basis) out += xi.dot(op(e)) * e;
  return M.flat(from, out);
}

}  // namespace

TangentField grad(const ManifoldGrid& P) {
  const Manifold& M = P.manifold();
  auto out = TangentField::zeros(P, 2);
  for (int i = 0; i < P.rows(); ++i)
    for (int j = 0; j < P.cols(); ++j)
      for (int k = 0; k < 2; ++k) {
        int ni = 0, nj = 0;
        if (neighbour(P, i, j, k, ni, nj))
          out.at(i, j, k) = M.log(P.at(i, j), P.at(ni, nj));
      }
  return out;
}

double tv_norm(const TangentField& X, int q) {
  if (q != 1 && q != 2) throw ContractError("tv_norm: q must be 1 or 2");
  const Manifold& M = X.manifold();
  const auto depth = static_cast<std::size_t>(X.depth());
  double total = 0.0;
  for (std::size_t start = 0; start < X.size(); start += depth) {
    double acc = 0.0;
    for (std::size_t k = 0; k < depth; ++k) {
      const double len = M.norm(X.base(start + k), X[start + k]);
      acc += q == 1 ? len : len * len;
    }
    total += q == 1 ? acc : std::sqrt(acc);
  }
  return total;
}

double tv_cost(const ManifoldGrid& P, const ManifoldGrid& f, double alpha,
               int q) {
  if (!P.same_shape(f)) throw ContractError("tv_cost: grid shape mismatch");
  if (!(alpha > 0.0)) throw ContractError("tv_cost: alpha must be > 0");
  return grid_dist_sq(P, f) / (2.0 * alpha) + tv_norm(grad(P), q);
}

Vec d1_log(const Manifold& M, const Vec& p, const Vec& q, const Vec& X) {
  return M.jacobi_scale(p, M.log(p, q), X, d1_coeff);
}

Vec d2_log(const Manifold& M, const Vec& p, const Vec& q, const Vec& X) {
  return M.jacobi_scale(p, M.log(p, q), M.transport(q, p, X), d2_coeff);
}

Vec d1_log_adj(const Manifold& M, const Vec& p, const Vec& q, const Vec& xi) {
  // d1_log is self-adjoint in the metric at p.
  const Vec Y = M.jacobi_scale(p, M.log(p, q), M.sharp(p, xi), d1_coeff);
  return M.flat(p, Y);
}

Vec d2_log_adj(const Manifold& M, const Vec& p, const Vec& q, const Vec& xi) {
  const Vec Y = M.jacobi_scale(p, M.log(p, q), M.sharp(p, xi), d2_coeff);
  return M.flat(q, M.transport(p, q, Y));
}

Vec d1_log_fd(const Manifold& M, const Vec& p, const Vec& q, const Vec& X,
              double h) {
  const Vec plus = M.exp(p, h * X);
  const Vec minus = M.exp(p, -h * X);
  const Vec a = M.transport(plus, p, M.log(plus, q));
  const Vec b = M.transport(minus, p, M.log(minus, q));
  return M.project_tangent(p, (a - b) / (2.0 * h));
}

Vec d2_log_fd(const Manifold& M, const Vec& p, const Vec& q, const Vec& X,
              double h) {
  const Vec a = M.log(p, M.exp(q, h * X));
  const Vec b = M.log(p, M.exp(q, -h * X));
  return M.project_tangent(p, (a - b) / (2.0 * h));
}

Vec d1_log_adj_fd(const Manifold& M, const Vec& p, const Vec& q, const Vec& xi,
                  double h) {
  return cotangent_adjoint_from_basis(
      M, p, xi, [&](const Vec& e) { return d1_log_fd(M, p, q, e, h); });
}

Vec d2_log_adj_fd(const Manifold& M, const Vec& p, const Vec& q, const Vec& xi,
                  double h) {
  return cotangent_adjoint_from_basis(
      M, q, xi, [&](const Vec& e) { return d2_log_fd(M, p, q, e, h); });
}

TangentField dgrad(const ManifoldGrid& m, const TangentField& X,
                   LogDifferential method) {
  if (X.depth() != 1 || X.rows() != m.rows() || X.cols() != m.cols() ||
      X.manifold() != m.manifold())
    throw ContractError("dgrad: tangent field does not match the grid");
  const Manifold& M = m.manifold();
  const bool closed = method == LogDifferential::ClosedForm;
  auto out = TangentField::zeros(m, 2);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      for (int k = 0; k < 2; ++k) {
        int ni = 0, nj = 0;
        if (!neighbour(m, i, j, k, ni, nj)) continue;
        const Vec& p = m.at(i, j);
        const Vec& q = m.at(ni, nj);
        const Vec& Xp = X[m.index(i, j)];
        const Vec& Xq = X[m.index(ni, nj)];
        out.at(i, j, k) = closed ? Vec(d1_log(M, p, q, Xp) + d2_log(M, p, q, Xq))
                                 : Vec(d1_log_fd(M, p, q, Xp) +
                                       d2_log_fd(M, p, q, Xq));
      }
  return out;
}

DualField dgrad_adjoint(const ManifoldGrid& m, const DualField& eta,
                        LogDifferential method) {
  if (eta.depth() != 2 || !eta.based_at(m))
    throw ContractError(
        "dgrad_adjoint: dual field must be depth 2 and based at the grid");
  const Manifold& M = m.manifold();
  const bool closed = method == LogDifferential::ClosedForm;
  auto out = DualField::zeros(m, 1);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      for (int k = 0; k < 2; ++k) {
        int ni = 0, nj = 0;
        if (!neighbour(m, i, j, k, ni, nj)) continue;
        const Vec& p = m.at(i, j);
        const Vec& q = m.at(ni, nj);
        const Vec& e = eta.at(i, j, k);
        out[m.index(i, j)] +=
            closed ? d1_log_adj(M, p, q, e) : d1_log_adj_fd(M, p, q, e);
        out[m.index(ni, nj)] +=
            closed ? d2_log_adj(M, p, q, e) : d2_log_adj_fd(M, p, q, e);
      }
  return out;
}

OperatorNormEstimate power_iteration(
    const std::function<TangentField(const TangentField&)>& normal_op,
    TangentField start, double tol, int max_iter) {
  OperatorNormEstimate est;
  const double start_norm = norm(start);
  if (!(start_norm > 0.0))
    throw ContractError("power_iteration: start vector must be nonzero");
  TangentField v = (1.0 / start_norm) * std::move(start);
  for (int it = 1; it <= max_iter; ++it) {
    TangentField u = normal_op(v);
    const double lambda = std::max(inner(u, v), 0.0);
    est.iterations = it;
    est.value = std::sqrt(lambda);
    est.residual = norm(u - lambda * v);
    const double len = norm(u);
    if (est.residual <= tol || len == 0.0) {
      est.converged = true;
      break;
    }
    v = (1.0 / len) * std::move(u);
  }
  return est;
}

OperatorNormEstimate estimate_operator_norm(const ManifoldGrid& m, double tol,
                                            int max_iter, std::uint64_t seed,
                                            LogDifferential method) {
  std::mt19937_64 rng(seed);
  auto start = TangentField::zeros(m, 1);
  for (std::size_t n = 0; n < m.size(); ++n)
    start[n] = m.manifold().random_tangent(m[n], rng);
  auto normal_op = [&](const TangentField& v) {
    return sharp(dgrad_adjoint(m, flat(dgrad(m, v, method)), method));
  };
  return power_iteration(normal_op, std::move(start), tol, max_iter);
}

}  // namespace rcpa
