#include "rcpa/problem.hpp"

#include <random>

#include "rcpa/errors.hpp"
#include "rcpa/proximal.hpp"

namespace rcpa {

OperatorNormEstimate SaddlePointProblem::operator_norm(const ManifoldGrid& m,
                                                       double tol,
                                                       int max_iter,
                                                       std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  auto start = TangentField::zeros(m, 1);
  for (std::size_t n = 0; n < m.size(); ++n)
    start[n] = m.manifold().random_tangent(m[n], rng);
  auto normal_op = [&](const TangentField& v) {
    return sharp(adjoint(m, flat(differential(m, v))));
  };
  return power_iteration(normal_op, std::move(start), tol, max_iter);
}

// --- TvProblem ---------------------------------------------------------------

TvProblem::TvProblem(ManifoldGrid data, double alpha, int q,
                     LogDifferential method)
    : data_(std::move(data)), alpha_(alpha), q_(q), method_(method) {
  if (!(alpha > 0.0)) throw ContractError("TvProblem: alpha must be > 0");
  if (q != 1 && q != 2) throw ContractError("TvProblem: q must be 1 or 2");
  data_.validate();
}

double TvProblem::cost(const ManifoldGrid& p) const {
  return tv_cost(p, data_, alpha_, q_);
}

ManifoldGrid TvProblem::prox_primal(const ManifoldGrid& p, double tau) const {
  return prox_sqdist(data_, p, ProxParams(tau, alpha_));
}

TangentField TvProblem::differential(const ManifoldGrid& m,
                                     const TangentField& X) const {
  return dgrad(m, X, method_);
}

DualField TvProblem::adjoint(const ManifoldGrid& m,
                             const DualField& eta) const {
  return dgrad_adjoint(m, eta, method_);
}

DualField TvProblem::prox_dual(const ManifoldGrid& m, const DualField& z,
                               double sigma) const {
  if (!z.based_at(m) || z.depth() != 2)
    throw ContractError("TvProblem::prox_dual: dual field not based at m");
  // g_n(Y) = G(grad m + Y), so the prox of sigma g_n^* projects
  // z + sigma (grad m)^flat onto the dual unit ball. For constant m the
  // offset vanishes.
  return prox_dual_ball(z + sigma * flat(grad(m)), q_);
}

TangentField TvProblem::exact_residual(const ManifoldGrid& m,
                                       const ManifoldGrid& p_bar) const {
  if (!m.same_shape(p_bar))
    throw ContractError("TvProblem::exact_residual: shape mismatch");
  const Manifold& M = m.manifold();
  const TangentField gp = grad(p_bar);
  TangentField out = grad(m);
  for (std::size_t n = 0; n < out.size(); ++n) {
    const std::size_t pixel = n / 2;
    out[n] = M.transport(p_bar[pixel], m[pixel], gp[n]) - out[n];
  }
  return out;
}

DualField TvProblem::transport_dual(const DualField& xi,
                                    const ManifoldGrid& new_m) const {
  return grid_transport(xi, new_m);
}

// --- LinearEuclideanProblem -------------------------------------------------

namespace {

ManifoldGrid single_point(const Vec& x) {
  return ManifoldGrid(Manifold::euclidean(static_cast<int>(x.size())), 1, 1,
                      {x});
}

void require_single(const ManifoldGrid& g, int dim, const char* what) {
  if (g.rows() != 1 || g.cols() != 1 ||
      g.manifold() != Manifold::euclidean(dim))
    throw ContractError(std::string("LinearEuclideanProblem: ") + what);
}

}  // namespace

LinearEuclideanProblem::LinearEuclideanProblem(Mat A, Vec f, double alpha)
    : A_(std::move(A)), data_(single_point(f)), alpha_(alpha) {
  if (A_.cols() != f.size())
    throw ContractError("LinearEuclideanProblem: A and f disagree in size");
  if (!(alpha > 0.0))
    throw ContractError("LinearEuclideanProblem: alpha must be > 0");
}

double LinearEuclideanProblem::cost(const ManifoldGrid& p) const {
  require_single(p, static_cast<int>(A_.cols()), "bad primal point");
  return (p[0] - data_[0]).squaredNorm() / (2.0 * alpha_) +
         (A_ * p[0]).lpNorm<1>();
}

ManifoldGrid LinearEuclideanProblem::prox_primal(const ManifoldGrid& p,
                                                 double tau) const {
  return prox_sqdist(data_, p, ProxParams(tau, alpha_));
}

ManifoldGrid LinearEuclideanProblem::dual_base(const ManifoldGrid& m) const {
  require_single(m, static_cast<int>(A_.cols()), "bad base point");
  return single_point(A_ * m[0]);
}

TangentField LinearEuclideanProblem::differential(const ManifoldGrid& m,
                                                  const TangentField& X) const {
  TangentField out = TangentField::zeros(dual_base(m), 1);
  out[0] = A_ * X[0];
  return out;
}

DualField LinearEuclideanProblem::adjoint(const ManifoldGrid& m,
                                          const DualField& eta) const {
  DualField out = DualField::zeros(m, 1);
  out[0] = A_.transpose() * eta[0];
  return out;
}

DualField LinearEuclideanProblem::prox_dual(const ManifoldGrid& m,
                                            const DualField& z,
                                            double sigma) const {
  // G = |.|_1, so G_n^* is the indicator of the max-norm ball shifted by the
  // linear term -<xi, n>.
  DualField out = z;
  out[0] = (z[0] + sigma * (A_ * m[0])).cwiseMax(-1.0).cwiseMin(1.0);
  return out;
}

TangentField LinearEuclideanProblem::exact_residual(
    const ManifoldGrid& m, const ManifoldGrid& p_bar) const {
  TangentField out = TangentField::zeros(dual_base(m), 1);
  out[0] = A_ * (p_bar[0] - m[0]);
  return out;
}

DualField LinearEuclideanProblem::transport_dual(
    const DualField& xi, const ManifoldGrid& new_m) const {
  DualField out = zero_dual(new_m);
  out[0] = xi[0];
  return out;
}

}  // namespace rcpa
