#pragma once

#include <cstdint>
#include <functional>

#include "rcpa/grid.hpp"
#include "rcpa/manifold.hpp"

namespace rcpa {

// Forward differences (grad P)_{i,j,0} = log_{p_ij} p_{i+1,j} and
// (grad P)_{i,j,1} = log_{p_ij} p_{i,j+1}; entries without a neighbour are
// zero. Depth-2 field based at P.
TangentField grad(const ManifoldGrid& P);

// sum_{i,j} (sum_k |X_ijk|^q)^{1/q} for q in {1, 2}.
double tv_norm(const TangentField& X, int q);

// (1/2alpha) sum d(f_ij, p_ij)^2 + tv_norm(grad P, q).
double tv_cost(const ManifoldGrid& P, const ManifoldGrid& f, double alpha,
               int q);

// Differentials of the logarithm. d1_log is the derivative of p -> log_p q
// in direction X in T_p, d2_log the derivative of q -> log_p q in direction
// X in T_q; both land in T_p. The adjoints act on cotangent vectors at p and
// return cotangents at p (d1) or q (d2), with <d_log(X), xi> == <X,
// d_log_adj(xi)>.
Vec d1_log(const Manifold& M, const Vec& p, const Vec& q, const Vec& X);
Vec d2_log(const Manifold& M, const Vec& p, const Vec& q, const Vec& X);
Vec d1_log_adj(const Manifold& M, const Vec& p, const Vec& q, const Vec& xi);
Vec d2_log_adj(const Manifold& M, const Vec& p, const Vec& q, const Vec& xi);

// Central finite-difference versions of the same four maps. The adjoints are
// formed from the finite-difference matrix in orthonormal tangent bases.
inline constexpr double kLogDifferenceStep = 1e-4;
Vec d1_log_fd(const Manifold& M, const Vec& p, const Vec& q, const Vec& X,
              double h = kLogDifferenceStep);
Vec d2_log_fd(const Manifold& M, const Vec& p, const Vec& q, const Vec& X,
              double h = kLogDifferenceStep);
Vec d1_log_adj_fd(const Manifold& M, const Vec& p, const Vec& q, const Vec& xi,
                  double h = kLogDifferenceStep);
Vec d2_log_adj_fd(const Manifold& M, const Vec& p, const Vec& q, const Vec& xi,
                  double h = kLogDifferenceStep);

enum class LogDifferential { ClosedForm, FiniteDifference };

// D grad(m)[X] for a depth-1 field X at m; depth-2 result based at m.
TangentField dgrad(const ManifoldGrid& m, const TangentField& X,
                   LogDifferential method = LogDifferential::ClosedForm);
// Adjoint of dgrad: depth-2 cotangent field at m to depth-1 cotangent at m.
DualField dgrad_adjoint(const ManifoldGrid& m, const DualField& eta,
                        LogDifferential method = LogDifferential::ClosedForm);

struct OperatorNormEstimate {
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Largest singular value of a linear map T_m -> (fibers) by power iteration
// on normal_op = sharp o adjoint o flat o forward, which must be self-adjoint
// and positive semidefinite in the metric at the start field's bases.
OperatorNormEstimate power_iteration(
    const std::function<TangentField(const TangentField&)>& normal_op,
    TangentField start, double tol, int max_iter);

// Operator norm L of D grad(m). The start vector is drawn from `seed`, so the
// estimate is reproducible.
OperatorNormEstimate estimate_operator_norm(
    const ManifoldGrid& m, double tol = 1e-10, int max_iter = 50000,
    std::uint64_t seed = 42,
    LogDifferential method = LogDifferential::ClosedForm);

}  // namespace rcpa
