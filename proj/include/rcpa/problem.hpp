#pragma once

#include <cstdint>

#include "rcpa/diffops.hpp"
#include "rcpa/grid.hpp"

namespace rcpa {

// min_p F(p) + G(Lambda(p)) written for the primal-dual solvers. The primal
// variable is a ManifoldGrid. Dual variables are cotangent fields of depth
// dual_depth() based at dual_base(m); for the TV problem these are the fibers
// of n = Lambda(m) in the tangent bundle, which sit at the pixels of m.
class SaddlePointProblem {
 public:
  virtual ~SaddlePointProblem() = default;

  virtual const ManifoldGrid& data() const = 0;
  virtual double cost(const ManifoldGrid& p) const = 0;
  // prox_{tau F}(p).
  virtual ManifoldGrid prox_primal(const ManifoldGrid& p, double tau) const = 0;

  virtual ManifoldGrid dual_base(const ManifoldGrid& m) const = 0;
  virtual int dual_depth() const = 0;
  DualField zero_dual(const ManifoldGrid& m) const {
    return DualField::zeros(dual_base(m), dual_depth());
  }

  // Fiber part of D Lambda(m)[X] for a depth-1 tangent field X at m.
  virtual TangentField differential(const ManifoldGrid& m,
                                    const TangentField& X) const = 0;
  // D Lambda(m)^*[eta], a depth-1 cotangent field at m.
  virtual DualField adjoint(const ManifoldGrid& m,
                            const DualField& eta) const = 0;
  // prox_{sigma G_n^*}(z) with n = Lambda(m).
  virtual DualField prox_dual(const ManifoldGrid& m, const DualField& z,
                              double sigma) const = 0;
  // Fiber part of log_n Lambda(p_bar) under the bundle structure.
  virtual TangentField exact_residual(const ManifoldGrid& m,
                                      const ManifoldGrid& p_bar) const = 0;
  // Moves a dual field from the fibers of Lambda(m) to those of
  // Lambda(new_m).
  virtual DualField transport_dual(const DualField& xi,
                                   const ManifoldGrid& new_m) const = 0;

  // Operator norm of D Lambda(m) by seeded power iteration.
  OperatorNormEstimate operator_norm(const ManifoldGrid& m, double tol = 1e-10,
                                     int max_iter = 20000,
                                     std::uint64_t seed = 42) const;
};

// l2-TV denoising: F(p) = (1/2alpha) sum d(f,p)^2, Lambda = grad and
// G = sum_ij (sum_k |.|^q)^{1/q}.
class TvProblem final : public SaddlePointProblem {
 public:
  TvProblem(ManifoldGrid data, double alpha, int q,
            LogDifferential method = LogDifferential::ClosedForm);

  double alpha() const { return alpha_; }
  int q() const { return q_; }

  const ManifoldGrid& data() const override { return data_; }
  double cost(const ManifoldGrid& p) const override;
  ManifoldGrid prox_primal(const ManifoldGrid& p, double tau) const override;
  ManifoldGrid dual_base(const ManifoldGrid& m) const override { return m; }
  int dual_depth() const override { return 2; }
  TangentField differential(const ManifoldGrid& m,
                            const TangentField& X) const override;
  DualField adjoint(const ManifoldGrid& m, const DualField& eta) const override;
  DualField prox_dual(const ManifoldGrid& m, const DualField& z,
                      double sigma) const override;
  TangentField exact_residual(const ManifoldGrid& m,
                              const ManifoldGrid& p_bar) const override;
  DualField transport_dual(const DualField& xi,
                           const ManifoldGrid& new_m) const override;

 private:
  ManifoldGrid data_;
  double alpha_;
  int q_;
  LogDifferential method_;
};

// Euclidean problem min_x (1/2alpha)|x - f|^2 + |A x|_1 with a linear
// Lambda = A. The primal grid is a single point of R^d, the dual a single
// point of R^k.
class LinearEuclideanProblem final : public SaddlePointProblem {
 public:
  LinearEuclideanProblem(Mat A, Vec f, double alpha);

  const Mat& matrix() const { return A_; }

  const ManifoldGrid& data() const override { return data_; }
  double cost(const ManifoldGrid& p) const override;
  ManifoldGrid prox_primal(const ManifoldGrid& p, double tau) const override;
  ManifoldGrid dual_base(const ManifoldGrid& m) const override;
  int dual_depth() const override { return 1; }
  TangentField differential(const ManifoldGrid& m,
                            const TangentField& X) const override;
  DualField adjoint(const ManifoldGrid& m, const DualField& eta) const override;
  DualField prox_dual(const ManifoldGrid& m, const DualField& z,
                      double sigma) const override;
  TangentField exact_residual(const ManifoldGrid& m,
                              const ManifoldGrid& p_bar) const override;
  DualField transport_dual(const DualField& xi,
                           const ManifoldGrid& new_m) const override;

 private:
  Mat A_;
  ManifoldGrid data_;
  double alpha_;
};

}  // namespace rcpa
