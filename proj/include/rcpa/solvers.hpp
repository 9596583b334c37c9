#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "rcpa/diffops.hpp"
#include "rcpa/grid.hpp"
#include "rcpa/problem.hpp"

namespace rcpa {

enum class Variant { ExactPrimalRelaxed, LinearizedDualRelaxed, Cppa };

enum class BasePointKind { FixedMean, FixedCustom, TrackPrimal };

struct BasePointPolicy {
  BasePointKind kind = BasePointKind::FixedMean;
  // Linearization point for FixedCustom.
  std::optional<ManifoldGrid> custom;

  static BasePointPolicy mean() { return {}; }
  static BasePointPolicy fixed(ManifoldGrid m) {
    return {BasePointKind::FixedCustom, std::move(m)};
  }
  static BasePointPolicy track() { return {BasePointKind::TrackPrimal, {}}; }
};

enum class StopKind { IterCount, CostBelow, ChangeBelow };

struct StopRule {
  StopKind kind = StopKind::IterCount;
  double threshold = 0.0;
};

struct SolverConfig {
  double sigma0 = 0.5;
  double tau0 = 0.5;
  double theta0 = 1.0;
  double gamma = 0.0;
  int max_iter = 500;
  Variant variant = Variant::LinearizedDualRelaxed;
  BasePointPolicy base_point;
  int q = 1;
  double alpha = 1.0;
  StopRule stop;
  std::uint64_t seed = 42;

  // Run even when sigma0 tau0 L^2 >= 1.
  bool allow_step_violation = false;
  // Candidate minimizer used for C(k). Without one, C(k) is evaluated after
  // the run against the final iterate when the history is kept.
  std::optional<ManifoldGrid> reference;
  // Keep every primal and dual iterate in the result.
  bool keep_history = false;
  // When false the elapsed_ms column is written as 0, which makes traces
  // byte-for-byte reproducible.
  bool record_time = true;
  LogDifferential differential = LogDifferential::ClosedForm;
  // CPPA step lambda_k = cppa_lambda0 / k.
  double cppa_lambda0 = 4.0;
  // Gradient steps for the FixedMean base point.
  int mean_steps = 20;

  // Throws ConfigError on invalid values.
  void validate() const;
};

struct TraceRow {
  int k = 0;
  double cost = 0.0;
  double ck = 0.0;
  double primal_change = 0.0;
  double dual_change = 0.0;
  double elapsed_ms = 0.0;
};

// Row k describes iterate k: its cost, C(k), and the change to iterate k+1.
// The last row has NaN in the columns that need a successor.
struct IterationTrace {
  std::vector<TraceRow> rows;

  void write_csv(std::ostream& out) const;
  static IterationTrace read_csv(std::istream& in);
};

struct SolverResult {
  ManifoldGrid p;
  std::optional<DualField> xi;
  ManifoldGrid base_point;
  IterationTrace trace;
  int iterations = 0;
  double operator_norm = 0.0;
  // Filled when keep_history is set: p^0..p^K and xi^0..xi^K.
  std::vector<ManifoldGrid> primal_history;
  std::vector<DualField> dual_history;
};

struct StepUpdate {
  double theta;
  double tau;
  double sigma;
};

// theta_k = (1 + 2 gamma tau_k)^{-1/2}, tau_{k+1} = tau_k theta_k,
// sigma_{k+1} = sigma_k / theta_k.
StepUpdate step_schedule(double tau, double sigma, double gamma);

// Riemannian center of mass of all pixels by `steps` gradient steps from the
// first pixel.
Vec riemannian_mean(const ManifoldGrid& f, int steps = 20);

// Linearization point selected by the policy (the start grid for TrackPrimal).
ManifoldGrid initial_base_point(const ManifoldGrid& f, const ManifoldGrid& p0,
                                const SolverConfig& config);

// Generic solvers on a saddle-point problem, started from p0 and xi0 = 0.
SolverResult solve_linearized(const SaddlePointProblem& problem,
                              const ManifoldGrid& p0,
                              const SolverConfig& config);
SolverResult solve_exact(const SaddlePointProblem& problem,
                         const ManifoldGrid& p0, const SolverConfig& config);

// l2-TV denoising of f started from p0 = f.
SolverResult rcpa_linearized(const ManifoldGrid& f, const SolverConfig& config);
SolverResult rcpa_exact(const ManifoldGrid& f, const SolverConfig& config);
SolverResult cppa(const ManifoldGrid& f, const SolverConfig& config);
// Dispatches on config.variant.
SolverResult solve(const ManifoldGrid& f, const SolverConfig& config);

// C(k) = (1/tau) d^2(p^k, p~^k) + <xi_bar^k, D Lambda(m)[zeta_k]> with
// xi_bar^k = 2 xi^k - xi^{k-1} and p~^k the point before the primal prox.
double compute_Ck(const SaddlePointProblem& problem, const ManifoldGrid& m,
                  const ManifoldGrid& p_k, const ManifoldGrid& p_next,
                  const DualField& xi_k, const DualField& xi_prev, double tau,
                  const ManifoldGrid& p_hat);

struct BoundednessReport {
  bool ok = true;
  // max_k (value_k - value_0); <= slack when ok.
  double margin = 0.0;
  std::vector<double> values;
};

// (1/2sigma)|xi_hat - xi^k|^2 + (1/2tau) d^2(p^k, p_hat) compared to its
// value at k = 0.
BoundednessReport boundedness_check(const std::vector<ManifoldGrid>& primal,
                                    const std::vector<DualField>& dual,
                                    const ManifoldGrid& p_hat,
                                    const DualField& xi_hat, double tau,
                                    double sigma, double slack = 1e-9);

}  // namespace rcpa
