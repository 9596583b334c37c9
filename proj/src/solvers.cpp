#include "rcpa/solvers.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <locale>
#include <ostream>
#include <sstream>
#include <string>

#include "rcpa/errors.hpp"
#include "rcpa/proximal.hpp"

namespace rcpa {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Above this many stored pixel-iterates the post-hoc C(k) pass is skipped.
constexpr std::size_t kHistoryBudget = 2'000'000;

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled)
      : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    if (!enabled_) return 0.0;
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

bool is_fixed(const SolverConfig& c) {
  return c.base_point.kind != BasePointKind::TrackPrimal;
}

void check_step_condition(const SolverConfig& config, double L) {
  const double product = config.sigma0 * config.tau0 * L * L;
  if (product >= 1.0 && !config.allow_step_violation) {
    std::ostringstream msg;
    msg << "step condition violated: sigma*tau*L^2 = " << product
        << " >= 1 (L = " << L << ")";
    throw StepConditionError(msg.str());
  }
}

// exp_p(PT_{m->p}(-tau X)) for a depth-1 tangent field X at m.
ManifoldGrid primal_predictor(const ManifoldGrid& p, const TangentField& X,
                              double tau) {
  return grid_exp(p, grid_transport((-tau) * X, p));
}

bool should_stop_on_change(const SolverConfig& c, double primal_change,
                           double dual_change) {
  return c.stop.kind == StopKind::ChangeBelow &&
         primal_change < c.stop.threshold &&
         (std::isnan(dual_change) || dual_change < c.stop.threshold);
}

double relaxation(const SolverConfig& c, const StepUpdate& s) {
  return c.gamma == 0.0 ? c.theta0 : s.theta;
}

void push_final_row(SolverResult& r, const SaddlePointProblem* problem,
                    double cost, const Stopwatch& clock) {
  TraceRow row;
  row.k = r.iterations;
  row.cost = problem ? problem->cost(r.p) : cost;
  row.ck = kNaN;
  row.primal_change = kNaN;
  row.dual_change = kNaN;
  row.elapsed_ms = clock.ms();
  r.trace.rows.push_back(row);
}

// Fills C(k) after the run against the final iterate.
void post_hoc_ck(const SaddlePointProblem& problem, const ManifoldGrid& m,
                 const std::vector<ManifoldGrid>& primal,
                 const std::vector<DualField>& dual,
                 const std::vector<double>& taus, IterationTrace& trace) {
  const ManifoldGrid& p_hat = primal.back();
  for (std::size_t k = 0; k + 1 < primal.size(); ++k)
    trace.rows[k].ck =
        compute_Ck(problem, m, primal[k], primal[k + 1], dual[k],
                   dual[k == 0 ? 0 : k - 1], taus[k], p_hat);
}

}  // namespace

void SolverConfig::validate() const {
  if (!(sigma0 > 0.0) || !(tau0 > 0.0))
    throw ConfigError("sigma and tau must be positive");
  if (!(theta0 >= 0.0 && theta0 <= 1.0))
    throw ConfigError("theta must lie in [0, 1]");
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be nonnegative");
  if (max_iter < 0) throw ConfigError("iteration count must be nonnegative");
  if (q != 1 && q != 2) throw ConfigError("q must be 1 or 2");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (base_point.kind == BasePointKind::FixedCustom && !base_point.custom)
    throw ConfigError("custom base point policy without a base point");
  if (!(cppa_lambda0 > 0.0)) throw ConfigError("CPPA lambda must be positive");
  if (mean_steps < 0) throw ConfigError("mean steps must be nonnegative");
  if (stop.kind != StopKind::IterCount && !std::isfinite(stop.threshold))
    throw ConfigError("stopping threshold must be finite");
}

void IterationTrace::write_csv(std::ostream& out) const {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << std::setprecision(17);
  s << "k,cost,ck,primal_change,dual_change,elapsed_ms\n";
  for (const auto& r : rows)
    s << r.k << ',' << r.cost << ',' << r.ck << ',' << r.primal_change << ','
      << r.dual_change << ',' << r.elapsed_ms << '\n';
  out << s.str();
}

IterationTrace IterationTrace::read_csv(std::istream& in) {
  IterationTrace t;
  std::string line;
  if (!std::getline(in, line) ||
      line != "k,cost,ck,primal_change,dual_change,elapsed_ms")
    throw IoError("trace: missing or malformed header");
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ls, cell, ',')) {
      try {
        v.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("trace line " + std::to_string(lineno) +
                      ": bad number '" + cell + "'");
      }
    }
    if (v.size() != 6)
      throw IoError("trace line " + std::to_string(lineno) +
                    ": expected 6 columns");
    t.rows.push_back({static_cast<int>(v[0]), v[1], v[2], v[3], v[4], v[5]});
  }
  return t;
}

StepUpdate step_schedule(double tau, double sigma, double gamma) {
  if (!(tau > 0.0) || !(sigma > 0.0) || !(gamma >= 0.0))
    throw ContractError("step_schedule: invalid steps");
  if (gamma == 0.0) return {1.0, tau, sigma};
  const double theta = 1.0 / std::sqrt(1.0 + 2.0 * gamma * tau);
  return {theta, tau * theta, sigma / theta};
}

Vec riemannian_mean(const ManifoldGrid& f, int steps) {
  const Manifold& M = f.manifold();
  Vec x = f[0];
  const double w = 1.0 / static_cast<double>(f.size());
  for (int s = 0; s < steps; ++s) {
    Vec g = M.zero_vector();
    for (std::size_t n = 0; n < f.size(); ++n) g += w * M.log(x, f[n]);
    x = M.exp(x, g);
  }
  return x;
}

ManifoldGrid initial_base_point(const ManifoldGrid& f, const ManifoldGrid& p0,
                                const SolverConfig& config) {
  switch (config.base_point.kind) {
    case BasePointKind::FixedMean:
      return ManifoldGrid::constant(f.manifold(), f.rows(), f.cols(),
                                    riemannian_mean(f, config.mean_steps));
    case BasePointKind::FixedCustom: {
      const ManifoldGrid& m = *config.base_point.custom;
      if (!m.same_shape(p0))
        throw ConfigError("custom base point grid does not match the data");
      m.validate();
      return m;
    }
    case BasePointKind::TrackPrimal:
      return p0;
  }
  throw ConfigError("unknown base point policy");
}

double compute_Ck(const SaddlePointProblem& problem, const ManifoldGrid& m,
                  const ManifoldGrid& p_k, const ManifoldGrid& p_next,
                  const DualField& xi_k, const DualField& xi_prev, double tau,
                  const ManifoldGrid& p_hat) {
  const DualField xi_bar = 2.0 * xi_k - xi_prev;
  const TangentField X = sharp(problem.adjoint(m, xi_bar));
  const ManifoldGrid p_tilde = primal_predictor(p_k, X, tau);
  const double first = grid_dist_sq(p_k, p_tilde) / tau;

  const TangentField a = grid_log(p_k, p_next);
  const TangentField b = grid_transport(grid_log(p_tilde, p_hat), p_k);
  const TangentField zeta = grid_transport(a - b, m) - grid_log(m, p_next) +
                            grid_log(m, p_hat);
  return first + pairing(xi_bar, problem.differential(m, zeta));
}

BoundednessReport boundedness_check(const std::vector<ManifoldGrid>& primal,
                                    const std::vector<DualField>& dual,
                                    const ManifoldGrid& p_hat,
                                    const DualField& xi_hat, double tau,
                                    double sigma, double slack) {
  if (primal.size() != dual.size() || primal.empty())
    throw ContractError("boundedness_check: history lengths differ");
  BoundednessReport report;
  for (std::size_t k = 0; k < primal.size(); ++k) {
    const double dn = dual_norm(xi_hat - dual[k]);
    report.values.push_back(dn * dn / (2.0 * sigma) +
                            grid_dist_sq(primal[k], p_hat) / (2.0 * tau));
  }
  report.margin = 0.0;
  for (double v : report.values)
    report.margin = std::max(report.margin, v - report.values.front());
  report.ok = report.margin <= slack;
  return report;
}

SolverResult solve_linearized(const SaddlePointProblem& problem,
                              const ManifoldGrid& p0,
                              const SolverConfig& config) {
  config.validate();
  const bool fixed = is_fixed(config);
  ManifoldGrid m = initial_base_point(problem.data(), p0, config);
  SolverResult r{p0, std::nullopt, m, {}, 0, 0.0, {}, {}};
  r.operator_norm = problem.operator_norm(m, 1e-10, 20000, config.seed).value;
  check_step_condition(config, r.operator_norm);

  const bool online_ck = fixed && config.reference.has_value();
  const bool store = config.keep_history ||
                     (fixed && !config.reference &&
                      p0.size() * static_cast<std::size_t>(config.max_iter + 1) <=
                          kHistoryBudget);
  double tau = config.tau0;
  double sigma = config.sigma0;
  ManifoldGrid p = p0;
  DualField xi = problem.zero_dual(m);
  DualField xi_bar = xi;
  DualField xi_prev = xi;
  std::vector<double> taus;
  if (store) {
    r.primal_history.push_back(p);
    r.dual_history.push_back(xi);
  }

  Stopwatch clock(config.record_time);
  int k = 0;
  for (; k < config.max_iter; ++k) {
    TraceRow row;
    row.k = k;
    row.cost = problem.cost(p);
    row.ck = kNaN;
    if (config.stop.kind == StopKind::CostBelow &&
        row.cost <= config.stop.threshold)
      break;
    row.elapsed_ms = clock.ms();
    try {
      const TangentField X = sharp(problem.adjoint(m, xi_bar));
      const ManifoldGrid p_next =
          problem.prox_primal(primal_predictor(p, X, tau), tau);
      const TangentField D = problem.differential(m, grid_log(m, p_next));
      DualField xi_next = problem.prox_dual(m, xi + sigma * flat(D), sigma);

      if (online_ck)
        row.ck = compute_Ck(problem, m, p, p_next, xi, xi_prev, tau,
                            *config.reference);
      const StepUpdate step = step_schedule(tau, sigma, config.gamma);
      const double theta = relaxation(config, step);
      DualField xi_bar_next = xi_next + theta * (xi_next - xi);
      row.primal_change = grid_dist(p, p_next);
      row.dual_change = dual_norm(xi_next - xi);

      if (!fixed) {
        m = p_next;
        xi_next = problem.transport_dual(xi_next, m);
        xi_bar_next = problem.transport_dual(xi_bar_next, m);
        xi = problem.transport_dual(xi, m);
      }
      taus.push_back(tau);
      xi_prev = std::move(xi);
      xi = std::move(xi_next);
      xi_bar = std::move(xi_bar_next);
      p = p_next;
      tau = step.tau;
      sigma = step.sigma;
    } catch (const DomainError& e) {
      throw SolverError(k, e.what());
    }
    r.trace.rows.push_back(row);
    if (store) {
      r.primal_history.push_back(p);
      r.dual_history.push_back(xi);
    }
    if (should_stop_on_change(config, row.primal_change, row.dual_change)) {
      ++k;
      break;
    }
  }
  r.iterations = k;
  r.p = p;
  r.xi = xi;
  r.base_point = m;
  push_final_row(r, &problem, 0.0, clock);

  if (fixed && !config.reference && store && !taus.empty())
    post_hoc_ck(problem, m, r.primal_history, r.dual_history, taus, r.trace);
  if (!config.keep_history) {
    r.primal_history.clear();
    r.dual_history.clear();
  }
  return r;
}

SolverResult solve_exact(const SaddlePointProblem& problem,
                         const ManifoldGrid& p0, const SolverConfig& config) {
  config.validate();
  if (!is_fixed(config))
    throw ConfigError("the exact variant needs a fixed base point");
  const ManifoldGrid m = initial_base_point(problem.data(), p0, config);
  SolverResult r{p0, std::nullopt, m, {}, 0, 0.0, {}, {}};
  r.operator_norm = problem.operator_norm(m, 1e-10, 20000, config.seed).value;
  check_step_condition(config, r.operator_norm);

  double tau = config.tau0;
  double sigma = config.sigma0;
  ManifoldGrid p = p0;
  ManifoldGrid p_bar = p0;
  DualField xi = problem.zero_dual(m);
  if (config.keep_history) {
    r.primal_history.push_back(p);
    r.dual_history.push_back(xi);
  }

  Stopwatch clock(config.record_time);
  int k = 0;
  for (; k < config.max_iter; ++k) {
    TraceRow row;
    row.k = k;
    row.cost = problem.cost(p);
    row.ck = kNaN;
    if (config.stop.kind == StopKind::CostBelow &&
        row.cost <= config.stop.threshold)
      break;
    row.elapsed_ms = clock.ms();
    try {
      const TangentField R = problem.exact_residual(m, p_bar);
      DualField xi_next = problem.prox_dual(m, xi + sigma * flat(R), sigma);
      const TangentField X = sharp(problem.adjoint(m, xi_next));
      const ManifoldGrid p_next =
          problem.prox_primal(primal_predictor(p, X, tau), tau);
      const StepUpdate step = step_schedule(tau, sigma, config.gamma);
      const double theta = relaxation(config, step);
      p_bar = grid_exp(p_next, (-theta) * grid_log(p_next, p));

      row.primal_change = grid_dist(p, p_next);
      row.dual_change = dual_norm(xi_next - xi);
      xi = std::move(xi_next);
      p = p_next;
      tau = step.tau;
      sigma = step.sigma;
    } catch (const DomainError& e) {
      throw SolverError(k, e.what());
    }
    r.trace.rows.push_back(row);
    if (config.keep_history) {
      r.primal_history.push_back(p);
      r.dual_history.push_back(xi);
    }
    if (should_stop_on_change(config, row.primal_change, row.dual_change)) {
      ++k;
      break;
    }
  }
  r.iterations = k;
  r.p = p;
  r.xi = xi;
  push_final_row(r, &problem, 0.0, clock);
  return r;
}

SolverResult rcpa_linearized(const ManifoldGrid& f,
                             const SolverConfig& config) {
  const TvProblem problem(f, config.alpha, config.q, config.differential);
  return solve_linearized(problem, f, config);
}

SolverResult rcpa_exact(const ManifoldGrid& f, const SolverConfig& config) {
  const TvProblem problem(f, config.alpha, config.q, config.differential);
  return solve_exact(problem, f, config);
}

SolverResult cppa(const ManifoldGrid& f, const SolverConfig& config) {
  config.validate();
  if (config.q != 1)
    throw ConfigError("CPPA supports only the anisotropic model (q = 1)");
  f.validate();
  const Manifold& M = f.manifold();
  const TvProblem problem(f, config.alpha, 1, config.differential);
  SolverResult r{f, std::nullopt, f, {}, 0, 0.0, {}, {}};
  if (config.keep_history) r.primal_history.push_back(f);

  // One pass over the pairs (x, x + e_dir) whose coordinate along dir has the
  // given parity; these pairs are disjoint, so their proxes commute.
  auto pair_pass = [&](ManifoldGrid& p, int dir, int parity, double lambda) {
    for (int i = 0; i < p.rows(); ++i)
      for (int j = 0; j < p.cols(); ++j) {
        const int ni = i + (dir == 0 ? 1 : 0);
        const int nj = j + (dir == 1 ? 1 : 0);
        if (ni >= p.rows() || nj >= p.cols()) continue;
        if ((dir == 0 ? i : j) % 2 != parity) continue;
        auto [a, b] = prox_pairwise_distance(M, p.at(i, j), p.at(ni, nj), lambda);
        p.at(i, j) = std::move(a);
        p.at(ni, nj) = std::move(b);
      }
  };

  Stopwatch clock(config.record_time);
  ManifoldGrid p = f;
  int k = 0;
  for (; k < config.max_iter; ++k) {
    TraceRow row;
    row.k = k;
    row.cost = problem.cost(p);
    row.ck = kNaN;
    row.dual_change = kNaN;
    if (config.stop.kind == StopKind::CostBelow &&
        row.cost <= config.stop.threshold)
      break;
    row.elapsed_ms = clock.ms();
    const double lambda = config.cppa_lambda0 / static_cast<double>(k + 1);
    ManifoldGrid next = p;
    try {
      next = prox_sqdist(f, next, ProxParams(lambda, config.alpha));
      for (int dir = 0; dir < 2; ++dir)
        for (int parity = 0; parity < 2; ++parity)
          pair_pass(next, dir, parity, lambda);
    } catch (const DomainError& e) {
      throw SolverError(k, e.what());
    }
    row.primal_change = grid_dist(p, next);
    p = std::move(next);
    r.trace.rows.push_back(row);
    if (config.keep_history) r.primal_history.push_back(p);
    if (should_stop_on_change(config, row.primal_change, kNaN)) {
      ++k;
      break;
    }
  }
  r.iterations = k;
  r.p = p;
  push_final_row(r, &problem, 0.0, clock);
  return r;
}

SolverResult solve(const ManifoldGrid& f, const SolverConfig& config) {
  switch (config.variant) {
    case Variant::ExactPrimalRelaxed:
      return rcpa_exact(f, config);
    case Variant::LinearizedDualRelaxed:
      return rcpa_linearized(f, config);
    case Variant::Cppa:
      return cppa(f, config);
  }
  throw ConfigError("unknown solver variant");
}

}  // namespace rcpa
