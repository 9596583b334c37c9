#include "rcpa/proximal.hpp"

#include <algorithm>
#include <cmath>

#include "rcpa/errors.hpp"

namespace rcpa {

namespace {
// Projected entries land on the sphere only up to rounding; anything this
// close to the unit ball counts as inside so the projection is idempotent.
constexpr double kBallSlack = 1e-13;
}  // namespace

ProxParams::ProxParams(double lambda_, double alpha_)
    : lambda(lambda_), alpha(alpha_) {
  if (!(lambda > 0.0)) throw ContractError("prox step lambda must be > 0");
  if (!(alpha > 0.0)) throw ContractError("fidelity weight alpha must be > 0");
}

Vec prox_sqdist(const Manifold& M, const Vec& f, const Vec& p,
                const ProxParams& params) {
  const double t = params.lambda / (params.alpha + params.lambda);
  return M.exp(p, t * M.log(p, f));
}

ManifoldGrid prox_sqdist(const ManifoldGrid& f, const ManifoldGrid& p,
                         const ProxParams& params) {
  if (!f.same_shape(p)) throw ContractError("prox_sqdist: grid shape mismatch");
  const Manifold& M = p.manifold();
  std::vector<Vec> out;
  out.reserve(p.size());
  for (std::size_t n = 0; n < p.size(); ++n)
    out.push_back(prox_sqdist(M, f[n], p[n], params));
  return ManifoldGrid(M, p.rows(), p.cols(), std::move(out));
}

DualField prox_dual_ball(const DualField& xi, int q) {
  if (q != 1 && q != 2) throw ContractError("prox_dual_ball: q must be 1 or 2");
  const Manifold& M = xi.manifold();
  DualField out = xi;
  if (q == 1) {
    for (std::size_t n = 0; n < xi.size(); ++n) {
      const double len = M.dual_norm(xi.base(n), xi[n]);
      if (len > 1.0 + kBallSlack) out[n] = xi[n] / len;
    }
    return out;
  }
  const auto depth = static_cast<std::size_t>(xi.depth());
  for (std::size_t start = 0; start < xi.size(); start += depth) {
    double acc = 0.0;
    for (std::size_t k = 0; k < depth; ++k) {
      const double len = M.dual_norm(xi.base(start + k), xi[start + k]);
      acc += len * len;
    }
    const double group = std::sqrt(acc);
    if (group > 1.0 + kBallSlack)
      for (std::size_t k = 0; k < depth; ++k)
        out[start + k] = xi[start + k] / group;
  }
  return out;
}

std::pair<Vec, Vec> prox_pairwise_distance(const Manifold& M, const Vec& p,
                                           const Vec& q, double lambda) {
  if (!(lambda > 0.0))
    throw ContractError("prox_pairwise_distance: lambda must be > 0");
  const double d = M.dist(p, q);
  if (d == 0.0) return {p, q};
  const double t = std::min(lambda, 0.5 * d) / d;
  return {M.exp(p, t * M.log(p, q)), M.exp(q, t * M.log(q, p))};
}

}  // namespace rcpa
