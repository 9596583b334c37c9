#pragma once

#include <utility>

#include "rcpa/grid.hpp"
#include "rcpa/manifold.hpp"

namespace rcpa {

// Step lambda of a proximal map and the fidelity weight alpha of the l2-TV
// energy (1/2alpha) sum d(f,p)^2 + TV.
struct ProxParams {
  double lambda;
  double alpha;

  ProxParams(double lambda_, double alpha_);
};

// prox of p -> (1/2alpha) d(f,p)^2 with step lambda, evaluated at p: the point
// at t = lambda / (alpha + lambda) on the geodesic from p to f.
Vec prox_sqdist(const Manifold& M, const Vec& f, const Vec& p,
                const ProxParams& params);
ManifoldGrid prox_sqdist(const ManifoldGrid& f, const ManifoldGrid& p,
                         const ProxParams& params);

// Projection onto the unit ball of the dual TV norm. The conjugate of a norm
// is the indicator of that ball, so its prox is this projection for every
// dual step sigma; there is deliberately no sigma argument.
//   q == 1 (anisotropic): every entry is scaled by 1 / max(1, |xi_ijk|).
//   q == 2 (isotropic):   the entries of a pixel share the factor
//                         1 / max(1, sqrt(sum_k |xi_ijk|^2)).
DualField prox_dual_ball(const DualField& xi, int q);

// prox of lambda * d(x,y) at (p,q): both points move towards each other along
// the connecting geodesic by arclength min(lambda, d(p,q)/2).
std::pair<Vec, Vec> prox_pairwise_distance(const Manifold& M, const Vec& p,
                                           const Vec& q, double lambda);

}  // namespace rcpa
