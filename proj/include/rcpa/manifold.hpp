#pragma once

#include <Eigen/Core>

#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace rcpa {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ManifoldKind { Euclidean, Sphere2, Spd };

// Geometry kernels on one of three manifolds, all working on flat coordinate
// vectors:
//   Euclidean(d): points and vectors are R^d.
//   Sphere2:      points are unit vectors in R^3, tangent vectors are ambient
//                 R^3 vectors orthogonal to the base point.
//   Spd(n):       points and tangent vectors are n x n matrices stored column
//                 major (n*n entries), tangent vectors symmetric. The metric is
//                 the affine invariant one, <X,Y>_p = tr(X p^-1 Y p^-1).
//
// Cotangent vectors use the same storage; the duality pairing is the plain
// coordinate dot product (Frobenius on SPD). flat/sharp are identities except
// on SPD where flat(X) = p^-1 X p^-1.
class Manifold {
 public:
  static Manifold euclidean(int dim);
  static Manifold sphere2();
  static Manifold spd(int n);
  // Accepts the names produced by name(): "euclidean3", "sphere2", "spd3".
  static Manifold parse(std::string_view name);

  ManifoldKind kind() const { return kind_; }
  // Euclidean dimension or SPD matrix size.
  int parameter() const { return param_; }
  int coord_size() const;
  int dimension() const;
  // Number of values in the on-disk chart (upper triangle for SPD).
  int chart_size() const;
  std::string name() const;
  bool is_hadamard() const { return kind_ != ManifoldKind::Sphere2; }

  bool operator==(const Manifold&) const = default;

  bool is_point(const Vec& p) const;
  bool is_tangent(const Vec& p, const Vec& X) const;
  // Throws DomainError with a description of the violated invariant.
  void check_point(const Vec& p) const;
  void check_tangent(const Vec& p, const Vec& X) const;

  Vec exp(const Vec& p, const Vec& X) const;
  Vec log(const Vec& p, const Vec& q) const;
  double dist(const Vec& p, const Vec& q) const;
  double inner(const Vec& p, const Vec& X, const Vec& Y) const;
  double norm(const Vec& p, const Vec& X) const;
  Vec transport(const Vec& p, const Vec& q, const Vec& X) const;
  // Point at parameter t on the shortest geodesic from p to q.
  Vec geodesic(const Vec& p, const Vec& q, double t) const;

  Vec flat(const Vec& p, const Vec& X) const;
  Vec sharp(const Vec& p, const Vec& xi) const;
  double pairing(const Vec& xi, const Vec& X) const { return xi.dot(X); }
  double dual_norm(const Vec& p, const Vec& xi) const;

  Vec zero_vector() const { return Vec::Zero(coord_size()); }
  // Orthogonal projection onto T_p (symmetrization on SPD).
  Vec project_tangent(const Vec& p, const Vec& X) const;
  // Orthonormal basis of T_p with respect to the metric at p.
  std::vector<Vec> tangent_basis(const Vec& p) const;

  // Applies a Jacobi-field coefficient in the curvature eigenframe of the
  // geodesic with initial velocity V at p: every component of Y along an
  // eigenvector of W -> R(W, V)V with eigenvalue kappa is scaled by
  // coeff(kappa).
  Vec jacobi_scale(const Vec& p, const Vec& V, const Vec& Y,
                   const std::function<double(double)>& coeff) const;

  Vec random_point(std::mt19937_64& rng, double spread = 1.0) const;
  Vec random_tangent(const Vec& p, std::mt19937_64& rng,
                     double scale = 1.0) const;

  // Chart conversion used by the CSV formats.
  std::vector<double> to_chart(const Vec& p) const;
  Vec from_chart(const std::vector<double>& values) const;

 private:
  Manifold(ManifoldKind kind, int param) : kind_(kind), param_(param) {}

  ManifoldKind kind_;
  int param_;
};

// Typed, base-checked interface. These wrap the raw kernels above and throw
// ContractError when a vector is attached to the wrong base point.
struct ManifoldPoint {
  Vec coords;
};

struct TangentVector {
  ManifoldPoint base;
  Vec coords;
};

struct CotangentVector {
  ManifoldPoint base;
  Vec coords;
};

// Point of the tangent bundle: a base point together with a vector there.
struct BundlePoint {
  ManifoldPoint base;
  TangentVector vector;
};

// Tangent vector of the tangent bundle under the component-wise structure:
// a horizontal part moving the base and a vertical part in the fiber.
struct BundleTangent {
  TangentVector horizontal;
  TangentVector vertical;
};

ManifoldPoint exp(const Manifold& M, const ManifoldPoint& p,
                  const TangentVector& X);
TangentVector log(const Manifold& M, const ManifoldPoint& p,
                  const ManifoldPoint& q);
double dist(const Manifold& M, const ManifoldPoint& p, const ManifoldPoint& q);
double inner(const Manifold& M, const ManifoldPoint& p, const TangentVector& X,
             const TangentVector& Y);
double norm(const Manifold& M, const TangentVector& X);
TangentVector parallel_transport(const Manifold& M, const ManifoldPoint& p,
                                 const ManifoldPoint& q,
                                 const TangentVector& X);
CotangentVector parallel_transport(const Manifold& M, const ManifoldPoint& p,
                                   const ManifoldPoint& q,
                                   const CotangentVector& xi);
CotangentVector flat(const Manifold& M, const ManifoldPoint& p,
                     const TangentVector& X);
TangentVector sharp(const Manifold& M, const ManifoldPoint& p,
                    const CotangentVector& xi);
double pairing(const CotangentVector& xi, const TangentVector& X);

// bundle_log((b,V),(b',V')) = (log_b b', PT_{b'->b} V' - V); bundle_exp is its
// inverse.
BundleTangent bundle_log(const Manifold& M, const BundlePoint& x,
                         const BundlePoint& y);
BundlePoint bundle_exp(const Manifold& M, const BundlePoint& x,
                       const BundleTangent& Y);
// Norm of bundle_log, i.e. sqrt(|log_b b'|^2 + |PT V' - V|^2).
double bundle_dist(const Manifold& M, const BundlePoint& x,
                   const BundlePoint& y);

// ---------------------------------------------------------------------------

namespace detail {
// Symmetric eigendecomposition of an n x n matrix given column major.
struct SymEig {
  Mat vectors;
  Vec values;
};
SymEig sym_eig(const Mat& A);
Mat sym_apply(const SymEig& e, double (*fn)(double));
Mat as_matrix(const Vec& coords, int n);
Vec as_vector(const Mat& A);
}  // namespace detail

}  // namespace rcpa
