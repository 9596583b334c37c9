#include "rcpa/manifold.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include <cmath>
#include <sstream>

#include "rcpa/errors.hpp"

namespace rcpa {

namespace {

constexpr double kSphereNormTol = 1e-12;
constexpr double kSphereTangentTol = 1e-10;
constexpr double kSpdSymTol = 1e-10;
constexpr double kSpdEigenFloor = 1e-14;

// p^{1/2} and p^{-1/2} from a single decomposition.
struct SpdRoots {
  Mat sqrt;
  Mat isqrt;
};

Mat symmetrized(const Mat& A) { return 0.5 * (A + A.transpose()); }

SpdRoots spd_roots(const Mat& p) {
  const auto e = detail::sym_eig(p);
  if (e.values.minCoeff() <= kSpdEigenFloor) {
    std::ostringstream msg;
    msg << "matrix is not positive definite (min eigenvalue "
        << e.values.minCoeff() << ")";
    throw DomainError(msg.str());
  }
  const Vec r = e.values.cwiseSqrt();
  return {e.vectors * r.asDiagonal() * e.vectors.transpose(),
          e.vectors * r.cwiseInverse().asDiagonal() * e.vectors.transpose()};
}

Mat spd_inverse(const Mat& p) {
  const auto e = detail::sym_eig(p);
  if (e.values.minCoeff() <= kSpdEigenFloor)
    throw DomainError("matrix is not positive definite");
  return e.vectors * e.values.cwiseInverse().asDiagonal() *
         e.vectors.transpose();
}

double safe_exp(double x) { return std::exp(x); }
double safe_log(double x) {
  if (x <= kSpdEigenFloor)
    throw DomainError("logarithm of a matrix that is not positive definite");
  return std::log(x);
}
double safe_sqrt(double x) { return std::sqrt(std::max(x, 0.0)); }

void require_same_base(const ManifoldPoint& a, const ManifoldPoint& b,
                       const char* what) {
  if (a.coords.size() != b.coords.size() ||
      !(a.coords.array() == b.coords.array()).all())
    throw ContractError(std::string(what) + ": base point mismatch");
}

}  // namespace

namespace detail {

SymEig sym_eig(const Mat& A) {
  Eigen::SelfAdjointEigenSolver<Mat> solver(symmetrized(A));
  if (solver.info() != Eigen::Success)
    throw DomainError("symmetric eigendecomposition failed");
  return {solver.eigenvectors(), solver.eigenvalues()};
}

Mat sym_apply(const SymEig& e, double (*fn)(double)) {
  Vec mapped = e.values.unaryExpr(fn);
  return e.vectors * mapped.asDiagonal() * e.vectors.transpose();
}

Mat as_matrix(const Vec& coords, int n) {
  return Eigen::Map<const Mat>(coords.data(), n, n);
}

Vec as_vector(const Mat& A) {
  return Eigen::Map<const Vec>(A.data(), A.size());
}

}  // namespace detail

using detail::as_matrix;
using detail::as_vector;

Manifold Manifold::euclidean(int dim) {
  if (dim < 1) throw ContractError("Euclidean dimension must be >= 1");
  return Manifold(ManifoldKind::Euclidean, dim);
}

Manifold Manifold::sphere2() { return Manifold(ManifoldKind::Sphere2, 2); }

Manifold Manifold::spd(int n) {
  if (n < 1) throw ContractError("SPD matrix size must be >= 1");
  return Manifold(ManifoldKind::Spd, n);
}

Manifold Manifold::parse(std::string_view name) {
  auto suffix = [&](std::string_view prefix) -> int {
    const auto rest = name.substr(prefix.size());
    if (rest.empty()) throw ConfigError("missing size in manifold name");
    int value = 0;
    for (char c : rest) {
      if (c < '0' || c > '9')
        throw ConfigError("invalid manifold name '" + std::string(name) +
                            "'");
      value = value * 10 + (c - '0');
    }
    return value;
  };
  if (name == "sphere2") return sphere2();
  if (name.starts_with("euclidean") || name.starts_with("spd")) {
    const bool euc = name.starts_with("euclidean");
    const int size = suffix(euc ? "euclidean" : "spd");
    if (size < 1) throw ConfigError("manifold size must be >= 1");
    return euc ? euclidean(size) : spd(size);
  }
  throw ConfigError("unknown manifold '" + std::string(name) +
                      "' (expected euclidean<d>, sphere2 or spd<n>)");
}

int Manifold::coord_size() const {
  switch (kind_) {
    case ManifoldKind::Euclidean: return param_;
    case ManifoldKind::Sphere2: return 3;
    case ManifoldKind::Spd: return param_ * param_;
  }
  return 0;
}

int Manifold::dimension() const {
  switch (kind_) {
    case ManifoldKind::Euclidean: return param_;
    case ManifoldKind::Sphere2: return 2;
    case ManifoldKind::Spd: return param_ * (param_ + 1) / 2;
  }
  return 0;
}

int Manifold::chart_size() const {
  return kind_ == ManifoldKind::Spd ? dimension() : coord_size();
}

std::string Manifold::name() const {
  switch (kind_) {
    case ManifoldKind::Euclidean: return "euclidean" + std::to_string(param_);
    case ManifoldKind::Sphere2: return "sphere2";
    case ManifoldKind::Spd: return "spd" + std::to_string(param_);
  }
  return {};
}

bool Manifold::is_point(const Vec& p) const {
  if (p.size() != coord_size() || !p.allFinite()) return false;
  switch (kind_) {
    case ManifoldKind::Euclidean:
      return true;
    case ManifoldKind::Sphere2:
      return std::abs(p.norm() - 1.0) <= kSphereNormTol;
    case ManifoldKind::Spd: {
      const Mat A = as_matrix(p, param_);
      if ((A - A.transpose()).norm() > kSpdSymTol * (1.0 + A.norm()))
        return false;
      return detail::sym_eig(A).values.minCoeff() > kSpdEigenFloor;
    }
  }
  return false;
}

bool Manifold::is_tangent(const Vec& p, const Vec& X) const {
  if (X.size() != coord_size() || !X.allFinite()) return false;
  switch (kind_) {
    case ManifoldKind::Euclidean:
      return true;
    case ManifoldKind::Sphere2:
      return std::abs(p.dot(X)) <= kSphereTangentTol * std::max(1.0, X.norm());
    case ManifoldKind::Spd: {
      const Mat A = as_matrix(X, param_);
      return (A - A.transpose()).norm() <= 1e-12 * std::max(1.0, A.norm());
    }
  }
  return false;
}

void Manifold::check_point(const Vec& p) const {
  if (!is_point(p))
    throw DomainError("coordinates are not a point of " + name());
}

void Manifold::check_tangent(const Vec& p, const Vec& X) const {
  if (!is_tangent(p, X))
    throw DomainError("coordinates are not a tangent vector of " + name());
}

Vec Manifold::exp(const Vec& p, const Vec& X) const {
  switch (kind_) {
    case ManifoldKind::Euclidean:
      return p + X;
    case ManifoldKind::Sphere2: {
      const double theta = X.norm();
      if (theta == 0.0) return p;
      Vec q = std::cos(theta) * p + (std::sin(theta) / theta) * X;
      return q / q.norm();
    }
    case ManifoldKind::Spd: {
      const auto r = spd_roots(as_matrix(p, param_));
      const Mat W = r.isqrt * as_matrix(X, param_) * r.isqrt;
      const Mat q = r.sqrt * detail::sym_apply(detail::sym_eig(W), safe_exp) *
                    r.sqrt;
      return as_vector(symmetrized(q));
    }
  }
  return p;
}

Vec Manifold::log(const Vec& p, const Vec& q) const {
  switch (kind_) {
    case ManifoldKind::Euclidean:
      return q - p;
    case ManifoldKind::Sphere2: {
      const double c = p.dot(q);
      Vec v = q - c * p;
      const double s = v.norm();
      if (s <= 1e-12) {
        if (c < 0.0)
          throw DomainError("log on sphere2 is undefined for antipodal points");
        return Vec::Zero(3);
      }
      const double theta = std::atan2(s, c);
      v *= theta / s;
      return v - p.dot(v) * p;
    }
    case ManifoldKind::Spd: {
      const auto r = spd_roots(as_matrix(p, param_));
      const Mat W = r.isqrt * as_matrix(q, param_) * r.isqrt;
      const Mat X =
          r.sqrt * detail::sym_apply(detail::sym_eig(W), safe_log) * r.sqrt;
      return as_vector(symmetrized(X));
    }
  }
  return q;
}

double Manifold::dist(const Vec& p, const Vec& q) const {
  switch (kind_) {
    case ManifoldKind::Euclidean:
      return (q - p).norm();
    case ManifoldKind::Sphere2:
      return std::atan2(Eigen::Vector3d(p).cross(Eigen::Vector3d(q)).norm(), p.dot(q));
    case ManifoldKind::Spd: {
      const auto r = spd_roots(as_matrix(p, param_));
      const Mat W = r.isqrt * as_matrix(q, param_) * r.isqrt;
      const Vec ev = detail::sym_eig(W).values;
      double acc = 0.0;
      for (int i = 0; i < ev.size(); ++i) {
        const double l = safe_log(ev(i));
        acc += l * l;
      }
      return std::sqrt(acc);
    }
  }
  return 0.0;
}

double Manifold::inner(const Vec& p, const Vec& X, const Vec& Y) const {
  if (kind_ != ManifoldKind::Spd) return X.dot(Y);
  const Mat pinv = spd_inverse(as_matrix(p, param_));
  const Mat A = pinv * as_matrix(X, param_);
  const Mat B = pinv * as_matrix(Y, param_);
  return (A.array() * B.transpose().array()).sum();
}

double Manifold::norm(const Vec& p, const Vec& X) const {
  return std::sqrt(std::max(inner(p, X, X), 0.0));
}

Vec Manifold::transport(const Vec& p, const Vec& q, const Vec& X) const {
  switch (kind_) {
    case ManifoldKind::Euclidean:
      return X;
    case ManifoldKind::Sphere2: {
      const double c = p.dot(q);
      if (1.0 + c <= 1e-12)
        throw DomainError(
            "parallel transport on sphere2 is undefined for antipodal points");
      Vec Y = X - (q.dot(X) / (1.0 + c)) * (p + q);
      return Y - q.dot(Y) * q;
    }
    case ManifoldKind::Spd: {
      const auto r = spd_roots(as_matrix(p, param_));
      const Mat W = r.isqrt * as_matrix(q, param_) * r.isqrt;
      const Mat S = detail::sym_apply(detail::sym_eig(W), safe_sqrt);
      const Mat E = r.sqrt * S * r.isqrt;
      return as_vector(symmetrized(E * as_matrix(X, param_) * E.transpose()));
    }
  }
  return X;
}

Vec Manifold::geodesic(const Vec& p, const Vec& q, double t) const {
  return exp(p, t * log(p, q));
}

Vec Manifold::flat(const Vec& p, const Vec& X) const {
  if (kind_ != ManifoldKind::Spd) return X;
  const Mat pinv = spd_inverse(as_matrix(p, param_));
  return as_vector(symmetrized(pinv * as_matrix(X, param_) * pinv));
}

Vec Manifold::sharp(const Vec& p, const Vec& xi) const {
  if (kind_ != ManifoldKind::Spd) return xi;
  const Mat P = as_matrix(p, param_);
  return as_vector(symmetrized(P * as_matrix(xi, param_) * P));
}

double Manifold::dual_norm(const Vec& p, const Vec& xi) const {
  if (kind_ != ManifoldKind::Spd) return xi.norm();
  const Mat P = as_matrix(p, param_);
  const Mat A = P * as_matrix(xi, param_);
  return std::sqrt(std::max((A.array() * A.transpose().array()).sum(), 0.0));
}

Vec Manifold::project_tangent(const Vec& p, const Vec& X) const {
  switch (kind_) {
    case ManifoldKind::Euclidean:
      return X;
    case ManifoldKind::Sphere2:
      return X - p.dot(X) * p;
    case ManifoldKind::Spd:
      return as_vector(symmetrized(as_matrix(X, param_)));
  }
  return X;
}

std::vector<Vec> Manifold::tangent_basis(const Vec& p) const {
  std::vector<Vec> basis;
  switch (kind_) {
    case ManifoldKind::Euclidean:
      for (int i = 0; i < param_; ++i) basis.push_back(Vec::Unit(param_, i));
      break;
    case ManifoldKind::Sphere2: {
      Eigen::Index axis = 0;
      p.cwiseAbs().minCoeff(&axis);
      Vec a = Vec::Unit(3, axis);
      a -= p.dot(a) * p;
      a.normalize();
      Vec b = Eigen::Vector3d(p).cross(Eigen::Vector3d(a));
      b.normalize();
      basis = {a, b};
      break;
    }
    case ManifoldKind::Spd: {
      const auto r = spd_roots(as_matrix(p, param_));
      const int n = param_;
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          Mat B = Mat::Zero(n, n);
          if (i == j) {
            B(i, i) = 1.0;
          } else {
            B(i, j) = B(j, i) = 1.0 / std::sqrt(2.0);
          }
          basis.push_back(as_vector(r.sqrt * B * r.sqrt));
        }
      break;
    }
  }
  return basis;
}

Vec Manifold::jacobi_scale(const Vec& p, const Vec& V, const Vec& Y,
                           const std::function<double(double)>& coeff) const {
  switch (kind_) {
    case ManifoldKind::Euclidean:
      return coeff(0.0) * Y;
    case ManifoldKind::Sphere2: {
      const double len = V.norm();
      if (len == 0.0) return coeff(0.0) * Y;
      const Vec u = V / len;
      const Vec along = u.dot(Y) * u;
      return coeff(0.0) * along + coeff(len * len) * (Y - along);
    }
    case ManifoldKind::Spd: {
      // W -> R(W,V)V diagonalizes in the eigenframe Q of p^-1/2 V p^-1/2 with
      // eigenvalues -(l_i - l_j)^2 / 4.
      const int n = param_;
      const auto r = spd_roots(as_matrix(p, n));
      const auto frame = detail::sym_eig(r.isqrt * as_matrix(V, n) * r.isqrt);
      const Mat& Q = frame.vectors;
      Mat C = Q.transpose() * (r.isqrt * as_matrix(Y, n) * r.isqrt) * Q;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double gap = frame.values(i) - frame.values(j);
          C(i, j) *= coeff(-0.25 * gap * gap);
        }
      return as_vector(symmetrized(r.sqrt * Q * C * Q.transpose() * r.sqrt));
    }
  }
  return Y;
}

Vec Manifold::random_point(std::mt19937_64& rng, double spread) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  switch (kind_) {
    case ManifoldKind::Euclidean: {
      Vec p(param_);
      for (int i = 0; i < param_; ++i) p(i) = spread * normal(rng);
      return p;
    }
    case ManifoldKind::Sphere2: {
      Vec p(3);
      do {
        for (int i = 0; i < 3; ++i) p(i) = normal(rng);
      } while (p.norm() < 1e-8);
      return p / p.norm();
    }
    case ManifoldKind::Spd: {
      const Vec identity = as_vector(Mat::Identity(param_, param_));
      return exp(identity, random_tangent(identity, rng, spread));
    }
  }
  return {};
}

Vec Manifold::random_tangent(const Vec& p, std::mt19937_64& rng,
                             double scale) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec X = Vec::Zero(coord_size());
  for (const Vec& e : tangent_basis(p)) X += normal(rng) * e;
  return scale * project_tangent(p, X);
}

std::vector<double> Manifold::to_chart(const Vec& p) const {
  if (kind_ != ManifoldKind::Spd) return {p.data(), p.data() + p.size()};
  const Mat A = as_matrix(p, param_);
  std::vector<double> out;
  for (int i = 0; i < param_; ++i)
    for (int j = i; j < param_; ++j) out.push_back(A(i, j));
  return out;
}

Vec Manifold::from_chart(const std::vector<double>& values) const {
  if (static_cast<int>(values.size()) != chart_size())
    throw ContractError("expected " + std::to_string(chart_size()) +
                        " chart values for " + name() + ", got " +
                        std::to_string(values.size()));
  if (kind_ != ManifoldKind::Spd)
    return Eigen::Map<const Vec>(values.data(),
                                 static_cast<Eigen::Index>(values.size()));
  Mat A(param_, param_);
  std::size_t k = 0;
  for (int i = 0; i < param_; ++i)
    for (int j = i; j < param_; ++j) A(i, j) = A(j, i) = values[k++];
  return as_vector(A);
}

// --- typed interface -------------------------------------------------------

ManifoldPoint exp(const Manifold& M, const ManifoldPoint& p,
                  const TangentVector& X) {
  require_same_base(p, X.base, "exp");
  return {M.exp(p.coords, X.coords)};
}

TangentVector log(const Manifold& M, const ManifoldPoint& p,
                  const ManifoldPoint& q) {
  return {p, M.log(p.coords, q.coords)};
}

double dist(const Manifold& M, const ManifoldPoint& p,
            const ManifoldPoint& q) {
  return M.dist(p.coords, q.coords);
}

double inner(const Manifold& M, const ManifoldPoint& p, const TangentVector& X,
             const TangentVector& Y) {
  require_same_base(p, X.base, "inner");
  require_same_base(p, Y.base, "inner");
  return M.inner(p.coords, X.coords, Y.coords);
}

double norm(const Manifold& M, const TangentVector& X) {
  return M.norm(X.base.coords, X.coords);
}

TangentVector parallel_transport(const Manifold& M, const ManifoldPoint& p,
                                 const ManifoldPoint& q,
                                 const TangentVector& X) {
  require_same_base(p, X.base, "parallel_transport");
  return {q, M.transport(p.coords, q.coords, X.coords)};
}

CotangentVector parallel_transport(const Manifold& M, const ManifoldPoint& p,
                                   const ManifoldPoint& q,
                                   const CotangentVector& xi) {
  require_same_base(p, xi.base, "parallel_transport");
  const Vec moved =
      M.transport(p.coords, q.coords, M.sharp(p.coords, xi.coords));
  return {q, M.flat(q.coords, moved)};
}

CotangentVector flat(const Manifold& M, const ManifoldPoint& p,
                     const TangentVector& X) {
  require_same_base(p, X.base, "flat");
  return {p, M.flat(p.coords, X.coords)};
}

TangentVector sharp(const Manifold& M, const ManifoldPoint& p,
                    const CotangentVector& xi) {
  require_same_base(p, xi.base, "sharp");
  return {p, M.sharp(p.coords, xi.coords)};
}

double pairing(const CotangentVector& xi, const TangentVector& X) {
  require_same_base(xi.base, X.base, "pairing");
  return xi.coords.dot(X.coords);
}

BundleTangent bundle_log(const Manifold& M, const BundlePoint& x,
                         const BundlePoint& y) {
  require_same_base(x.base, x.vector.base, "bundle_log");
  require_same_base(y.base, y.vector.base, "bundle_log");
  const Vec& b = x.base.coords;
  const Vec& b2 = y.base.coords;
  Vec horizontal = M.log(b, b2);
  Vec vertical = M.transport(b2, b, y.vector.coords) - x.vector.coords;
  return {{x.base, std::move(horizontal)}, {x.base, std::move(vertical)}};
}

BundlePoint bundle_exp(const Manifold& M, const BundlePoint& x,
                       const BundleTangent& Y) {
  require_same_base(x.base, x.vector.base, "bundle_exp");
  require_same_base(x.base, Y.horizontal.base, "bundle_exp");
  require_same_base(x.base, Y.vertical.base, "bundle_exp");
  const Vec& b = x.base.coords;
  ManifoldPoint b2{M.exp(b, Y.horizontal.coords)};
  Vec V = M.transport(b, b2.coords, x.vector.coords + Y.vertical.coords);
  return {b2, {b2, std::move(V)}};
}

double bundle_dist(const Manifold& M, const BundlePoint& x,
                   const BundlePoint& y) {
  const auto Y = bundle_log(M, x, y);
  const Vec& b = x.base.coords;
  const double h = M.norm(b, Y.horizontal.coords);
  const double v = M.norm(b, Y.vertical.coords);
  return std::sqrt(h * h + v * v);
}

}  // namespace rcpa
