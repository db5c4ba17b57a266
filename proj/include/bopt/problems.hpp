#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "bopt/kernels.hpp"
#include "bopt/rng.hpp"
#include "bopt/types.hpp"

namespace bopt {

/// Composite objective Psi = f + g over the closure of a feasible set,
/// together with the kernel pairing used by the Bregman-type solvers.
/// f_grad throws DomainError outside the differentiability domain of f;
/// g_value returns +inf off dom g (it carries the feasible-set indicator).
struct Problem {
  std::function<double(const Vector&)> f_value;
  std::function<Vector(const Vector&)> f_grad;
  std::function<double(const Vector&)> g_value;
  std::function<Vector(const Vector&)> g_subgrad_at;
  FeasibleSet feasible_set = FeasibleSet::AllSpace;
  std::shared_ptr<const Kernel> kernel;
  std::optional<double> smad_L;  ///< L with (f, phi) L-smooth adaptable, if known
  GSpec g_spec;

  /// Psi(x) + indicator, extended-real.
  double psi(const Vector& x) const {
    const double gv = g_value(x);
    if (!std::isfinite(gv)) return kInf;
    return f_value(x) + gv;
  }
};

/// One subgradient of theta * ||.||_1 (+ indicator of the orthant when the
/// feasible set is the nonnegative orthant, where the restriction is linear
/// and the interior selection theta * 1 applies).
inline Vector g_subgrad_l1(double theta, const Vector& x, FeasibleSet set) {
  if (set == FeasibleSet::NonnegOrthant) return Vector::Constant(x.size(), theta);
  Vector xi(x.size());
  for (Index i = 0; i < x.size(); ++i) xi[i] = theta * sgn(x[i]);
  return xi;
}

/// Largest eigenvalue of A^T A by power iteration, run until the Rayleigh
/// quotient's relative change drops below tol (cap 10000 iterations).
inline double spectral_norm_sq(const Matrix& A, double tol = 1e-10) {
  const Index n = A.cols();
  Rng rng(0x5eedULL);  // fixed start vector; any generic direction works
  Vector v = rng.normal_vector(n);
  v.normalize();
  double rho_prev = -1.0;
  double rho = 0.0;
  for (int iter = 0; iter < 10000; ++iter) {
    const Vector w = A.transpose() * (A * v);
    rho = v.dot(w);
    const double wnorm = w.norm();
    if (wnorm == 0.0) return 0.0;
    v = w / wnorm;
    if (iter > 0 && std::abs(rho - rho_prev) <= tol * std::max(1.0, std::abs(rho))) break;
    rho_prev = rho;
  }
  return rho;
}

namespace detail {

struct DenseInstanceData {
  Matrix A;
  Vector b;
};

}  // namespace detail

/// f(x) = 1/2 ||Ax - b||^2 + (theta_p / p) ||x||_p^p with g == 0, paired
/// with the lp-plus-quadratic kernel; L = lambda_max(A^T A) + theta_p.
inline Problem make_lp_ls_problem(Matrix A, Vector b, double theta_p, double p) {
  if (!(p > 1.0)) throw ConfigError("lp_ls requires p > 1");
  if (theta_p < 0.0) throw ConfigError("lp_ls requires theta_p >= 0");
  auto data = std::make_shared<detail::DenseInstanceData>(
      detail::DenseInstanceData{std::move(A), std::move(b)});

  Problem prob;
  prob.f_value = [data, theta_p, p](const Vector& x) {
    double reg = 0.0;
    for (Index i = 0; i < x.size(); ++i) reg += std::pow(std::abs(x[i]), p);
    return 0.5 * (data->A * x - data->b).squaredNorm() + theta_p / p * reg;
  };
  prob.f_grad = [data, theta_p, p](const Vector& x) {
    Vector g = data->A.transpose() * (data->A * x - data->b);
    for (Index i = 0; i < x.size(); ++i)
      g[i] += theta_p * sgn(x[i]) * std::pow(std::abs(x[i]), p - 1.0);
    return g;
  };
  prob.g_value = [](const Vector&) { return 0.0; };
  prob.g_subgrad_at = [](const Vector& x) { return g_subgrad_l1(0.0, x, FeasibleSet::AllSpace); };
  prob.feasible_set = FeasibleSet::AllSpace;
  prob.kernel = std::make_shared<LpPlusQuadratic>(p);
  prob.smad_L = spectral_norm_sq(data->A) + theta_p;
  prob.g_spec = GSpec::none();
  return prob;
}

/// f(x) = D_KL(Ax, b) = sum_i [(Ax)_i log((Ax)_i / b_i) + b_i - (Ax)_i],
/// g(x) = theta_1 ||x||_1 + indicator of the nonnegative orthant, paired
/// with the entropy-plus-quadratic kernel. With unit column sums the pair
/// is 1-smooth adaptable, so smad_L = 1.
inline Problem make_nonneg_kl_problem(Matrix A, Vector b, double theta1) {
  if (theta1 < 0.0) throw ConfigError("nonneg_kl requires theta >= 0");
  auto data = std::make_shared<detail::DenseInstanceData>(
      detail::DenseInstanceData{std::move(A), std::move(b)});

  Problem prob;
  prob.f_value = [data](const Vector& x) {
    const Vector r = data->A * x;
    double acc = 0.0;
    for (Index i = 0; i < r.size(); ++i) {
      if (r[i] < 0.0) return kInf;
      if (r[i] == 0.0)
        acc += data->b[i];  // 0 log 0 = 0
      else
        acc += r[i] * std::log(r[i] / data->b[i]) + data->b[i] - r[i];
    }
    return acc;
  };
  prob.f_grad = [data](const Vector& x) {
    const Vector r = data->A * x;
    for (Index i = 0; i < r.size(); ++i)
      if (!(r[i] > 0.0))
        throw DomainError("nonneg_kl: (Ax)_i <= 0, gradient undefined", i);
    return Vector(data->A.transpose() * (r.array() / data->b.array()).log().matrix());
  };
  prob.g_value = [theta1](const Vector& x) {
    for (Index i = 0; i < x.size(); ++i)
      if (x[i] < 0.0) return kInf;
    return theta1 * x.sum();
  };
  prob.g_subgrad_at = [theta1](const Vector& x) {
    return g_subgrad_l1(theta1, x, FeasibleSet::NonnegOrthant);
  };
  prob.feasible_set = FeasibleSet::NonnegOrthant;
  prob.kernel = std::make_shared<EntropyPlusQuadratic>();
  prob.smad_L = 1.0;
  prob.g_spec = GSpec::l1_plus_nonneg(theta1);
  return prob;
}

/// Which benchmark family an instance belongs to.
enum class Family { LpLs, NonnegKl };

/// Recipe for one random benchmark instance. Identical specs (seed included)
/// generate bit-identical data.
struct InstanceSpec {
  Family family = Family::LpLs;
  int m = 0;          ///< rows (observations)
  int n = 0;          ///< columns (unknowns)
  double sparsity = 0.1;  ///< fraction of nonzeros in the ground truth
  std::uint64_t seed = 0;
  double p = 1.2;     ///< lp exponent (lp_ls only)
  double theta = 0.1; ///< regularization weight (theta_p or theta_1)
};

struct GeneratedInstance {
  Matrix A;
  Vector b;
  Vector x_star;
  Problem problem;
};

namespace detail {

/// First k indices of a partial Fisher-Yates shuffle of 0..n-1, sorted.
inline std::vector<Index> sample_support(Rng& rng, Index n, Index k) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (Index i = 0; i < k; ++i) {
    const Index j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline Index support_size(const InstanceSpec& spec) {
  if (!(spec.sparsity > 0.0) || spec.sparsity > 1.0)
    throw ConfigError("sparsity must lie in (0, 1]");
  return std::max<Index>(1, static_cast<Index>(std::llround(spec.sparsity * spec.n)));
}

}  // namespace detail

/// Draw an lp-regularized least-squares instance: A with iid normal entries
/// scaled by 1/m (row-major fill order), sparse ground truth with N(0,1)
/// values on a uniformly chosen support, b = A x_star. The 1/m scale puts
/// lambda_max(A^T A) at O(10^-1), the regime the published benchmark
/// results for this family correspond to; the unscaled Gram spectrum at
/// O(10^3) freezes the off-support coordinates for any step below 1/L.
inline GeneratedInstance build_lp_ls(const InstanceSpec& spec) {
  if (spec.family != Family::LpLs) throw ConfigError("build_lp_ls: wrong family");
  if (!(spec.p > 1.0)) throw ConfigError("build_lp_ls: requires p > 1");
  Rng rng(spec.seed);
  Matrix A(spec.m, spec.n);
  const double scale = 1.0 / spec.m;
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j) A(i, j) = scale * rng.normal();
  Vector x_star = Vector::Zero(spec.n);
  for (const Index i : detail::sample_support(rng, spec.n, detail::support_size(spec)))
    x_star[i] = rng.normal();
  Vector b = A * x_star;
  Problem prob = make_lp_ls_problem(A, b, spec.theta, spec.p);
  return {std::move(A), std::move(b), std::move(x_star), std::move(prob)};
}

/// Draw a nonnegative linear inverse instance: A with |N(0,1)| entries
/// normalized to unit column sums, sparse nonnegative ground truth with
/// |N(0,1)| values, b = A x_star. A zero b coordinate triggers ground-truth
/// redraws (up to 100) before giving up.
inline GeneratedInstance build_nonneg_kl(const InstanceSpec& spec) {
  if (spec.family != Family::NonnegKl) throw ConfigError("build_nonneg_kl: wrong family");
  Rng rng(spec.seed);
  Matrix A(spec.m, spec.n);
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j) A(i, j) = std::abs(rng.normal());
  for (Index j = 0; j < A.cols(); ++j) {
    const double s = A.col(j).sum();
    if (s == 0.0) throw InstanceError("build_nonneg_kl: zero column in A");
    A.col(j) /= s;
  }
  Vector x_star;
  Vector b;
  bool ok = false;
  for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
    x_star = Vector::Zero(spec.n);
    for (const Index i : detail::sample_support(rng, spec.n, detail::support_size(spec)))
      x_star[i] = std::abs(rng.normal());
    b = A * x_star;
    ok = (b.array() > 0.0).all();
  }
  if (!ok) throw InstanceError("build_nonneg_kl: could not draw x_star with b > 0");
  Problem prob = make_nonneg_kl_problem(A, b, spec.theta);
  return {std::move(A), std::move(b), std::move(x_star), std::move(prob)};
}

inline GeneratedInstance build_instance(const InstanceSpec& spec) {
  return spec.family == Family::LpLs ? build_lp_ls(spec) : build_nonneg_kl(spec);
}

}  // namespace bopt
