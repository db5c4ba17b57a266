#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "bopt/harness.hpp"
#include "bopt/problems.hpp"
#include "bopt/rng.hpp"

using namespace bopt;

namespace {

Vector vec(std::initializer_list<double> vals) {
  Vector v(static_cast<Index>(vals.size()));
  Index i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

InstanceSpec lp_spec(int m, int n, std::uint64_t seed) {
  InstanceSpec spec;
  spec.family = Family::LpLs;
  spec.m = m;
  spec.n = n;
  spec.sparsity = 0.1;
  spec.seed = seed;
  spec.p = 1.2;
  spec.theta = 0.1;
  return spec;
}

InstanceSpec kl_spec(int m, int n, std::uint64_t seed) {
  InstanceSpec spec;
  spec.family = Family::NonnegKl;
  spec.m = m;
  spec.n = n;
  spec.sparsity = 0.2;
  spec.seed = seed;
  spec.theta = 0.05;
  return spec;
}

}  // namespace

TEST_CASE("lp_ls objective and gradient at pinned points", "[problems]") {
  const Matrix I1 = Matrix::Identity(1, 1);

  {
    const Problem prob = make_lp_ls_problem(I1, vec({0}), 0.1, 1.2);
    REQUIRE(prob.f_value(vec({0})) == 0.0);
    REQUIRE(prob.f_grad(vec({0}))[0] == 0.0);
    REQUIRE_THAT(*prob.smad_L, Catch::Matchers::WithinAbs(1.1, 1e-9));
    REQUIRE(prob.feasible_set == FeasibleSet::AllSpace);
    REQUIRE(prob.g_spec.kind == GSpec::Kind::None);
    REQUIRE(prob.g_value(vec({5})) == 0.0);
  }
  {
    const Problem prob = make_lp_ls_problem(I1, vec({1}), 1.0, 2.0);
    REQUIRE_THAT(prob.f_value(vec({1})), Catch::Matchers::WithinAbs(0.5, 1e-14));
    REQUIRE_THAT(prob.f_grad(vec({1}))[0], Catch::Matchers::WithinAbs(1.0, 1e-14));
  }
  REQUIRE_THROWS_AS(make_lp_ls_problem(I1, vec({0}), 0.1, 1.0), ConfigError);
  REQUIRE_THROWS_AS(build_lp_ls(kl_spec(2, 2, 1)), ConfigError);
}

TEST_CASE("nonneg_kl objective and gradient at pinned points", "[problems]") {
  const Matrix I1 = Matrix::Identity(1, 1);
  const Problem prob = make_nonneg_kl_problem(I1, vec({1}), 0.0);
  REQUIRE(prob.f_value(vec({1})) == 0.0);
  REQUIRE(prob.f_grad(vec({1}))[0] == 0.0);
  const double e = std::exp(1.0);
  REQUIRE_THAT(prob.f_value(vec({e})), Catch::Matchers::WithinAbs(1.0, 1e-14));
  REQUIRE(std::isinf(prob.f_value(vec({-0.5}))));
  REQUIRE_THROWS_AS(prob.f_grad(vec({0.0})), DomainError);
  REQUIRE(prob.feasible_set == FeasibleSet::NonnegOrthant);
  REQUIRE(prob.smad_L == 1.0);
  REQUIRE(std::isinf(prob.g_value(vec({-1.0}))));
}

TEST_CASE("generated kl instances have unit column sums", "[problems]") {
  for (std::uint64_t seed : {1ull, 42ull, 977ull}) {
    const GeneratedInstance inst = build_nonneg_kl(kl_spec(30, 20, seed));
    for (Index j = 0; j < inst.A.cols(); ++j)
      REQUIRE_THAT(inst.A.col(j).sum(), Catch::Matchers::WithinAbs(1.0, 1e-12));
    REQUIRE((inst.A.array() >= 0.0).all());
    REQUIRE((inst.x_star.array() >= 0.0).all());
    REQUIRE((inst.b.array() > 0.0).all());
    REQUIRE(inst.b.isApprox(inst.A * inst.x_star));
  }
}

TEST_CASE("kl objective is nonnegative and zero at the ground truth", "[problems]") {
  const GeneratedInstance inst = build_nonneg_kl(kl_spec(40, 25, 7));
  REQUIRE_THAT(inst.problem.f_value(inst.x_star), Catch::Matchers::WithinAbs(0.0, 1e-10));
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    Vector x(25);
    for (Index i = 0; i < x.size(); ++i) x[i] = std::abs(rng.normal());
    REQUIRE(inst.problem.f_value(x) >= -1e-12);
  }
}

TEST_CASE("l1 subgradient selection", "[problems]") {
  const Vector xi = g_subgrad_l1(1.0, vec({2, -3, 0}), FeasibleSet::AllSpace);
  REQUIRE(xi[0] == 1.0);
  REQUIRE(xi[1] == -1.0);
  REQUIRE(xi[2] == 0.0);
  REQUIRE(g_subgrad_l1(0.0, vec({1, -2}), FeasibleSet::AllSpace).isZero(0.0));
  const Vector xi_nn = g_subgrad_l1(0.05, vec({0.1, 0.2}), FeasibleSet::NonnegOrthant);
  REQUIRE(xi_nn[0] == 0.05);
  REQUIRE(xi_nn[1] == 0.05);
}

TEST_CASE("subgradient inequality holds on random probes", "[problems]") {
  const GeneratedInstance inst = build_nonneg_kl(kl_spec(20, 12, 3));
  Rng rng(55);
  for (int trial = 0; trial < 100; ++trial) {
    Vector x(12), y(12);
    for (Index i = 0; i < 12; ++i) {
      x[i] = std::abs(rng.normal());
      y[i] = std::abs(rng.normal());
    }
    const Vector xi = inst.problem.g_subgrad_at(x);
    REQUIRE(inst.problem.g_value(y) >=
            inst.problem.g_value(x) + xi.dot(y - x) - 1e-10);
  }
}

TEST_CASE("power iteration matches the dense eigensolver", "[problems]") {
  REQUIRE_THAT(spectral_norm_sq(Matrix::Identity(3, 3)), Catch::Matchers::WithinAbs(1.0, 1e-9));

  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 1.0;
  D(1, 1) = 2.0;
  REQUIRE_THAT(spectral_norm_sq(D), Catch::Matchers::WithinAbs(4.0, 1e-9));

  Rng rng(17);
  Matrix A(10, 7);
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j) A(i, j) = rng.normal();
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(A.transpose() * A);
  const double truth = eig.eigenvalues().maxCoeff();
  REQUIRE_THAT(spectral_norm_sq(A), Catch::Matchers::WithinRel(truth, 1e-8));
}

TEST_CASE("gradients agree with finite differences", "[problems]") {
  {
    const GeneratedInstance inst = build_lp_ls(lp_spec(15, 30, 11));
    Rng rng(21);
    const double worst = detail::max_grad_fd_error(
        inst.problem.f_value, inst.problem.f_grad,
        [&] { return detail::sample_interior(rng, 30, false); }, 50);
    REQUIRE(worst < 1e-5);
  }
  {
    const GeneratedInstance inst = build_nonneg_kl(kl_spec(25, 15, 13));
    Rng rng(23);
    const double worst = detail::max_grad_fd_error(
        inst.problem.f_value, inst.problem.f_grad,
        [&] { return detail::sample_interior(rng, 15, true); }, 50);
    REQUIRE(worst < 1e-5);
  }
}

TEST_CASE("smad combinations stay midpoint convex for lp_ls", "[problems]") {
  const GeneratedInstance inst = build_lp_ls(lp_spec(10, 16, 31));
  const Kernel& phi = *inst.problem.kernel;
  const double L = *inst.problem.smad_L;
  Rng rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector a = rng.normal_vector(16);
    const Vector b = rng.normal_vector(16);
    const Vector mid = 0.5 * (a + b);
    for (const double sign : {1.0, -1.0}) {
      const auto c = [&](const Vector& z) {
        return L * phi.value(z) + sign * inst.problem.f_value(z);
      };
      const double rhs = 0.5 * (c(a) + c(b));
      REQUIRE(c(mid) <= rhs + 1e-8 * (1.0 + std::abs(rhs)));
    }
  }
}

TEST_CASE("instance generation is deterministic", "[problems]") {
  const GeneratedInstance a = build_lp_ls(lp_spec(12, 40, 123));
  const GeneratedInstance b = build_lp_ls(lp_spec(12, 40, 123));
  REQUIRE(a.A == b.A);
  REQUIRE(a.b == b.b);
  REQUIRE(a.x_star == b.x_star);
  const GeneratedInstance c = build_lp_ls(lp_spec(12, 40, 124));
  REQUIRE(a.A != c.A);

  const GeneratedInstance k1 = build_nonneg_kl(kl_spec(18, 10, 5));
  const GeneratedInstance k2 = build_nonneg_kl(kl_spec(18, 10, 5));
  REQUIRE(k1.A == k2.A);
  REQUIRE(k1.x_star == k2.x_star);
}

TEST_CASE("instance spec validation", "[problems]") {
  InstanceSpec bad = lp_spec(5, 5, 1);
  bad.sparsity = 0.0;
  REQUIRE_THROWS_AS(build_lp_ls(bad), ConfigError);
  bad.sparsity = 1.5;
  REQUIRE_THROWS_AS(build_lp_ls(bad), ConfigError);
  InstanceSpec badp = lp_spec(5, 5, 1);
  badp.p = 1.0;
  REQUIRE_THROWS_AS(build_lp_ls(badp), ConfigError);
}

TEST_CASE("ground-truth sparsity matches the spec fraction", "[problems]") {
  const GeneratedInstance inst = build_lp_ls(lp_spec(10, 200, 77));
  REQUIRE((inst.x_star.array() != 0.0).count() == 20);
  const GeneratedInstance kl = build_nonneg_kl(kl_spec(10, 40, 77));
  REQUIRE((kl.x_star.array() != 0.0).count() == 8);
}
