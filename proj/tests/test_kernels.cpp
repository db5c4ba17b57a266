#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <vector>

#include "bopt/kernels.hpp"
#include "bopt/rng.hpp"

using namespace bopt;

namespace {

Vector vec(std::initializer_list<double> vals) {
  Vector v(static_cast<Index>(vals.size()));
  Index i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

std::vector<std::shared_ptr<Kernel>> catalog() {
  return {make_kernel("sq_euclid"), make_kernel("shannon"), make_kernel("burg"),
          make_kernel("lp_quad(p=1.2)"), make_kernel("shannon_quad")};
}

Vector interior_point(Rng& rng, const Kernel& k, Index n) {
  const bool nonneg = !k.interior_contains(Vector::Zero(n));
  Vector x(n);
  for (Index i = 0; i < n; ++i) {
    const double v = rng.normal();
    x[i] = nonneg ? std::abs(v) + 0.1 : (v >= 0 ? v + 0.1 : v - 0.1);
  }
  return x;
}

}  // namespace

TEST_CASE("bregman distance closed-form values", "[kernels]") {
  SquaredEuclidean sq;
  REQUIRE_THAT(bregman_distance(sq, vec({1, 2}), vec({0, 0})),
               Catch::Matchers::WithinAbs(2.5, 1e-14));

  Burg burg;
  // Itakura-Saito with x = 1, y = 2: x/y - log(x/y) - 1 = 0.5 + log 2 - 1.
  REQUIRE_THAT(bregman_distance(burg, vec({1}), vec({2})),
               Catch::Matchers::WithinAbs(0.5 + std::log(2.0) - 1.0, 1e-14));

  for (const auto& k : catalog())
    REQUIRE(bregman_distance(*k, vec({0.3, 0.7}), vec({0.3, 0.7})) == 0.0);
}

TEST_CASE("bregman distance rejects domain violations", "[kernels]") {
  Burg burg;
  REQUIRE_THROWS_AS(bregman_distance(burg, vec({1, 1}), vec({1, 0})), DomainError);
  try {
    bregman_distance(burg, vec({1, -1}), vec({1, 1}));
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    REQUIRE(e.coordinate() == 1);
  }
  // Shannon's closure admits zeros in the first argument but not negatives.
  BoltzmannShannon shannon;
  REQUIRE(std::isfinite(bregman_distance(shannon, vec({0.0, 1.0}), vec({1, 1}))));
  REQUIRE_THROWS_AS(bregman_distance(shannon, vec({-0.1, 1.0}), vec({1, 1})), DomainError);
}

TEST_CASE("approximate bregman distance", "[kernels]") {
  SquaredEuclidean sq;
  REQUIRE_THAT(approx_bregman_distance(sq, vec({3}), vec({1})),
               Catch::Matchers::WithinAbs(2.0, 1e-14));
  LpPlusQuadratic lp(1.2);
  // h(1) = 1 + 0.2 * 1 = 1.2, so the form is 0.5 * 1.2 * 1.
  REQUIRE_THAT(approx_bregman_distance(lp, vec({2}), vec({1})),
               Catch::Matchers::WithinAbs(0.6, 1e-14));
  for (const auto& k : catalog())
    REQUIRE(approx_bregman_distance(*k, vec({0.4, 0.6}), vec({0.4, 0.6})) == 0.0);
}

TEST_CASE("extended-real values use an infinity sentinel", "[kernels]") {
  BoltzmannShannon shannon;
  REQUIRE(shannon.value(vec({0.0, 0.5})) == 0.5 * std::log(0.5));  // 0 log 0 = 0
  REQUIRE(std::isinf(shannon.value(vec({-0.5, 0.5}))));
  Burg burg;
  REQUIRE(std::isinf(burg.value(vec({0.0}))));
  EntropyPlusQuadratic eq;
  REQUIRE(std::isinf(eq.value(vec({1.0, -1e-9}))));
  REQUIRE_THAT(eq.value(vec({0.0, 1.0})), Catch::Matchers::WithinAbs(0.5, 1e-14));
}

TEST_CASE("catalog hessians match the stated formulas", "[kernels]") {
  BoltzmannShannon shannon;
  const Vector hs = shannon.hess_diag(vec({0.25, 2.0}));
  REQUIRE_THAT(hs[0], Catch::Matchers::WithinAbs(4.0, 1e-14));
  REQUIRE_THAT(hs[1], Catch::Matchers::WithinAbs(0.5, 1e-14));

  LpPlusQuadratic lp(1.2);
  const Vector hl = lp.hess_diag(vec({1.0, -2.0}));
  REQUIRE_THAT(hl[0], Catch::Matchers::WithinAbs(1.2, 1e-14));
  REQUIRE_THAT(hl[1], Catch::Matchers::WithinAbs(1.0 + 0.2 * std::pow(2.0, -0.8), 1e-14));
}

TEST_CASE("lp hessian caps at the origin and flags it", "[kernels]") {
  LpPlusQuadratic lp(1.2);
  std::vector<bool> clamped;
  const Vector h = lp.hess_diag(vec({0.0, 1.0}), &clamped);
  REQUIRE(h[0] == 1e12);
  REQUIRE(clamped[0]);
  REQUIRE_FALSE(clamped[1]);

  // p >= 2 never needs the cap.
  LpPlusQuadratic quad(2.0);
  const Vector h2 = quad.hess_diag(vec({0.0}), &clamped);
  REQUIRE(h2[0] == 2.0);
  REQUIRE_FALSE(clamped[0]);
}

TEST_CASE("gradient finite-difference checks", "[kernels]") {
  REQUIRE(kernel_grad_check(SquaredEuclidean{}, vec({1, 2}), 1e-5) < 1e-8);
  REQUIRE(kernel_grad_check(BoltzmannShannon{}, vec({0.5, 0.5}), 1e-6) < 1e-5);
  REQUIRE(kernel_grad_check(Burg{}, vec({2}), 1e-6) < 1e-5);
  // Escaping the domain during differencing reports +inf, not a throw.
  REQUIRE(std::isinf(kernel_grad_check(Burg{}, vec({1e-9}), 1e-6)));

  Rng rng(101);
  for (const auto& k : catalog()) {
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial)
      worst = std::max(worst, kernel_grad_check(*k, interior_point(rng, *k, 6), 1e-6));
    INFO(k->name());
    REQUIRE(worst < 1e-5);
  }
}

TEST_CASE("bregman distance is positive definite on interior pairs", "[kernels]") {
  Rng rng(202);
  for (const auto& k : catalog()) {
    INFO(k->name());
    for (int trial = 0; trial < 100; ++trial) {
      const Vector x = interior_point(rng, *k, 5);
      const Vector y = interior_point(rng, *k, 5);
      const double dxy = bregman_distance(*k, x, y);
      REQUIRE(dxy >= 0.0);
      if ((x - y).norm() > 1e-10) REQUIRE(dxy > 0.0);
      REQUIRE(bregman_distance(*k, x, x) <= 1e-10);
    }
  }
}

TEST_CASE("strong convexity lower bounds hold on samples", "[kernels]") {
  REQUIRE(LpPlusQuadratic(1.2).strong_convexity_lb() >= 1.0);
  REQUIRE(EntropyPlusQuadratic{}.strong_convexity_lb() >= 1.0);

  Rng rng(303);
  for (const auto& k : catalog()) {
    INFO(k->name());
    const double sigma = k->strong_convexity_lb();
    for (int trial = 0; trial < 50; ++trial) {
      const Vector x = interior_point(rng, *k, 5);
      const Vector u = interior_point(rng, *k, 5);
      REQUIRE((k->hess_diag(x).array() >= sigma - 1e-12).all());
      REQUIRE(approx_bregman_distance(*k, u, x) >=
              sigma * 0.5 * (u - x).squaredNorm() - 1e-10);
    }
  }
}

TEST_CASE("kernel values are midpoint convex along interior segments", "[kernels]") {
  Rng rng(404);
  for (const auto& k : catalog()) {
    INFO(k->name());
    for (int trial = 0; trial < 100; ++trial) {
      const Vector a = interior_point(rng, *k, 4);
      const Vector b = interior_point(rng, *k, 4);
      const double lhs = k->value(0.5 * (a + b));
      const double rhs = 0.5 * (k->value(a) + k->value(b));
      REQUIRE(lhs <= rhs + 1e-10 * (1.0 + std::abs(rhs)));
    }
  }
}

TEST_CASE("kernel factory resolves config names", "[kernels]") {
  REQUIRE(make_kernel("sq_euclid")->name() == "sq_euclid");
  REQUIRE(make_kernel("shannon")->name() == "shannon");
  REQUIRE(make_kernel("burg")->name() == "burg");
  REQUIRE(make_kernel("shannon_quad")->name() == "shannon_quad");
  const auto lp = make_kernel("lp_quad(p=1.5)");
  REQUIRE(lp->hess_diag(vec({1.0}))[0] == 1.5);
  REQUIRE_THROWS_AS(make_kernel("lp_quad(p=abc)"), ConfigError);
  REQUIRE_THROWS_AS(make_kernel("mahalanobis"), ConfigError);
  REQUIRE_THROWS_AS(make_kernel("lp_quad(p=0.5)"), ConfigError);
}
