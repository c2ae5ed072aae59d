#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "youden_napg/penalty.hpp"

using namespace youden;

TEST_SUITE("penalty") {
  TEST_CASE("scad_value examples against numeric integration of the derivative") {
    const ScadParams p{1.0, 3.7};
    CHECK(scad_value(0.0, p) == 0.0);
    CHECK(std::abs(scad_value(1.0, p) - oracle::scad_integral(1.0, 1.0, 3.7)) <= 1e-10);
    CHECK(std::abs(scad_value(1.0, p) - 1.0) <= 1e-12);
    CHECK(std::abs(scad_value(10.0, p) - oracle::scad_integral(10.0, 1.0, 3.7)) <= 1e-10);
    CHECK(std::abs(scad_value(10.0, p) - 2.35) <= 1e-12);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unif(0.0, 6.0);
    for (int i = 0; i < 200; ++i) {
      const double x = unif(rng);
      const double lam = 0.1 + unif(rng) / 3.0;
      const double a = 2.1 + unif(rng);
      CHECK(std::abs(scad_value(x, {lam, a}) - oracle::scad_integral(x, lam, a)) <= 1e-10);
    }
    CHECK_THROWS_AS(scad_value(-1.0, p), ContractViolation);
  }

  TEST_CASE("scad_value is continuous at the knots, nondecreasing and concave") {
    for (double lam : {0.05, 1.0, 3.0}) {
      const ScadParams p{lam, 3.7};
      for (double knot : {lam, 3.7 * lam}) {
        const double below = scad_value(std::nextafter(knot, 0.0), p);
        const double above = scad_value(std::nextafter(knot, 1e9), p);
        CHECK(std::abs(below - above) <= 1e-12);
      }
      double prev = 0.0, prev_slope = 1e300;
      for (double x = 0.0; x < 5.0 * lam; x += lam / 100.0) {
        const double v = scad_value(x, p);
        CHECK(v >= prev - 1e-12);
        const double slope = (scad_value(x + lam / 100.0, p) - v) / (lam / 100.0);
        CHECK(slope <= prev_slope + 1e-9);
        prev = v;
        prev_slope = slope;
      }
    }
  }

  TEST_CASE("scad_derivative examples and finite-difference agreement") {
    const ScadParams p{1.0, 3.7};
    CHECK(scad_derivative(0.0, p) == 0.0);
    CHECK(scad_derivative(0.5, p) == 1.0);
    CHECK(std::abs(scad_derivative(2.0, p) - 1.7 / 2.7) <= 1e-15);
    CHECK(scad_derivative(5.0, p) == 0.0);
    for (double x = 0.013; x < 5.0; x += 0.0371) {
      if (std::abs(x - 1.0) < 1e-3 || std::abs(x - 3.7) < 1e-3) continue;
      const double fd = (scad_value(x + 1e-6, p) - scad_value(x - 1e-6, p)) / 2e-6;
      CHECK(std::abs(fd - scad_derivative(x, p)) <= 1e-6);
    }
    CHECK_THROWS_AS(scad_derivative(-0.1, p), ContractViolation);
  }

  TEST_CASE("scad_prox examples") {
    const ScadParams p{1.0, 3.7};
    CHECK(scad_prox(0.5, 1.0, p) == 0.0);
    CHECK(scad_prox(10.0, 1.0, p) == 10.0);
    CHECK(std::abs(scad_prox(3.0, 1.0, p) - (2.7 * 3.0 - 3.7) / 1.7) <= 1e-12);
    CHECK(std::abs(scad_prox(3.0, 1.0, p) - oracle::scad_prox_grid(3.0, 1.0, 1.0, 3.7)) <= 1e-5);
    CHECK_THROWS_AS(scad_prox(1.0, 0.0, p), ContractViolation);
  }

  TEST_CASE("scad_prox matches the grid minimizer, is odd and shrinks") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> ux(-8.0, 8.0), ustep(0.05, 6.0), ulam(0.05, 2.0), ua(2.05, 5.0);
    int mismatches = 0;
    for (int i = 0; i < 200; ++i) {
      const double x = ux(rng), step = ustep(rng), lam = ulam(rng), a = ua(rng);
      const double z = scad_prox(x, step, {lam, a});
      const double ref = oracle::scad_prox_grid(x, step, lam, a);
      if (std::abs(z - ref) > 1e-5) ++mismatches;
      CHECK(scad_prox(-x, step, {lam, a}) == -z);
      CHECK(std::abs(z) <= std::abs(x));
    }
    CHECK(mismatches == 0);
  }

  TEST_CASE("prox_g") {
    HyperParams h;
    h.lambda1 = 0.0;
    h.lambda2 = 0.0;
    Vector v(4);
    v << 0.3, -2.0, 7.0, 1.25;
    CHECK(prox_g(v, 0.7, h) == v);

    h.lambda2 = 1e-6;
    const RulePoint r = prox_g(RulePoint{Vector::Zero(2), 1.0}, 1.0, h);
    CHECK(r.cutoff == 1.0 / (1.0 + 2e-6));

    h.lambda1 = 1.0;
    h.lambda2 = 0.0;
    Vector w(3);
    w << 0.5, 3.0, 10.0;
    const RulePoint out = prox_g(RulePoint{w, 0.0}, 1.0, h);
    CHECK(out.omega(0) == 0.0);
    CHECK(std::abs(out.omega(1) - oracle::scad_prox_grid(3.0, 1.0, 1.0, 3.7)) <= 1e-5);
    CHECK(out.omega(2) == 10.0);
  }

  TEST_CASE("gradient mapping and stationarity residual") {
    const BiomarkerDataset d = make_dataset(Matrix::Random(6, 3), Matrix::Random(7, 3) * 0.5);
    const ObjectiveContext ctx(d, 0.4, 0.9);
    Vector omega(3);
    omega << 0.2, -0.6, 1.1;
    const RulePoint v{omega, 0.15};

    HyperParams none;
    none.lambda1 = 0.0;
    none.lambda2 = 0.0;
    const Vector grad = smooth_grad(v, ctx);
    for (double t : {0.1, 1.0, 3.0}) CHECK((gradient_mapping(v, t, ctx, none) - grad).norm() <= 1e-15);

    HyperParams h;
    h.lambda1 = 0.3;
    // Hand-assembled G_1(v) = v - prox_g(v - grad, 1).
    Vector manual = v.stacked() - grad;
    for (Index j = 0; j < 3; ++j) manual(j) = oracle::scad_prox_grid(manual(j), 1.0, 0.3, 3.7);
    manual(3) = manual(3) / (1.0 + 2.0 * h.lambda2);
    const Vector expected = v.stacked() - manual;
    CHECK((gradient_mapping(v, 1.0, ctx, h) - expected).norm() <= 1e-5);
    CHECK(stationarity_residual(v, ctx, h) == gradient_mapping(v, 1.0, ctx, h).norm());

    // A point whose prox-gradient step is itself: large weights with zero gradient.
    const BiomarkerDataset far = make_dataset(Matrix::Constant(2, 1, 1e3), Matrix::Constant(2, 1, -1e3));
    const ObjectiveContext ctx_far(far, 0.5, 1.0);
    HyperParams hf;
    hf.lambda1 = 0.1;
    hf.lambda2 = 0.0;
    const RulePoint fixed{Vector::Ones(1), 0.0};
    CHECK(gradient_mapping(fixed, 1.0, ctx_far, hf).norm() == 0.0);
    CHECK(stationarity_residual(fixed, ctx_far, hf) == 0.0);
  }
}
