#include <cmath>
#include <random>
#include <vector>

#include "bed/asymptotics.hpp"
#include "doctest.h"

using namespace bed;
using doctest::Approx;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// normal location σ=1, μ=0 by the midpoint rule; u = x
double are_oracle(double a, double b) {
  const long n = 400000;
  const double lo = -14, h = 28.0 / n;
  double j = 0, k = 0;
  for (long i = 0; i < n; ++i) {
    const double x = lo + (i + 0.5) * h;
    const double f = std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI);
    const double w = std::pow(f, b) * std::exp(a * f);
    j += x * x * f * w * h;
    k += x * x * f * w * w * h;
  }
  return 100.0 * j * j / k;
}

}  // namespace

TEST_CASE("mle pair gives the fisher information") {
  const auto loc = normal_location_model(1.0);
  const auto s = model_JK(vec({0.0}), TuningPair(0, 0), *loc);
  CHECK(s.J(0, 0) == Approx(1.0).epsilon(1e-10));
  CHECK(s.K(0, 0) == Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(s.xi(0)) < 1e-12);
  CHECK(!s.n);

  const auto nm = model_JK(vec({3.0, 2.0}), TuningPair(0, 0), *normal_model());
  const Matrix fisher = fisher_information(*normal_model(), vec({3.0, 2.0}));
  CHECK((nm.J - fisher).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((nm.K - fisher).cwiseAbs().maxCoeff() < 1e-10);

  for (const auto& [model, theta] : {std::pair{normal_model(), vec({-1.0, 0.5})}, std::pair{poisson_model(), vec({6.5})},
                                     std::pair{normal_location_model(3.0), vec({10.0})}})
    CHECK(are(TuningPair(0, 0), *model, theta) == Approx(100.0).epsilon(1e-8));
}

TEST_CASE("at-model matrices against direct quadrature") {
  // normal location σ=1, μ=0: closed forms for J, K, ξ at α=0
  const auto loc = normal_location_model(1.0);
  const double b = 0.5;
  const auto s = model_JK(vec({0.0}), TuningPair(0, b), *loc);
  const double c = std::pow(2.0 * M_PI, -b / 2.0);
  CHECK(s.J(0, 0) == Approx(c * std::pow(1.0 + b, -1.5)).epsilon(1e-10));
  CHECK(s.K(0, 0) == Approx(std::pow(2.0 * M_PI, -b) * std::pow(1.0 + 2 * b, -1.5)).epsilon(1e-10));
  CHECK(std::abs(s.xi(0)) < 1e-12);
  CHECK(are(TuningPair(0, 0.5), *loc, vec({0.0})) == Approx(83.80).epsilon(0.01 / 83.80));
}

TEST_CASE("table of efficiencies") {
  const auto loc = normal_location_model(1.0);
  CHECK(are(TuningPair(-1, 0.1), *loc, vec({0.0})) == Approx(99.62).epsilon(0.005 / 99.62));
  // the published row labelled -3 holds the α = -4 values
  CHECK(are(TuningPair(-4, 1), *loc, vec({0.0})) == Approx(83.24).epsilon(0.005 / 83.24));
  CHECK(are(TuningPair(-3, 1), *loc, vec({0.0})) == Approx(are_oracle(-3, 1)).epsilon(1e-8));
  CHECK(are(TuningPair(-2, 0.3), *loc, vec({0.0})) == Approx(are_oracle(-2, 0.3)).epsilon(1e-8));
  // strictly decreasing in β at α = 0
  double prev = 101.0;
  for (int k = 0; k <= 10; ++k) {
    const double v = are(TuningPair(0, k / 10.0), *loc, vec({0.0}));
    CHECK(v < prev);
    prev = v;
  }
  // location invariance
  for (TuningPair p : {TuningPair(-2, 0.3), TuningPair(-1, 0.8)})
    CHECK(are(p, *loc, vec({17.0})) == Approx(are(p, *loc, vec({0.0}))).epsilon(1e-8));
}

TEST_CASE("sandwich is symmetric positive semidefinite") {
  for (double a : {-3.0, -1.5, 0.0})
    for (double b : {0.0, 0.3, 0.7, 1.0}) {
      const TuningPair p(a, b);
      for (const auto& [model, theta] :
           {std::pair{normal_model(), vec({0.0, 1.0})}, std::pair{poisson_model(), vec({2.0})}}) {
        const auto s = model_JK(theta, p, *model);
        CHECK(is_symmetric_psd(s.K));
        CHECK(is_symmetric_psd(s.cov));
      }
    }
}

TEST_CASE("influence function") {
  const auto loc = normal_location_model(1.0);
  for (double y : {-3.0, 0.0, 0.7, 5.0})
    CHECK(influence_function(y, vec({0.0}), TuningPair(0, 0), *loc)(0) == Approx(y).epsilon(1e-10));

  const auto nm = normal_model();
  const Vector theta = vec({1.0, 2.0});
  for (TuningPair p : {TuningPair(0, 0.5), TuningPair(-1, 1), TuningPair(-2.5, 0.2)}) {
    const auto jk = model_JK(theta, p, *nm);
    for (double y : {-4.0, 0.5, 1.0, 9.0}) {
      const Vector lhs = jk.J * influence_function(y, theta, p, *nm, jk) + jk.xi;
      const Vector rhs = nm->score(y, theta) * gbede_weight(nm->density(y, theta), p);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
  const auto jk = model_JK(vec({0.0}), TuningPair(0, 0.5), *loc);
  CHECK(std::abs(influence_function(20.0, vec({0.0}), TuningPair(0, 0.5), *loc, jk)(0)) < 1e-15);
  CHECK(std::abs(influence_function(-20.0, vec({0.0}), TuningPair(0, 0.5), *loc, jk)(0)) < 1e-15);
}

TEST_CASE("optimal alpha") {
  const auto loc = normal_location_model(1.0);
  const auto one = optimal_alpha(1.0, *loc, vec({0.0}));
  CHECK(one.alpha == Approx(-7.44).epsilon(0.01 / 7.44));
  CHECK(one.are == Approx(88.48).epsilon(0.005 / 88.48));
  const auto zero = optimal_alpha(0.0, *loc, vec({0.0}));
  CHECK(zero.alpha == 0.0);
  CHECK(zero.are == Approx(100.0).epsilon(1e-8));
  const auto half = optimal_alpha(0.5, *loc, vec({0.0}));
  CHECK(half.are >= are(TuningPair(0, 0.5), *loc, vec({0.0})));
  // bracket without an interior maximiser
  CHECK_THROWS_AS(optimal_alpha(1.0, *loc, vec({0.0}), {-3.0, 0.0}), NumericalError);
  CHECK_THROWS_AS(optimal_alpha(1.0, *loc, vec({0.0}), {0.0, -3.0}), DomainError);
}

TEST_CASE("empirical matrices converge to the model ones") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> s(100000);
  for (auto& x : s) x = z(rng);
  const Vector theta = vec({0.0, 1.0});
  for (TuningPair p : {TuningPair(-1, 0.5), TuningPair(0, 0.2)}) {
    const auto m = model_JK(theta, p, *normal_model());
    const auto e = empirical_JK(s, theta, p, *normal_model());
    REQUIRE(e.n);
    CHECK(*e.n == s.size());
    for (Eigen::Index i = 0; i < 2; ++i) {
      CHECK(e.J(i, i) == Approx(m.J(i, i)).epsilon(0.02));
      CHECK(e.K(i, i) == Approx(m.K(i, i)).epsilon(0.02));
    }
    CHECK((e.scaled() - e.cov / 1e5).cwiseAbs().maxCoeff() < 1e-15);
  }
  // symmetric sample: ξ estimate vanishes for the location component
  const std::vector<double> sym{-2.0, -0.5, 0.5, 2.0};
  const auto e = empirical_JK(sym, vec({0.0}), TuningPair(-1, 0.5), *normal_location_model(1.0));
  CHECK(std::abs(e.xi(0)) < 1e-15);
}
