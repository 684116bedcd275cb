#include <random>
#include <vector>

#include "bed/tuning.hpp"
#include "doctest.h"

using namespace bed;
using doctest::Approx;

namespace {

std::vector<double> normal_sample(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> s(n);
  for (auto& x : s) x = z(rng);
  return s;
}

MSEEstimate cell(double a, double b, double mse) {
  MSEEstimate m;
  m.pair = TuningPair(a, b);
  m.mse_hat = mse;
  m.valid = true;
  return m;
}

}  // namespace

TEST_CASE("grid construction") {
  const auto g = TuningGrid::default_grid();
  CHECK(g.alphas.size() == 31);
  CHECK(g.betas.size() == 11);
  CHECK(g.alphas.front() == -3.0);
  CHECK(g.alphas[22] == -0.8);
  CHECK(g.alphas.back() == 0.0);
  CHECK(g.betas[2] == 0.2);
  CHECK_NOTHROW(g.validate());
  CHECK_THROWS_AS((TuningGrid{{0.0, -1.0}, {0.5}}.validate()), DomainError);
  CHECK_THROWS_AS((TuningGrid{{-1.0}, {-0.5, 0.5}}.validate()), DomainError);
  CHECK_THROWS_AS((TuningGrid{{}, {0.5}}.validate()), DomainError);
  CHECK_THROWS_AS(TuningGrid::range(0, 1, 0), DomainError);
}

TEST_CASE("tie rule prefers robustness") {
  CHECK(tuning_preferred(cell(0, 0, 1.0), cell(-1, 0.5, 1.0 + 1e-9)));
  CHECK(tuning_preferred(cell(0, 0.5, 1.0), cell(-2, 0.4, 1.0 + 5e-13)));
  CHECK(!tuning_preferred(cell(-2, 0.4, 1.0), cell(0, 0.5, 1.0 + 5e-13)));
  CHECK(tuning_preferred(cell(-2, 0.4, 1.0 + 5e-13), cell(-1, 0.4, 1.0)));
  CHECK(!tuning_preferred(cell(-1, 0.4, 1.0), cell(-1, 0.4, 1.0)));
}

TEST_CASE("mse decomposition") {
  const auto s = normal_sample(60, 9);
  const auto model = normal_model();
  const Vector pilot = fit_l2_pilot(s, *model).theta();
  for (TuningPair p : {TuningPair(-1, 0.3), TuningPair(0, 0.6), TuningPair(0, 1)}) {
    const auto m = estimate_mse(s, p, *model, pilot);
    REQUIRE(m.valid);
    CHECK(m.mse_hat == m.bias_part + m.var_part);
    CHECK(m.var_part >= 0);
    const Vector t = fit_gbede(s, *model, p).theta();
    CHECK(m.bias_part == Approx((t - pilot).squaredNorm()).epsilon(1e-6));
    const Matrix cov = empirical_JK(s, m.theta_hat.values, p, *model).cov;
    CHECK(m.var_part == Approx((cov(0, 0) + cov(1, 1)) / 60.0).epsilon(1e-12));
    if (p == TuningPair(0, 1)) CHECK(m.bias_part < 1e-16);
  }
  Vector bad(2);
  bad << 0.0, -1.0;
  CHECK_THROWS_AS(estimate_mse(s, TuningPair(0, 0.5), *model, bad), DomainError);
}

TEST_CASE("selection returns the surface and its minimum") {
  const auto s = normal_sample(40, 21);
  const TuningGrid g{{-2.0, -1.0, 0.0}, {0.0, 0.5, 1.0}};
  const auto r = select_tuning(s, *normal_model(), g);
  REQUIRE(r.surface.size() == 9);
  CHECK(r.surface[1].pair == TuningPair(-2, 0.5));
  for (const auto& m : r.surface)
    if (m.valid) CHECK(r.best_estimate.mse_hat <= m.mse_hat + 1e-12);
  // the threaded evaluation produces the same surface
  const auto r2 = select_tuning(s, *normal_model(), g, 3);
  CHECK(r2.best == r.best);
  for (std::size_t i = 0; i < 9; ++i) CHECK(r2.surface[i].mse_hat == r.surface[i].mse_hat);
}

TEST_CASE("clean normal data favour small beta") {
  // coarse α axis, full β axis; 200 seeded samples of size 200
  const TuningGrid g{{-3.0, -1.5, 0.0}, TuningGrid::range(0.0, 1.0, 0.1)};
  int small = 0;
  for (std::uint64_t rep = 0; rep < 200; ++rep)
    if (select_tuning(normal_sample(200, 5000 + rep), *normal_model(), g).best.beta <= 0.3) ++small;
  MESSAGE("reps with beta <= 0.3: " << small);
  CHECK(small >= 160);
}
