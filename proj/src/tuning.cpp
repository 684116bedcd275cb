#include "bed/tuning.hpp"

#include <algorithm>
#include <cmath>

#include "bed/parallel.hpp"

namespace bed {

namespace {

constexpr double kMseTie = 1e-12;

void check_axis(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw DomainError(std::string("tuning grid: no ") + name + " values");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw DomainError(std::string("tuning grid: non-finite ") + name);
    if (i > 0 && !(v[i] > v[i - 1]))
      throw DomainError(std::string("tuning grid: ") + name + " must be strictly increasing");
  }
}

}  // namespace

bool tuning_preferred(const MSEEstimate& a, const MSEEstimate& b) {
  if (a.mse_hat < b.mse_hat - kMseTie) return true;
  if (a.mse_hat > b.mse_hat + kMseTie) return false;
  if (a.pair.beta != b.pair.beta) return a.pair.beta > b.pair.beta;
  return std::abs(a.pair.alpha) > std::abs(b.pair.alpha);
}

void TuningGrid::validate() const {
  check_axis(alphas, "alpha");
  check_axis(betas, "beta");
  if (betas.front() < 0) throw DomainError("tuning grid: beta must be non-negative");
}

std::vector<double> TuningGrid::range(double start, double stop, double step) {
  if (!(step > 0) || !(stop >= start)) throw DomainError("grid range: need step > 0 and stop >= start");
  std::vector<double> v;
  const long count = std::lround(std::floor((stop - start) / step + 1e-9));
  for (long k = 0; k <= count; ++k) v.push_back(std::round((start + k * step) * 1e10) / 1e10);
  return v;
}

TuningGrid TuningGrid::default_grid() { return {range(-3.0, 0.0, 0.1), range(0.0, 1.0, 0.1)}; }

MSEEstimate estimate_mse(std::span<const double> sample, TuningPair pair, const ParametricModel& model,
                         const Vector& pilot, const StartStrategy& starts) {
  MSEEstimate m;
  m.pair = pair;
  if (!model.feasible(pilot)) throw DomainError("estimate_mse: infeasible pilot");
  try {
    StartStrategy s = starts;
    s.pilot = pilot;
    const EstimationResult fit = fit_gbede(sample, model, pair, s);
    const SandwichCov jk = empirical_JK(sample, fit.theta(), pair, model);
    m.theta_hat = fit.theta_hat;
    m.bias_part = (fit.theta() - pilot).squaredNorm();
    m.var_part = matrix_trace(jk.cov) / static_cast<double>(sample.size());
    m.mse_hat = m.bias_part + m.var_part;
    m.valid = std::isfinite(m.mse_hat) && m.var_part >= 0;
    if (!m.valid) m.error = "non-finite or negative variance estimate";
  } catch (const NumericalError& e) {
    m.error = e.what();
  }
  return m;
}

TuningResult select_tuning(std::span<const double> sample, const ParametricModel& model, const TuningGrid& grid,
                           unsigned threads) {
  grid.validate();
  TuningResult out;
  out.pilot = fit_l2_pilot(sample, model).theta();
  std::vector<TuningPair> pairs;
  for (double a : grid.alphas)
    for (double b : grid.betas) pairs.emplace_back(a, b);
  out.surface.resize(pairs.size());
  parallel_for(pairs.size(), resolve_threads(threads),
               [&](std::size_t i) { out.surface[i] = estimate_mse(sample, pairs[i], model, out.pilot); });

  const MSEEstimate* best = nullptr;
  for (const auto& m : out.surface)
    if (m.valid && (!best || tuning_preferred(m, *best))) best = &m;
  if (!best) throw NumericalError("select_tuning", "every grid cell failed");
  out.best = best->pair;
  out.best_estimate = *best;
  return out;
}

}  // namespace bed
