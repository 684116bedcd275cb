#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bed/estimators.hpp"

namespace bed {

struct TuningGrid {
  std::vector<double> alphas;
  std::vector<double> betas;

  /// Sorts, checks for duplicates and for β ≥ 0.
  void validate() const;
  std::size_t size() const { return alphas.size() * betas.size(); }

  /// α ∈ {-3.0, -2.9, ..., 0}, β ∈ {0, 0.1, ..., 1}.
  static TuningGrid default_grid();
  /// start, start + step, ..., stop with values rounded to 1e-10.
  static std::vector<double> range(double start, double stop, double step);
};

struct MSEEstimate {
  TuningPair pair;
  double mse_hat = 0.0;
  double bias_part = 0.0;
  double var_part = 0.0;
  ParamVector theta_hat;
  bool valid = false;
  std::string error;
};

/// ‖θ̂ - θ_P‖² + tr(J⁻¹KJ⁻¹)/n with J, K from empirical_JK at θ̂.
MSEEstimate estimate_mse(std::span<const double> sample, TuningPair pair, const ParametricModel& model,
                         const Vector& pilot, const StartStrategy& starts = {});

/// Grid ordering: lower mse_hat wins unless within 1e-12, then the larger β,
/// then the larger |α|.
bool tuning_preferred(const MSEEstimate& a, const MSEEstimate& b);

struct TuningResult {
  TuningPair best;
  MSEEstimate best_estimate;
  Vector pilot;
  /// One entry per grid cell, α-major in grid order.
  std::vector<MSEEstimate> surface;
};

/// Evaluates estimate_mse over the grid against the L2 pilot and keeps the
/// tuning_preferred cell.
TuningResult select_tuning(std::span<const double> sample, const ParametricModel& model,
                           const TuningGrid& grid = TuningGrid::default_grid(), unsigned threads = 1);

}  // namespace bed
