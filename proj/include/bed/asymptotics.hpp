#pragma once

#include <optional>
#include <span>
#include <utility>

#include "bed/divergence.hpp"

namespace bed {

/// Pieces of the asymptotic covariance J⁻¹ K J⁻¹ of a GBEDE.
struct SandwichCov {
  Matrix J;
  Matrix K;
  Vector xi;
  Matrix cov;
  std::optional<std::size_t> n;

  /// cov / n when a sample size is attached, otherwise cov.
  Matrix scaled() const { return n ? Matrix(cov / static_cast<double>(*n)) : cov; }
};

/// J = ∫ u uᵀ f^{1+β} e^{αf}, K = ∫ u uᵀ f^{1+2β} e^{2αf} - ξξᵀ, ξ = ∫ u f^{1+β} e^{αf}.
SandwichCov model_JK(const Vector& theta, TuningPair pair, const ParametricModel& model);

/// Sample plug-in for J and K at θ: the model part of J plus the sample mean
/// of {I - βuuᵀ - αuuᵀf} f^β e^{αf} minus its model expectation; K and ξ from
/// sample moments of u f^β e^{αf}.
SandwichCov empirical_JK(std::span<const double> sample, const Vector& theta, TuningPair pair,
                         const ParametricModel& model);

/// 100 · [I⁻¹]_cc / [J⁻¹KJ⁻¹]_cc at the model.
double are(TuningPair pair, const ParametricModel& model, const Vector& theta, Eigen::Index component = 0);

/// J⁻¹ (u(y) f^β(y) e^{αf(y)} - ξ) at the model.
Vector influence_function(double y, const Vector& theta, TuningPair pair, const ParametricModel& model);
/// Same, reusing a precomputed model_JK.
Vector influence_function(double y, const Vector& theta, TuningPair pair, const ParametricModel& model,
                          const SandwichCov& jk);

struct OptimalAlpha {
  double alpha = 0.0;
  double are = 0.0;
};

/// Golden-section maximisation of are(α, β) over α in `bracket`.
OptimalAlpha optimal_alpha(double beta, const ParametricModel& model, const Vector& theta,
                           std::pair<double, double> bracket = {-12.0, 0.0}, Eigen::Index component = 0,
                           double tol = 1e-3);

}  // namespace bed
