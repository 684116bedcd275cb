#pragma once

#include <optional>
#include <vector>

#include "bed/divergence.hpp"

namespace bed {

/// Design X (n × (q+1), first column all ones) and response y.
struct RegressionData {
  Matrix X;
  Vector y;

  /// Prepends the intercept column to the covariates.
  static RegressionData from_columns(const std::vector<std::vector<double>>& covariates, const std::vector<double>& y);
  /// Requires n > q+1, an intercept column and full column rank.
  void validate() const;
  Eigen::Index n() const { return y.size(); }
  Eigen::Index dim() const { return X.cols() + 1; }
};

struct RegressionParams {
  Vector gamma;
  double sigma2 = 1.0;

  /// Stacked θ = (γ, σ²).
  Vector stacked() const;
  static RegressionParams from_stacked(const Vector& theta);
};

struct RegressionFit {
  RegressionParams params;
  TuningPair pair;
  Matrix Jn;
  Matrix Kn;
  /// J_n⁻¹ K_n J_n⁻¹ / n for θ = (γ, σ²).
  Matrix cov;
  Vector std_residuals;
  std::vector<RegressionParams> all_roots;
  /// Summed per-observation empirical divergence of each root.
  std::vector<double> root_divergences;
  double residual_norm = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// ((y - xᵀγ) x / σ², (y - xᵀγ)²/(2σ⁴) - 1/(2σ²)).
Vector regression_score(double y, const Vector& x, const RegressionParams& params);

/// Mean over observations of u_i f_i^β e^{αf_i} - ∫ u_i f_i^{1+β} e^{αf_i} dy.
Vector regression_estimating_fn(const RegressionData& data, const RegressionParams& params, TuningPair pair);

/// ∂/∂θ of regression_estimating_fn for θ = (γ, σ²).
Matrix regression_estimating_jacobian(const RegressionData& data, const RegressionParams& params, TuningPair pair);

/// ∫ u_i f_i^{1+β} e^{αf_i} dy for one design row, by quadrature around xᵀγ.
Vector regression_centring(const Vector& x, const RegressionParams& params, TuningPair pair);

/// Σ_i [∫ Ξ_β(f_i) dy - Ξ_{β-1}(f_i(y_i))]; its gradient is -n × the estimating function.
double regression_empirical_divergence(const RegressionData& data, const RegressionParams& params, TuningPair pair);

struct RegressionSandwich {
  Matrix Jn;
  Matrix Kn;
  Matrix cov;
};

/// Per-observation at-model J_i, K_i, ξ_i by quadrature in y around x_iᵀγ,
/// averaged into J_n, K_n; cov = J_n⁻¹ K_n J_n⁻¹ / n.
RegressionSandwich regression_sandwich(const RegressionData& data, const RegressionParams& params, TuningPair pair);

/// (y_i - x_iᵀγ) / σ.
Vector standardized_residuals(const RegressionData& data, const RegressionParams& params);

/// Least squares with σ² = RSS/n.
RegressionParams ols(const RegressionData& data);

/// Starts: `extra`, then OLS, OLS without the largest 10% of |residuals|,
/// 5 IRLS steps towards least absolute deviations and least trimmed squares
/// from elemental subsets, each with the RSS/n scale and a MAD-of-residuals
/// scale.
std::vector<RegressionParams> regression_starts(const RegressionData& data,
                                                const std::vector<RegressionParams>& extra = {});

/// Multistart Newton in (γ, log σ); distinct roots are ranked by
/// regression_empirical_divergence.
RegressionFit fit_gbede_regression(const RegressionData& data, TuningPair pair,
                                   const std::vector<RegressionParams>& extra_starts = {},
                                   const NewtonOptions& newton = {});

}  // namespace bed
