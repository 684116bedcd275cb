#pragma once

#include <functional>
#include <span>
#include <string>

#include "bed/models.hpp"

namespace bed {

/// Tuning parameters (α, β) of the generalised estimating equation.
/// α is any real, β ≥ 0. (0,0) is the MLE, (0,β) the density power
/// divergence estimator, (α,1) the minimum B-exponential divergence estimator.
struct TuningPair {
  double alpha = 0.0;
  double beta = 0.0;

  TuningPair() = default;
  TuningPair(double a, double b);

  bool operator==(const TuningPair&) const = default;
  std::string to_string() const;
};

/// Base point used by the numeric antiderivative when t^{β-1} is not
/// integrable at zero (β = 0).
inline constexpr double kAntiderivativeBase = 1e-12;

/// B(y) = 2(e^{αy} - αy - 1)/α², with the α → 0 limit y².
double bregman_b(double y, double alpha);

/// d_α(g, f) with all three terms, by quadrature over `support`.
double bed_divergence(const std::function<double(double)>& g, const std::function<double(double)>& f, double alpha,
                      const SupportSpec& support);

/// (2/α)·(1/n) Σ V_θ(X_i): d_α(g_n, f_θ) up to θ-free terms, minimised by the
/// MBEDE for either sign of α. The θ-free constant ∫ 1/α dx is dropped so the
/// integral converges. Its gradient is -2 × estimating_fn at β = 1.
double bed_objective(std::span<const double> sample, const ParametricModel& model, const Vector& theta,
                     double alpha);

/// ∫ u_θ f_θ^{1+β} e^{α f_θ}: the centring term of ψ.
Vector psi_centring(const Vector& theta, TuningPair pair, const ParametricModel& model);

/// ψ(x, θ) = u_θ(x) f_θ^β(x) e^{α f_θ(x)} - ∫ u_θ f_θ^{1+β} e^{α f_θ}.
Vector gbede_psi(double x, const Vector& theta, TuningPair pair, const ParametricModel& model);

/// Sample mean of ψ; its zeros define GBEDE(α, β).
Vector estimating_fn(std::span<const double> sample, const Vector& theta, TuningPair pair,
                     const ParametricModel& model);

/// ∂ estimating_fn / ∂θ: the sample mean of {-I + (β + αf)uuᵀ} f^β e^{αf}
/// minus ∫ {-I + (1 + β + αf)uuᵀ} f^{1+β} e^{αf}.
Matrix estimating_jacobian(std::span<const double> sample, const Vector& theta, TuningPair pair,
                           const ParametricModel& model);

/// ξ(x, α, β) = -Γ(β+1, -αx)/(-α)^{β+1}, an antiderivative of x^β e^{αx}
/// for α < 0, β > -1, x ≥ 0.
double xi_antiderivative(double x, double alpha, double beta);

/// ∫_base^y t^b e^{αt} dt for any α, b ≥ -1. Closed forms where
/// available, otherwise series or quadrature in log t.
double power_exp_integral(double y, double alpha, double b, double base);

/// Up to a θ-free constant: ∫ ξ(f_θ, α, β) - (1/n) Σ ξ(f_θ(X_i), α, β-1).
/// Its θ-gradient is minus the estimating function, so it ranks roots.
double empirical_divergence(std::span<const double> sample, const Vector& theta, TuningPair pair,
                            const ParametricModel& model);

/// True when empirical_divergence uses the incomplete-gamma closed form.
inline bool empirical_divergence_closed_form(TuningPair pair) { return pair.alpha < 0 && pair.beta > 0; }

/// f^β e^{αf} with 0^0 = 1.
inline double gbede_weight(double f, TuningPair pair) {
  return (pair.beta == 0.0 ? 1.0 : std::pow(f, pair.beta)) * std::exp(pair.alpha * f);
}

}  // namespace bed
