#include "bed/divergence.hpp"

#include <cmath>
#include <sstream>

namespace bed {

TuningPair::TuningPair(double a, double b) : alpha(a), beta(b) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("TuningPair: alpha and beta must be finite");
  if (b < 0) throw DomainError("TuningPair: beta must be non-negative");
}

std::string TuningPair::to_string() const {
  std::ostringstream os;
  os << "(" << alpha << ", " << beta << ")";
  return os.str();
}

namespace {

// e^z - 1 - z without cancellation near zero.
double expm1_minus_linear(double z) {
  if (std::abs(z) < 1e-3) {
    return z * z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z * (1.0 / 120.0 + z / 720.0))));
  }
  return std::expm1(z) - z;
}

constexpr double kTinyDensity = 1e-300;

}  // namespace

double bregman_b(double y, double alpha) {
  if (alpha == 0.0) return y * y;
  return 2.0 * expm1_minus_linear(alpha * y) / (alpha * alpha);
}

double bed_divergence(const std::function<double(double)>& g, const std::function<double(double)>& f, double alpha,
                      const SupportSpec& support) {
  // (2/α²) e^{αf} [e^{α(g-f)} - 1 - α(g-f)], which tends to (g-f)² as α → 0
  auto integrand = [&](double x) {
    const double fx = f(x);
    const double d = g(x) - fx;
    if (alpha == 0.0) return d * d;
    return 2.0 * std::exp(alpha * fx) * expm1_minus_linear(alpha * d) / (alpha * alpha);
  };
  return integrate_support<double>(integrand, support);
}

double bed_objective(std::span<const double> sample, const ParametricModel& model, const Vector& theta, double alpha) {
  if (alpha == 0.0) throw DomainError("bed_objective: alpha must be non-zero");
  if (sample.empty()) throw DomainError("bed_objective: empty sample");
  model.require_feasible(theta);
  const double model_term = integrate_support<double>(
      [&](double x) {
        const double f = model.density(x, theta);
        return f * std::exp(alpha * f) - std::expm1(alpha * f) / alpha;
      },
      model.support(theta));
  double data_term = 0.0;
  for (double x : sample) data_term += std::exp(alpha * model.density(x, theta));
  return 2.0 / alpha * (model_term - data_term / static_cast<double>(sample.size()));
}

Vector psi_centring(const Vector& theta, TuningPair pair, const ParametricModel& model) {
  model.require_feasible(theta);
  return model_integral<Vector>(model, theta, [&](double, double f, const Vector& u) -> Vector {
    return u * (f * gbede_weight(f, pair));
  });
}

Vector gbede_psi(double x, const Vector& theta, TuningPair pair, const ParametricModel& model) {
  const Vector centre = psi_centring(theta, pair, model);
  return model.score(x, theta) * gbede_weight(model.density(x, theta), pair) - centre;
}

Vector estimating_fn(std::span<const double> sample, const Vector& theta, TuningPair pair,
                     const ParametricModel& model) {
  if (sample.empty()) throw DomainError("estimating_fn: empty sample");
  const Vector centre = psi_centring(theta, pair, model);
  Vector mean = Vector::Zero(theta.size());
  for (double x : sample) mean += model.score(x, theta) * gbede_weight(model.density(x, theta), pair);
  mean /= static_cast<double>(sample.size());
  return mean - centre;
}

Matrix estimating_jacobian(std::span<const double> sample, const Vector& theta, TuningPair pair,
                           const ParametricModel& model) {
  if (sample.empty()) throw DomainError("estimating_jacobian: empty sample");
  model.require_feasible(theta);
  const Matrix centre = model_integral<Matrix>(model, theta, [&](double x, double f, const Vector& u) -> Matrix {
    return ((1.0 + pair.beta + pair.alpha * f) * u * u.transpose() - model.information(x, theta)) *
           (f * gbede_weight(f, pair));
  });
  Matrix mean = Matrix::Zero(theta.size(), theta.size());
  for (double x : sample) {
    const double f = model.density(x, theta);
    const Vector u = model.score(x, theta);
    mean += ((pair.beta + pair.alpha * f) * u * u.transpose() - model.information(x, theta)) * gbede_weight(f, pair);
  }
  return mean / static_cast<double>(sample.size()) - centre;
}

double xi_antiderivative(double x, double alpha, double beta) {
  if (!(alpha < 0)) throw DomainError("xi_antiderivative: requires alpha < 0");
  if (!(beta > -1)) throw DomainError("xi_antiderivative: requires beta > -1");
  if (!(x >= 0)) throw DomainError("xi_antiderivative: requires x >= 0");
  return -upper_incomplete_gamma(beta + 1.0, -alpha * x) / std::pow(-alpha, beta + 1.0);
}

double power_exp_integral(double y, double alpha, double b, double base) {
  if (!(b >= -1.0)) throw DomainError("power_exp_integral: exponent must be >= -1");
  if (!(y >= 0) || !(base >= 0)) throw DomainError("power_exp_integral: limits must be non-negative");
  const bool log_singular = (b == -1.0);
  if (log_singular) {
    if (!(base > 0)) throw DomainError("power_exp_integral: base point must be positive when b = -1");
    y = std::max(y, kTinyDensity);
  }
  if (y == base) return 0.0;

  if (alpha == 0.0) {
    if (log_singular) return std::log(y / base);
    return (std::pow(y, b + 1.0) - std::pow(base, b + 1.0)) / (b + 1.0);
  }
  if (alpha < 0 && !log_singular) {
    const double scale = std::pow(-alpha, b + 1.0);
    double value = lower_incomplete_gamma(b + 1.0, -alpha * y);
    if (base > 0) value -= lower_incomplete_gamma(b + 1.0, -alpha * base);
    return value / scale;
  }
  const double reach = std::abs(alpha) * std::max(y, base);
  if (reach <= 4.0) {
    // Σ_k α^k/k! ∫ t^{b+k}
    double sum = 0.0;
    double coeff = 1.0;  // α^k / k!
    for (int k = 0; k < 200; ++k) {
      const double p = b + k + 1.0;
      const double piece = (k == 0 && log_singular) ? std::log(y / base)
                                                    : (std::pow(y, p) - (base > 0 ? std::pow(base, p) : 0.0)) / p;
      const double term = coeff * piece;
      sum += term;
      if (k > reach && std::abs(term) <= 1e-17 * std::abs(sum)) return sum;
      coeff *= alpha / (k + 1.0);
    }
    return sum;
  }
  // ∫ t^{b+1} e^{αt} ds with t = e^s
  const double s_hi = std::log(y);
  const double s_lo = base > 0 ? std::log(base) : s_hi - 40.0 / (b + 1.0);
  return integrate_interval<double>(
      [&](double s) {
        const double t = std::exp(s);
        return std::pow(t, b + 1.0) * std::exp(alpha * t);
      },
      s_lo, s_hi, 1e-13);
}

double empirical_divergence(std::span<const double> sample, const Vector& theta, TuningPair pair,
                            const ParametricModel& model) {
  if (sample.empty()) throw DomainError("empirical_divergence: empty sample");
  model.require_feasible(theta);
  const double model_term = integrate_support<double>(
      [&](double x) { return power_exp_integral(model.density(x, theta), pair.alpha, pair.beta, 0.0); },
      model.support(theta));
  const double base = pair.beta > 0 ? 0.0 : kAntiderivativeBase;
  double data_term = 0.0;
  for (double x : sample)
    data_term += power_exp_integral(model.density(x, theta), pair.alpha, pair.beta - 1.0, base);
  return model_term - data_term / static_cast<double>(sample.size());
}

}  // namespace bed
