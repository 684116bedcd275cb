#include "bed/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bed {

namespace {

constexpr double kNormalWindowSds = 9.0;
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

void require_size(const Vector& theta, Eigen::Index p, const char* model) {
  if (theta.size() != p)
    throw DomainError(std::string(model) + ": expected " + std::to_string(p) + " parameters, got " +
                      std::to_string(theta.size()));
}

}  // namespace

void ParametricModel::require_feasible(const Vector& theta) const {
  if (theta.size() != dim() || !feasible(theta))
    throw DomainError(name() + ": infeasible parameter value");
}

void ParametricModel::validate_sample(std::span<const double> sample) const {
  if (sample.empty()) throw DomainError(name() + ": empty sample");
  for (double x : sample)
    if (!std::isfinite(x)) throw DomainError(name() + ": sample contains a non-finite value");
}

double median(std::span<const double> sample) {
  if (sample.empty()) throw DomainError("median of an empty sample");
  std::vector<double> v(sample.begin(), sample.end());
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

double mad(std::span<const double> sample) {
  const double m = median(sample);
  std::vector<double> dev;
  dev.reserve(sample.size());
  for (double x : sample) dev.push_back(std::abs(x - m));
  return median(dev);
}

// ------------------------------------------------------------------ normal --

bool NormalModel::feasible(const Vector& theta) const {
  return theta.size() == 2 && std::isfinite(theta(0)) && std::isfinite(theta(1)) && theta(1) > 0.0;
}

double NormalModel::log_density(double x, const Vector& theta) const {
  require_size(theta, 2, "normal");
  if (!(theta(1) > 0)) throw DomainError("normal: sigma must be positive");
  const double z = (x - theta(0)) / theta(1);
  return -0.5 * z * z - std::log(theta(1)) - kLogSqrt2Pi;
}

double NormalModel::density(double x, const Vector& theta) const { return std::exp(log_density(x, theta)); }

Vector NormalModel::score(double x, const Vector& theta) const {
  require_size(theta, 2, "normal");
  const double s = theta(1);
  if (!(s > 0)) throw DomainError("normal: sigma must be positive");
  const double d = x - theta(0);
  Vector u(2);
  u << d / (s * s), d * d / (s * s * s) - 1.0 / s;
  return u;
}

Matrix NormalModel::information(double x, const Vector& theta) const {
  require_size(theta, 2, "normal");
  const double s = theta(1);
  if (!(s > 0)) throw DomainError("normal: sigma must be positive");
  const double d = x - theta(0);
  const double s2 = s * s;
  Matrix info(2, 2);
  info << 1.0 / s2, 2.0 * d / (s2 * s), 2.0 * d / (s2 * s), 3.0 * d * d / (s2 * s2) - 1.0 / s2;
  return info;
}

SupportSpec NormalModel::support(const Vector& theta) const {
  require_feasible(theta);
  return SupportSpec::real_line().with_window(theta(0) - kNormalWindowSds * theta(1),
                                              theta(0) + kNormalWindowSds * theta(1));
}

Vector NormalModel::robust_start(std::span<const double> sample) const {
  Vector s(2);
  double scale = 1.4826 * mad(sample);
  if (!(scale > 0)) {
    // fall back to the standard deviation when more than half the points tie
    double mean = 0.0;
    for (double x : sample) mean += x;
    mean /= static_cast<double>(sample.size());
    double ss = 0.0;
    for (double x : sample) ss += (x - mean) * (x - mean);
    scale = std::sqrt(ss / static_cast<double>(sample.size()));
  }
  s << median(sample), scale;
  return s;
}

// --------------------------------------------------------- normal location --

NormalLocationModel::NormalLocationModel(double sigma) : sigma_(sigma) {
  if (!(sigma > 0) || !std::isfinite(sigma)) throw DomainError("normal-location: sigma must be positive");
}

bool NormalLocationModel::feasible(const Vector& theta) const {
  return theta.size() == 1 && std::isfinite(theta(0));
}

double NormalLocationModel::log_density(double x, const Vector& theta) const {
  require_size(theta, 1, "normal-location");
  const double z = (x - theta(0)) / sigma_;
  return -0.5 * z * z - std::log(sigma_) - kLogSqrt2Pi;
}

double NormalLocationModel::density(double x, const Vector& theta) const {
  return std::exp(log_density(x, theta));
}

Vector NormalLocationModel::score(double x, const Vector& theta) const {
  require_size(theta, 1, "normal-location");
  Vector u(1);
  u << (x - theta(0)) / (sigma_ * sigma_);
  return u;
}

Matrix NormalLocationModel::information(double, const Vector& theta) const {
  require_size(theta, 1, "normal-location");
  Matrix info(1, 1);
  info << 1.0 / (sigma_ * sigma_);
  return info;
}

SupportSpec NormalLocationModel::support(const Vector& theta) const {
  require_feasible(theta);
  return SupportSpec::real_line().with_window(theta(0) - kNormalWindowSds * sigma_,
                                              theta(0) + kNormalWindowSds * sigma_);
}

Vector NormalLocationModel::robust_start(std::span<const double> sample) const {
  Vector s(1);
  s << median(sample);
  return s;
}

// ----------------------------------------------------------------- poisson --

bool PoissonModel::feasible(const Vector& theta) const {
  return theta.size() == 1 && std::isfinite(theta(0)) && theta(0) > 0.0;
}

double PoissonModel::log_density(double x, const Vector& theta) const {
  require_size(theta, 1, "poisson");
  const double lambda = theta(0);
  if (!(lambda > 0)) throw DomainError("poisson: lambda must be positive");
  if (x < 0 || x != std::floor(x)) return -kInf;
  return x * std::log(lambda) - lambda - std::lgamma(x + 1.0);
}

double PoissonModel::density(double x, const Vector& theta) const { return std::exp(log_density(x, theta)); }

Vector PoissonModel::score(double x, const Vector& theta) const {
  require_size(theta, 1, "poisson");
  if (!(theta(0) > 0)) throw DomainError("poisson: lambda must be positive");
  Vector u(1);
  u << x / theta(0) - 1.0;
  return u;
}

Matrix PoissonModel::information(double x, const Vector& theta) const {
  require_size(theta, 1, "poisson");
  if (!(theta(0) > 0)) throw DomainError("poisson: lambda must be positive");
  Matrix info(1, 1);
  info << x / (theta(0) * theta(0));
  return info;
}

SupportSpec PoissonModel::support(const Vector& theta) const {
  require_feasible(theta);
  return SupportSpec::nonnegative_integers();
}

Vector PoissonModel::robust_start(std::span<const double> sample) const {
  Vector s(1);
  s << std::max(median(sample), 0.5);
  return s;
}

void PoissonModel::validate_sample(std::span<const double> sample) const {
  ParametricModel::validate_sample(sample);
  for (double x : sample)
    if (x < 0 || x != std::floor(x)) throw DomainError("poisson: observations must be non-negative integers");
}

// --------------------------------------------------------------- factories --

ModelPtr normal_model() { return std::make_shared<NormalModel>(); }
ModelPtr normal_location_model(double sigma) { return std::make_shared<NormalLocationModel>(sigma); }
ModelPtr poisson_model() { return std::make_shared<PoissonModel>(); }

ModelPtr model_by_name(const std::string& name, double known_sigma) {
  if (name == "normal") return normal_model();
  if (name == "normal-location") return normal_location_model(known_sigma);
  if (name == "poisson") return poisson_model();
  throw DomainError("unknown model '" + name + "' (expected normal, normal-location or poisson)");
}

Matrix fisher_information(const ParametricModel& model, const Vector& theta) {
  model.require_feasible(theta);
  return model_integral<Matrix>(model, theta, [](double, double f, const Vector& u) -> Matrix {
    return f * (u * u.transpose());
  });
}

}  // namespace bed
