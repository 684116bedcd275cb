#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bed/numerics.hpp"

namespace bed {

/// Parameter values together with their labels, for reporting.
struct ParamVector {
  Vector values;
  std::vector<std::string> names;
};

/// A univariate parametric family f_θ with score u_θ = ∂ log f_θ / ∂θ and
/// information I_θ = -∂u_θ/∂θ. Implementations are immutable.
class ParametricModel {
 public:
  virtual ~ParametricModel() = default;

  virtual std::string name() const = 0;
  virtual std::vector<std::string> parameter_names() const = 0;
  Eigen::Index dim() const { return static_cast<Eigen::Index>(parameter_names().size()); }

  virtual bool feasible(const Vector& theta) const = 0;
  virtual double density(double x, const Vector& theta) const = 0;
  virtual double log_density(double x, const Vector& theta) const = 0;
  virtual Vector score(double x, const Vector& theta) const = 0;
  virtual Matrix information(double x, const Vector& theta) const = 0;
  /// True support plus a finite integration window that depends on θ.
  virtual SupportSpec support(const Vector& theta) const = 0;

  /// Moment-type start from robust summaries of the sample.
  virtual Vector robust_start(std::span<const double> sample) const = 0;
  /// Index of the parameter that moves with the data location, if any.
  virtual std::optional<Eigen::Index> location_index() const { return std::nullopt; }

  /// Rejects values outside the support (e.g. non-integer counts).
  virtual void validate_sample(std::span<const double> sample) const;

  ParamVector label(const Vector& theta) const { return {theta, parameter_names()}; }
  void require_feasible(const Vector& theta) const;
};

using ModelPtr = std::shared_ptr<const ParametricModel>;

/// N(μ, σ²) in the (μ, σ) parameterisation.
class NormalModel final : public ParametricModel {
 public:
  std::string name() const override { return "normal"; }
  std::vector<std::string> parameter_names() const override { return {"mu", "sigma"}; }
  bool feasible(const Vector& theta) const override;
  double density(double x, const Vector& theta) const override;
  double log_density(double x, const Vector& theta) const override;
  Vector score(double x, const Vector& theta) const override;
  Matrix information(double x, const Vector& theta) const override;
  SupportSpec support(const Vector& theta) const override;
  Vector robust_start(std::span<const double> sample) const override;
  std::optional<Eigen::Index> location_index() const override { return 0; }
};

/// N(μ, σ²) with σ known; θ = (μ).
class NormalLocationModel final : public ParametricModel {
 public:
  explicit NormalLocationModel(double sigma = 1.0);
  double sigma() const { return sigma_; }
  std::string name() const override { return "normal-location"; }
  std::vector<std::string> parameter_names() const override { return {"mu"}; }
  bool feasible(const Vector& theta) const override;
  double density(double x, const Vector& theta) const override;
  double log_density(double x, const Vector& theta) const override;
  Vector score(double x, const Vector& theta) const override;
  Matrix information(double x, const Vector& theta) const override;
  SupportSpec support(const Vector& theta) const override;
  Vector robust_start(std::span<const double> sample) const override;
  std::optional<Eigen::Index> location_index() const override { return 0; }

 private:
  double sigma_;
};

/// Poisson(λ) on the non-negative integers.
class PoissonModel final : public ParametricModel {
 public:
  std::string name() const override { return "poisson"; }
  std::vector<std::string> parameter_names() const override { return {"lambda"}; }
  bool feasible(const Vector& theta) const override;
  double density(double x, const Vector& theta) const override;
  double log_density(double x, const Vector& theta) const override;
  Vector score(double x, const Vector& theta) const override;
  Matrix information(double x, const Vector& theta) const override;
  SupportSpec support(const Vector& theta) const override;
  Vector robust_start(std::span<const double> sample) const override;
  std::optional<Eigen::Index> location_index() const override { return 0; }
  void validate_sample(std::span<const double> sample) const override;
};

ModelPtr normal_model();
ModelPtr normal_location_model(double sigma = 1.0);
ModelPtr poisson_model();
/// Looks a model up by CLI name: normal, normal-location, poisson.
ModelPtr model_by_name(const std::string& name, double known_sigma = 1.0);

/// Integral (or sum) over the model support of g(x, f_θ(x), u_θ(x)).
template <class V, class G>
V model_integral(const ParametricModel& model, const Vector& theta, const G& g, double tol = kDefaultQuadTol) {
  return integrate_support<V>(
      [&](double x) -> V {
        return g(x, model.density(x, theta), model.score(x, theta));
      },
      model.support(theta), tol);
}

/// E_θ[u uᵀ].
Matrix fisher_information(const ParametricModel& model, const Vector& theta);

double median(std::span<const double> sample);
/// Median absolute deviation (unscaled).
double mad(std::span<const double> sample);

}  // namespace bed
