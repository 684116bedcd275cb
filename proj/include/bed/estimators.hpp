#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bed/asymptotics.hpp"
#include "bed/divergence.hpp"

namespace bed {

enum class Method { MLE, MBEDE, GBEDE, L2Pilot };
enum class Selection { UniqueRoot, MinEmpiricalDivergence, MinObjective };

std::string to_string(Method m);
std::string to_string(Selection s);

struct EstimationResult {
  ParamVector theta_hat;
  TuningPair pair;
  Method method = Method::GBEDE;
  double residual_norm = 0.0;
  std::optional<double> objective_value;
  std::vector<ParamVector> all_roots;
  /// Empirical divergence at each entry of all_roots (GBEDE with several roots).
  std::vector<double> root_divergences;
  Selection selected_by = Selection::UniqueRoot;
  std::optional<SandwichCov> sandwich;
  bool converged = false;
  int iterations = 0;

  const Vector& theta() const { return theta_hat.values; }
};

/// How the multistart solver is seeded. The MLE, the L2 pilot and the robust
/// start are always tried; `grid_points` more starts spread the location
/// coordinate over [min, max] of the sample.
struct StartStrategy {
  std::vector<Vector> extra_starts;
  int grid_points = 9;
  /// Reuse a pilot computed elsewhere (tuning evaluates many pairs).
  std::optional<Vector> pilot;
  NewtonOptions newton;
};

EstimationResult fit_mle(std::span<const double> sample, const ParametricModel& model,
                         const std::optional<Vector>& init = std::nullopt);

/// Minimises bed_objective by Nelder-Mead from every start; keeps the lowest.
EstimationResult fit_mbede(std::span<const double> sample, const ParametricModel& model, double alpha,
                           const StartStrategy& starts = {});

/// Solves estimating_fn = 0 from every start and ranks the distinct roots by
/// empirical_divergence. Ties (within 1e-10) go to the root nearest the pilot.
EstimationResult fit_gbede(std::span<const double> sample, const ParametricModel& model, TuningPair pair,
                           const StartStrategy& starts = {});

/// GBEDE(0, 1), the minimum L2 distance estimator.
EstimationResult fit_l2_pilot(std::span<const double> sample, const ParametricModel& model,
                              const StartStrategy& starts = {});

/// Minimum density power divergence estimator, GBEDE(0, β).
EstimationResult fit_mdpde(std::span<const double> sample, const ParametricModel& model, double beta,
                           const StartStrategy& starts = {});

/// The start set used by fit_gbede, in order.
std::vector<Vector> gbede_starts(std::span<const double> sample, const ParametricModel& model,
                                 const StartStrategy& starts, const std::optional<Vector>& pilot);

}  // namespace bed
