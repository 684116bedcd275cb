#include "bed/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bed {

std::string to_string(Method m) {
  switch (m) {
    case Method::MLE: return "MLE";
    case Method::MBEDE: return "MBEDE";
    case Method::GBEDE: return "GBEDE";
    case Method::L2Pilot: return "L2-pilot";
  }
  return "?";
}

std::string to_string(Selection s) {
  switch (s) {
    case Selection::UniqueRoot: return "unique-root";
    case Selection::MinEmpiricalDivergence: return "min-empirical-divergence";
    case Selection::MinObjective: return "min-objective";
  }
  return "?";
}

namespace {

constexpr double kTieTolerance = 1e-10;
constexpr double kInfD = std::numeric_limits<double>::infinity();

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

NewtonOptions with_feasibility(NewtonOptions opt, const ParametricModel& model) {
  if (!opt.feasible) opt.feasible = [&model](const Vector& t) { return model.feasible(t); };
  return opt;
}

void check_sample(std::span<const double> sample, const ParametricModel& model) {
  model.validate_sample(sample);
  if (!model.feasible(model.robust_start(sample)))
    throw DomainError(model.name() + ": degenerate sample (no spread), parameters are not identifiable");
}

Vector mean_score(std::span<const double> sample, const ParametricModel& model, const Vector& theta) {
  Vector s = Vector::Zero(theta.size());
  for (double x : sample) s += model.score(x, theta);
  return s / static_cast<double>(sample.size());
}

}  // namespace

EstimationResult fit_mle(std::span<const double> sample, const ParametricModel& model, const std::optional<Vector>& init) {
  check_sample(sample, model);
  std::vector<Vector> starts;
  if (init) starts.push_back(*init);
  starts.push_back(model.robust_start(sample));
  NewtonOptions opt = with_feasibility({}, model);
  opt.jacobian = [&](const Vector& t) {
    Matrix h = Matrix::Zero(t.size(), t.size());
    for (double x : sample) h -= model.information(x, t);
    return Matrix(h / static_cast<double>(sample.size()));
  };
  auto roots = solve_multistart([&](const Vector& t) { return mean_score(sample, model, t); }, starts, opt);
  if (roots.empty()) throw NumericalError("fit_mle", "score equation not solved from " + std::to_string(starts.size()) + " starts");
  // the likelihood equation has one root for these families; keep the highest likelihood if not
  auto loglik = [&](const Vector& t) {
    double s = 0.0;
    for (double x : sample) s += model.log_density(x, t);
    return s;
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < roots.size(); ++i)
    if (loglik(roots[i].x) > loglik(roots[best].x)) best = i;

  EstimationResult r;
  r.theta_hat = model.label(roots[best].x);
  r.pair = TuningPair(0, 0);
  r.method = Method::MLE;
  r.residual_norm = roots[best].residual;
  for (const auto& root : roots) r.all_roots.push_back(model.label(root.x));
  r.selected_by = roots.size() == 1 ? Selection::UniqueRoot : Selection::MinObjective;
  r.objective_value = -loglik(roots[best].x) / static_cast<double>(sample.size());
  r.converged = true;
  r.iterations = roots[best].iterations;
  return r;
}

std::vector<Vector> gbede_starts(std::span<const double> sample, const ParametricModel& model,
                                 const StartStrategy& strategy, const std::optional<Vector>& pilot) {
  std::vector<Vector> starts = strategy.extra_starts;
  try {
    starts.push_back(fit_mle(sample, model).theta());
  } catch (const std::exception&) {
  }
  if (pilot) starts.push_back(*pilot);
  const Vector robust = model.robust_start(sample);
  starts.push_back(robust);
  if (auto loc = model.location_index(); loc && strategy.grid_points > 0) {
    const auto [lo_it, hi_it] = std::minmax_element(sample.begin(), sample.end());
    const double lo = *lo_it, hi = *hi_it;
    const int g = strategy.grid_points;
    for (int k = 0; k < g; ++k) {
      Vector s = robust;
      s(*loc) = g == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * k / (g - 1.0);
      starts.push_back(s);
    }
  }
  std::erase_if(starts, [&](const Vector& s) { return s.size() != model.dim() || !model.feasible(s); });
  return starts;
}

namespace {

// Far from the sample, β > 0 drives every weight f_θ(X_i)^β e^{αf_θ(X_i)}
// towards zero, so ‖F‖ drops below ftol with no sign change, or the data
// terms shrink to the rounding noise of the centring integral and balance
// against it. A genuine root makes data terms well above that floor cancel.
bool cancels_data_terms(std::span<const double> sample, const Root& root, TuningPair pair,
                        const ParametricModel& model) {
  Vector scale = Vector::Zero(root.x.size());
  for (double x : sample) {
    const double f = model.density(x, root.x);
    scale += (model.score(x, root.x) * gbede_weight(f, pair)).cwiseAbs();
  }
  const double s = scale.maxCoeff() / static_cast<double>(sample.size());
  if (!(s > 0.0) || root.residual > 1e-6 * s) return false;
  const Vector centring_scale = model_integral<Vector>(model, root.x, [&](double, double f, const Vector& u) {
    return Vector(u.cwiseAbs() * f * gbede_weight(f, pair));
  });
  return s > 1e-12 * centring_scale.maxCoeff();
}

}  // namespace

EstimationResult fit_gbede(std::span<const double> sample, const ParametricModel& model, TuningPair pair,
                           const StartStrategy& strategy) {
  check_sample(sample, model);
  const bool is_pilot = pair == TuningPair(0, 1);
  std::optional<Vector> pilot = strategy.pilot;
  if (!pilot && !is_pilot) {
    try {
      pilot = fit_l2_pilot(sample, model, strategy).theta();
    } catch (const NumericalError&) {
    }
  }
  const auto starts = gbede_starts(sample, model, strategy, pilot);
  if (starts.empty()) throw DomainError("fit_gbede: no feasible start");

  NewtonOptions opt = with_feasibility(strategy.newton, model);
  if (!opt.jacobian) opt.jacobian = [&](const Vector& t) { return estimating_jacobian(sample, t, pair, model); };
  auto roots = solve_multistart([&](const Vector& t) { return estimating_fn(sample, t, pair, model); }, starts, opt);
  std::erase_if(roots, [&](const Root& root) { return !cancels_data_terms(sample, root, pair, model); });
  if (roots.empty())
    throw NumericalError("fit_gbede", "no root of the estimating equation for pair " + pair.to_string() + " from " +
                                          std::to_string(starts.size()) + " starts; widen the start grid");

  EstimationResult r;
  r.pair = pair;
  r.method = is_pilot ? Method::L2Pilot : Method::GBEDE;
  for (const auto& root : roots) r.all_roots.push_back(model.label(root.x));

  std::size_t best = 0;
  if (roots.size() == 1) {
    r.selected_by = Selection::UniqueRoot;
  } else {
    r.selected_by = Selection::MinEmpiricalDivergence;
    for (const auto& root : roots) {
      double d = kInfD;
      try {
        d = empirical_divergence(sample, root.x, pair, model);
      } catch (const std::exception&) {
      }
      r.root_divergences.push_back(d);
    }
    const Vector anchor = pilot ? *pilot : model.robust_start(sample);
    for (std::size_t i = 1; i < roots.size(); ++i) {
      const double di = r.root_divergences[i], db = r.root_divergences[best];
      if (di < db - kTieTolerance) {
        best = i;
      } else if (std::abs(di - db) <= kTieTolerance &&
                 inf_norm(roots[i].x - anchor) < inf_norm(roots[best].x - anchor)) {
        best = i;
      }
    }
    if (!std::isfinite(r.root_divergences[best]))
      throw NumericalError("fit_gbede", "empirical divergence could not be evaluated at any root");
  }
  r.theta_hat = model.label(roots[best].x);
  r.residual_norm = roots[best].residual;
  r.converged = true;
  r.iterations = roots[best].iterations;
  if (!r.root_divergences.empty()) r.objective_value = r.root_divergences[best];
  return r;
}

EstimationResult fit_l2_pilot(std::span<const double> sample, const ParametricModel& model,
                              const StartStrategy& strategy) {
  StartStrategy own = strategy;
  own.pilot.reset();
  auto r = fit_gbede(sample, model, TuningPair(0, 1), own);
  r.method = Method::L2Pilot;
  return r;
}

EstimationResult fit_mdpde(std::span<const double> sample, const ParametricModel& model, double beta,
                           const StartStrategy& strategy) {
  return fit_gbede(sample, model, TuningPair(0, beta), strategy);
}

EstimationResult fit_mbede(std::span<const double> sample, const ParametricModel& model, double alpha,
                           const StartStrategy& strategy) {
  if (alpha == 0.0) throw DomainError("fit_mbede: alpha must be non-zero (alpha = 0 is the L2 estimator)");
  check_sample(sample, model);
  std::optional<Vector> pilot = strategy.pilot;
  if (!pilot) {
    try {
      pilot = fit_l2_pilot(sample, model, strategy).theta();
    } catch (const NumericalError&) {
    }
  }
  const auto starts = gbede_starts(sample, model, strategy, pilot);
  auto objective = [&](const Vector& t) {
    if (!model.feasible(t)) return kInfD;
    try {
      return bed_objective(sample, model, t, alpha);
    } catch (const std::exception&) {
      return kInfD;
    }
  };

  std::vector<MinimizeResult> minima;
  for (const auto& s : starts) {
    if (!std::isfinite(objective(s))) continue;
    try {
      auto m = minimize(objective, s, 1e-9 * (1.0 + inf_norm(s)));
      const bool duplicate = std::any_of(minima.begin(), minima.end(), [&](const MinimizeResult& q) {
        return inf_norm(q.argmin - m.argmin) <= 1e-5 * (1.0 + inf_norm(m.argmin));
      });
      if (!duplicate) minima.push_back(std::move(m));
    } catch (const NumericalError&) {
    }
  }
  if (minima.empty()) throw NumericalError("fit_mbede", "the objective could not be minimised from any start");
  std::size_t best = 0;
  for (std::size_t i = 1; i < minima.size(); ++i)
    if (minima[i].value < minima[best].value) best = i;

  EstimationResult r;
  r.theta_hat = model.label(minima[best].argmin);
  r.pair = TuningPair(alpha, 1);
  r.method = Method::MBEDE;
  r.objective_value = minima[best].value;
  for (const auto& m : minima) r.all_roots.push_back(model.label(m.argmin));
  r.selected_by = minima.size() == 1 ? Selection::UniqueRoot : Selection::MinObjective;
  r.residual_norm = inf_norm(estimating_fn(sample, minima[best].argmin, r.pair, model));
  r.converged = true;
  r.iterations = minima[best].iterations;
  return r;
}

}  // namespace bed
