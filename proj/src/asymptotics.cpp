#include "bed/asymptotics.hpp"

#include <cmath>

namespace bed {

namespace {

SandwichCov assemble(Matrix J, Matrix K, Vector xi, std::optional<std::size_t> n) {
  const Matrix Jinv = matrix_inverse(J, "J");
  Matrix cov = Jinv * K * Jinv.transpose();
  cov = 0.5 * (cov + cov.transpose());
  return {std::move(J), std::move(K), std::move(xi), std::move(cov), n};
}

}  // namespace

SandwichCov model_JK(const Vector& theta, TuningPair pair, const ParametricModel& model) {
  model.require_feasible(theta);
  const Eigen::Index p = theta.size();
  // columns: [J | K-part | ξ] in a single pass over the support
  const Matrix all = model_integral<Matrix>(model, theta, [&](double, double f, const Vector& u) -> Matrix {
    const double w = gbede_weight(f, pair);
    Matrix m(p, 2 * p + 1);
    const Matrix uu = u * u.transpose();
    m.leftCols(p) = uu * (f * w);
    m.middleCols(p, p) = uu * (f * w * w);
    m.col(2 * p) = u * (f * w);
    return m;
  });
  const Vector xi = all.col(2 * p);
  Matrix J = all.leftCols(p);
  Matrix K = all.middleCols(p, p) - xi * xi.transpose();
  J = 0.5 * (J + J.transpose());
  K = 0.5 * (K + K.transpose());
  return assemble(std::move(J), std::move(K), xi, std::nullopt);
}

SandwichCov empirical_JK(std::span<const double> sample, const Vector& theta, TuningPair pair,
                         const ParametricModel& model) {
  if (sample.empty()) throw DomainError("empirical_JK: empty sample");
  model.require_feasible(theta);
  const Eigen::Index p = theta.size();
  auto correction = [&](double x, double f, const Vector& u) -> Matrix {
    const Matrix uu = u * u.transpose();
    return (model.information(x, theta) - pair.beta * uu - pair.alpha * f * uu) * gbede_weight(f, pair);
  };
  // columns: [∫uuᵀ f w | ∫ correction · f]
  const Matrix at_model = model_integral<Matrix>(model, theta, [&](double x, double f, const Vector& u) -> Matrix {
    Matrix m(p, 2 * p);
    m.leftCols(p) = u * u.transpose() * (f * gbede_weight(f, pair));
    m.rightCols(p) = correction(x, f, u) * f;
    return m;
  });

  Matrix corr_mean = Matrix::Zero(p, p);
  Matrix uuw2 = Matrix::Zero(p, p);
  Vector xi = Vector::Zero(p);
  for (double x : sample) {
    const double f = model.density(x, theta);
    const Vector u = model.score(x, theta);
    const double w = gbede_weight(f, pair);
    corr_mean += correction(x, f, u);
    uuw2 += u * u.transpose() * (w * w);
    xi += u * w;
  }
  const double n = static_cast<double>(sample.size());
  corr_mean /= n;
  uuw2 /= n;
  xi /= n;

  Matrix J = at_model.leftCols(p) + corr_mean - at_model.rightCols(p);
  Matrix K = uuw2 - xi * xi.transpose();
  J = 0.5 * (J + J.transpose());
  K = 0.5 * (K + K.transpose());
  return assemble(std::move(J), std::move(K), std::move(xi), sample.size());
}

double are(TuningPair pair, const ParametricModel& model, const Vector& theta, Eigen::Index component) {
  if (component < 0 || component >= theta.size()) throw DomainError("are: component out of range");
  const Matrix fisher_inv = matrix_inverse(fisher_information(model, theta), "Fisher information");
  const SandwichCov s = model_JK(theta, pair, model);
  return 100.0 * fisher_inv(component, component) / s.cov(component, component);
}

Vector influence_function(double y, const Vector& theta, TuningPair pair, const ParametricModel& model,
                          const SandwichCov& jk) {
  const Vector lead = model.score(y, theta) * gbede_weight(model.density(y, theta), pair);
  return matrix_inverse(jk.J, "J") * (lead - jk.xi);
}

Vector influence_function(double y, const Vector& theta, TuningPair pair, const ParametricModel& model) {
  return influence_function(y, theta, pair, model, model_JK(theta, pair, model));
}

OptimalAlpha optimal_alpha(double beta, const ParametricModel& model, const Vector& theta,
                           std::pair<double, double> bracket, Eigen::Index component, double tol) {
  const auto [lo, hi] = bracket;
  if (!(lo < hi)) throw DomainError("optimal_alpha: empty bracket");
  auto f = [&](double a) { return are(TuningPair(a, beta), model, theta, component); };
  const auto [a, v] = golden_section_max(f, lo, hi, tol);
  // an endpoint optimum is only acceptable when it attains the Cramér-Rao bound
  const bool at_edge = a - lo <= 2 * tol || hi - a <= 2 * tol;
  if (at_edge) {
    const double edge = hi - a <= 2 * tol ? hi : lo;
    const double edge_value = f(edge);
    if (edge_value >= 100.0 - 1e-6) return {edge, edge_value};
    throw NumericalError("optimal_alpha", "no interior maximum in [" + std::to_string(lo) + ", " +
                                              std::to_string(hi) + "] for beta " + std::to_string(beta));
  }
  return {a, v};
}

}  // namespace bed
