#include "bed/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "bed/asymptotics.hpp"

namespace bed {

namespace {

constexpr double kTieTolerance = 1e-10;

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

Vector residuals(const RegressionData& data, const Vector& gamma) { return data.y - data.X * gamma; }

void require_params(const RegressionData& data, const RegressionParams& p) {
  if (p.gamma.size() != data.X.cols()) throw DomainError("regression: gamma has the wrong length");
  if (!(p.sigma2 > 0) || !std::isfinite(p.sigma2)) throw DomainError("regression: sigma2 must be positive and finite");
}

double normal_pdf(double r, double sigma) {
  const double z = r / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

// σ² entry of the centring term, which is the same for every row, and its
// derivative in σ²: ∫ u_s f w dy and ∫ {∂u_s/∂σ² + (1 + β + αf) u_s²} f w dy
// with u_s = r²/(2σ⁴) - 1/(2σ²)
Vector scale_centring(double sigma2, TuningPair pair) {
  const double sigma = std::sqrt(sigma2);
  Vector theta(2);
  theta << 0.0, sigma;
  return integrate_support<Vector>(
      [&](double r) -> Vector {
        const double f = normal_pdf(r, sigma);
        const double fw = f * gbede_weight(f, pair);
        const double us = r * r / (2.0 * sigma2 * sigma2) - 0.5 / sigma2;
        const double dus = -r * r / (sigma2 * sigma2 * sigma2) + 0.5 / (sigma2 * sigma2);
        Vector out(2);
        out << us * fw, (dus + (1.0 + pair.beta + pair.alpha * f) * us * us) * fw;
        return out;
      },
      normal_model()->support(theta));
}

Vector to_natural(const RegressionParams& p) {
  Vector z(p.gamma.size() + 1);
  z.head(p.gamma.size()) = p.gamma;
  z(p.gamma.size()) = 0.5 * std::log(p.sigma2);
  return z;
}

RegressionParams from_natural(const Vector& z) {
  const Eigen::Index q = z.size() - 1;
  return {z.head(q), std::exp(2.0 * z(q))};
}

Vector weighted_ls(const Matrix& X, const Vector& y, const Vector& w) {
  const Vector sw = w.cwiseSqrt();
  return (sw.asDiagonal() * X).colPivHouseholderQr().solve(sw.cwiseProduct(y));
}

// Least trimmed squares over h = ⌊(n + p + 1)/2⌋ points: exact fits through
// elemental subsets (all of them when there are at most 500, otherwise a
// fixed pseudo-random draw) followed by two concentration steps.
Vector lts_start(const RegressionData& data) {
  const Eigen::Index n = data.n(), p = data.X.cols();
  const Eigen::Index h = (n + p + 1) / 2;
  auto trimmed_loss = [&](const Vector& g, std::vector<Eigen::Index>* keep) {
    const Vector r2 = residuals(data, g).cwiseAbs2();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::nth_element(idx.begin(), idx.begin() + (h - 1), idx.end(), [&](auto a, auto b) { return r2(a) < r2(b); });
    double loss = 0.0;
    for (Eigen::Index i = 0; i < h; ++i) loss += r2(idx[static_cast<std::size_t>(i)]);
    if (keep) keep->assign(idx.begin(), idx.begin() + h);
    return loss;
  };
  auto refit = [&](const std::vector<Eigen::Index>& rows) {
    Matrix X(static_cast<Eigen::Index>(rows.size()), p);
    Vector y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      X.row(static_cast<Eigen::Index>(i)) = data.X.row(rows[i]);
      y(static_cast<Eigen::Index>(i)) = data.y(rows[i]);
    }
    return Vector(X.colPivHouseholderQr().solve(y));
  };

  Vector best = ols(data).gamma;
  double best_loss = trimmed_loss(best, nullptr);
  auto consider = [&](const std::vector<Eigen::Index>& subset) {
    Matrix X(p, p);
    Vector y(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      X.row(i) = data.X.row(subset[static_cast<std::size_t>(i)]);
      y(i) = data.y(subset[static_cast<std::size_t>(i)]);
    }
    Eigen::FullPivLU<Matrix> lu(X);
    if (!lu.isInvertible()) return;
    Vector g = lu.solve(y);
    std::vector<Eigen::Index> keep;
    for (int c = 0; c < 2; ++c) {
      trimmed_loss(g, &keep);
      g = refit(keep);
    }
    const double loss = trimmed_loss(g, nullptr);
    if (loss < best_loss) {
      best_loss = loss;
      best = g;
    }
  };

  constexpr double kMaxSubsets = 500;
  double count = 1.0;
  for (Eigen::Index k = 0; k < p; ++k) count = count * static_cast<double>(n - k) / static_cast<double>(k + 1);
  std::vector<Eigen::Index> subset(static_cast<std::size_t>(p));
  if (count <= kMaxSubsets) {
    // lexicographic enumeration of p-subsets of {0, ..., n-1}
    std::iota(subset.begin(), subset.end(), Eigen::Index{0});
    while (true) {
      consider(subset);
      Eigen::Index i = p - 1;
      while (i >= 0 && subset[static_cast<std::size_t>(i)] == n - p + i) --i;
      if (i < 0) break;
      ++subset[static_cast<std::size_t>(i)];
      for (Eigen::Index j = i + 1; j < p; ++j) subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1;
    }
  } else {
    std::mt19937_64 rng(0x5eed);
    std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    for (int draw = 0; draw < static_cast<int>(kMaxSubsets); ++draw) {
      for (Eigen::Index k = 0; k < p; ++k) {
        std::uniform_int_distribution<Eigen::Index> pick(k, n - 1);
        std::swap(all[static_cast<std::size_t>(k)], all[static_cast<std::size_t>(pick(rng))]);
      }
      std::copy(all.begin(), all.begin() + p, subset.begin());
      consider(subset);
    }
  }
  return best;
}

double mad_scale(const Vector& r) {
  std::vector<double> v(r.data(), r.data() + r.size());
  return 1.4826 * mad(v);
}

// Roots in σ of the σ² component of the estimating function with γ held
// fixed, bracketed on a log grid around `scale` and refined by bisection.
std::vector<double> profile_sigma2(const RegressionData& data, const Vector& gamma, double scale, TuningPair pair) {
  std::vector<double> out;
  auto g = [&](double log_sigma) {
    const Vector f = regression_estimating_fn(data, {gamma, std::exp(2.0 * log_sigma)}, pair);
    return f(f.size() - 1);
  };
  const double centre = std::log(scale);
  constexpr int kSteps = 40;
  double lo = centre - 6.0, glo = g(lo);
  for (int k = 1; k <= kSteps; ++k) {
    const double hi = centre - 6.0 + 12.0 * k / kSteps, ghi = g(hi);
    if (std::isfinite(glo) && std::isfinite(ghi) && (glo < 0) != (ghi < 0)) {
      double a = lo, b = hi, ga = glo;
      for (int it = 0; it < 50 && b - a > 1e-4; ++it) {
        const double m = 0.5 * (a + b), gm = g(m);
        if ((gm < 0) == (ga < 0)) {
          a = m;
          ga = gm;
        } else {
          b = m;
        }
      }
      out.push_back(std::exp(a + b));
    }
    lo = hi;
    glo = ghi;
  }
  return out;
}

}  // namespace

RegressionData RegressionData::from_columns(const std::vector<std::vector<double>>& covariates,
                                            const std::vector<double>& y) {
  RegressionData d;
  const auto n = static_cast<Eigen::Index>(y.size());
  d.X = Matrix::Ones(n, static_cast<Eigen::Index>(covariates.size()) + 1);
  d.y = Eigen::Map<const Vector>(y.data(), n);
  for (std::size_t j = 0; j < covariates.size(); ++j) {
    if (static_cast<Eigen::Index>(covariates[j].size()) != n)
      throw DomainError("regression data: covariate " + std::to_string(j + 1) + " has the wrong length");
    d.X.col(static_cast<Eigen::Index>(j) + 1) = Eigen::Map<const Vector>(covariates[j].data(), n);
  }
  d.validate();
  return d;
}

void RegressionData::validate() const {
  if (X.rows() != y.size()) throw DomainError("regression data: X and y differ in length");
  if (X.cols() < 1) throw DomainError("regression data: empty design");
  if (!(y.size() > X.cols())) throw DomainError("regression data: need more observations than coefficients");
  if (!X.allFinite() || !y.allFinite()) throw DomainError("regression data: non-finite values");
  if ((X.col(0).array() != 1.0).any()) throw DomainError("regression data: first design column must be all ones");
  if (X.colPivHouseholderQr().rank() < X.cols()) throw DomainError("regression data: singular design matrix");
}

Vector RegressionParams::stacked() const {
  Vector t(gamma.size() + 1);
  t.head(gamma.size()) = gamma;
  t(gamma.size()) = sigma2;
  return t;
}

RegressionParams RegressionParams::from_stacked(const Vector& theta) {
  if (theta.size() < 2) throw DomainError("regression: stacked parameter too short");
  return {theta.head(theta.size() - 1), theta(theta.size() - 1)};
}

Vector regression_score(double y, const Vector& x, const RegressionParams& p) {
  if (!(p.sigma2 > 0)) throw DomainError("regression_score: sigma2 must be positive");
  const double r = y - x.dot(p.gamma);
  Vector u(x.size() + 1);
  u.head(x.size()) = x * (r / p.sigma2);
  u(x.size()) = r * r / (2.0 * p.sigma2 * p.sigma2) - 1.0 / (2.0 * p.sigma2);
  return u;
}

Vector regression_centring(const Vector& x, const RegressionParams& p, TuningPair pair) {
  const double sigma = std::sqrt(p.sigma2);
  const double mu = x.dot(p.gamma);
  Vector theta(2);
  theta << mu, sigma;
  return integrate_support<Vector>(
      [&](double y) -> Vector {
        const double f = normal_pdf(y - mu, sigma);
        return regression_score(y, x, p) * (f * gbede_weight(f, pair));
      },
      normal_model()->support(theta));
}

Vector regression_estimating_fn(const RegressionData& data, const RegressionParams& p, TuningPair pair) {
  require_params(data, p);
  const double sigma = std::sqrt(p.sigma2);
  // the residual integrand is odd in the γ components, and the σ² component
  // does not depend on the row: one centring serves every observation
  const double centre_s2 = scale_centring(p.sigma2, pair)(0);

  const Vector r = residuals(data, p.gamma);
  Vector mean = Vector::Zero(data.dim());
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double f = normal_pdf(r(i), sigma);
    mean += regression_score(data.y(i), data.X.row(i).transpose(), p) * gbede_weight(f, pair);
  }
  mean /= static_cast<double>(data.n());
  mean(data.dim() - 1) -= centre_s2;
  return mean;
}

Matrix regression_estimating_jacobian(const RegressionData& data, const RegressionParams& p, TuningPair pair) {
  require_params(data, p);
  const Eigen::Index k = data.dim(), q = data.X.cols();
  const double sigma = std::sqrt(p.sigma2), s2 = p.sigma2;
  // sample part: mean of {(β + αf) u uᵀ - I_i} f^β e^{αf}
  const Vector r = residuals(data, p.gamma);
  Matrix jac = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const Vector x = data.X.row(i).transpose();
    const double f = normal_pdf(r(i), sigma);
    const Vector u = regression_score(data.y(i), x, p);
    Matrix info(k, k);
    info.topLeftCorner(q, q) = x * x.transpose() / s2;
    info.topRightCorner(q, 1) = x * (r(i) / (s2 * s2));
    info.bottomLeftCorner(1, q) = info.topRightCorner(q, 1).transpose();
    info(q, q) = r(i) * r(i) / (s2 * s2 * s2) - 0.5 / (s2 * s2);
    jac += ((pair.beta + pair.alpha * f) * u * u.transpose() - info) * gbede_weight(f, pair);
  }
  jac /= static_cast<double>(data.n());
  jac(q, q) -= scale_centring(s2, pair)(1);
  return jac;
}

double regression_empirical_divergence(const RegressionData& data, const RegressionParams& p, TuningPair pair) {
  require_params(data, p);
  const Vector r = residuals(data, p.gamma);
  Vector theta(2);
  theta << 0.0, std::sqrt(p.sigma2);
  // each f_i is a normal density in the residual, so the i.i.d. form applies
  return static_cast<double>(data.n()) *
         empirical_divergence(std::span<const double>(r.data(), static_cast<std::size_t>(r.size())), theta, pair,
                              *normal_model());
}

RegressionSandwich regression_sandwich(const RegressionData& data, const RegressionParams& p, TuningPair pair) {
  require_params(data, p);
  const Eigen::Index k = data.dim();
  const double sigma = std::sqrt(p.sigma2);
  Matrix J = Matrix::Zero(k, k), K = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const Vector x = data.X.row(i).transpose();
    const double mu = x.dot(p.gamma);
    Vector theta(2);
    theta << mu, sigma;
    // columns: [J_i | ∫uuᵀ f w² | ξ_i]
    const Matrix m = integrate_support<Matrix>(
        [&](double y) -> Matrix {
          const double f = normal_pdf(y - mu, sigma);
          const double w = gbede_weight(f, pair);
          const Vector u = regression_score(y, x, p);
          const Matrix uu = u * u.transpose();
          Matrix out(k, 2 * k + 1);
          out.leftCols(k) = uu * (f * w);
          out.middleCols(k, k) = uu * (f * w * w);
          out.col(2 * k) = u * (f * w);
          return out;
        },
        normal_model()->support(theta));
    const Vector xi = m.col(2 * k);
    J += m.leftCols(k);
    K += m.middleCols(k, k) - xi * xi.transpose();
  }
  const double n = static_cast<double>(data.n());
  J /= n;
  K /= n;
  J = 0.5 * (J + J.transpose());
  K = 0.5 * (K + K.transpose());
  const Matrix Jinv = matrix_inverse(J, "J_n");
  Matrix cov = Jinv * K * Jinv.transpose() / n;
  cov = 0.5 * (cov + cov.transpose());
  return {J, K, cov};
}

Vector standardized_residuals(const RegressionData& data, const RegressionParams& p) {
  require_params(data, p);
  return residuals(data, p.gamma) / std::sqrt(p.sigma2);
}

RegressionParams ols(const RegressionData& data) {
  const Vector gamma = data.X.colPivHouseholderQr().solve(data.y);
  return {gamma, residuals(data, gamma).squaredNorm() / static_cast<double>(data.n())};
}

std::vector<RegressionParams> regression_starts(const RegressionData& data, const std::vector<RegressionParams>& extra) {
  data.validate();
  std::vector<RegressionParams> gammas;
  const RegressionParams full = ols(data);
  gammas.push_back(full);

  // OLS again without the largest 10% of absolute residuals
  const Vector r = residuals(data, full.gamma).cwiseAbs();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.n()));
  for (Eigen::Index i = 0; i < data.n(); ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return r(a) < r(b); });
  const auto drop = std::max<Eigen::Index>(1, data.n() / 10);
  const Eigen::Index keep = data.n() - drop;
  if (keep > data.X.cols()) {
    RegressionData trimmed{Matrix(keep, data.X.cols()), Vector(keep)};
    for (Eigen::Index i = 0; i < keep; ++i) {
      trimmed.X.row(i) = data.X.row(order[static_cast<std::size_t>(i)]);
      trimmed.y(i) = data.y(order[static_cast<std::size_t>(i)]);
    }
    if (trimmed.X.colPivHouseholderQr().rank() == data.X.cols()) gammas.push_back(ols(trimmed));
  }

  // IRLS towards least absolute deviations
  Vector g = full.gamma;
  const double floor = 1e-6 * std::max(1.0, std::sqrt(full.sigma2));
  for (int it = 0; it < 5; ++it) {
    const Vector w = residuals(data, g).cwiseAbs().cwiseMax(floor).cwiseInverse();
    g = weighted_ls(data.X, data.y, w);
  }
  gammas.push_back({g, 1.0});
  gammas.push_back({lts_start(data), 1.0});

  std::vector<RegressionParams> starts = extra;
  for (const auto& s : gammas) {
    const Vector res = residuals(data, s.gamma);
    const double rss = res.squaredNorm() / static_cast<double>(data.n());
    if (rss > 0) starts.push_back({s.gamma, rss});
    const double m = mad_scale(res);
    if (m > 0) starts.push_back({s.gamma, m * m});
  }
  return starts;
}

RegressionFit fit_gbede_regression(const RegressionData& data, TuningPair pair,
                                   const std::vector<RegressionParams>& extra_starts, const NewtonOptions& newton) {
  data.validate();
  const auto params = regression_starts(data, extra_starts);

  // Newton runs on a centred and scaled design Xs = X A, γ = A γ̃: the same
  // roots, but a far better conditioned line search when covariates are far
  // from zero (calendar years, say)
  const Eigen::Index p = data.X.cols();
  Matrix A = Matrix::Identity(p, p);
  for (Eigen::Index j = 1; j < p; ++j) {
    const double m = data.X.col(j).mean();
    const double sd = std::sqrt((data.X.col(j).array() - m).square().mean());
    if (sd > 0) {
      A(j, j) = 1.0 / sd;
      A(0, j) = -m / sd;
    }
  }
  const RegressionData scaled{data.X * A, data.y};
  const Matrix A_inv = A.inverse();
  auto to_scaled = [&](const RegressionParams& q) { return RegressionParams{A_inv * q.gamma, q.sigma2}; };
  auto from_scaled = [&](const RegressionParams& q) { return RegressionParams{A * q.gamma, q.sigma2}; };

  std::vector<Vector> starts;
  auto add_start = [&](const RegressionParams& q) {
    const Vector z = to_natural(to_scaled(q));
    const bool seen = std::any_of(starts.begin(), starts.end(),
                                  [&](const Vector& s) { return inf_norm(s - z) <= 1e-6 * (1.0 + inf_norm(z)); });
    if (!seen) starts.push_back(z);
  };
  for (const auto& q : params)
    if (q.gamma.size() == p && q.sigma2 > 0 && std::isfinite(q.sigma2)) add_start(q);
  // the scale start matters as much as γ: add the σ² that solves the scale
  // equation at each start's γ
  for (std::size_t i = extra_starts.size(); i < params.size(); ++i) {
    const auto& q = params[i];
    // the MAD-scale start shares its γ with the one before it
    if (i > extra_starts.size() && params[i - 1].gamma == q.gamma) continue;
    try {
      for (double s2 : profile_sigma2(data, q.gamma, std::sqrt(q.sigma2), pair))
        add_start({q.gamma, s2});
    } catch (const std::exception&) {
    }
  }
  if (starts.empty()) throw DomainError("fit_gbede_regression: no usable start");

  NewtonOptions opt = newton;
  if (!opt.feasible) opt.feasible = [](const Vector& z) { return z.allFinite() && std::abs(z(z.size() - 1)) < 50.0; };
  auto F = [&](const Vector& z) { return regression_estimating_fn(scaled, from_natural(z), pair); };
  if (!opt.jacobian) {
    // chain rule into log σ: ∂σ²/∂log σ = 2σ²
    opt.jacobian = [&](const Vector& z) {
      const RegressionParams q = from_natural(z);
      Matrix jac = regression_estimating_jacobian(scaled, q, pair);
      jac.col(jac.cols() - 1) *= 2.0 * q.sigma2;
      return jac;
    };
  }
  auto roots = solve_multistart(F, starts, opt);
  if (roots.empty())
    throw NumericalError("fit_gbede_regression", "no root of the estimating equation for pair " + pair.to_string() +
                                                     " from " + std::to_string(starts.size()) + " starts");

  RegressionFit fit;
  fit.pair = pair;
  for (const auto& root : roots) fit.all_roots.push_back(from_scaled(from_natural(root.x)));
  std::size_t best = 0;
  if (roots.size() > 1) {
    for (const auto& p : fit.all_roots) {
      double d = kInf;
      try {
        d = regression_empirical_divergence(data, p, pair);
      } catch (const std::exception&) {
      }
      fit.root_divergences.push_back(d);
    }
    // ties go to the root nearest the LTS start, the most robust one
    const Vector anchor = to_natural(to_scaled(params[params.size() - 1]));
    for (std::size_t i = 1; i < roots.size(); ++i) {
      const double di = fit.root_divergences[i], db = fit.root_divergences[best];
      if (di < db - kTieTolerance ||
          (std::abs(di - db) <= kTieTolerance && inf_norm(roots[i].x - anchor) < inf_norm(roots[best].x - anchor)))
        best = i;
    }
    if (!std::isfinite(fit.root_divergences[best]))
      throw NumericalError("fit_gbede_regression", "empirical divergence could not be evaluated at any root");
  }
  fit.params = fit.all_roots[best];
  fit.residual_norm = inf_norm(regression_estimating_fn(data, fit.params, pair));
  fit.iterations = roots[best].iterations;
  fit.converged = true;
  const auto sw = regression_sandwich(data, fit.params, pair);
  fit.Jn = sw.Jn;
  fit.Kn = sw.Kn;
  fit.cov = sw.cov;
  fit.std_residuals = standardized_residuals(data, fit.params);
  return fit;
}

}  // namespace bed
