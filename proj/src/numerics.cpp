#include "bed/numerics.hpp"

#include <cmath>
#include <numeric>

namespace bed {

SupportSpec SupportSpec::interval(double a, double b) {
  if (!(a < b)) throw DomainError("SupportSpec: lower bound must be below upper bound");
  return {SupportKind::Continuous, a, b, std::nullopt};
}

SupportSpec SupportSpec::with_window(double lo, double hi) const {
  if (!(lo < hi)) throw DomainError("SupportSpec: empty integration window");
  SupportSpec s = *this;
  s.window = std::make_pair(lo, hi);
  return s;
}

namespace {

// Expands outwards from the origin until the integrand is negligible on
// both sides. Used only when the caller gives no window.
std::pair<double, double> search_window(const std::function<double(double)>& f, double lo, double hi) {
  double peak = 0.0;
  for (double x : {-1.0, -0.5, 0.0, 0.5, 1.0}) peak = std::max(peak, std::abs(f(std::clamp(x, lo, hi))));
  auto negligible = [&](double x) { return std::abs(f(x)) <= 1e-16 * std::max(peak, 1e-300); };
  double a = std::isfinite(lo) ? lo : -1.0;
  double b = std::isfinite(hi) ? hi : 1.0;
  if (!std::isfinite(lo)) {
    int quiet = 0;
    while (quiet < 3 && a > -1e6) {
      a *= 2.0;
      peak = std::max(peak, std::abs(f(a)));
      quiet = negligible(a) ? quiet + 1 : 0;
    }
  }
  if (!std::isfinite(hi)) {
    int quiet = 0;
    while (quiet < 3 && b < 1e6) {
      b *= 2.0;
      peak = std::max(peak, std::abs(f(b)));
      quiet = negligible(b) ? quiet + 1 : 0;
    }
  }
  return {a, b};
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, const SupportSpec& support, double tol) {
  if (!(tol > 0)) throw DomainError("integrate: tol must be positive");
  if (support.discrete()) {
    auto s = sum_discrete([&](long k) { return f(static_cast<double>(k)); }, support, tol);
    return {s.value, 0.0, static_cast<std::size_t>(s.truncation_index + 1)};
  }
  double a = support.lower, b = support.upper;
  if (support.window) {
    a = std::max(a, support.window->first);
    b = std::min(b, support.window->second);
  } else if (!std::isfinite(a) || !std::isfinite(b)) {
    std::tie(a, b) = search_window(f, a, b);
  }
  QuadResult r;
  r.value = integrate_interval<double>(f, a, b, tol, &r.evaluations, &r.abs_error_estimate, 16);
  return r;
}

DiscreteSum sum_discrete(const std::function<double(long)>& f, const SupportSpec& support, double tol) {
  if (!support.discrete()) throw DomainError("sum_discrete: support is not integer-valued");
  DiscreteSum out;
  out.value = sum_terms<double>(f, static_cast<long>(std::ceil(support.lower)), tol, &out.truncation_index);
  return out;
}

// ------------------------------------------------------- incomplete gamma --

namespace {

constexpr double kGammaEps = 1e-16;
constexpr int kGammaMaxIter = 10000;

// Σ y^n / (a (a+1) ... (a+n)), so that γ(a,y) = y^a e^{-y} · series.
double gamma_series(double a, double y) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kGammaMaxIter; ++n) {
    ap += 1.0;
    term *= y / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaEps) return sum;
  }
  throw NumericalError("upper_incomplete_gamma", "series did not converge");
}

// Modified Lentz continued fraction so that Γ(a,y) = y^a e^{-y} · cf.
double gamma_continued_fraction(double a, double y) {
  constexpr double tiny = 1e-300;
  double b = y + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaEps) return h;
  }
  throw NumericalError("upper_incomplete_gamma", "continued fraction did not converge");
}

void check_gamma_args(const char* name, double a, double y) {
  if (!(a > 0) || !std::isfinite(a)) throw DomainError(std::string(name) + ": shape must be positive");
  if (!(y >= 0)) throw DomainError(std::string(name) + ": argument must be non-negative");
}

}  // namespace

double upper_incomplete_gamma(double a, double y) {
  check_gamma_args("upper_incomplete_gamma", a, y);
  if (y == 0.0) return std::tgamma(a);
  if (std::isinf(y)) return 0.0;
  const double prefactor = std::exp(a * std::log(y) - y);
  if (y < a + 1.0) return std::tgamma(a) - prefactor * gamma_series(a, y);
  return prefactor * gamma_continued_fraction(a, y);
}

double lower_incomplete_gamma(double a, double y) {
  check_gamma_args("lower_incomplete_gamma", a, y);
  if (y == 0.0) return 0.0;
  if (std::isinf(y)) return std::tgamma(a);
  const double prefactor = std::exp(a * std::log(y) - y);
  if (y < a + 1.0) return prefactor * gamma_series(a, y);
  return std::tgamma(a) - prefactor * gamma_continued_fraction(a, y);
}

// ------------------------------------------------------------------ roots --

namespace {

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

bool is_feasible(const NewtonOptions& o, const Vector& x) {
  return x.allFinite() && (!o.feasible || o.feasible(x));
}

// Returns nullopt when F throws or is non-finite.
std::optional<Vector> safe_eval(const VectorFn& F, const Vector& x) {
  try {
    Vector v = F(x);
    if (!v.allFinite()) return std::nullopt;
    return v;
  } catch (const DomainError&) {
    return std::nullopt;
  } catch (const NumericalError&) {
    return std::nullopt;
  }
}

}  // namespace

std::optional<Root> newton_solve(const VectorFn& F, const Vector& start, const NewtonOptions& o) {
  if (!is_feasible(o, start)) return std::nullopt;
  Vector x = start;
  auto fx = safe_eval(F, x);
  if (!fx) return std::nullopt;
  double norm = inf_norm(*fx);
  const double escape = o.divergence_factor * (1.0 + inf_norm(start));
  std::vector<double> history;
  for (int it = 0; it < o.max_iterations; ++it) {
    if (inf_norm(x - start) > escape) return std::nullopt;
    history.push_back(norm);
    if (o.stall_window > 0 && it >= o.stall_window && norm > 0.5 * history[static_cast<std::size_t>(it - o.stall_window)])
      return std::nullopt;
    Matrix jac;
    try {
      jac = o.jacobian ? o.jacobian(x) : finite_diff_jacobian(F, x, o.jacobian_step);
    } catch (const std::exception&) {
      return std::nullopt;
    }
    if (!jac.allFinite()) return std::nullopt;
    Eigen::FullPivLU<Matrix> lu(jac);
    if (!lu.isInvertible()) return std::nullopt;
    const Vector step = lu.solve(-*fx);
    if (!step.allFinite()) return std::nullopt;
    if (norm <= o.ftol && inf_norm(step) <= o.xtol * (1.0 + inf_norm(x))) {
      // polish with the full step when it does not hurt
      Vector polished = x + step;
      if (is_feasible(o, polished)) {
        if (auto fp = safe_eval(F, polished); fp && inf_norm(*fp) <= norm) return Root{polished, inf_norm(*fp), it + 1, 0};
      }
      return Root{x, norm, it, 0};
    }
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k <= o.max_halvings; ++k, lambda *= 0.5) {
      Vector trial = x + lambda * step;
      if (!is_feasible(o, trial)) continue;
      auto ft = safe_eval(F, trial);
      if (!ft) continue;
      const double tn = inf_norm(*ft);
      if (tn < norm) {
        x = std::move(trial);
        fx = std::move(ft);
        norm = tn;
        accepted = true;
        break;
      }
    }
    if (!accepted) return std::nullopt;
  }
  return std::nullopt;
}

std::vector<Root> solve_multistart(const VectorFn& F, const std::vector<Vector>& starts, const NewtonOptions& o) {
  if (starts.empty()) throw DomainError("solve_multistart: at least one start is required");
  std::vector<Root> roots;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    auto r = newton_solve(F, starts[s], o);
    if (!r) continue;
    // re-evaluate rather than trust the iteration's last residual
    auto check = safe_eval(F, r->x);
    if (!check || inf_norm(*check) > o.ftol) continue;
    r->residual = inf_norm(*check);
    r->start_index = s;
    const bool duplicate = std::any_of(roots.begin(), roots.end(), [&](const Root& q) {
      return inf_norm(q.x - r->x) <= o.dedup_tol * (1.0 + std::max(inf_norm(q.x), inf_norm(r->x)));
    });
    if (!duplicate) roots.push_back(std::move(*r));
  }
  return roots;
}

// ----------------------------------------------------------- Nelder-Mead --

MinimizeResult minimize(const ScalarFn& f, const Vector& start, double tol, int max_iterations,
                        double initial_step) {
  const auto n = start.size();
  if (n == 0) throw DomainError("minimize: empty start vector");
  const double f0 = f(start);
  if (!std::isfinite(f0)) throw DomainError("minimize: objective not finite at start");

  std::vector<Vector> simplex(n + 1, start);
  std::vector<double> fv(n + 1, f0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double step = initial_step > 0 ? initial_step : (start(i) != 0.0 ? 0.05 * std::abs(start(i)) : 0.00025);
    simplex[i + 1](i) += step;
    fv[i + 1] = f(simplex[i + 1]);
    if (!std::isfinite(fv[i + 1])) {
      simplex[i + 1](i) = start(i) - step;
      fv[i + 1] = f(simplex[i + 1]);
    }
  }
  std::vector<std::size_t> order(n + 1);
  auto diameter = [&] {
    double d = 0.0;
    for (std::size_t i = 1; i < simplex.size(); ++i) d = std::max(d, inf_norm(simplex[i] - simplex[0]));
    return d;
  };
  auto replace = [&](std::size_t i, Vector x, double v) {
    simplex[i] = std::move(x);
    fv[i] = v;
  };
  for (int it = 0; it < max_iterations; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
    {
      std::vector<Vector> s2;
      std::vector<double> f2;
      for (auto i : order) {
        s2.push_back(simplex[i]);
        f2.push_back(fv[i]);
      }
      simplex.swap(s2);
      fv.swap(f2);
    }
    if (diameter() < tol) return {simplex[0], fv[0], it};

    Vector centroid = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) centroid += simplex[i];
    centroid /= static_cast<double>(n);
    const Vector& worst = simplex[n];

    Vector xr = centroid + (centroid - worst);
    const double fr = f(xr);
    if (fr < fv[0]) {
      Vector xe = centroid + 2.0 * (centroid - worst);
      const double fe = f(xe);
      if (fe < fr) replace(n, std::move(xe), fe); else replace(n, std::move(xr), fr);
      continue;
    }
    if (fr < fv[n - 1]) {
      replace(n, std::move(xr), fr);
      continue;
    }
    const bool outside = fr < fv[n];
    Vector xc = outside ? Vector(centroid + 0.5 * (xr - centroid)) : Vector(centroid + 0.5 * (worst - centroid));
    const double fc = f(xc);
    if (fc < (outside ? fr : fv[n])) {
      replace(n, std::move(xc), fc);
      continue;
    }
    for (Eigen::Index i = 1; i <= n; ++i) {
      simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
      fv[i] = f(simplex[i]);
    }
  }
  auto best = std::min_element(fv.begin(), fv.end()) - fv.begin();
  throw NumericalError("minimize", "iteration cap reached; best value " + std::to_string(fv[best]));
}

std::pair<double, double> golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                             double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

// ----------------------------------------------------------------- linalg --

Matrix finite_diff_jacobian(const VectorFn& F, const Vector& x, double h) {
  const Vector f0 = F(x);
  Matrix jac(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double step = h * std::max(1.0, std::abs(x(j)));
    Vector xp = x, xm = x;
    xp(j) += step;
    xm(j) -= step;
    jac.col(j) = (F(xp) - F(xm)) / (xp(j) - xm(j));
  }
  return jac;
}

Vector finite_diff_gradient(const ScalarFn& f, const Vector& x, double h) {
  Vector g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double step = h * std::max(1.0, std::abs(x(j)));
    Vector xp = x, xm = x;
    xp(j) += step;
    xm(j) -= step;
    g(j) = (f(xp) - f(xm)) / (xp(j) - xm(j));
  }
  return g;
}

Matrix matrix_inverse(const Matrix& a, const std::string& name) {
  if (a.rows() != a.cols()) throw DomainError("matrix_inverse: " + name + " is not square");
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) throw NumericalError("matrix_inverse", name + " is singular");
  Matrix inv = lu.inverse();
  const double resid = (a * inv - Matrix::Identity(a.rows(), a.cols())).cwiseAbs().maxCoeff();
  if (!inv.allFinite() || resid > 1e-6) throw NumericalError("matrix_inverse", name + " is numerically singular");
  return inv;
}

double matrix_trace(const Matrix& a) {
  if (a.rows() != a.cols()) throw DomainError("matrix_trace: matrix is not square");
  return a.trace();
}

Matrix sym_inv_sqrt(const Matrix& a, const std::string& name) {
  if (a.rows() != a.cols()) throw DomainError("sym_inv_sqrt: " + name + " is not square");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (a + a.transpose()));
  if (eig.info() != Eigen::Success) throw NumericalError("sym_inv_sqrt", "eigen-decomposition of " + name + " failed");
  const Vector& ev = eig.eigenvalues();
  if (ev.minCoeff() <= 0.0) throw NumericalError("sym_inv_sqrt", name + " is not positive definite");
  return eig.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
}

bool is_symmetric_psd(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > tol * scale) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (a + a.transpose()));
  return eig.eigenvalues().minCoeff() >= -tol * scale;
}

}  // namespace bed
