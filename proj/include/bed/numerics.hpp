#pragma once

// Numerical kernel: quadrature over model supports, discrete summation,
// incomplete gamma, root finding, simplex minimisation and small dense
// linear algebra.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bed/errors.hpp"

namespace bed {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class SupportKind { Continuous, NonNegativeIntegers };

/// Integration domain. For unbounded continuous supports `window` gives the
/// finite interval that actually gets integrated; models set it to where the
/// density is negligible relative to its mode.
struct SupportSpec {
  SupportKind kind = SupportKind::Continuous;
  double lower = -kInf;
  double upper = kInf;
  std::optional<std::pair<double, double>> window;

  static SupportSpec real_line() { return {}; }
  static SupportSpec interval(double a, double b);
  static SupportSpec nonnegative_integers() {
    return {SupportKind::NonNegativeIntegers, 0.0, kInf, std::nullopt};
  }
  SupportSpec with_window(double lo, double hi) const;

  bool discrete() const { return kind == SupportKind::NonNegativeIntegers; }
};

struct QuadResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  std::size_t evaluations = 0;
};

class QuadratureError : public NumericalError {
 public:
  QuadratureError(const std::string& what, double best_estimate)
      : NumericalError("integrate", what), best_estimate_(best_estimate) {}
  double best_estimate() const noexcept { return best_estimate_; }

 private:
  double best_estimate_;
};

inline constexpr double kDefaultQuadTol = 1e-11;
inline constexpr int kMaxQuadSubdivisions = 4000;
inline constexpr std::size_t kMaxDiscreteTerms = 1'000'000;
inline constexpr int kDiscreteQuietRun = 50;

namespace detail {

inline double max_abs(double v) { return std::abs(v); }
template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// 7-point Gauss / 15-point Kronrod pair.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class V>
struct Panel {
  double a, b;
  V value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class V, class F>
Panel<V> gk15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  V fc = f(c);
  V kron = fc * kWgk[7];
  V gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    V s = f(c - dx) + f(c + dx);
    kron += s * kWgk[j];
    if (j % 2 == 1) gauss += s * kWg[j / 2];
  }
  V value = kron * h;
  V diff = (kron - gauss) * h;
  return {a, b, value, max_abs(diff)};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (G7/K15) quadrature over a finite interval for a
/// scalar-, vector- or matrix-valued integrand. All components share the
/// same subdivision; the error criterion uses the largest component.
template <class V, class F>
V integrate_interval(const F& f, double a, double b, double tol, std::size_t* evaluations = nullptr,
                     double* error_out = nullptr, int initial_panels = 8) {
  using detail::Panel;
  std::priority_queue<Panel<V>> heap;
  const double width = (b - a) / initial_panels;
  auto first = detail::gk15<V>(f, a, initial_panels == 1 ? b : a + width);
  V total = first.value;
  double err = first.error;
  heap.push(std::move(first));
  for (int i = 1; i < initial_panels; ++i) {
    const double lo = a + i * width;
    const double hi = (i + 1 == initial_panels) ? b : lo + width;
    auto p = detail::gk15<V>(f, lo, hi);
    total += p.value;
    err += p.error;
    heap.push(std::move(p));
  }
  std::size_t evals = 15 * static_cast<std::size_t>(initial_panels);
  int splits = 0;
  while (!std::isfinite(detail::max_abs(total)) || !(err <= std::max(tol, tol * detail::max_abs(total)))) {
    Panel<V> worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    const bool exhausted = !(mid > worst.a && mid < worst.b) || !std::isfinite(err) ||
                           !std::isfinite(detail::max_abs(total));
    if (splits++ >= kMaxQuadSubdivisions || exhausted) {
      if (evaluations) *evaluations = evals;
      double best;
      if constexpr (std::is_arithmetic_v<V>) best = total; else best = total(0);
      throw QuadratureError(std::string(exhausted ? "non-finite integrand or panel width at machine precision" : "subdivision limit reached") +
                                " (error estimate " + std::to_string(err) + ")",
                            best);
    }
    heap.pop();
    auto left = detail::gk15<V>(f, worst.a, mid);
    auto right = detail::gk15<V>(f, mid, worst.b);
    evals += 30;
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
  }
  // recompute the sum from the panels to shed accumulated rounding
  V fresh = heap.top().value;
  double fresh_err = heap.top().error;
  heap.pop();
  while (!heap.empty()) {
    fresh += heap.top().value;
    fresh_err += heap.top().error;
    heap.pop();
  }
  if (evaluations) *evaluations = evals;
  if (error_out) *error_out = fresh_err;
  return fresh;
}

/// Sums f(k) for k = first, first+1, ... until kDiscreteQuietRun consecutive
/// terms each fall below tol times the running absolute sum.
template <class V, class F>
V sum_terms(const F& f, long first, double tol, long* last_index = nullptr) {
  V total = f(first);
  double abs_scale = detail::max_abs(total);
  int quiet = 0;
  long k = first + 1;
  for (; k < first + static_cast<long>(kMaxDiscreteTerms); ++k) {
    V term = f(k);
    const double t = detail::max_abs(term);
    if (!std::isfinite(t)) throw NumericalError("sum_discrete", "non-finite term at k=" + std::to_string(k));
    total += term;
    abs_scale += t;
    if (t <= tol * abs_scale) {
      if (++quiet >= kDiscreteQuietRun) break;
    } else {
      quiet = 0;
    }
  }
  if (k >= first + static_cast<long>(kMaxDiscreteTerms))
    throw NumericalError("sum_discrete", "terms did not decay within the summation cap");
  if (last_index) *last_index = k;
  return total;
}

/// Integral (continuous support) or sum (integer support) of f over support.
template <class V, class F>
V integrate_support(const F& f, const SupportSpec& support, double tol = kDefaultQuadTol) {
  if (support.discrete()) {
    return sum_terms<V>([&](long k) { return f(static_cast<double>(k)); },
                        static_cast<long>(std::ceil(support.lower)), tol);
  }
  double a = support.lower, b = support.upper;
  if (support.window) {
    a = std::max(a, support.window->first);
    b = std::min(b, support.window->second);
  }
  if (!std::isfinite(a) || !std::isfinite(b))
    throw NumericalError("integrate", "unbounded support without an integration window");
  return integrate_interval<V>(f, a, b, tol);
}

QuadResult integrate(const std::function<double(double)>& f, const SupportSpec& support,
                     double tol = kDefaultQuadTol);

struct DiscreteSum {
  double value = 0.0;
  long truncation_index = 0;
};
DiscreteSum sum_discrete(const std::function<double(long)>& f, const SupportSpec& support,
                         double tol = 1e-14);

/// Γ(a, y) = ∫_y^∞ t^{a-1} e^{-t} dt, a > 0, y ≥ 0.
double upper_incomplete_gamma(double a, double y);
/// γ(a, y) = ∫_0^y t^{a-1} e^{-t} dt, a > 0, y ≥ 0.
double lower_incomplete_gamma(double a, double y);

// ---------------------------------------------------------------- roots ----

using VectorFn = std::function<Vector(const Vector&)>;
using ScalarFn = std::function<double(const Vector&)>;

struct NewtonOptions {
  double ftol = 1e-10;
  int max_iterations = 100;
  int max_halvings = 30;
  double jacobian_step = 1e-6;
  /// Besides ‖F‖∞ ≤ ftol the full Newton step must be below
  /// xtol·(1 + ‖x‖∞); this rejects points where F merely underflows.
  double xtol = 1e-8;
  /// A run is abandoned once ‖x - start‖∞ exceeds divergence_factor·(1 + ‖start‖∞).
  double divergence_factor = 1e4;
  /// A run is abandoned when ‖F‖∞ has not halved over this many iterations.
  int stall_window = 20;
  /// Roots closer than dedup_tol·(1 + ‖x‖∞) are merged.
  double dedup_tol = 1e-6;
  /// Analytic Jacobian; finite differences with jacobian_step when empty.
  std::function<Matrix(const Vector&)> jacobian;
  /// Points outside the feasible set are treated like a failed decrease.
  std::function<bool(const Vector&)> feasible;
};

struct Root {
  Vector x;
  double residual = 0.0;  // ‖F(x)‖∞
  int iterations = 0;
  std::size_t start_index = 0;
};

/// Damped Newton from every start; returns the distinct roots in order of
/// the first start that reached each one.
std::vector<Root> solve_multistart(const VectorFn& F, const std::vector<Vector>& starts,
                                   const NewtonOptions& options = {});

/// Single damped Newton run. Empty when the run does not reach ftol.
std::optional<Root> newton_solve(const VectorFn& F, const Vector& start, const NewtonOptions& options);

struct MinimizeResult {
  Vector argmin;
  double value = 0.0;
  int iterations = 0;
};

/// Nelder-Mead simplex. Infeasible points should return +inf. Throws
/// NumericalError when the iteration cap is hit before the simplex diameter
/// drops below tol.
MinimizeResult minimize(const ScalarFn& f, const Vector& start, double tol = 1e-8,
                        int max_iterations = 20000, double initial_step = 0.0);

/// Golden-section maximisation of a unimodal function on [lo, hi].
std::pair<double, double> golden_section_max(const std::function<double(double)>& f, double lo,
                                             double hi, double tol);

// ---------------------------------------------------------------- linalg ---

/// Central differences with step h·max(1, |x_i|).
Matrix finite_diff_jacobian(const VectorFn& F, const Vector& x, double h = 1e-6);
Vector finite_diff_gradient(const ScalarFn& f, const Vector& x, double h = 1e-6);

Matrix matrix_inverse(const Matrix& a, const std::string& name = "matrix");
double matrix_trace(const Matrix& a);
/// A^{-1/2} for symmetric positive definite A.
Matrix sym_inv_sqrt(const Matrix& a, const std::string& name = "matrix");
bool is_symmetric_psd(const Matrix& a, double tol = 1e-10);

}  // namespace bed
