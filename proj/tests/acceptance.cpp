// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "bed/asymptotics.hpp"
#include "bed/datasets.hpp"
#include "bed/estimators.hpp"
#include "bed/harness.hpp"
#include "bed/regression.hpp"
#include "bed/tuning.hpp"
#include "cli.hpp"

using namespace bed;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void report(int id, const std::string& title, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << " (" << title << "): " << detail << std::endl;
}

// Runs one criterion, turning an exception into a FAIL line.
void criterion(int id, const std::string& title, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    const auto [pass, detail] = body();
    report(id, title, pass, detail);
  } catch (const std::exception& e) {
    report(id, title, false, std::string("exception: ") + e.what());
  }
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) out.push_back(item);
  return out;
}

// ----- 1 -----

std::pair<bool, std::string> are_table() {
  const std::vector<std::vector<double>> published = {
      {100.00, 98.76, 95.86, 92.11, 88.00, 83.80, 79.66, 75.67, 71.88, 68.30, 64.95},
      {98.99, 99.62, 98.19, 95.55, 92.24, 88.57, 84.78, 80.99, 77.28, 73.71, 70.29},
      {92.46, 96.21, 97.65, 97.50, 96.24, 94.22, 91.71, 88.88, 85.86, 82.77, 79.65},
      {87.98, 92.77, 95.36, 96.32, 96.09, 94.99, 93.28, 91.12, 88.66, 86.00, 83.24}};
  const std::vector<double> alphas = {0, -1, -2, -3};

  const auto t0 = Clock::now();
  std::ostringstream out, err;
  const int code = cli::run({"are-table", "--model", "normal-location", "--alpha", "0,-1,-2,-3", "--beta", "0..1:0.1"},
                            out, err);
  const double secs = seconds_since(t0);
  if (code != 0) return {false, "are-table exited " + std::to_string(code) + ": " + err.str()};

  std::vector<std::string> rows;
  for (const auto& line : split(out.str(), '\n'))
    if (!line.empty() && line[0] != '#' && line.rfind("alpha", 0) != 0) rows.push_back(line);
  if (rows.size() != 4) return {false, "expected 4 data rows, got " + std::to_string(rows.size())};

  int ok = 0;
  double worst = 0;
  std::string misses;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto f = split(rows[i], ',');
    int row_miss = 0;
    for (std::size_t j = 0; j < 11; ++j) {
      const double d = std::abs(std::stod(f[j + 1]) - published[i][j]);
      worst = std::max(worst, d);
      if (d <= 0.5) ++ok; else ++row_miss;
    }
    if (row_miss) misses += fmt(" alpha=%g:%d", alphas[i], row_miss);
  }
  // the published rows labelled -2 and -3 against computed alpha = -3 and -4
  const auto model = normal_location_model();
  double shifted = 0;
  for (std::size_t i = 2; i < 4; ++i)
    for (std::size_t j = 0; j < 11; ++j)
      shifted = std::max(shifted, std::abs(are(TuningPair(alphas[i] - 1, 0.1 * static_cast<double>(j)), *model,
                                               Vector::Zero(1)) -
                                           published[i][j]));
  const bool pass = ok == 44 && secs < 60;
  std::string detail = fmt("%d/44 cells within 0.5, max deviation %.2f, %.3f s", ok, worst, secs);
  if (!misses.empty())
    detail += "; misses by row:" + misses +
              fmt("; rows labelled -2/-3 match computed alpha=-3/-4 within %.3f", shifted);
  return {pass, detail};
}

// ----- 2 -----

std::pair<bool, std::string> optimal_alpha_check() {
  const OptimalAlpha o1 = optimal_alpha(1.0, *normal_location_model(), Vector::Zero(1));
  const OptimalAlpha o2 = optimal_alpha(1.0, *normal_location_model(), Vector::Zero(1));
  const bool deterministic = o1.alpha == o2.alpha && o1.are == o2.are;
  const bool pass = std::abs(o1.alpha + 7.44) <= 0.05 && std::abs(o1.are - 88.48) <= 0.2 && deterministic;
  return {pass, fmt("alpha*=%.4f (target -7.44 +-0.05), ARE=%.3f (target 88.48 +-0.2), deterministic=%s", o1.alpha,
                    o1.are, deterministic ? "yes" : "no")};
}

// ----- 3 -----

std::pair<bool, std::string> drosophila() {
  const auto data = load_dataset("drosophila").values;
  const auto model = poisson_model();
  std::vector<double> trimmed;
  for (double x : data)
    if (x < 50) trimmed.push_back(x);

  const double mle = fit_mle(data, *model).theta()(0);
  const double mle_d = fit_mle(trimmed, *model).theta()(0);
  const double g1 = fit_gbede(data, *model, TuningPair(-2, 0.4)).theta()(0);
  const double g2 = fit_gbede(data, *model, TuningPair(-0.7, 0.1)).theta()(0);
  const double mb = fit_mbede(data, *model, -2.0).theta()(0);

  bool pass = std::abs(mle - 3.06) <= 0.005 && std::abs(g1 - 0.40) <= 0.01 && std::abs(g2 - 0.40) <= 0.01 &&
              std::abs(mb - 0.36) <= 0.01;
  std::string detail = fmt("MLE=%.4f GBEDE(-2,0.4)=%.4f GBEDE(-0.7,0.1)=%.4f MBEDE(-2)=%.4f MLE+D=%.4f", mle, g1, g2,
                           mb, mle_d);

  struct Row {
    const char* name;
    double lambda;
    std::vector<double> cells;
  };
  const std::vector<Row> rows = {{"MLE", mle, {1.59, 4.88, 7.44, 7.61, 5.82, 6.62}},
                                 {"MLE+D", mle_d, {22.93, 9.03, 1.78, 0.23, 0.02, 0}},
                                 {"GBEDE(-2,0.4)", g1, {22.79, 9.12, 1.82, 0.24, 0.02, 0}},
                                 {"GBEDE(-0.7,0.1)", g2, {22.79, 9.12, 1.82, 0.24, 0.02, 0}},
                                 {"MBEDE(-2)", mb, {23.72, 8.54, 1.54, 0.18, 0.01, 0}}};
  int bad = 0;
  std::string misses;
  for (const auto& r : rows) {
    const auto e = poisson_expected_frequencies(r.lambda, static_cast<double>(data.size()));
    double worst = 0;
    int row_bad = 0;
    for (std::size_t k = 0; k < 6; ++k) {
      const double d = std::abs(e[k] - r.cells[k]);
      worst = std::max(worst, d);
      if (d > 0.05) ++row_bad;
    }
    bad += row_bad;
    if (row_bad) misses += fmt(" %s %d cells (max %.3f)", r.name, row_bad, worst);
  }
  pass = pass && bad == 0;
  detail += fmt("; expected-frequency cells outside 0.05: %d/30", bad);
  if (!misses.empty()) {
    // the same rows at the printed two-decimal estimates
    double at_printed = 0;
    const std::vector<std::pair<double, std::size_t>> printed = {{0.40, 2}, {0.40, 3}, {0.36, 4}};
    for (const auto& [lambda, i] : printed) {
      const auto e = poisson_expected_frequencies(lambda, static_cast<double>(data.size()));
      for (std::size_t k = 0; k < 6; ++k) at_printed = std::max(at_printed, std::abs(e[k] - rows[i].cells[k]));
    }
    detail += " [" + misses.substr(1) + fmt("]; at the printed lambda 0.40/0.36 those rows agree within %.3f", at_printed);
  }
  return {pass, detail};
}

// ----- 4 -----

std::pair<bool, std::string> telephone() {
  const std::vector<double> alphas = {4, 2, 0, -2, -4, -6, -8};
  const std::vector<double> betas = {0.2, 0.4, 0.6, 0.8, 1.0};
  const std::vector<std::vector<double>> mu = {{124.47, 129.35, 133.75, 137.81, 141.48},
                                               {124.42, 129.30, 133.70, 137.77, 141.44},
                                               {124.37, 129.26, 133.66, 137.73, 141.41},
                                               {124.32, 129.21, 133.62, 137.69, 141.38},
                                               {124.27, 129.16, 133.58, 137.65, 141.34},
                                               {124.22, 129.12, 133.53, 137.61, 141.31},
                                               {124.18, 129.07, 133.49, 137.58, 141.28}};
  const std::vector<std::vector<double>> sigma = {{135.23, 138.29, 140.73, 142.24, 143.12},
                                                  {135.20, 138.27, 140.71, 142.22, 143.11},
                                                  {135.17, 138.24, 140.70, 142.21, 143.10},
                                                  {135.14, 138.22, 140.68, 142.19, 143.08},
                                                  {135.12, 138.20, 140.66, 142.18, 143.07},
                                                  {135.09, 138.18, 140.64, 142.17, 143.06},
                                                  {135.06, 138.15, 140.63, 142.15, 143.04}};
  const auto model = normal_model();
  auto compare = [&](const std::string& name, int& ok, double& worst) {
    const auto data = load_dataset(name).values;
    ok = 0;
    worst = 0;
    for (std::size_t i = 0; i < alphas.size(); ++i)
      for (std::size_t j = 0; j < betas.size(); ++j) {
        const Vector t = fit_gbede(data, *model, TuningPair(alphas[i], betas[j])).theta();
        for (const double d : {std::abs(t(0) - mu[i][j]), std::abs(t(1) - sigma[i][j])}) {
          worst = std::max(worst, d);
          if (d <= 0.5) ++ok;
        }
      }
  };
  int ok = 0, ok289 = 0;
  double worst = 0, worst289 = 0;
  compare("telephone-fault", ok, worst);
  compare("telephone-fault-289", ok289, worst289);
  return {ok == 70, fmt("telephone-fault (record as printed, 13th value 269): %d/70 values within 0.5, max deviation "
                        "%.3f; with 289 for 269: %d/70, max deviation %.3f",
                        ok, worst, ok289, worst289)};
}

// ----- 5 -----

std::pair<bool, std::string> tuning() {
  const TuningResult tel = select_tuning(load_dataset("telephone-fault").values, *normal_model());
  const TuningResult dro = select_tuning(load_dataset("drosophila").values, *poisson_model());
  auto same = [](TuningPair a, double alpha, double beta) {
    return std::abs(a.alpha - alpha) < 1e-9 && std::abs(a.beta - beta) < 1e-9;
  };
  const bool pass = same(tel.best, -0.8, 0.2) && same(dro.best, -0.7, 0.1);
  return {pass, fmt("telephone-fault -> (%g, %g), target (-0.8, 0.2); drosophila -> (%g, %g), target (-0.7, 0.1)",
                    tel.best.alpha, tel.best.beta, dro.best.alpha, dro.best.beta)};
}

// ----- 6 -----

std::pair<bool, std::string> root_selection() {
  const auto model = normal_location_model(1.0);
  ContaminationSpec spec{{model, Vector::Zero(1)}, {model, Vector::Constant(1, 10.0)}, 0.1};
  const RngStream base(6, 0);
  const int reps = 200;
  int three = 0, near_zero = 0;
  for (int r = 0; r < reps; ++r) {
    RngStream rng = base.substream(static_cast<std::uint64_t>(r));
    const auto sample = generate_sample(spec, 100, rng);
    const EstimationResult fit = fit_gbede(sample, *model, TuningPair(-1, 0.2));
    if (fit.all_roots.size() == 3) {
      ++three;
      if (std::abs(fit.theta()(0)) < 0.5) ++near_zero;
    }
  }
  const bool pass = three >= 190 && near_zero == three;
  return {pass, fmt("three roots in %d/%d runs (need >= 190); selected root within 0.5 of 0 in %d/%d of those", three,
                    reps, near_zero, three)};
}

// ----- 7 -----

std::pair<bool, std::string> belgium() {
  const RegressionData data = *load_dataset("belgium-calls").regression;
  const RegressionFit ls = fit_gbede_regression(data, TuningPair(0, 0));
  const RegressionFit rb = fit_gbede_regression(data, TuningPair(-1, 0.5));
  const bool ls_ok = std::abs(ls.params.gamma(0) + 26.01) <= 0.02 && std::abs(ls.params.gamma(1) - 0.51) <= 0.002 &&
                     std::abs(ls.params.sigma2 - 31.61) <= 0.5;
  const bool rb_ok = std::abs(rb.params.gamma(0) + 5.08) <= 0.05 && std::abs(rb.params.gamma(1) - 0.11) <= 0.05;
  return {ls_ok && rb_ok,
          fmt("(0,0) -> (%.4f, %.4f, sigma2 %.3f), target (-26.01, 0.51, 31.61); (-1,0.5) -> (%.4f, %.4f, sigma2 "
              "%.5f), target gamma (-5.08, 0.11)",
              ls.params.gamma(0), ls.params.gamma(1), ls.params.sigma2, rb.params.gamma(0), rb.params.gamma(1),
              rb.params.sigma2)};
}

// ----- 8 -----

std::pair<bool, std::string> salinity() {
  const RegressionData data = *load_dataset("salinity").regression;
  const RegressionFit fit = fit_gbede_regression(data, TuningPair(-1, 0.5));
  const Vector target = vec({18.23, 0.72, -0.20, -0.62});
  const double dg = (fit.params.gamma - target).cwiseAbs().maxCoeff();
  const double ds = std::abs(fit.params.sigma2 - 0.83);
  const double r16 = fit.std_residuals(15);
  const bool pass = dg <= 0.05 && ds <= 0.05 && std::abs(r16) > 6;
  return {pass, fmt("gamma=(%.4f, %.4f, %.4f, %.4f) max deviation %.4f, sigma2=%.4f, standardized residual of "
                    "observation 16 = %.3f",
                    fit.params.gamma(0), fit.params.gamma(1), fit.params.gamma(2), fit.params.gamma(3), dg,
                    fit.params.sigma2, r16)};
}

// ----- 9, 10 -----

MCConfig normal_study(double epsilon, std::vector<TuningPair> pairs) {
  const auto model = normal_model();
  MCConfig c;
  c.spec = {{model, vec({0.0, 1.0})}, {model, vec({3.0, 1.0})}, epsilon};
  c.n = 100;
  c.replications = 2000;
  c.seed = 20;
  c.pairs = std::move(pairs);
  c.target_param = vec({0.0, 1.0});
  c.threads = 0;
  return c;
}

std::pair<bool, std::string> mc_pure() {
  const auto t0 = Clock::now();
  const EfficiencyTable t = run_efficiency_study(normal_study(0.0, {TuningPair(0, 0.5), TuningPair(-2, 0.3)}));
  const double secs = seconds_since(t0);
  const auto& a = t.cell(TuningPair(0, 0.5), "mu");
  const auto& b = t.cell(TuningPair(-2, 0.3), "mu");
  const bool pass = a.relative_efficiency >= 0.82 && a.relative_efficiency <= 0.88 && b.relative_efficiency >= 0.95 &&
                    b.relative_efficiency <= 1.01 && secs < 600;
  return {pass, fmt("RE(0,0.5)=%.4f in [0.82,0.88]; RE(-2,0.3)=%.4f in [0.95,1.01]; MLE n*MSE=%.4f; failures %zu/%zu; "
                    "%.1f s",
                    a.relative_efficiency, b.relative_efficiency, t.cell(TuningPair(0, 0), "mu").n_mse,
                    a.failures + b.failures, 2 * t.config.replications, secs)};
}

std::pair<bool, std::string> mc_contaminated() {
  const EfficiencyTable t = run_efficiency_study(normal_study(0.05, {TuningPair(-2, 0.6)}));
  const auto& mle = t.cell(TuningPair(0, 0), "mu");
  const auto& g = t.cell(TuningPair(-2, 0.6), "mu");
  const bool pass = g.relative_efficiency >= 2.3 && g.relative_efficiency <= 2.8 && mle.relative_efficiency == 1.0 &&
                    mle.n_mse > 3;
  return {pass, fmt("RE(-2,0.6)=%.4f in [2.3,2.8]; MLE RE=%.1f, MLE n*MSE=%.4f (> 3); failures %zu", g.relative_efficiency,
                    mle.relative_efficiency, mle.n_mse, g.failures)};
}

// ----- 11 -----

// E_θ[u f^β e^{αf}] computed without the library's integrators: composite
// Simpson on μ ± 14σ for the normal models, a plain sum for Poisson.
Vector expectation_oracle(const ParametricModel& m, const Vector& theta, TuningPair pair) {
  Vector acc = Vector::Zero(m.dim());
  auto term = [&](double x) {
    const double f = m.density(x, theta);
    return Vector(m.score(x, theta) * f * gbede_weight(f, pair));
  };
  if (m.name() == "poisson") {
    for (int k = 0; k < 400; ++k) acc += term(k);
    return acc;
  }
  const double mu = theta(0), s = m.dim() == 2 ? theta(1) : 1.0;
  const int n = 40000;
  const double a = mu - 14 * s, h = 28 * s / n;
  for (int i = 0; i <= n; ++i) acc += (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0)) * term(a + i * h);
  return acc * h / 3.0;
}

std::pair<bool, std::string> properties() {
  struct Case {
    ModelPtr model;
    Vector theta;
    std::vector<double> sample;
  };
  RngStream rng(11, 0);
  std::vector<double> gauss, counts;
  for (int i = 0; i < 60; ++i) gauss.push_back(rng.normal(0.4, 1.3));
  gauss.push_back(8.0);
  for (int i = 0; i < 60; ++i) counts.push_back(rng.poisson(2.5));
  counts.push_back(15.0);
  const std::vector<Case> cases = {{normal_model(), vec({0.3, 1.4}), gauss},
                                   {normal_location_model(1.3), vec({0.2}), gauss},
                                   {poisson_model(), vec({2.5}), counts}};
  std::vector<TuningPair> pairs;
  for (double a : {-3.0, -1.0, -0.3, 0.0, 1.0})
    for (double b : {0.0, 0.2, 0.5, 1.0}) pairs.emplace_back(a, b);

  double unbiased = 0, gradient = 0, score_fd = 0, info_fd = 0, mle_gap = 0, shift_gap = 0;
  std::string stage;
  try {
  for (const auto& c : cases) {
    const auto& m = *c.model;
    stage = m.name() + " unbiasedness and gradient";
    for (const auto& p : pairs) {
      unbiased = std::max(unbiased, (expectation_oracle(m, c.theta, p) - psi_centring(c.theta, p, m)).cwiseAbs().maxCoeff());
      const Vector grad = finite_diff_gradient(
          [&](const Vector& t) { return empirical_divergence(c.sample, t, p, m); }, c.theta, 1e-5);
      gradient = std::max(gradient, (grad + estimating_fn(c.sample, c.theta, p, m)).cwiseAbs().maxCoeff());
    }
    const std::vector<double> xs = m.name() == "poisson" ? std::vector<double>{0, 1, 2, 5, 9}
                                                         : std::vector<double>{-2.0, 0.0, 1.0, 3.0, 7.0};
    stage = m.name() + " score and information";
    for (double x : xs) {
      const Vector s = finite_diff_gradient([&](const Vector& t) { return m.log_density(x, t); }, c.theta);
      score_fd = std::max(score_fd, (s - m.score(x, c.theta)).cwiseAbs().maxCoeff());
      const Matrix info = -finite_diff_jacobian([&](const Vector& t) { return m.score(x, t); }, c.theta);
      info_fd = std::max(info_fd, (info - m.information(x, c.theta)).cwiseAbs().maxCoeff());
    }
    stage = m.name() + " mle";
    const Vector mle = fit_mle(c.sample, m).theta();
    const Vector g00 = fit_gbede(c.sample, m, TuningPair(0, 0)).theta();
    mle_gap = std::max(mle_gap, (mle - g00).cwiseAbs().maxCoeff());
    stage = m.name() + " shift";
    // shifting counts leaves the support, so only the continuous models
    if (m.location_index() && m.support(c.theta).kind == SupportKind::Continuous) {
      const double shift = 17.25;
      std::vector<double> moved = c.sample;
      for (double& x : moved) x += shift;
      for (const auto& p : {TuningPair(-1, 0.2), TuningPair(0, 0.5), TuningPair(-2, 1.0)}) {
        Vector a = fit_gbede(c.sample, m, p).theta();
        const Vector b = fit_gbede(moved, m, p).theta();
        a(*m.location_index()) += shift;
        shift_gap = std::max(shift_gap, (a - b).cwiseAbs().maxCoeff() / (1.0 + a.cwiseAbs().maxCoeff()));
      }
    }
  }
  } catch (const std::exception& e) {
    throw std::runtime_error(stage + ": " + e.what());
  }

  // sandwich on the full default grid
  const TuningGrid grid = TuningGrid::default_grid();
  int not_psd = 0, checked = 0;
  for (const auto& c : cases)
    for (double a : grid.alphas)
      for (double b : grid.betas) {
        const Matrix cov = model_JK(c.theta, TuningPair(a, b), *c.model).cov;
        const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
        const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (cov + cov.transpose())).eigenvalues().minCoeff();
        ++checked;
        if (asym > 1e-10 * cov.cwiseAbs().maxCoeff() || min_eig < -1e-12 * cov.cwiseAbs().maxCoeff()) ++not_psd;
      }

  const bool pass = unbiased <= 1e-8 && gradient <= 1e-5 && score_fd <= 1e-5 && info_fd <= 1e-5 && not_psd == 0 &&
                    mle_gap <= 1e-6 && shift_gap <= 1e-6;
  return {pass, fmt("psi unbiasedness %.1e (<= 1e-8); divergence gradient identity %.1e (<= 1e-5); score FD %.1e, "
                    "information FD %.1e (<= 1e-5); sandwich PSD %d/%d; GBEDE(0,0) vs MLE %.1e (<= 1e-6); shift "
                    "equivariance %.1e (<= 1e-6)",
                    unbiased, gradient, score_fd, info_fd, checked - not_psd, checked, mle_gap, shift_gap)};
}

}  // namespace

int main(int argc, char** argv) {
  // optional arguments select criteria by number
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  const std::vector<std::tuple<int, std::string, std::function<std::pair<bool, std::string>()>>> all = {
      {1, "ARE table", are_table},
      {2, "optimal alpha at beta = 1", optimal_alpha_check},
      {3, "Drosophila fits", drosophila},
      {4, "telephone-fault fits", telephone},
      {5, "tuning selection", tuning},
      {6, "root selection", root_selection},
      {7, "Belgium calls regression", belgium},
      {8, "salinity regression", salinity},
      {9, "Monte Carlo efficiency, pure normal", mc_pure},
      {10, "Monte Carlo efficiency, 5% contamination", mc_contaminated},
      {11, "property suite", properties}};
  const auto t0 = Clock::now();
  int run = 0;
  for (const auto& [id, title, body] : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    criterion(id, title, body);
    ++run;
  }
  std::cout << fmt("%d of %d criteria failed, %.1f s", failures, run, seconds_since(t0)) << std::endl;
  return failures == 0 ? 0 : 1;
}
