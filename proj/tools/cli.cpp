#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "bed/asymptotics.hpp"
#include "bed/datasets.hpp"
#include "bed/errors.hpp"
#include "bed/estimators.hpp"
#include "bed/harness.hpp"
#include "bed/regression.hpp"
#include "bed/tuning.hpp"

namespace bed::cli {

namespace {

using json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double parse_double(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v))
    throw UsageError("'" + text + "' is not a number");
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

// "a:b,a:b"
std::vector<TuningPair> parse_pairs(const std::string& text) {
  std::vector<TuningPair> out;
  for (const auto& item : split(text, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 2) throw UsageError("pair '" + item + "' should look like alpha:beta");
    out.emplace_back(parse_double(parts[0]), parse_double(parts[1]));
  }
  if (out.empty()) throw UsageError("no pairs given");
  return out;
}

Vector default_theta(const ParametricModel& model) {
  if (model.name() == "poisson") return Vector::Constant(1, 1.0);
  if (model.dim() == 2) return Vector{{0.0, 1.0}};
  return Vector::Zero(1);
}

Vector parse_theta(const std::string& text, const ParametricModel& model) {
  if (text.empty()) return default_theta(model);
  Vector theta = to_vector(parse_number_list(text));
  if (theta.size() != model.dim())
    throw UsageError("--theta needs " + std::to_string(model.dim()) + " values for " + model.name());
  model.require_feasible(theta);
  return theta;
}

Eigen::Index parse_component(const std::string& text, const ParametricModel& model) {
  const auto names = model.parameter_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == text) return static_cast<Eigen::Index>(i);
  throw UsageError("unknown component '" + text + "' for " + model.name());
}

json params_json(const ParamVector& p) {
  json j = json::object();
  for (std::size_t i = 0; i < p.names.size(); ++i) j[p.names[i]] = p.values(static_cast<Eigen::Index>(i));
  return j;
}

std::string header_line(const std::string& command, const std::vector<std::pair<std::string, std::string>>& fields) {
  std::string canonical = command;
  for (const auto& [k, v] : fields) canonical += "\n" + k + "=" + v;
  std::string line = "# bed " + command + " version=" + kVersion + " config_hash=" + fnv1a_hex(canonical);
  for (const auto& [k, v] : fields) line += " " + k + "=" + v;
  return line;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + num(v[i]);
  return s;
}

std::vector<double> as_numbers(const std::string& flag, const std::string& text) {
  try {
    auto v = parse_number_list(text);
    if (v.empty()) throw UsageError("empty list");
    return v;
  } catch (const std::exception& e) {
    throw UsageError(flag + ": " + e.what());
  }
}

Dataset univariate(const std::string& name) {
  Dataset d = load_dataset(name);
  if (d.regression) throw UsageError("'" + name + "' is regression data; use the regress subcommand");
  return d;
}

RegressionData regression_data(const std::string& name, const std::string& response, std::vector<std::string>& predictors) {
  CsvTable table;
  const auto builtin = dataset_names();
  if (std::find(builtin.begin(), builtin.end(), name) != builtin.end()) {
    const Dataset d = load_dataset(name);
    if (!d.regression) throw UsageError("'" + name + "' is univariate data; use the fit subcommand");
    table = read_csv_file(data_directory() / (name + ".csv"));
  } else {
    table = read_csv_file(name);
  }
  if (table.header.size() < 2) throw UsageError("'" + name + "' has a single column; use the fit subcommand");
  const std::string y = response.empty() ? table.header.back() : response;
  (void)table.column(y);
  predictors.clear();
  for (const auto& h : table.header)
    if (h != y) predictors.push_back(h);
  return regression_from_table(table, y);
}

// ----- fit -----

struct FitArgs {
  std::string dataset;
  std::string model = "normal";
  double sigma = 1.0;
  std::optional<double> alpha, beta, mbede;
  bool mle = false, pilot = false, tune = false;
  std::string alphas = "-3..0:0.1", betas = "0..1:0.1";
  unsigned threads = 1;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const Dataset d = univariate(a.dataset);
  const ModelPtr model = model_by_name(a.model, a.sigma);
  const int chosen = (a.alpha || a.beta ? 1 : 0) + a.mle + a.pilot + a.tune + (a.mbede ? 1 : 0);
  if (chosen != 1) throw UsageError("choose exactly one of --alpha/--beta, --mle, --mbede, --pilot, --tune");
  if (a.alpha.has_value() != a.beta.has_value()) throw UsageError("--alpha and --beta must be given together");

  json j;
  j["dataset"] = d.name;
  j["n"] = d.values.size();
  j["model"] = model->name();

  EstimationResult r;
  if (a.mle) {
    r = fit_mle(d.values, *model);
  } else if (a.pilot) {
    r = fit_l2_pilot(d.values, *model);
  } else if (a.mbede) {
    r = fit_mbede(d.values, *model, *a.mbede);
  } else if (a.tune) {
    TuningGrid grid{as_numbers("--alphas", a.alphas), as_numbers("--betas", a.betas)};
    const TuningResult t = select_tuning(d.values, *model, grid, a.threads);
    StartStrategy s;
    s.pilot = t.pilot;
    r = fit_gbede(d.values, *model, t.best, s);
    j["tuning"] = {{"alpha", t.best.alpha},
                   {"beta", t.best.beta},
                   {"mse_hat", t.best_estimate.mse_hat},
                   {"pilot", params_json(model->label(t.pilot))},
                   {"grid_size", grid.size()}};
  } else {
    r = fit_gbede(d.values, *model, TuningPair(*a.alpha, *a.beta));
  }

  j["method"] = to_string(r.method);
  j["alpha"] = r.pair.alpha;
  j["beta"] = r.pair.beta;
  j["estimate"] = params_json(r.theta_hat);
  try {
    const SandwichCov jk = model_JK(r.theta(), r.pair, *model);
    const Matrix cov = jk.cov / static_cast<double>(d.values.size());
    json se = json::object();
    for (Eigen::Index i = 0; i < cov.rows(); ++i) se[r.theta_hat.names[static_cast<std::size_t>(i)]] = std::sqrt(cov(i, i));
    j["std_error"] = se;
  } catch (const NumericalError&) {
    j["std_error"] = nullptr;
  }
  j["selected_by"] = to_string(r.selected_by);
  if (r.objective_value) j["objective"] = *r.objective_value;
  json roots = json::array();
  for (std::size_t i = 0; i < r.all_roots.size(); ++i) {
    json root = {{"theta", params_json(r.all_roots[i])}};
    if (i < r.root_divergences.size()) root["empirical_divergence"] = r.root_divergences[i];
    root["selected"] = r.all_roots[i].values.isApprox(r.theta(), 1e-12) ||
                       (r.all_roots[i].values - r.theta()).norm() == 0.0;
    roots.push_back(root);
  }
  j["roots"] = roots;
  j["converged"] = r.converged;
  if (model->name() == "poisson") {
    const auto e = poisson_expected_frequencies(r.theta()(0), static_cast<double>(d.values.size()));
    j["expected_frequencies"] = {{"cells", {"0", "1", "2", "3", "4", ">=5"}}, {"values", e}};
  }
  out << j.dump(2) << "\n";
  return 0;
}

// ----- regress -----

struct RegressArgs {
  std::string dataset;
  double alpha = 0.0, beta = 0.0;
  std::string response;
};

int cmd_regress(const RegressArgs& a, std::ostream& out) {
  std::vector<std::string> predictors;
  const RegressionData data = regression_data(a.dataset, a.response, predictors);
  const RegressionFit fit = fit_gbede_regression(data, TuningPair(a.alpha, a.beta));

  auto coef_json = [&](const RegressionParams& p) {
    json c = json::object();
    c["(intercept)"] = p.gamma(0);
    for (std::size_t k = 0; k < predictors.size(); ++k) c[predictors[k]] = p.gamma(static_cast<Eigen::Index>(k + 1));
    return c;
  };

  json j;
  j["dataset"] = a.dataset;
  j["n"] = data.n();
  j["alpha"] = a.alpha;
  j["beta"] = a.beta;
  j["coefficients"] = coef_json(fit.params);
  j["sigma2"] = fit.params.sigma2;
  json se = json::object();
  const Eigen::Index q = fit.params.gamma.size();
  se["(intercept)"] = std::sqrt(fit.cov(0, 0));
  for (std::size_t k = 0; k < predictors.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k + 1);
    se[predictors[k]] = std::sqrt(fit.cov(i, i));
  }
  se["sigma2"] = std::sqrt(fit.cov(q, q));
  j["std_error"] = se;
  j["standardized_residuals"] = std::vector<double>(fit.std_residuals.data(), fit.std_residuals.data() + fit.std_residuals.size());
  json roots = json::array();
  for (std::size_t i = 0; i < fit.all_roots.size(); ++i) {
    json root = {{"coefficients", coef_json(fit.all_roots[i])}, {"sigma2", fit.all_roots[i].sigma2}};
    if (i < fit.root_divergences.size()) root["empirical_divergence"] = fit.root_divergences[i];
    root["selected"] = (fit.all_roots[i].stacked() - fit.params.stacked()).norm() == 0.0;
    roots.push_back(root);
  }
  j["roots"] = roots;
  j["converged"] = fit.converged;
  out << j.dump(2) << "\n";
  return 0;
}

// ----- tune -----

struct TuneArgs {
  std::string dataset;
  std::string model = "normal";
  double sigma = 1.0;
  std::string alphas = "-3..0:0.1", betas = "0..1:0.1";
  unsigned threads = 1;
};

int cmd_tune(const TuneArgs& a, std::ostream& out) {
  const Dataset d = univariate(a.dataset);
  const ModelPtr model = model_by_name(a.model, a.sigma);
  const TuningGrid grid{as_numbers("--alphas", a.alphas), as_numbers("--betas", a.betas)};
  const TuningResult t = select_tuning(d.values, *model, grid, a.threads);

  std::vector<double> pilot(t.pilot.data(), t.pilot.data() + t.pilot.size());
  out << header_line("tune", {{"dataset", d.name},
                              {"model", model->name()},
                              {"n", std::to_string(d.values.size())},
                              {"alphas", join(grid.alphas)},
                              {"betas", join(grid.betas)},
                              {"pilot", join(pilot)}})
      << "\n";
  const auto names = model->parameter_names();
  out << "alpha,beta,mse_hat,bias_part,var_part";
  for (const auto& n : names) out << "," << n;
  out << ",valid\n";
  for (const auto& m : t.surface) {
    out << num(m.pair.alpha) << "," << num(m.pair.beta) << ",";
    if (m.valid) {
      out << num(m.mse_hat) << "," << num(m.bias_part) << "," << num(m.var_part);
      for (Eigen::Index i = 0; i < m.theta_hat.values.size(); ++i) out << "," << num(m.theta_hat.values(i));
    } else {
      out << ",,";
      for (std::size_t i = 0; i < names.size(); ++i) out << ",";
    }
    out << "," << (m.valid ? 1 : 0) << "\n";
  }
  out << "# argmin alpha=" << num(t.best.alpha) << " beta=" << num(t.best.beta)
      << " mse_hat=" << num(t.best_estimate.mse_hat) << "\n";
  return 0;
}

// ----- are-table -----

struct AreArgs {
  std::string model = "normal-location";
  double sigma = 1.0;
  std::string alphas, betas, theta, component;
};

int cmd_are(const AreArgs& a, std::ostream& out) {
  const ModelPtr model = model_by_name(a.model, a.sigma);
  const Vector theta = parse_theta(a.theta, *model);
  const Eigen::Index comp = a.component.empty() ? 0 : parse_component(a.component, *model);
  const auto alphas = as_numbers("--alpha", a.alphas);
  const auto betas = as_numbers("--beta", a.betas);
  std::vector<double> th(theta.data(), theta.data() + theta.size());
  out << header_line("are-table", {{"model", model->name()},
                                   {"theta", join(th)},
                                   {"component", model->parameter_names()[static_cast<std::size_t>(comp)]},
                                   {"alphas", join(alphas)},
                                   {"betas", join(betas)}})
      << "\n";
  out << "alpha";
  for (double b : betas) out << ",beta=" << num(b);
  out << "\n";
  for (double al : alphas) {
    out << num(al);
    for (double b : betas) out << "," << num(are(TuningPair(al, b), *model, theta, comp));
    out << "\n";
  }
  return 0;
}

// ----- simulate -----

struct SimArgs {
  std::string config;
  std::string model = "normal";
  double sigma = 1.0;
  std::string target, contaminant;
  double epsilon = 0.0;
  std::size_t n = 100, reps = 2000;
  std::uint64_t seed = 1;
  std::string pairs, alphas, betas;
  unsigned threads = 1;
  bool full_reps = false;
  std::string output;
};

int cmd_simulate(const SimArgs& a, const CLI::App& sub, std::ostream& out) {
  MCConfig c;
  const auto given = [&](const char* name) { return sub.get_option(name)->count() > 0; };
  if (!a.config.empty()) {
    c = load_mc_config(a.config);
    for (const char* flag : {"--model", "--target", "--contaminant", "--epsilon", "--n", "--sigma"})
      if (given(flag)) throw UsageError(std::string(flag) + " cannot be combined with --config");
  } else {
    const ModelPtr model = model_by_name(a.model, a.sigma);
    c.spec.target = {model, parse_theta(a.target, *model)};
    c.spec.contaminant = {model, a.contaminant.empty() ? c.spec.target.theta : parse_theta(a.contaminant, *model)};
    c.spec.epsilon = a.epsilon;
    c.n = a.n;
    c.target_param = c.spec.target.theta;
  }
  if (given("--reps") || a.config.empty()) c.replications = a.reps;
  if (a.full_reps) c.replications = 10000;
  if (given("--seed")) c.seed = a.seed;
  if (given("--threads") || a.config.empty()) c.threads = a.threads;
  if (!a.pairs.empty()) {
    c.pairs = parse_pairs(a.pairs);
  } else if (!a.alphas.empty() || !a.betas.empty()) {
    if (a.alphas.empty() || a.betas.empty()) throw UsageError("--alphas and --betas must be given together");
    c.pairs.clear();
    for (double al : as_numbers("--alphas", a.alphas))
      for (double b : as_numbers("--betas", a.betas)) c.pairs.emplace_back(al, b);
  }
  if (c.pairs.empty()) throw UsageError("no tuning pairs (use --pairs, --alphas/--betas or a config file)");

  const EfficiencyTable table = run_efficiency_study(c);
  if (a.output.empty()) {
    write_efficiency_csv(table, out);
  } else {
    std::ofstream f(a.output);
    if (!f) throw DataError("cannot write '" + a.output + "'");
    write_efficiency_csv(table, f);
  }
  return 0;
}

// ----- roots -----

struct RootsArgs {
  std::string dataset;
  std::string model = "normal";
  double sigma = 1.0;
  double alpha = 0.0, beta = 0.0;
  std::string response;
};

int cmd_roots(const RootsArgs& a, std::ostream& out) {
  const Dataset d = load_dataset(a.dataset);
  const TuningPair pair(a.alpha, a.beta);
  if (d.regression) {
    std::vector<std::string> predictors;
    const RegressionData data = regression_data(a.dataset, a.response, predictors);
    const RegressionFit fit = fit_gbede_regression(data, pair);
    out << header_line("roots", {{"dataset", a.dataset}, {"alpha", num(a.alpha)}, {"beta", num(a.beta)}}) << "\n";
    out << "root,(intercept)";
    for (const auto& p : predictors) out << "," << p;
    out << ",sigma2,empirical_divergence,selected\n";
    for (std::size_t i = 0; i < fit.all_roots.size(); ++i) {
      const auto& r = fit.all_roots[i];
      out << i;
      for (Eigen::Index k = 0; k < r.gamma.size(); ++k) out << "," << num(r.gamma(k));
      out << "," << num(r.sigma2) << ",";
      if (i < fit.root_divergences.size()) out << num(fit.root_divergences[i]);
      out << "," << ((r.stacked() - fit.params.stacked()).norm() == 0.0 ? 1 : 0) << "\n";
    }
    return 0;
  }
  const ModelPtr model = model_by_name(a.model, a.sigma);
  const EstimationResult r = fit_gbede(d.values, *model, pair);
  out << header_line("roots", {{"dataset", d.name},
                               {"model", model->name()},
                               {"alpha", num(a.alpha)},
                               {"beta", num(a.beta)},
                               {"selected_by", to_string(r.selected_by)}})
      << "\n";
  out << "root";
  for (const auto& n : model->parameter_names()) out << "," << n;
  out << ",empirical_divergence,selected\n";
  for (std::size_t i = 0; i < r.all_roots.size(); ++i) {
    out << i;
    for (Eigen::Index k = 0; k < r.all_roots[i].values.size(); ++k) out << "," << num(r.all_roots[i].values(k));
    out << ",";
    if (i < r.root_divergences.size()) out << num(r.root_divergences[i]);
    out << "," << ((r.all_roots[i].values - r.theta()).norm() == 0.0 ? 1 : 0) << "\n";
  }
  return 0;
}

// ----- influence -----

struct InfluenceArgs {
  std::string model = "normal";
  double sigma = 1.0;
  std::string theta;
  double alpha = 0.0, beta = 0.0;
  std::string y = "-5..5:0.1";
};

int cmd_influence(const InfluenceArgs& a, std::ostream& out) {
  const ModelPtr model = model_by_name(a.model, a.sigma);
  const Vector theta = parse_theta(a.theta, *model);
  const TuningPair pair(a.alpha, a.beta);
  const auto ys = as_numbers("--y", a.y);
  const SandwichCov jk = model_JK(theta, pair, *model);
  std::vector<double> th(theta.data(), theta.data() + theta.size());
  out << header_line("influence", {{"model", model->name()},
                                   {"theta", join(th)},
                                   {"alpha", num(a.alpha)},
                                   {"beta", num(a.beta)},
                                   {"y", join(ys)}})
      << "\n";
  out << "y";
  for (const auto& n : model->parameter_names()) out << ",if_" << n;
  out << "\n";
  for (double y : ys) {
    const Vector v = influence_function(y, theta, pair, *model, jk);
    out << num(y);
    for (Eigen::Index k = 0; k < v.size(); ++k) out << "," << num(v(k));
    out << "\n";
  }
  return 0;
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) {
    if (item.empty()) throw UsageError("empty item in list '" + text + "'");
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_double(item));
      continue;
    }
    const auto colon = item.find(':', dots);
    if (colon == std::string::npos) throw UsageError("range '" + item + "' should look like lo..hi:step");
    const double lo = parse_double(item.substr(0, dots));
    const double hi = parse_double(item.substr(dots + 2, colon - dots - 2));
    const double step = parse_double(item.substr(colon + 1));
    const auto r = TuningGrid::range(lo, hi, step);
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalised B-exponential divergence estimation", "bed"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  const auto add_model = [](CLI::App* s, std::string& model, double& sigma) {
    s->add_option("--model", model, "normal, normal-location or poisson")
        ->check(CLI::IsMember({"normal", "normal-location", "poisson"}));
    s->add_option("--sigma", sigma, "known sigma for normal-location")->check(CLI::PositiveNumber);
  };

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Fit a univariate model to a dataset or one-column CSV");
  fit->add_option("dataset", fa.dataset, "built-in name or CSV path")->required();
  add_model(fit, fa.model, fa.sigma);
  fit->add_option("--alpha", fa.alpha, "GBEDE alpha");
  fit->add_option("--beta", fa.beta, "GBEDE beta")->check(CLI::NonNegativeNumber);
  fit->add_flag("--mle", fa.mle, "maximum likelihood");
  fit->add_option("--mbede", fa.mbede, "minimum B-exponential divergence with this alpha");
  fit->add_flag("--pilot", fa.pilot, "minimum L2 distance estimator");
  fit->add_flag("--tune", fa.tune, "select (alpha, beta) by estimated MSE");
  fit->add_option("--alphas", fa.alphas, "tuning grid alphas");
  fit->add_option("--betas", fa.betas, "tuning grid betas");
  fit->add_option("--threads", fa.threads, "worker threads (0: all cores)");

  RegressArgs ra;
  auto* reg = app.add_subcommand("regress", "Robust linear regression on a CSV (response last by default)");
  reg->add_option("dataset", ra.dataset, "belgium-calls, salinity or a CSV path")->required();
  reg->add_option("--alpha", ra.alpha)->required();
  reg->add_option("--beta", ra.beta)->required()->check(CLI::NonNegativeNumber);
  reg->add_option("--response", ra.response, "response column name");

  TuneArgs ta;
  auto* tune = app.add_subcommand("tune", "Estimated-MSE surface over an (alpha, beta) grid");
  tune->add_option("dataset", ta.dataset)->required();
  add_model(tune, ta.model, ta.sigma);
  tune->add_option("--alphas", ta.alphas);
  tune->add_option("--betas", ta.betas);
  tune->add_option("--threads", ta.threads);

  AreArgs aa;
  auto* aret = app.add_subcommand("are-table", "Asymptotic relative efficiency table (percent)");
  add_model(aret, aa.model, aa.sigma);
  aret->add_option("--alpha", aa.alphas, "alpha list, e.g. 0,-1,-2 or -3..0:0.5")->required();
  aret->add_option("--beta", aa.betas, "beta list, e.g. 0..1:0.1")->required();
  aret->add_option("--theta", aa.theta, "model parameter, comma separated");
  aret->add_option("--component", aa.component, "parameter name (default: first)");

  SimArgs sa;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo efficiency study under contamination");
  sim->add_option("--config", sa.config, "TOML experiment file");
  add_model(sim, sa.model, sa.sigma);
  sim->add_option("--target", sa.target, "target parameter, comma separated");
  sim->add_option("--contaminant", sa.contaminant, "contaminating parameter, comma separated");
  sim->add_option("--epsilon", sa.epsilon, "contamination fraction");
  sim->add_option("--n", sa.n, "sample size");
  sim->add_option("--reps", sa.reps, "replications");
  sim->add_option("--seed", sa.seed);
  sim->add_option("--pairs", sa.pairs, "alpha:beta,alpha:beta,...");
  sim->add_option("--alphas", sa.alphas, "with --betas: full grid of pairs");
  sim->add_option("--betas", sa.betas);
  sim->add_option("--threads", sa.threads);
  sim->add_flag("--full-reps", sa.full_reps, "10000 replications");
  sim->add_option("--output", sa.output, "CSV path (default: stdout)");

  RootsArgs oa;
  auto* roots = app.add_subcommand("roots", "All roots of the estimating equation with their divergences");
  roots->add_option("dataset", oa.dataset)->required();
  add_model(roots, oa.model, oa.sigma);
  roots->add_option("--alpha", oa.alpha)->required();
  roots->add_option("--beta", oa.beta)->required()->check(CLI::NonNegativeNumber);
  roots->add_option("--response", oa.response, "response column for regression data");

  InfluenceArgs ia;
  auto* infl = app.add_subcommand("influence", "Influence function over a grid of y");
  add_model(infl, ia.model, ia.sigma);
  infl->add_option("--theta", ia.theta);
  infl->add_option("--alpha", ia.alpha)->required();
  infl->add_option("--beta", ia.beta)->required()->check(CLI::NonNegativeNumber);
  infl->add_option("--y", ia.y, "grid, e.g. -5..5:0.1");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*fit) return cmd_fit(fa, out);
    if (*reg) return cmd_regress(ra, out);
    if (*tune) return cmd_tune(ta, out);
    if (*aret) return cmd_are(aa, out);
    if (*sim) return cmd_simulate(sa, *sim, out);
    if (*roots) return cmd_roots(oa, out);
    if (*infl) return cmd_influence(ia, out);
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure in " << e.operation() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace bed::cli
