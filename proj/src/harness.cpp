#include "bed/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <toml.hpp>

#include "bed/parallel.hpp"

namespace bed {

namespace {

std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string describe(const Component& c) {
  std::string s = c.model ? c.model->name() : "?";
  if (const auto* loc = dynamic_cast<const NormalLocationModel*>(c.model.get())) s += "[sigma=" + exact(loc->sigma()) + "]";
  s += "(";
  for (Eigen::Index i = 0; i < c.theta.size(); ++i) s += (i ? "," : "") + exact(c.theta(i));
  return s + ")";
}

struct Moments {
  double sum = 0.0, sum_sq = 0.0;
  std::size_t count = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++count;
  }
  double mean() const { return count ? sum / static_cast<double>(count) : std::nan(""); }
  double se() const {
    if (count < 2) return std::nan("");
    const double m = mean();
    const double var = (sum_sq - static_cast<double>(count) * m * m) / static_cast<double>(count - 1);
    return std::sqrt(std::max(0.0, var) / static_cast<double>(count));
  }
};

}  // namespace

void ContaminationSpec::validate() const {
  if (!target.model || !contaminant.model) throw DomainError("contamination spec: missing model");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw DomainError("contamination spec: epsilon must be in [0, 1)");
  if (target.model->name() != contaminant.model->name())
    throw DomainError("contamination spec: target and contaminant must be the same model family");
  for (const Component* c : {&target, &contaminant}) {
    if (c->theta.size() != c->model->dim() || !c->model->feasible(c->theta))
      throw DomainError("contamination spec: infeasible parameter " + describe(*c));
  }
}

void MCConfig::validate() const {
  spec.validate();
  if (n < 2) throw DomainError("mc config: n must be at least 2");
  if (replications < 1) throw DomainError("mc config: replications must be at least 1");
  if (target_param.size() != spec.target.model->dim())
    throw DomainError("mc config: target_param needs " + std::to_string(spec.target.model->dim()) + " entries");
}

std::string MCConfig::canonical() const {
  std::ostringstream s;
  s << "target=" << describe(spec.target) << "\ncontaminant=" << describe(spec.contaminant)
    << "\nepsilon=" << exact(spec.epsilon) << "\nn=" << n << "\nreplications=" << replications << "\nseed=" << seed
    << "\npairs=";
  for (const auto& p : pairs) s << "(" << exact(p.alpha) << "," << exact(p.beta) << ")";
  s << "\ntarget_param=";
  for (Eigen::Index i = 0; i < target_param.size(); ++i) s << (i ? "," : "") << exact(target_param(i));
  s << "\n";
  return s.str();
}

std::string MCConfig::config_hash() const { return fnv1a_hex(canonical()); }

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double draw(const ParametricModel& model, const Vector& theta, RngStream& rng) {
  if (dynamic_cast<const NormalModel*>(&model)) return rng.normal(theta(0), theta(1));
  if (const auto* loc = dynamic_cast<const NormalLocationModel*>(&model)) return rng.normal(theta(0), loc->sigma());
  if (dynamic_cast<const PoissonModel*>(&model)) return static_cast<double>(rng.poisson(theta(0)));
  throw DomainError("draw: no sampler for model " + model.name());
}

std::vector<double> generate_sample(const ContaminationSpec& spec, std::size_t n, RngStream& rng) {
  std::vector<double> out(n);
  for (auto& x : out) {
    const Component& c = rng.uniform() < spec.epsilon ? spec.contaminant : spec.target;
    x = draw(*c.model, c.theta, rng);
  }
  return out;
}

const EfficiencyCell& EfficiencyTable::cell(TuningPair pair, const std::string& parameter) const {
  for (const auto& c : cells)
    if (c.pair == pair && c.parameter == parameter) return c;
  throw DomainError("efficiency table: no cell for " + pair.to_string() + " / " + parameter);
}

EfficiencyTable run_efficiency_study(const MCConfig& config) {
  config.validate();
  const ParametricModel& model = *config.spec.target.model;
  const auto names = model.parameter_names();
  const Eigen::Index p = model.dim();

  // pairs[0] is the MLE
  std::vector<TuningPair> pairs{TuningPair(0, 0)};
  for (const auto& q : config.pairs)
    if (std::find(pairs.begin(), pairs.end(), q) == pairs.end()) pairs.push_back(q);
  const bool need_pilot = pairs.size() > 1;

  using Estimates = std::vector<std::optional<Vector>>;
  std::vector<Estimates> results(config.replications, Estimates(pairs.size()));
  const RngStream base(config.seed, 0);

  parallel_for(config.replications, resolve_threads(config.threads), [&](std::size_t r) {
    RngStream rng = base.substream(r);
    const auto sample = generate_sample(config.spec, config.n, rng);
    Estimates& est = results[r];
    try {
      est[0] = fit_mle(sample, model).theta();
    } catch (const std::exception&) {
    }
    if (!need_pilot) return;
    StartStrategy starts;
    try {
      starts.pilot = fit_l2_pilot(sample, model).theta();
    } catch (const std::exception&) {
    }
    for (std::size_t k = 1; k < pairs.size(); ++k) {
      try {
        if (pairs[k] == TuningPair(0, 1) && starts.pilot)
          est[k] = *starts.pilot;
        else
          est[k] = fit_gbede(sample, model, pairs[k], starts).theta();
      } catch (const std::exception&) {
      }
    }
  });

  const double n = static_cast<double>(config.n);
  EfficiencyTable table;
  table.config = config;
  std::vector<double> mle_n_mse(static_cast<std::size_t>(p));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    for (Eigen::Index c = 0; c < p; ++c) {
      Moments err, diff;
      std::size_t failures = 0;
      for (const auto& est : results) {
        if (!est[k]) {
          ++failures;
          continue;
        }
        const double e = n * std::pow((*est[k])(c) - config.target_param(c), 2);
        err.add(e);
        if (est[0]) diff.add(e - n * std::pow((*est[0])(c) - config.target_param(c), 2));
      }
      EfficiencyCell cell;
      cell.pair = pairs[k];
      cell.parameter = names[static_cast<std::size_t>(c)];
      cell.n_mse = err.mean();
      cell.n_mse_se = err.se();
      cell.diff_se = k == 0 ? 0.0 : diff.se();
      cell.failures = failures;
      cell.used = err.count;
      cell.flagged = static_cast<double>(failures) > 0.01 * static_cast<double>(config.replications);
      if (k == 0) {
        mle_n_mse[static_cast<std::size_t>(c)] = cell.n_mse;
        cell.relative_efficiency = 1.0;
      } else {
        cell.relative_efficiency = mle_n_mse[static_cast<std::size_t>(c)] / cell.n_mse;
      }
      table.cells.push_back(cell);
    }
  }
  table.mle_failures = table.cells.front().failures;
  return table;
}

std::string metadata_line(const MCConfig& config) {
  std::ostringstream s;
  s << "# bed simulate version=" << kVersion << " seed=" << config.seed << " config_hash=" << config.config_hash()
    << " n=" << config.n << " replications=" << config.replications << " epsilon=" << fixed(config.spec.epsilon)
    << " target=" << describe(config.spec.target) << " contaminant=" << describe(config.spec.contaminant);
  return s.str();
}

void write_efficiency_csv(const EfficiencyTable& table, std::ostream& out) {
  out << metadata_line(table.config) << "\n";
  out << "alpha,beta,parameter,n_mse,relative_efficiency,n_mse_se,diff_se,used,failures,flagged\n";
  for (const auto& c : table.cells) {
    out << fixed(c.pair.alpha) << "," << fixed(c.pair.beta) << "," << c.parameter << "," << fixed(c.n_mse) << ","
        << fixed(c.relative_efficiency) << "," << fixed(c.n_mse_se) << "," << fixed(c.diff_se) << "," << c.used << ","
        << c.failures << "," << (c.flagged ? "yes" : "no") << "\n";
  }
}

namespace {

Vector number_array(const toml::node* node, const std::string& key, const std::string& source) {
  const auto* arr = node ? node->as_array() : nullptr;
  if (!arr) throw DataError(source + ": '" + key + "' must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(arr->size()));
  for (std::size_t i = 0; i < arr->size(); ++i) {
    const auto x = (*arr)[i].value<double>();
    if (!x) throw DataError(source + ": '" + key + "' must be an array of numbers");
    v(static_cast<Eigen::Index>(i)) = *x;
  }
  return v;
}

Component component(const toml::table& root, const std::string& key, const std::string& source) {
  const auto* t = root.at_path("spec." + key).as_table();
  if (!t) throw DataError(source + ": missing table [spec." + key + "]");
  const auto name = (*t)["model"].value<std::string>();
  if (!name) throw DataError(source + ": spec." + key + ".model must be a string");
  const double sigma = (*t)["sigma"].value_or(1.0);
  try {
    return {model_by_name(*name, sigma), number_array((*t)["theta"].node(), "spec." + key + ".theta", source)};
  } catch (const DomainError& e) {
    throw DataError(source + ": " + e.what());
  }
}

template <class T>
T count_field(const toml::table& root, const char* key, T fallback, const std::string& source) {
  const toml::node* node = root.get(key);
  if (!node) return fallback;
  const auto v = node->value<std::int64_t>();
  if (!v || *v < 0) throw DataError(source + ": '" + key + "' must be a non-negative integer");
  return static_cast<T>(*v);
}

}  // namespace

MCConfig parse_mc_config(const std::string& text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ":" << e.source().begin.line << ": " << e.description();
    throw DataError(msg.str());
  }
  MCConfig c;
  c.n = count_field<std::size_t>(root, "n", c.n, source);
  c.replications = count_field<std::size_t>(root, "replications", c.replications, source);
  c.threads = count_field<unsigned>(root, "threads", c.threads, source);
  if (const toml::node* seed = root.get("seed")) {
    const auto v = seed->value<std::int64_t>();
    if (!v) throw DataError(source + ": 'seed' must be an integer");
    c.seed = static_cast<std::uint64_t>(*v);
  }
  c.spec.target = component(root, "target", source);
  c.spec.contaminant = component(root, "contaminant", source);
  c.spec.epsilon = root.at_path("spec.epsilon").value_or(0.0);
  if (const auto* pairs = root["pairs"].as_array()) {
    for (const auto& item : *pairs) {
      const Vector ab = number_array(&item, "pairs", source);
      if (ab.size() != 2) throw DataError(source + ": each entry of 'pairs' is [alpha, beta]");
      try {
        c.pairs.emplace_back(ab(0), ab(1));
      } catch (const DomainError& e) {
        throw DataError(source + ": " + e.what());
      }
    }
  }
  // alphas × betas, appended after any explicit pairs
  const bool has_alphas = root.get("alphas") != nullptr, has_betas = root.get("betas") != nullptr;
  if (has_alphas != has_betas) throw DataError(source + ": 'alphas' and 'betas' must be given together");
  if (has_alphas) {
    const Vector as = number_array(root.get("alphas"), "alphas", source);
    const Vector bs = number_array(root.get("betas"), "betas", source);
    for (const double a : as)
      for (const double b : bs) {
        try {
          c.pairs.emplace_back(a, b);
        } catch (const DomainError& e) {
          throw DataError(source + ": " + e.what());
        }
      }
  }
  c.target_param = root.get("target_param") ? number_array(root.get("target_param"), "target_param", source)
                                            : c.spec.target.theta;
  try {
    c.validate();
  } catch (const DomainError& e) {
    throw DataError(source + ": " + e.what());
  }
  return c;
}

MCConfig load_mc_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_mc_config(buf.str(), path.string());
}

}  // namespace bed
