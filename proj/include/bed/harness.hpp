#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bed/estimators.hpp"
#include "bed/rng.hpp"

namespace bed {

inline constexpr const char* kVersion = BED_VERSION;

struct Component {
  ModelPtr model;
  Vector theta;
};

/// (1 - ε)·target + ε·contaminant.
struct ContaminationSpec {
  Component target;
  Component contaminant;
  double epsilon = 0.0;

  /// 0 ≤ ε < 1, one model family, feasible parameters.
  void validate() const;
};

struct MCConfig {
  ContaminationSpec spec;
  std::size_t n = 100;
  std::size_t replications = 2000;
  std::uint64_t seed = 1;
  std::vector<TuningPair> pairs;
  /// MSE reference, normally the target component's parameter.
  Vector target_param;
  /// Worker threads; 0 means the hardware concurrency. Results do not depend on it.
  unsigned threads = 1;

  void validate() const;
  /// Every field except `threads`, printed exactly; the basis of config_hash.
  std::string canonical() const;
  /// 64-bit FNV-1a of canonical(), as 16 hex digits.
  std::string config_hash() const;
};

/// 64-bit FNV-1a of `text` as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

/// One draw from the model at θ (normal, normal-location, poisson).
double draw(const ParametricModel& model, const Vector& theta, RngStream& rng);

/// Each point is the contaminant with probability ε, else the target. One
/// uniform decides the component, then the draw itself follows.
std::vector<double> generate_sample(const ContaminationSpec& spec, std::size_t n, RngStream& rng);

struct EfficiencyCell {
  TuningPair pair;
  std::string parameter;
  /// n × mean squared error against target_param over successful replications.
  double n_mse = 0.0;
  /// n_mse(MLE) / n_mse(pair).
  double relative_efficiency = 0.0;
  /// Monte Carlo standard error of n_mse.
  double n_mse_se = 0.0;
  /// Standard error of n_mse(pair) - n_mse(MLE) from paired replications.
  double diff_se = 0.0;
  std::size_t failures = 0;
  std::size_t used = 0;
  /// More than 1% of the replications failed.
  bool flagged = false;
};

struct EfficiencyTable {
  MCConfig config;
  /// Pair-major, then parameter; the MLE row first.
  std::vector<EfficiencyCell> cells;
  std::size_t mle_failures = 0;

  const EfficiencyCell& cell(TuningPair pair, const std::string& parameter) const;
};

/// Replication r uses the substream r of (seed, 0). Each replication fits the
/// MLE, the L2 pilot once, and every pair with that pilot; (0, 0) is the MLE.
/// A failed fit is counted against its pair and left out of its MSE.
EfficiencyTable run_efficiency_study(const MCConfig& config);

/// `# ...` metadata line (seed, version, config hash) then one row per cell.
void write_efficiency_csv(const EfficiencyTable& table, std::ostream& out);
std::string metadata_line(const MCConfig& config);

/// TOML with keys mirroring MCConfig: n, replications, seed, threads, pairs
/// ([[α, β], ...]) and/or alphas + betas (their full grid), target_param, and [spec] with epsilon, [spec.target] and
/// [spec.contaminant] each holding model, theta and optionally sigma (for
/// normal-location).
MCConfig parse_mc_config(const std::string& toml_text, const std::string& source = "config");
MCConfig load_mc_config(const std::filesystem::path& path);

}  // namespace bed
