#pragma once

#include <functional>
#include <optional>

#include "fpih/cfg/config.hpp"
#include "fpih/rl/observation.hpp"

namespace fpih::eval {

using nlohmann::json;
using rl::PegEnv;
using rl::Trajectory;

// A policy under evaluation: raw (unnormalized) actor observation in,
// executed command out. Episode-local state must be derivable from the
// observation and step index so episodes can run in parallel.
using PolicyFn = std::function<act::HybridAction(const VecX& actor_obs,
                                                 int step, RandomStream& rng)>;

// A trained policy restored from a checkpoint file.
struct LoadedPolicy {
  net::Network net;
  rl::RunningNormalizer norm;
  act::HeadLayout layout;
  act::ActionScales scales;
  act::ActionMode mode = act::ActionMode::Match;
  double sigma_scale = 1.0;
  cfg::ExperimentConfig config;
  std::string version, config_hash;
  std::uint64_t seed = 0;

  // Throws cfg::VersionError when the checkpoint build version differs from
  // this build; ConfigError on malformed files.
  static LoadedPolicy load(const std::filesystem::path& path);

  act::HybridAction act(const VecX& actor_obs, RandomStream& rng) const;
  PolicyFn as_fn() const;
};

struct EpisodeRecord {
  int episode = 0;
  std::uint64_t seed = 0;
  bool success = false;
  bool broke = false;
  bool timeout = false;
  int steps = 0;
  double time_to_success = 0.0;  // s, successes only
  double mean_force = 0.0;       // mean ||f_ee|| over all policy steps
  double mean_force_contact = 0.0;
  double max_force = 0.0;
  double energy = 0.0;  // sum ||wrench||*||dx||

  json to_json() const;
};

struct EvalMetrics {
  int episodes = 0;
  double success_rate = 0.0;
  double break_rate = 0.0;
  double timeout_fraction = 0.0;
  double mean_time_to_success = 0.0;  // successes only
  double mean_force = 0.0;
  double mean_force_contact_only = 0.0;
  double max_force = 0.0;
  std::vector<EpisodeRecord> per_episode;

  json to_json() const;  // aggregate only
};

struct EvalCase {
  int episodes = 100;
  std::uint64_t seed = 9000;
  rl::ObsNoiseConfig noise;
  double sigma_scale = 1.0;  // ignored for scripted policies
  bool record_trajectories = false;
  int threads = 1;
};

// Runs episodes with deterministic per-episode seeding (derive(seed, i)) and
// aggregates in episode order. Episodes end at first success, break, or
// timeout; exactly one of the three is recorded per episode.
EvalMetrics evaluate(const PolicyFn& policy, const rl::EnvConfig& env_cfg,
                     const EvalCase& ec,
                     std::vector<Trajectory>* trajectories = nullptr);

struct SweepRow {
  double level_mm = 0.0;
  EvalMetrics metrics;
};

// Uniform hole-localization noise, fixed per episode, one EvalMetrics per
// half-width level. Level 0 reduces bitwise to evaluate() with the same
// seeds and a zero-width uniform noise config.
std::vector<SweepRow> noise_sweep(const PolicyFn& policy,
                                  const rl::EnvConfig& env_cfg,
                                  const std::vector<double>& levels_mm,
                                  int episodes_per_level, const EvalCase& base);

// method/seed keyed CSV table of sweep results.
std::string sweep_csv(const std::string& method, std::uint64_t seed,
                      const std::vector<SweepRow>& rows);

// Trajectory JSONL: an artifact meta line ({version, config_hash, seed} when
// given), then per episode one header line and one record per policy step.
void write_trajectories_jsonl(const std::filesystem::path& path,
                              const std::vector<Trajectory>& trajs,
                              const json& meta = json());
std::vector<Trajectory> read_trajectories_jsonl(
    const std::filesystem::path& path, json* meta_out = nullptr);

void write_episodes_jsonl(const std::filesystem::path& path,
                          const EvalMetrics& m, const json& meta = json());

}  // namespace fpih::eval
