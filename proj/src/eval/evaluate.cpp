#include "fpih/eval/evaluate.hpp"

#include <fstream>
#include <thread>

#include "fpih/net/checkpoint.hpp"

namespace fpih::eval {

LoadedPolicy LoadedPolicy::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw cfg::ConfigError("checkpoint: cannot open '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw cfg::ConfigError("checkpoint: " + path.string() + ": " + e.what());
  }
  if (!j.is_object() || j.value("kind", "") != "fpih-checkpoint")
    throw cfg::ConfigError("checkpoint: '" + path.string() +
                           "' is not a policy checkpoint");
  const std::string ckpt_version = j.at("version").get<std::string>();
  if (ckpt_version != kBuildVersion)
    throw cfg::VersionError("checkpoint version " + ckpt_version +
                            " does not match build version " + kBuildVersion);
  LoadedPolicy p;
  p.version = ckpt_version;
  p.config_hash = j.at("config_hash").get<std::string>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.mode = act::mode_from_name(j.at("mode").get<std::string>());
  p.layout = act::HeadLayout::make(p.mode);
  const int n_raw = j.at("action_layout").at("n_raw").get<int>();
  if (n_raw != p.layout.n_raw)
    throw cfg::ConfigError(
        "checkpoint: action layout does not match this build's layout for "
        "mode " +
        act::mode_name(p.mode));
  p.net = net::network_from_json(j.at("policy"));
  p.norm = rl::RunningNormalizer::from_json(j.at("actor_norm"));
  p.config = cfg::ExperimentConfig::from_json(j.at("config"));
  p.scales = p.config.scales;
  p.sigma_scale = p.config.eval_sigma_scale;
  if (p.net.topology().output_dim() != p.layout.n_raw)
    throw cfg::ConfigError("checkpoint: policy head width does not match the "
                           "action-space mode");
  return p;
}

act::HybridAction LoadedPolicy::act(const VecX& actor_obs,
                                    RandomStream& rng) const {
  const VecX raw = net.forward1(norm.normalize(actor_obs));
  const act::PolicyHeads h =
      act::PolicyHeads::from_raw(layout, raw, sigma_scale);
  return act::sample(h, mode, scales, rng).action;
}

PolicyFn LoadedPolicy::as_fn() const {
  return [this](const VecX& obs, int, RandomStream& rng) {
    return act(obs, rng);
  };
}

json EpisodeRecord::to_json() const {
  return {{"episode", episode},
          {"seed", seed},
          {"success", success},
          {"break", broke},
          {"timeout", timeout},
          {"steps", steps},
          {"time_to_success", time_to_success},
          {"mean_force", mean_force},
          {"mean_force_contact", mean_force_contact},
          {"max_force", max_force},
          {"energy", energy}};
}

json EvalMetrics::to_json() const {
  return {{"episodes", episodes},
          {"success_rate", success_rate},
          {"break_rate", break_rate},
          {"timeout_fraction", timeout_fraction},
          {"mean_time_to_success", mean_time_to_success},
          {"mean_force", mean_force},
          {"mean_force_contact_only", mean_force_contact_only},
          {"max_force", max_force}};
}

namespace {

EpisodeRecord run_episode(const PolicyFn& policy, const rl::EnvConfig& env_cfg,
                          const EvalCase& ec, int episode_idx,
                          Trajectory* traj_out) {
  PegEnv env(env_cfg, ec.seed, episode_idx);
  env.set_recording(traj_out != nullptr);
  env.reset();  // episode 1 for every path, recording or not
  RandomStream action_rng(derive_seed(ec.seed, 0xAC7, episode_idx));

  EpisodeRecord rec;
  rec.episode = episode_idx;
  rec.seed = env.episode_seed();

  double force_sum = 0.0, force_contact_sum = 0.0;
  int contact_steps = 0;
  const double dt_policy = env_cfg.dt * env_cfg.substeps;

  while (true) {
    const act::HybridAction a =
        policy(env.actor_obs(), env.episode_step(), action_rng);
    const rl::StepResult r = env.step(a);
    const double f = env.state().contact_force.norm();
    force_sum += f;
    rec.max_force = std::max(rec.max_force, f);
    const auto& flags = env.state().contact_flags;
    if (flags[0] || flags[1] || flags[2]) {
      force_contact_sum += f;
      contact_steps += 1;
    }
    rec.energy += r.energy;
    rec.steps = env.episode_step();
    if (r.first_success) {
      rec.success = true;
      rec.time_to_success = env.episode_step() * dt_policy;
    }
    if (r.done) {
      rec.broke = r.broke;
      rec.timeout = !rec.success && !rec.broke;
      break;
    }
  }
  rec.mean_force = rec.steps > 0 ? force_sum / rec.steps : 0.0;
  rec.mean_force_contact =
      contact_steps > 0 ? force_contact_sum / contact_steps : 0.0;
  if (traj_out) *traj_out = env.trajectory();
  return rec;
}

}  // namespace

EvalMetrics evaluate(const PolicyFn& policy, const rl::EnvConfig& env_cfg,
                     const EvalCase& ec,
                     std::vector<Trajectory>* trajectories) {
  rl::EnvConfig cfg = env_cfg;
  cfg.noise = ec.noise;
  cfg.terminate_on_success = true;

  EvalMetrics m;
  m.episodes = ec.episodes;
  m.per_episode.resize(ec.episodes);
  std::vector<Trajectory> trajs(trajectories ? ec.episodes : 0);

  auto work = [&](int i) {
    m.per_episode[i] = run_episode(policy, cfg, ec, i,
                                   trajectories ? &trajs[i] : nullptr);
  };
  if (ec.threads > 1 && ec.episodes > 1) {
    const int workers = std::min(ec.threads, ec.episodes);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w]() {
        for (int i = w; i < ec.episodes; i += workers) work(i);
      });
    for (auto& t : pool) t.join();
  } else {
    for (int i = 0; i < ec.episodes; ++i) work(i);
  }

  // deterministic reduce in episode order
  int succ = 0, brk = 0, tout = 0;
  double tts = 0.0, force = 0.0, force_contact = 0.0;
  int contact_counted = 0;
  for (const auto& r : m.per_episode) {
    succ += r.success;
    brk += r.broke;
    tout += r.timeout;
    if (r.success) tts += r.time_to_success;
    force += r.mean_force;
    if (r.mean_force_contact > 0.0) {
      force_contact += r.mean_force_contact;
      contact_counted += 1;
    }
    m.max_force = std::max(m.max_force, r.max_force);
  }
  m.success_rate = double(succ) / ec.episodes;
  m.break_rate = double(brk) / ec.episodes;
  m.timeout_fraction = double(tout) / ec.episodes;
  m.mean_time_to_success = succ > 0 ? tts / succ : 0.0;
  m.mean_force = force / ec.episodes;
  m.mean_force_contact_only =
      contact_counted > 0 ? force_contact / contact_counted : 0.0;
  if (trajectories) *trajectories = std::move(trajs);
  return m;
}

std::vector<SweepRow> noise_sweep(const PolicyFn& policy,
                                  const rl::EnvConfig& env_cfg,
                                  const std::vector<double>& levels_mm,
                                  int episodes_per_level,
                                  const EvalCase& base) {
  std::vector<SweepRow> rows;
  for (double lvl : levels_mm) {
    EvalCase ec = base;
    ec.episodes = episodes_per_level;
    ec.noise.hole_mode = rl::ObsNoiseConfig::HoleMode::UniformFixed;
    ec.noise.hole_uniform_halfwidth = lvl * 1e-3;
    rows.push_back({lvl, evaluate(policy, env_cfg, ec)});
  }
  return rows;
}

std::string sweep_csv(const std::string& method, std::uint64_t seed,
                      const std::vector<SweepRow>& rows) {
  std::string out =
      "method,seed,noise_level_mm,episodes,success_rate,break_rate,"
      "timeout_fraction,mean_time_to_success_s,mean_force_N,max_force_N\n";
  for (const auto& r : rows) {
    out += method + "," + std::to_string(seed) + "," +
           json(r.level_mm).dump() + "," + std::to_string(r.metrics.episodes) +
           "," + json(r.metrics.success_rate).dump() + "," +
           json(r.metrics.break_rate).dump() + "," +
           json(r.metrics.timeout_fraction).dump() + "," +
           json(r.metrics.mean_time_to_success).dump() + "," +
           json(r.metrics.mean_force).dump() + "," +
           json(r.metrics.max_force).dump() + "\n";
  }
  return out;
}

namespace {

json vec3_to_json(const Vec3& v) { return json{v.x(), v.y(), v.z()}; }
Vec3 vec3_from_json(const json& j) {
  return Vec3(j.at(0).get<double>(), j.at(1).get<double>(),
              j.at(2).get<double>());
}

json action_to_json(const act::HybridAction& a) {
  json j = {{"pose_delta", vec3_to_json(a.pose_delta)},
            {"yaw_delta", a.yaw_delta},
            {"force_target", vec3_to_json(a.force_target)},
            {"pose_selected",
             {a.pose_selected[0], a.pose_selected[1], a.pose_selected[2]}}};
  if (a.has_gains) j["kp_gain"] = vec3_to_json(a.kp_gain);
  return j;
}

act::HybridAction action_from_json(const json& j) {
  act::HybridAction a;
  a.pose_delta = vec3_from_json(j.at("pose_delta"));
  a.yaw_delta = j.at("yaw_delta").get<double>();
  a.force_target = vec3_from_json(j.at("force_target"));
  for (int i = 0; i < 3; ++i) a.pose_selected[i] = j.at("pose_selected").at(i).get<bool>();
  if (j.contains("kp_gain")) {
    a.kp_gain = vec3_from_json(j.at("kp_gain"));
    a.has_gains = true;
  }
  return a;
}

}  // namespace

void write_trajectories_jsonl(const std::filesystem::path& path,
                              const std::vector<Trajectory>& trajs,
                              const json& meta) {
  std::ofstream out(path);
  if (!meta.is_null()) out << json{{"meta", meta}}.dump() << "\n";
  for (const auto& tr : trajs) {
    out << json{{"episode", tr.episode},
                {"seed", tr.seed},
                {"hole_pos", vec3_to_json(tr.hole_pos)},
                {"hole_yaw", tr.hole_yaw},
                {"clearance", tr.clearance},
                {"table_height", tr.table_height},
                {"hole_depth", tr.hole_depth},
                {"success", tr.success},
                {"break", tr.broke}}
               .dump()
        << "\n";
    for (const auto& s : tr.steps) {
      out << json{{"t", s.t},
                  {"ee_pos", vec3_to_json(s.ee_pos)},
                  {"ee_vel", vec3_to_json(s.ee_vel)},
                  {"contact_force", vec3_to_json(s.contact_force)},
                  {"contact_flags",
                   {s.contact_flags[0], s.contact_flags[1], s.contact_flags[2]}},
                  {"broken", s.broken},
                  {"action", action_to_json(s.action)}}
                 .dump()
          << "\n";
    }
  }
}

std::vector<Trajectory> read_trajectories_jsonl(
    const std::filesystem::path& path, json* meta_out) {
  std::ifstream in(path);
  if (!in)
    throw cfg::ConfigError("trajectories: cannot open '" + path.string() + "'");
  std::vector<Trajectory> trajs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    if (j.contains("meta")) {
      if (meta_out) *meta_out = j.at("meta");
    } else if (j.contains("episode")) {
      Trajectory tr;
      tr.episode = j.at("episode").get<int>();
      tr.seed = j.at("seed").get<std::uint64_t>();
      tr.hole_pos = vec3_from_json(j.at("hole_pos"));
      tr.hole_yaw = j.at("hole_yaw").get<double>();
      tr.clearance = j.at("clearance").get<double>();
      tr.table_height = j.at("table_height").get<double>();
      tr.hole_depth = j.at("hole_depth").get<double>();
      tr.success = j.at("success").get<bool>();
      tr.broke = j.at("break").get<bool>();
      trajs.push_back(std::move(tr));
    } else {
      if (trajs.empty())
        throw cfg::ConfigError("trajectories: step record before episode meta");
      rl::TrajStep s;
      s.t = j.at("t").get<int>();
      s.ee_pos = vec3_from_json(j.at("ee_pos"));
      s.ee_vel = vec3_from_json(j.at("ee_vel"));
      s.contact_force = vec3_from_json(j.at("contact_force"));
      for (int i = 0; i < 3; ++i)
        s.contact_flags[i] = j.at("contact_flags").at(i).get<bool>();
      s.broken = j.at("broken").get<bool>();
      s.action = action_from_json(j.at("action"));
      trajs.back().steps.push_back(std::move(s));
    }
  }
  return trajs;
}

void write_episodes_jsonl(const std::filesystem::path& path,
                          const EvalMetrics& m, const json& meta) {
  std::ofstream out(path);
  if (!meta.is_null()) out << json{{"meta", meta}}.dump() << "\n";
  for (const auto& r : m.per_episode) out << r.to_json().dump() << "\n";
}

}  // namespace fpih::eval
