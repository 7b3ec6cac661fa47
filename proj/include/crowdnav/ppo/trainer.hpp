#pragma once

// Run directory layout:
//   manifest.json                 run id, config snapshot, checkpoint index
//   metrics.csv                   one row per update
//   checkpoints/ckpt_<k>.bin      parameters after update k (k = 0 before training)
//   checkpoints/ckpt_<k>.opt.bin  Adam moments
//   checkpoints/ckpt_<k>.state.json  environments, RNG streams, hidden states, episode window

#include "crowdnav/errors.hpp"
#include "crowdnav/net/checkpoint.hpp"
#include "crowdnav/net/policy.hpp"
#include "crowdnav/ppo/adam.hpp"
#include "crowdnav/ppo/rollout.hpp"
#include "crowdnav/ppo/update.hpp"
#include "crowdnav/run_config.hpp"
#include "crowdnav/sim/state_io.hpp"
#include "crowdnav/sim/trajectory.hpp"

#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace crowdnav::ppo {

namespace fs = std::filesystem;

inline constexpr const char* kMetricsHeader =
    "update_idx,env_steps,mean_reward,success_rate,policy_loss,value_loss,entropy,clip_frac";

struct MetricsRow {
  std::int64_t update_idx = 0;
  std::int64_t env_steps = 0;
  double mean_reward = 0.0;
  double success_rate = 0.0;
  UpdateStats stats;
};

inline std::string format_metrics_row(const MetricsRow& r) {
  std::ostringstream os;
  os << r.update_idx << ',' << r.env_steps;
  for (double v : {r.mean_reward, r.success_rate, r.stats.policy_loss, r.stats.value_loss, r.stats.entropy,
                   r.stats.clip_frac}) {
    os << ',';
    sim::csv_detail::put_double(os, v);
  }
  return os.str();
}

inline std::string checkpoint_stem(std::int64_t update_idx) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ckpt_%06lld", static_cast<long long>(update_idx));
  return buf;
}

inline Json matrix_to_json(const MatrixXd& m) {
  Json data = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline MatrixXd matrix_from_json(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>(), cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw CheckpointError("matrix payload size mismatch");
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = data[static_cast<std::size_t>(i * cols + j2)];
  return m;
}

class Trainer {
 public:
  /// Starts a new run in `run_dir` (created if missing; must not already hold a manifest).
  Trainer(RunConfig config, fs::path run_dir) : config_(std::move(config)), dir_(std::move(run_dir)) {
    config_.scenario.validate();
    config_.ppo.validate();
    if (fs::exists(dir_ / "manifest.json"))
      throw ConfigError("", "run directory " + dir_.string() + " already has a manifest; use resume");
    fs::create_directories(dir_ / "checkpoints");
    net_ = net::make_network(config_.network);
    params_ = std::visit([&](const auto& n) { return net::init_params(n, config_.train.seed); }, net_);
    adam_ = Adam(params_, config_.ppo.adam_beta1, config_.ppo.adam_beta2, config_.ppo.adam_eps);
    venv_ = make_vec_env(config_.scenario, config_.ppo.num_envs, config_.network.rnn_size, config_.train.seed);
    shuffle_rng_.seed(config_.train.seed ^ 0x9e3779b97f4a7c15ULL);

    manifest_ = {{"run_id", "run-" + std::to_string(config_.train.seed)},
                 {"config", to_json(config_)},
                 {"rng", {{"train_seed", config_.train.seed}, {"env_stream_derivation", "seed_seq(seed)"}}},
                 {"checkpoints", Json::array()},
                 {"artifacts", {{"metrics", "metrics.csv"}, {"checkpoints", "checkpoints"}}}};
    {
      std::ofstream m(dir_ / "metrics.csv", std::ios::trunc);
      m << kMetricsHeader << '\n';
    }
    save_checkpoint();
  }

  /// Resumes from the checkpoint at `update_idx`, or the latest one when negative.
  /// Metrics rows after that update are dropped so the log continues without duplicates.
  static Trainer resume(const fs::path& run_dir, std::int64_t update_idx = -1) {
    const fs::path manifest_path = run_dir / "manifest.json";
    if (!fs::exists(manifest_path)) throw ConfigError("", "no manifest in " + run_dir.string());
    Trainer t;
    t.dir_ = run_dir;
    t.manifest_ = read_json_file(manifest_path);
    t.config_ = run_config_from_json(t.manifest_.at("config"));
    const Json& ckpts = t.manifest_.at("checkpoints");
    if (ckpts.empty()) throw CheckpointError("manifest lists no checkpoints");
    Json entry = ckpts.back();
    if (update_idx >= 0) {
      entry = Json();
      for (const Json& c : ckpts)
        if (c.at("update_idx").get<std::int64_t>() == update_idx) entry = c;
      if (entry.is_null()) throw CheckpointError("no checkpoint for update " + std::to_string(update_idx));
    }
    t.load_state(entry.at("file").get<std::string>());
    t.truncate_metrics();
    Json kept = Json::array();
    for (const Json& c : ckpts)
      if (c.at("update_idx").get<std::int64_t>() <= t.update_idx_) kept.push_back(c);
    t.manifest_["checkpoints"] = std::move(kept);
    write_json_file(manifest_path, t.manifest_);
    return t;
  }

  bool finished() const { return update_idx_ >= config_.ppo.num_updates(); }

  /// One collect + update cycle; appends a metrics row and checkpoints on schedule.
  MetricsRow step() {
    std::vector<EpisodeSummary> done;
    const RolloutBuffer buf = std::visit(
        [&](const auto& n) { return collect_rollouts(n, params_, venv_, config_.ppo.segment_length, &done); }, net_);
    env_steps_ += buf.frames();
    for (const EpisodeSummary& e : done) {
      window_.push_back(e);
      while (static_cast<int>(window_.size()) > config_.train.metrics_window) window_.pop_front();
    }
    const Advantages adv = compute_advantages(buf, config_.scenario.gamma, config_.ppo.gae_lambda);
    const UpdateStats stats = std::visit(
        [&](const auto& n) { return ppo_update(n, params_, adam_, buf, adv, config_.ppo, shuffle_rng_, config_.ppo.lr_at(update_idx_)); }, net_);
    ++update_idx_;

    MetricsRow row{update_idx_, env_steps_, window_mean_reward(), window_success_rate(), stats};
    {
      std::ofstream m(dir_ / "metrics.csv", std::ios::app);
      m << format_metrics_row(row) << '\n';
    }
    if (update_idx_ % config_.train.checkpoint_every == 0 || finished()) save_checkpoint();
    return row;
  }

  /// Trains to total_steps; `on_row` sees every metrics row.
  void run(const std::function<void(const MetricsRow&)>& on_row = {}) {
    while (!finished()) {
      const MetricsRow row = step();
      if (on_row) on_row(row);
    }
  }

  double window_mean_reward() const {
    if (window_.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (const auto& e : window_) s += e.total_reward;
    return s / static_cast<double>(window_.size());
  }
  double window_success_rate() const {
    if (window_.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (const auto& e : window_) s += e.success ? 1.0 : 0.0;
    return s / static_cast<double>(window_.size());
  }

  void save_checkpoint() {
    const std::string stem = checkpoint_stem(update_idx_);
    const fs::path cdir = dir_ / "checkpoints";
    Json meta = {{"update_idx", update_idx_}, {"env_steps", env_steps_}, {"run_id", manifest_.at("run_id")},
                 {"manifest", "../manifest.json"}};
    net::save_checkpoint(cdir / (stem + ".bin"), {config_.network, params_, meta});
    net::ParamSet moments;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      moments[moments.add("m." + params_.name(i), 0, 0)] = adam_.first_moment()[i];
      moments[moments.add("v." + params_.name(i), 0, 0)] = adam_.second_moment()[i];
    }
    net::save_checkpoint(cdir / (stem + ".opt.bin"), {config_.network, moments, {{"adam_step", adam_.step_count()}}});
    write_json_file(cdir / (stem + ".state.json"), state_to_json());

    Json& list = manifest_["checkpoints"];
    Json entry = {{"update_idx", update_idx_}, {"env_steps", env_steps_}, {"file", "checkpoints/" + stem}};
    if (list.empty() || list.back().at("update_idx").get<std::int64_t>() != update_idx_) list.push_back(entry);
    write_json_file(dir_ / "manifest.json", manifest_);
  }

  const RunConfig& config() const { return config_; }
  const net::ParamSet& params() const { return params_; }
  const net::AnyNetwork& network() const { return net_; }
  std::int64_t update_idx() const { return update_idx_; }
  std::int64_t env_steps() const { return env_steps_; }
  const fs::path& run_dir() const { return dir_; }

 private:
  Trainer() = default;

  Json state_to_json() const {
    Json envs = Json::array();
    for (int b = 0; b < venv_.size(); ++b) {
      const sim::Environment& e = venv_.envs[b];
      envs.push_back({{"world", sim::world_to_json(e.world())},
                      {"stream", sim::rng_to_string(e.stream())},
                      {"scenario_seed", e.scenario_seed()},
                      {"action_rng", sim::rng_to_string(venv_.action_rngs[b])},
                      {"fresh", static_cast<bool>(venv_.fresh[b])},
                      {"running_reward", venv_.running_reward[b]},
                      {"running_steps", venv_.running_steps[b]}});
    }
    Json window = Json::array();
    for (const auto& e : window_)
      window.push_back({e.total_reward, e.success ? 1 : 0, static_cast<int>(e.terminal), e.steps});
    return {{"update_idx", update_idx_},
            {"env_steps", env_steps_},
            {"shuffle_rng", sim::rng_to_string(shuffle_rng_)},
            {"envs", std::move(envs)},
            {"hidden",
             {{"spatial", matrix_to_json(venv_.hidden.spatial)},
              {"temporal", matrix_to_json(venv_.hidden.temporal)},
              {"node", matrix_to_json(venv_.hidden.node)}}},
            {"window", std::move(window)}};
  }

  void load_state(const std::string& file_stem) {
    const fs::path base = dir_ / file_stem;
    net::Checkpoint ck = net::load_checkpoint(base.string() + ".bin");
    if (!(ck.dims == config_.network))
      throw CheckpointError("checkpoint dims (" + net::dims_to_json(ck.dims).dump() +
                            ") do not match the run config (" + net::dims_to_json(config_.network).dump() + ")");
    net_ = net::make_network(config_.network);
    const net::ParamSet& layout = std::visit([](const auto& n) -> const net::ParamSet& { return n.zero_params(); }, net_);
    net::require_layout(layout, ck.tensors, base.string() + ".bin");
    params_ = std::move(ck.tensors);

    net::Checkpoint opt = net::load_checkpoint(base.string() + ".opt.bin");
    net::ParamSet m = layout, v = layout;
    for (std::size_t i = 0; i < layout.size(); ++i) {
      m[i] = opt.tensors.at("m." + layout.name(i));
      v[i] = opt.tensors.at("v." + layout.name(i));
    }
    adam_ = Adam(params_, config_.ppo.adam_beta1, config_.ppo.adam_beta2, config_.ppo.adam_eps);
    adam_.restore(std::move(m), std::move(v), opt.meta.at("adam_step").get<std::int64_t>());

    const Json s = read_json_file(base.string() + ".state.json");
    try {
      update_idx_ = s.at("update_idx").get<std::int64_t>();
      env_steps_ = s.at("env_steps").get<std::int64_t>();
      shuffle_rng_ = sim::rng_from_string<std::mt19937_64>(s.at("shuffle_rng").get<std::string>());
      const Json& envs = s.at("envs");
      if (static_cast<int>(envs.size()) != config_.ppo.num_envs) throw CheckpointError("environment count mismatch");
      venv_ = VecEnv{};
      for (const Json& ej : envs) {
        sim::Environment env(config_.scenario, 0);
        env.restore(sim::world_from_json(ej.at("world"), config_.scenario),
                    sim::rng_from_string<std::mt19937_64>(ej.at("stream").get<std::string>()),
                    ej.at("scenario_seed").get<std::uint64_t>());
        venv_.envs.push_back(std::move(env));
        venv_.action_rngs.push_back(sim::rng_from_string<std::mt19937_64>(ej.at("action_rng").get<std::string>()));
        venv_.fresh.push_back(ej.at("fresh").get<bool>());
        venv_.running_reward.push_back(ej.at("running_reward").get<double>());
        venv_.running_steps.push_back(ej.at("running_steps").get<int>());
      }
      const Json& h = s.at("hidden");
      venv_.hidden = {matrix_from_json(h.at("spatial")), matrix_from_json(h.at("temporal")),
                      matrix_from_json(h.at("node"))};
      window_.clear();
      for (const Json& w : s.at("window"))
        window_.push_back({w.at(0).get<double>(), w.at(1).get<int>() != 0, static_cast<sim::Terminal>(w.at(2).get<int>()),
                           w.at(3).get<int>()});
    } catch (const Json::exception& e) {
      throw CheckpointError(base.string() + ".state.json: " + e.what());
    }
  }

  void truncate_metrics() {
    const fs::path path = dir_ / "metrics.csv";
    std::vector<std::string> keep;
    {
      std::ifstream in(path);
      std::string line;
      bool header = true;
      while (std::getline(in, line)) {
        if (header) {
          header = false;
          continue;
        }
        if (line.empty()) continue;
        if (std::stoll(line.substr(0, line.find(','))) <= update_idx_) keep.push_back(line);
      }
    }
    std::ofstream out(path, std::ios::trunc);
    out << kMetricsHeader << '\n';
    for (const auto& l : keep) out << l << '\n';
  }

  RunConfig config_;
  fs::path dir_;
  Json manifest_;
  net::AnyNetwork net_{net::DsRnn(net::NetworkDims{})};
  net::ParamSet params_;
  Adam adam_;
  VecEnv venv_;
  std::mt19937_64 shuffle_rng_;
  std::deque<EpisodeSummary> window_;
  std::int64_t update_idx_ = 0;
  std::int64_t env_steps_ = 0;
};

}  // namespace crowdnav::ppo
