#pragma once

#include "crowdnav/errors.hpp"
#include "crowdnav/net/policy.hpp"
#include "crowdnav/sim/environment.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace crowdnav::ppo {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// One synchronous segment from every environment. Index convention:
/// step t, environment b. Frame (t, b) was produced from steps[t] row b.
struct RolloutBuffer {
  int num_envs = 0;
  int segment_length = 0;
  int n_humans = 0;

  std::vector<net::StepBatch> steps;  // inputs, with keep = 0 on the first step of every episode
  net::BatchHidden initial;           // hidden state before steps[0]
  std::vector<MatrixXd> actions;      // per step: B x 2 sampled actions
  MatrixXd log_probs;                 // L x B
  MatrixXd values;                    // L x B
  MatrixXd rewards;                   // L x B
  MatrixXd dones;                     // L x B, 1 when the episode ended at this step
  VectorXd bootstrap;                 // B, value of the state after the last step (ignored where done)

  std::int64_t frames() const { return static_cast<std::int64_t>(num_envs) * segment_length; }

  bool operator==(const RolloutBuffer& o) const {
    if (num_envs != o.num_envs || segment_length != o.segment_length || n_humans != o.n_humans) return false;
    for (int t = 0; t < segment_length; ++t) {
      const auto& a = steps[t];
      const auto& b = o.steps[t];
      if (a.robot_node != b.robot_node || a.temporal != b.temporal || a.spatial.rows() != b.spatial.rows() ||
          a.spatial != b.spatial || a.keep != b.keep || actions[t] != o.actions[t])
        return false;
    }
    return initial.spatial.rows() == o.initial.spatial.rows() && initial.spatial == o.initial.spatial &&
           initial.temporal == o.initial.temporal && initial.node == o.initial.node && log_probs == o.log_probs &&
           values == o.values && rewards == o.rewards && dones == o.dones && bootstrap == o.bootstrap;
  }
};

struct EpisodeSummary {
  double total_reward = 0.0;
  bool success = false;
  sim::Terminal terminal = sim::Terminal::None;
  int steps = 0;
};

/// The environments and per-environment recurrent/sampling state carried across segments.
struct VecEnv {
  std::vector<sim::Environment> envs;
  std::vector<std::mt19937_64> action_rngs;
  net::BatchHidden hidden;
  std::vector<bool> fresh;  // next step is the first of an episode
  std::vector<double> running_reward;
  std::vector<int> running_steps;

  int size() const { return static_cast<int>(envs.size()); }
};

/// Builds `count` environments with independent streams derived from `seed`
/// and resets each one.
inline VecEnv make_vec_env(const sim::ScenarioConfig& config, int count, int rnn_size, std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5eedu};
  std::vector<std::uint64_t> words(2 * static_cast<std::size_t>(count));
  std::vector<std::uint32_t> raw(2 * words.size());
  seq.generate(raw.begin(), raw.end());
  for (std::size_t i = 0; i < words.size(); ++i) words[i] = (std::uint64_t{raw[2 * i]} << 32) | raw[2 * i + 1];

  VecEnv v;
  for (int b = 0; b < count; ++b) {
    v.envs.emplace_back(config, words[2 * static_cast<std::size_t>(b)]);
    v.action_rngs.emplace_back(words[2 * static_cast<std::size_t>(b) + 1]);
    v.envs.back().reset();
  }
  v.hidden = net::BatchHidden::zeros(count, config.n_humans, rnn_size);
  v.fresh.assign(count, true);
  v.running_reward.assign(count, 0.0);
  v.running_steps.assign(count, 0);
  return v;
}

inline net::StepBatch current_batch(const VecEnv& v) {
  std::vector<const sim::Observation*> obs;
  obs.reserve(v.envs.size());
  for (const auto& e : v.envs) obs.push_back(&e.observation());
  const auto keep = std::make_unique<bool[]>(v.envs.size());
  for (std::size_t b = 0; b < v.envs.size(); ++b) keep[b] = !v.fresh[b];
  return net::make_step_batch(obs, std::span<const bool>(keep.get(), v.envs.size()));
}

/// Collects one segment. With `deterministic` set, actions are the policy mean
/// (log-probs are still evaluated at that action). Finished episodes are
/// appended to `finished`.
template <net::RecurrentNetwork Net>
RolloutBuffer collect_rollouts(const Net& net, const net::ParamSet& params, VecEnv& venv, int segment_length,
                               std::vector<EpisodeSummary>* finished = nullptr, bool deterministic = false) {
  const int B = venv.size();
  RolloutBuffer buf;
  buf.num_envs = B;
  buf.segment_length = segment_length;
  buf.n_humans = B > 0 ? venv.envs.front().observation().n_humans() : 0;
  buf.initial = venv.hidden;
  buf.steps.reserve(segment_length);
  buf.actions.reserve(segment_length);
  buf.log_probs.resize(segment_length, B);
  buf.values.resize(segment_length, B);
  buf.rewards.resize(segment_length, B);
  buf.dones.resize(segment_length, B);

  const Eigen::Vector2d log_std = net::log_std_of(params);
  const Eigen::Vector2d std_dev = log_std.array().exp();
  std::normal_distribution<double> normal(0.0, 1.0);

  for (int t = 0; t < segment_length; ++t) {
    buf.steps.push_back(current_batch(venv));
    const net::StepOutput out = net.step(params, buf.steps.back(), venv.hidden, nullptr);
    MatrixXd actions(B, net::kActionDim);
    for (int b = 0; b < B; ++b) {
      const Eigen::Vector2d mean = out.action_mean.row(b).transpose();
      Eigen::Vector2d a = mean;
      if (!deterministic) {
        for (int j = 0; j < net::kActionDim; ++j) a(j) += std_dev(j) * normal(venv.action_rngs[b]);
      }
      actions.row(b) = a.transpose();
      buf.log_probs(t, b) = net::gaussian_log_prob(a, mean, log_std);
      buf.values(t, b) = out.value(b);

      sim::Environment& env = venv.envs[b];
      sim::StepOutcome outcome;
      try {
        outcome = env.step(a);
      } catch (const std::exception& e) {
        throw std::runtime_error("environment " + std::to_string(b) + ": " + e.what());
      }
      buf.rewards(t, b) = outcome.reward;
      venv.running_reward[b] += outcome.reward;
      ++venv.running_steps[b];
      venv.fresh[b] = false;
      const bool done = outcome.terminal != sim::Terminal::None;
      buf.dones(t, b) = done ? 1.0 : 0.0;
      if (done) {
        if (finished) {
          finished->push_back({venv.running_reward[b], outcome.terminal == sim::Terminal::ReachGoal, outcome.terminal,
                               venv.running_steps[b]});
        }
        venv.running_reward[b] = 0.0;
        venv.running_steps[b] = 0;
        env.reset();
        venv.fresh[b] = true;
      }
    }
    buf.actions.push_back(std::move(actions));
  }

  net::BatchHidden scratch = venv.hidden;
  buf.bootstrap = net.step(params, current_batch(venv), scratch, nullptr).value;
  return buf;
}

}  // namespace crowdnav::ppo
