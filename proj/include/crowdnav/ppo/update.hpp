#pragma once

#include "crowdnav/errors.hpp"
#include "crowdnav/net/policy.hpp"
#include "crowdnav/ppo/adam.hpp"
#include "crowdnav/ppo/config.hpp"
#include "crowdnav/ppo/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace crowdnav::ppo {

struct Advantages {
  MatrixXd advantages;  // L x B
  MatrixXd returns;     // L x B
};

/// Generalised advantage estimation over L x B arrays. A done flag at (t, b)
/// cuts both the bootstrap and the accumulated trace. Returns raw advantages
/// and return targets (advantage + value).
inline Advantages compute_advantages(const MatrixXd& rewards, const MatrixXd& values, const MatrixXd& dones,
                                     const VectorXd& bootstrap, double gamma, double lambda) {
  const Eigen::Index L = rewards.rows(), B = rewards.cols();
  if (values.rows() != L || values.cols() != B || dones.rows() != L || dones.cols() != B || bootstrap.size() != B)
    throw ContractViolation("compute_advantages: array shapes disagree");
  Advantages out{MatrixXd::Zero(L, B), MatrixXd::Zero(L, B)};
  for (Eigen::Index b = 0; b < B; ++b) {
    double gae = 0.0;
    for (Eigen::Index t = L - 1; t >= 0; --t) {
      const double nonterminal = 1.0 - dones(t, b);
      const double next_value = t == L - 1 ? bootstrap(b) : values(t + 1, b);
      const double delta = rewards(t, b) + gamma * next_value * nonterminal - values(t, b);
      gae = delta + gamma * lambda * nonterminal * gae;
      out.advantages(t, b) = gae;
    }
  }
  out.returns = out.advantages + values;
  return out;
}

inline Advantages compute_advantages(const RolloutBuffer& buf, double gamma, double lambda) {
  return compute_advantages(buf.rewards, buf.values, buf.dones, buf.bootstrap, gamma, lambda);
}

/// Zero mean, unit (population) standard deviation over all entries.
inline MatrixXd normalize_advantages(const MatrixXd& adv) {
  if (adv.size() == 0) return adv;
  const double mean = adv.mean();
  const double var = (adv.array() - mean).square().mean();
  return (adv.array() - mean) / (std::sqrt(var) + 1e-8);
}

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_frac = 0.0;
  double grad_norm = 0.0;
};

/// Rows of a StepBatch / hidden state for a subset of environments.
inline net::StepBatch select_envs(const net::StepBatch& s, const std::vector<int>& envs) {
  const int n = s.n_humans;
  net::StepBatch out;
  out.n_humans = n;
  const auto k = static_cast<Eigen::Index>(envs.size());
  out.robot_node.resize(k, s.robot_node.cols());
  out.temporal.resize(k, s.temporal.cols());
  out.spatial.resize(k * n, s.spatial.cols());
  out.keep.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const int b = envs[static_cast<std::size_t>(i)];
    out.robot_node.row(i) = s.robot_node.row(b);
    out.temporal.row(i) = s.temporal.row(b);
    if (n > 0) out.spatial.middleRows(i * n, n) = s.spatial.middleRows(b * n, n);
    out.keep(i) = s.keep(b);
  }
  return out;
}

inline net::BatchHidden select_envs(const net::BatchHidden& h, const std::vector<int>& envs, int n) {
  const auto k = static_cast<Eigen::Index>(envs.size());
  net::BatchHidden out{MatrixXd(k * n, h.spatial.cols()), MatrixXd(k, h.temporal.cols()), MatrixXd(k, h.node.cols())};
  for (Eigen::Index i = 0; i < k; ++i) {
    const int b = envs[static_cast<std::size_t>(i)];
    if (n > 0) out.spatial.middleRows(i * n, n) = h.spatial.middleRows(b * n, n);
    out.temporal.row(i) = h.temporal.row(b);
    out.node.row(i) = h.node.row(b);
  }
  return out;
}

/// The replay input for a subset of environments of a rollout buffer.
inline net::SequenceBatch replay_batch(const RolloutBuffer& buf, const std::vector<int>& envs) {
  net::SequenceBatch seq;
  seq.initial = select_envs(buf.initial, envs, buf.n_humans);
  for (int t = 0; t < buf.segment_length; ++t) {
    seq.steps.push_back(select_envs(buf.steps[t], envs));
    VectorXd d(static_cast<Eigen::Index>(envs.size()));
    for (std::size_t i = 0; i < envs.size(); ++i) d(static_cast<Eigen::Index>(i)) = buf.dones(t, envs[i]);
    seq.done.push_back(std::move(d));
  }
  return seq;
}

struct MinibatchTargets {
  std::vector<int> envs;
  const RolloutBuffer* buf = nullptr;
  const MatrixXd* advantages = nullptr;  // normalised, L x B over all envs
  const MatrixXd* returns = nullptr;
};

/// Clipped-surrogate PPO loss over one minibatch. Fills output gradients and
/// accumulates statistics. Throws ContractViolation if a frame's surrogate
/// exceeds its clipped bound.
struct PpoLoss {
  const MinibatchTargets& mb;
  const PpoConfig& cfg;
  UpdateStats* stats = nullptr;

  double operator()(std::span<const net::StepOutput> outputs, const Eigen::Vector2d& log_std,
                    std::vector<net::OutputGrad>& og) const {
    const RolloutBuffer& buf = *mb.buf;
    const double frames = static_cast<double>(outputs.size() * mb.envs.size());
    const Eigen::Vector2d inv_var = (-2.0 * log_std).array().exp();
    const double entropy = net::gaussian_entropy(log_std);
    double policy_loss = 0.0, value_loss = 0.0, clipped = 0.0;

    for (std::size_t t = 0; t < outputs.size(); ++t) {
      const net::StepOutput& out = outputs[t];
      for (std::size_t i = 0; i < mb.envs.size(); ++i) {
        const int b = mb.envs[i];
        const auto r = static_cast<Eigen::Index>(i);
        const Eigen::Vector2d a = buf.actions[t].row(b).transpose();
        const Eigen::Vector2d mean = out.action_mean.row(r).transpose();
        const double logp = net::gaussian_log_prob(a, mean, log_std);
        const double ratio = std::exp(logp - buf.log_probs(static_cast<Eigen::Index>(t), b));
        const double adv = (*mb.advantages)(static_cast<Eigen::Index>(t), b);
        const double clipped_ratio = std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
        const double surr1 = ratio * adv, surr2 = clipped_ratio * adv;
        const double surr = std::min(surr1, surr2);
        if (surr > std::max(surr1, surr2)) throw ContractViolation("surrogate exceeds its clipped bound");
        policy_loss -= surr;
        if (std::abs(ratio - 1.0) > cfg.clip_eps) clipped += 1.0;

        if (surr1 <= surr2) {
          const double dlogp = -adv * ratio / frames;
          const Eigen::Vector2d diff = a - mean;
          og[t].action_mean.row(r) += (dlogp * diff.cwiseProduct(inv_var)).transpose();
          og[t].log_std.row(r) += (dlogp * (diff.cwiseAbs2().cwiseProduct(inv_var).array() - 1.0)).matrix().transpose();
        }
        og[t].log_std.row(r).array() -= cfg.entropy_coef / frames;

        const double err = out.value(r) - (*mb.returns)(static_cast<Eigen::Index>(t), b);
        value_loss += err * err;
        og[t].value(r) += cfg.value_coef * 2.0 * err / frames;
      }
    }
    policy_loss /= frames;
    value_loss /= frames;
    if (stats) {
      stats->policy_loss += policy_loss;
      stats->value_loss += value_loss;
      stats->entropy += entropy;
      stats->clip_frac += clipped / frames;
    }
    return policy_loss + cfg.value_coef * value_loss - cfg.entropy_coef * entropy;
  }
};

/// Runs cfg.epochs passes of cfg.minibatches environment-partitioned
/// minibatches, replaying each from its stored hidden snapshot.
/// Statistics are averages over all minibatches.
template <net::RecurrentNetwork Net>
UpdateStats ppo_update(const Net& net, net::ParamSet& params, Adam& adam, const RolloutBuffer& buf,
                       const Advantages& adv, const PpoConfig& cfg, std::mt19937_64& shuffle_rng, double lr) {
  if (buf.num_envs % cfg.minibatches != 0) throw ContractViolation("minibatches must divide the environment count");
  const MatrixXd norm_adv = normalize_advantages(adv.advantages);
  const int per_mb = buf.num_envs / cfg.minibatches;
  std::vector<int> order(static_cast<std::size_t>(buf.num_envs));
  UpdateStats stats;
  int count = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (int m = 0; m < cfg.minibatches; ++m) {
      MinibatchTargets mb;
      mb.envs.assign(order.begin() + m * per_mb, order.begin() + (m + 1) * per_mb);
      std::sort(mb.envs.begin(), mb.envs.end());
      mb.buf = &buf;
      mb.advantages = &norm_adv;
      mb.returns = &adv.returns;

      UpdateStats local;
      net::GradientResult g =
          net::compute_gradients(net, params, replay_batch(buf, mb.envs), PpoLoss{mb, cfg, &local});
      if (!std::isfinite(g.loss) || !g.grads.all_finite())
        throw NonFiniteError("ppo loss (epoch " + std::to_string(epoch) + ", minibatch " + std::to_string(m) + ")");
      local.grad_norm = clip_grad_norm(g.grads, cfg.max_grad_norm);
      adam.step(params, g.grads, lr);

      stats.policy_loss += local.policy_loss;
      stats.value_loss += local.value_loss;
      stats.entropy += local.entropy;
      stats.clip_frac += local.clip_frac;
      stats.grad_norm += local.grad_norm;
      ++count;
    }
  }
  const double c = static_cast<double>(count);
  stats.policy_loss /= c;
  stats.value_loss /= c;
  stats.entropy /= c;
  stats.clip_frac /= c;
  stats.grad_norm /= c;
  return stats;
}

}  // namespace crowdnav::ppo
