#pragma once

#include "crowdnav/net/batch.hpp"
#include "crowdnav/net/ds_rnn.hpp"
#include "crowdnav/net/rnn_attn.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace crowdnav::net {

template <class Net>
concept RecurrentNetwork = requires(const Net& net, const ParamSet& p, const StepBatch& in, BatchHidden& h,
                                    typename Net::StepCache* cache, const typename Net::StepCache& c,
                                    const OutputGrad& og, ParamSet& grads) {
  { net.dims() } -> std::convertible_to<const NetworkDims&>;
  { net.zero_params() } -> std::convertible_to<const ParamSet&>;
  { net.step(p, in, h, cache) } -> std::same_as<StepOutput>;
  net.backward_step(p, c, og, h, grads);
};

// ---------------------------------------------------------------- Gaussian policy

inline constexpr double kLogSqrtTwoPi = 0.91893853320467274178;  // 0.5 * log(2 pi)

inline double gaussian_log_prob(const Eigen::Vector2d& action, const Eigen::Vector2d& mean,
                                const Eigen::Vector2d& log_std) {
  double lp = 0.0;
  for (int j = 0; j < kActionDim; ++j) {
    const double z = (action(j) - mean(j)) * std::exp(-log_std(j));
    lp += -0.5 * z * z - log_std(j) - kLogSqrtTwoPi;
  }
  return lp;
}

inline double gaussian_entropy(const Eigen::Vector2d& log_std) {
  double h = 0.0;
  for (int j = 0; j < kActionDim; ++j) h += 0.5 + kLogSqrtTwoPi + log_std(j);
  return h;
}

inline Eigen::Vector2d log_std_of(const ParamSet& p) { return p.at("policy.log_std").row(0).transpose(); }

// ---------------------------------------------------------------- initialisation

namespace init_detail {

inline bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Square orthogonal matrix from the QR decomposition of a Gaussian sample.
inline MatrixXd random_orthogonal(Index size, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd a(size, size);
  for (Index j = 0; j < size; ++j)
    for (Index i = 0; i < size; ++i) a(i, j) = normal(rng);
  Eigen::HouseholderQR<MatrixXd> qr(a);
  MatrixXd q = qr.householderQ();
  const MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < size; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace init_detail

/// Seeded initialisation: orthogonal blocks for recurrent weights, Glorot
/// uniform for input/dense weights, a 0.01-scaled policy head, zero biases and
/// log-std 0 (unit standard deviation).
template <RecurrentNetwork Net>
ParamSet init_params(const Net& net, std::uint64_t seed) {
  using init_detail::ends_with;
  ParamSet p = net.zero_params();
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::string& name = p.name(i);
    MatrixXd& t = p[i];
    if (ends_with(name, ".w_hh")) {
      const Index H = t.cols();
      for (Index g = 0; g < t.rows() / H; ++g) t.middleRows(g * H, H) = init_detail::random_orthogonal(H, rng);
    } else if (ends_with(name, ".weight") || ends_with(name, ".w_ih") || ends_with(name, ".w_q") ||
               ends_with(name, ".w_k")) {
      const double limit = std::sqrt(6.0 / static_cast<double>(t.rows() + t.cols()));
      std::uniform_real_distribution<double> u(-limit, limit);
      for (Index j = 0; j < t.cols(); ++j)
        for (Index r = 0; r < t.rows(); ++r) t(r, j) = u(rng);
      if (name == "policy_head.weight") t *= 0.01;
    }
  }
  return p;
}

// ---------------------------------------------------------------- single-environment forward

struct PolicyOutput {
  double value = 0.0;
  Eigen::Vector2d action_mean = Eigen::Vector2d::Zero();
  Eigen::Vector2d action_log_std = Eigen::Vector2d::Zero();
  VectorXd attention_weights;
};

/// One step for one environment. `hidden` must have one spatial row per human
/// in `obs`; pass keep = false on the first step of an episode.
template <RecurrentNetwork Net>
std::pair<PolicyOutput, HiddenState> forward(const Net& net, const ParamSet& params, const sim::Observation& obs,
                                             const HiddenState& hidden, bool keep = true) {
  if (hidden.n_humans() != obs.n_humans())
    throw ContractViolation("hidden state has " + std::to_string(hidden.n_humans()) + " spatial rows, observation has " +
                            std::to_string(obs.n_humans()) + " humans");
  const StepBatch in = make_step_batch(obs, keep);
  const HiddenState* hp = &hidden;
  BatchHidden bh = gather_hidden(std::span<const HiddenState* const>(&hp, 1));
  const StepOutput out = net.step(params, in, bh, nullptr);

  PolicyOutput po;
  po.value = out.value(0);
  po.action_mean = out.action_mean.row(0).transpose();
  po.action_log_std = log_std_of(params);
  po.attention_weights = out.attention.row(0).transpose();
  return {po, hidden_row(bh, 0, obs.n_humans())};
}

// ---------------------------------------------------------------- sequences and gradients

template <RecurrentNetwork Net>
struct SequenceTape {
  std::vector<typename Net::StepCache> steps;
  std::vector<StepOutput> outputs;
};

template <RecurrentNetwork Net>
SequenceTape<Net> forward_sequence(const Net& net, const ParamSet& params, const SequenceBatch& seq) {
  check_sequence_contract(seq);
  SequenceTape<Net> tape;
  tape.steps.resize(seq.length());
  tape.outputs.reserve(seq.length());
  BatchHidden hidden = seq.initial;
  for (std::size_t t = 0; t < seq.length(); ++t) {
    tape.outputs.push_back(net.step(params, seq.steps[t], hidden, &tape.steps[t]));
  }
  return tape;
}

/// Backpropagation through time over a recorded tape; gradients are
/// accumulated into `grads`.
template <RecurrentNetwork Net>
void backward_sequence(const Net& net, const ParamSet& params, const SequenceBatch& seq, const SequenceTape<Net>& tape,
                       std::span<const OutputGrad> output_grads, ParamSet& grads) {
  if (output_grads.size() != tape.steps.size()) throw ContractViolation("one OutputGrad per step required");
  if (tape.steps.empty()) return;
  BatchHidden carry{MatrixXd::Zero(seq.initial.spatial.rows(), seq.initial.spatial.cols()),
                    MatrixXd::Zero(seq.initial.temporal.rows(), seq.initial.temporal.cols()),
                    MatrixXd::Zero(seq.initial.node.rows(), seq.initial.node.cols())};
  for (std::size_t t = tape.steps.size(); t-- > 0;) {
    net.backward_step(params, tape.steps[t], output_grads[t], carry, grads);
  }
}

struct GradientResult {
  double loss = 0.0;
  ParamSet grads;
};

/// Gradient of a scalar loss of the network outputs over a batch of
/// sequences. `loss(outputs, log_std, output_grads)` returns the loss value and
/// fills one OutputGrad per step (pre-sized to zeros).
template <RecurrentNetwork Net, class Loss>
GradientResult compute_gradients(const Net& net, const ParamSet& params, const SequenceBatch& seq, Loss&& loss) {
  GradientResult result{0.0, params.zeros_like()};
  if (seq.length() == 0) return result;
  const SequenceTape<Net> tape = forward_sequence(net, params, seq);
  std::vector<OutputGrad> og;
  og.reserve(seq.length());
  for (const StepBatch& s : seq.steps) og.push_back(OutputGrad::zeros(s.batch(), s.n_humans));
  result.loss = loss(std::span<const StepOutput>(tape.outputs), log_std_of(params), og);
  backward_sequence(net, params, seq, tape, og, result.grads);
  return result;
}

// ---------------------------------------------------------------- runtime dispatch

using AnyNetwork = std::variant<DsRnn, RnnAttn>;

inline AnyNetwork make_network(const NetworkDims& dims) {
  if (dims.kind == NetworkKind::DsRnn) return DsRnn(dims);
  return RnnAttn(dims);
}

}  // namespace crowdnav::net
