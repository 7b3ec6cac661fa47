#pragma once

#include "crowdnav/errors.hpp"
#include "crowdnav/sim/observation.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace crowdnav::net {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr int kActionDim = 2;

enum class NetworkKind { DsRnn, RnnAttn };

inline const char* to_string(NetworkKind k) { return k == NetworkKind::DsRnn ? "ds_rnn" : "rnn_attn"; }
inline bool parse_network_kind(const std::string& s, NetworkKind& out) {
  if (s == "ds_rnn") out = NetworkKind::DsRnn;
  else if (s == "rnn_attn") out = NetworkKind::RnnAttn;
  else return false;
  return true;
}

struct NetworkDims {
  NetworkKind kind = NetworkKind::DsRnn;
  int rnn_size = 128;
  int attention_size = 64;
  int embed_size = 64;

  bool operator==(const NetworkDims&) const = default;

  void validate() const {
    if (rnn_size < 1) throw ConfigError("rnn_size", "must be >= 1");
    if (attention_size < 1) throw ConfigError("attention_size", "must be >= 1");
    if (embed_size < 1) throw ConfigError("embed_size", "must be >= 1");
  }
};

/// One timestep for B environments that all have the same human count n.
struct StepBatch {
  MatrixXd robot_node;  // B x 9
  MatrixXd temporal;    // B x 2
  MatrixXd spatial;     // (B*n) x 2, environment-major
  VectorXd keep;        // B; 0 clears the hidden state before this step
  int n_humans = 0;

  Index batch() const { return robot_node.rows(); }
};

/// Stacks observations; keep[b] = false marks the first step of an episode.
inline StepBatch make_step_batch(std::span<const sim::Observation* const> obs, std::span<const bool> keep) {
  if (obs.size() != keep.size()) throw ContractViolation("observation/keep count mismatch");
  StepBatch s;
  const Index B = static_cast<Index>(obs.size());
  const int n = obs.empty() ? 0 : obs.front()->n_humans();
  s.n_humans = n;
  s.robot_node.resize(B, sim::kRobotNodeDim);
  s.temporal.resize(B, sim::kEdgeDim);
  s.spatial.resize(B * n, sim::kEdgeDim);
  s.keep.resize(B);
  for (Index b = 0; b < B; ++b) {
    const sim::Observation& o = *obs[static_cast<std::size_t>(b)];
    if (o.n_humans() != n) throw ContractViolation("observations in one batch differ in human count");
    s.robot_node.row(b) = o.robot_node.transpose();
    s.temporal.row(b) = o.temporal_edge.transpose();
    if (n > 0) s.spatial.middleRows(b * n, n) = o.spatial_edges;
    s.keep(b) = keep[static_cast<std::size_t>(b)] ? 1.0 : 0.0;
  }
  return s;
}

inline StepBatch make_step_batch(const sim::Observation& obs, bool keep = true) {
  const sim::Observation* p = &obs;
  const bool k[1] = {keep};
  return make_step_batch(std::span<const sim::Observation* const>(&p, 1), std::span<const bool>(k, 1));
}

/// Recurrent state of one environment.
struct HiddenState {
  MatrixXd spatial;               // n x H, one row per human
  Eigen::RowVectorXd temporal;    // H
  Eigen::RowVectorXd node;        // H

  static HiddenState zeros(int n_humans, int rnn_size) {
    return {MatrixXd::Zero(n_humans, rnn_size), Eigen::RowVectorXd::Zero(rnn_size),
            Eigen::RowVectorXd::Zero(rnn_size)};
  }
  int n_humans() const { return static_cast<int>(spatial.rows()); }
  bool operator==(const HiddenState& o) const {
    return spatial.rows() == o.spatial.rows() && spatial.cols() == o.spatial.cols() && spatial == o.spatial &&
           temporal == o.temporal && node == o.node;
  }
};

/// Recurrent state of B environments, laid out like StepBatch.
struct BatchHidden {
  MatrixXd spatial;   // (B*n) x H
  MatrixXd temporal;  // B x H
  MatrixXd node;      // B x H

  static BatchHidden zeros(Index batch, int n_humans, int rnn_size) {
    return {MatrixXd::Zero(batch * n_humans, rnn_size), MatrixXd::Zero(batch, rnn_size),
            MatrixXd::Zero(batch, rnn_size)};
  }
};

inline BatchHidden gather_hidden(std::span<const HiddenState* const> hs) {
  const Index B = static_cast<Index>(hs.size());
  if (B == 0) return {};
  const int n = hs.front()->n_humans();
  const Index H = hs.front()->node.size();
  BatchHidden out = BatchHidden::zeros(B, n, static_cast<int>(H));
  for (Index b = 0; b < B; ++b) {
    const HiddenState& h = *hs[static_cast<std::size_t>(b)];
    if (h.n_humans() != n || h.node.size() != H) throw ContractViolation("hidden states differ in shape");
    if (n > 0) out.spatial.middleRows(b * n, n) = h.spatial;
    out.temporal.row(b) = h.temporal;
    out.node.row(b) = h.node;
  }
  return out;
}

inline HiddenState hidden_row(const BatchHidden& bh, Index b, int n_humans) {
  HiddenState h;
  h.spatial = bh.spatial.middleRows(b * n_humans, n_humans);
  h.temporal = bh.temporal.row(b);
  h.node = bh.node.row(b);
  return h;
}

/// Network outputs for B environments at one timestep.
struct StepOutput {
  VectorXd value;        // B
  MatrixXd action_mean;  // B x 2
  MatrixXd attention;    // B x n
};

/// dLoss/d(outputs) at one timestep. Empty `attention` means zero.
struct OutputGrad {
  VectorXd value;        // B
  MatrixXd action_mean;  // B x 2
  MatrixXd log_std;      // B x 2, gradient w.r.t. the shared log-std for each sample
  MatrixXd attention;    // B x n or empty

  static OutputGrad zeros(Index batch, int n_humans) {
    return {VectorXd::Zero(batch), MatrixXd::Zero(batch, kActionDim), MatrixXd::Zero(batch, kActionDim),
            MatrixXd::Zero(batch, n_humans)};
  }
};

/// B sequences of equal length, replayed from `initial` hidden states.
/// done[t](b) = 1 when the episode of env b ended at step t, in which case
/// steps[t+1].keep(b) must be 0.
struct SequenceBatch {
  std::vector<StepBatch> steps;
  std::vector<VectorXd> done;
  BatchHidden initial;

  std::size_t length() const { return steps.size(); }
};

inline void check_sequence_contract(const SequenceBatch& seq) {
  if (!seq.done.empty() && seq.done.size() != seq.steps.size())
    throw ContractViolation("done flags must cover every step");
  for (std::size_t t = 0; t + 1 < seq.steps.size() && !seq.done.empty(); ++t) {
    for (Index b = 0; b < seq.done[t].size(); ++b) {
      if (seq.done[t](b) != 0.0 && seq.steps[t + 1].keep(b) != 0.0)
        throw ContractViolation("sequence crosses an episode boundary without a hidden-state reset (env " +
                                std::to_string(b) + ", step " + std::to_string(t + 1) + ")");
    }
  }
}

}  // namespace crowdnav::net
