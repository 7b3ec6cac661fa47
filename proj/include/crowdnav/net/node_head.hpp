#pragma once

// Robot node pathway shared by both networks: robot-state embedding,
// concatenation with an edge/context embedding, the node GRU, and the value
// and Gaussian-policy heads.

#include "crowdnav/net/batch.hpp"
#include "crowdnav/net/layers.hpp"

namespace crowdnav::net {

struct NodeHeadIndex {
  DenseIndex node_embed;
  GruIndex node_rnn;
  DenseIndex value_head;
  DenseIndex policy_head;
  std::size_t log_std = 0;
};

inline NodeHeadIndex add_node_head(ParamSet& p, const NetworkDims& dims) {
  NodeHeadIndex idx;
  idx.node_embed = add_dense(p, "node_embed", sim::kRobotNodeDim, dims.embed_size);
  idx.node_rnn = add_gru(p, "node_rnn", 2 * dims.embed_size, dims.rnn_size);
  idx.value_head = add_dense(p, "value_head", dims.rnn_size, 1);
  idx.policy_head = add_dense(p, "policy_head", dims.rnn_size, kActionDim);
  idx.log_std = p.add("policy.log_std", 1, kActionDim);
  return idx;
}

struct NodeHeadCache {
  MatrixXd robot_node;  // input x_w
  MatrixXd node_embed;  // n^t
  GruCache gru;
  MatrixXd hidden;      // h_w^t
};

/// Runs [edge_part, f_node(x_w)] through the node GRU and both heads.
inline MatrixXd node_head_forward(const ParamSet& p, const NodeHeadIndex& idx, const MatrixXd& edge_part,
                                  const MatrixXd& robot_node, const MatrixXd& hn_prev, StepOutput& out,
                                  NodeHeadCache* cache) {
  MatrixXd en = tanh_dense_forward(p, idx.node_embed, robot_node);
  require_finite(en, "node_embed");
  MatrixXd input(edge_part.rows(), edge_part.cols() + en.cols());
  input << edge_part, en;
  MatrixXd hn = gru_forward(p, idx.node_rnn, input, hn_prev, cache ? &cache->gru : nullptr);
  require_finite(hn, "node_rnn.hidden");

  out.value = linear_forward(p, idx.value_head, hn).col(0);
  out.action_mean = linear_forward(p, idx.policy_head, hn);
  require_finite(out.value, "value_head");
  require_finite(out.action_mean, "policy_head");

  if (cache) {
    cache->robot_node = robot_node;
    cache->node_embed = en;
    cache->hidden = hn;
  }
  return hn;
}

/// Backward through heads and node GRU. `dhn` enters as the gradient flowing
/// into h_w^t from later steps; returns d(edge_part) and sets dhn_prev.
inline MatrixXd node_head_backward(const ParamSet& p, const NodeHeadIndex& idx, ParamSet& grads,
                                   const NodeHeadCache& c, const OutputGrad& og, MatrixXd dhn, MatrixXd& dhn_prev) {
  MatrixXd dx;
  const MatrixXd dvalue = og.value;  // B x 1
  linear_backward(p, idx.value_head, grads, c.hidden, dvalue, &dx);
  dhn += dx;
  linear_backward(p, idx.policy_head, grads, c.hidden, og.action_mean, &dx);
  dhn += dx;
  grads[idx.log_std] += og.log_std.colwise().sum();

  MatrixXd dinput;
  gru_backward(p, idx.node_rnn, grads, c.gru, dhn, &dinput, dhn_prev);
  const Index E = c.node_embed.cols();
  const Index edge_cols = dinput.cols() - E;
  tanh_dense_backward(p, idx.node_embed, grads, c.robot_node, c.node_embed, dinput.rightCols(E), nullptr);
  return dinput.leftCols(edge_cols);
}

/// Row-expands per-environment keep flags to per-human rows.
inline VectorXd expand_rows(const VectorXd& per_env, int n) {
  VectorXd out(per_env.size() * n);
  for (Index b = 0; b < per_env.size(); ++b) out.segment(b * n, n).setConstant(per_env(b));
  return out;
}

}  // namespace crowdnav::net
