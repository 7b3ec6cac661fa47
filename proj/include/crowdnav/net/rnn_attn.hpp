#pragma once

// Ablation network: attention-pooled per-human features followed by a single
// recurrent cell of the same size as the DS-RNN node cell. No edge factors.
//   e_i   = tanh(f_human([x_i, x_w]))
//   s_i   = w_score . tanh(f_attn([e_i, mean_j e_j]))
//   a     = softmax(s), c = sum_i a_i e_i
//   h_w   = GRU_N(h_w, [c, tanh(f_node(x_w))]) -> value / policy heads

#include "crowdnav/net/batch.hpp"
#include "crowdnav/net/layers.hpp"
#include "crowdnav/net/node_head.hpp"

#include <vector>

namespace crowdnav::net {

class RnnAttn {
 public:
  struct Layout {
    DenseIndex human_embed, attn_hidden;
    std::size_t w_score = 0;
    NodeHeadIndex node;
  };

  struct StepCache {
    VectorXd keep;
    MatrixXd human_in, human_embed, attn_in, attn_hidden, alpha;
    NodeHeadCache node;
    int n_humans = 0;
  };

  explicit RnnAttn(NetworkDims dims) : dims_(dims) {
    dims_.kind = NetworkKind::RnnAttn;
    dims_.validate();
    const int E = dims_.embed_size;
    layout_.human_embed = add_dense(template_, "human_embed", sim::kEdgeDim + sim::kRobotNodeDim, E);
    layout_.attn_hidden = add_dense(template_, "attn_hidden", 2 * E, E);
    layout_.w_score = template_.add("attn_score.weight", 1, E);
    layout_.node = add_node_head(template_, dims_);
  }

  const NetworkDims& dims() const { return dims_; }
  const Layout& layout() const { return layout_; }
  const ParamSet& zero_params() const { return template_; }

  void check_params(const ParamSet& p) const {
    if (!p.same_layout(template_)) throw ContractViolation("parameter set does not match rnn_attn layout");
  }

  StepOutput step(const ParamSet& p, const StepBatch& in, BatchHidden& hidden, StepCache* cache = nullptr) const {
    check_params(p);
    const Index B = in.batch();
    const int n = in.n_humans;
    const int E = dims_.embed_size;
    if (in.spatial.rows() != B * n || in.keep.size() != B || hidden.node.rows() != B ||
        hidden.node.cols() != dims_.rnn_size)
      throw ContractViolation("rnn_attn step: batch/hidden shapes are inconsistent");

    const MatrixXd hn_prev = in.keep.asDiagonal() * hidden.node;

    MatrixXd human_in(B * n, sim::kEdgeDim + sim::kRobotNodeDim);
    for (Index b = 0; b < B && n > 0; ++b) {
      human_in.block(b * n, 0, n, sim::kEdgeDim) = in.spatial.middleRows(b * n, n);
      human_in.block(b * n, sim::kEdgeDim, n, sim::kRobotNodeDim) = in.robot_node.row(b).replicate(n, 1);
    }
    MatrixXd eh = tanh_dense_forward(p, layout_.human_embed, human_in);
    require_finite(eh, "human_embed");

    MatrixXd attn_in(B * n, 2 * E);
    for (Index b = 0; b < B && n > 0; ++b) {
      const Eigen::RowVectorXd mean = eh.middleRows(b * n, n).colwise().mean();
      attn_in.block(b * n, 0, n, E) = eh.middleRows(b * n, n);
      attn_in.block(b * n, E, n, E) = mean.replicate(n, 1);
    }
    MatrixXd s = tanh_dense_forward(p, layout_.attn_hidden, attn_in);
    const VectorXd score = s * p[layout_.w_score].transpose();

    MatrixXd alpha(B, n);
    MatrixXd context = MatrixXd::Zero(B, E);
    for (Index b = 0; b < B && n > 0; ++b) {
      alpha.row(b) = softmax(score.segment(b * n, n).transpose());
      context.row(b) = alpha.row(b) * eh.middleRows(b * n, n);
    }
    require_finite(alpha, "attention");

    StepOutput out;
    out.attention = alpha;
    MatrixXd hn =
        node_head_forward(p, layout_.node, context, in.robot_node, hn_prev, out, cache ? &cache->node : nullptr);

    if (cache) {
      cache->keep = in.keep;
      cache->human_in = std::move(human_in);
      cache->human_embed = std::move(eh);
      cache->attn_in = std::move(attn_in);
      cache->attn_hidden = std::move(s);
      cache->alpha = alpha;
      cache->n_humans = n;
    }
    hidden.node = std::move(hn);
    return out;
  }

  void backward_step(const ParamSet& p, const StepCache& c, const OutputGrad& og, BatchHidden& carry,
                     ParamSet& grads) const {
    const Index B = c.keep.size();
    const int n = c.n_humans;
    const int E = dims_.embed_size;

    MatrixXd dhn_prev;
    const MatrixXd dcontext = node_head_backward(p, layout_.node, grads, c.node, og, carry.node, dhn_prev);

    if (n > 0) {
      MatrixXd deh = MatrixXd::Zero(B * n, E);
      VectorXd dscore(B * n);
      for (Index b = 0; b < B; ++b) {
        const auto eh_b = c.human_embed.middleRows(b * n, n);
        const Eigen::RowVectorXd alpha_b = c.alpha.row(b);
        Eigen::RowVectorXd dalpha = (eh_b * dcontext.row(b).transpose()).transpose();
        if (og.attention.size() > 0) dalpha += og.attention.row(b);
        deh.middleRows(b * n, n) += alpha_b.transpose() * dcontext.row(b);
        dscore.segment(b * n, n) = softmax_backward(alpha_b, dalpha).transpose();
      }
      grads[layout_.w_score].noalias() += dscore.transpose() * c.attn_hidden;
      const MatrixXd ds = dscore * p[layout_.w_score];
      MatrixXd dattn_in;
      tanh_dense_backward(p, layout_.attn_hidden, grads, c.attn_in, c.attn_hidden, ds, &dattn_in);
      deh += dattn_in.leftCols(E);
      for (Index b = 0; b < B; ++b) {
        const Eigen::RowVectorXd dmean = dattn_in.block(b * n, E, n, E).colwise().sum() / static_cast<double>(n);
        deh.middleRows(b * n, n).rowwise() += dmean;
      }
      tanh_dense_backward(p, layout_.human_embed, grads, c.human_in, c.human_embed, deh, nullptr);
    }

    carry.node = c.keep.asDiagonal() * dhn_prev;
    carry.spatial.setZero();
    carry.temporal.setZero();
  }

 private:
  NetworkDims dims_;
  Layout layout_;
  ParamSet template_;
};

}  // namespace crowdnav::net
