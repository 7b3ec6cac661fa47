#pragma once

// Decentralized structural RNN. Per step:
//   spatial edges   h_s,i = GRU_S(h_s,i, tanh(f_spatial(x_i)))     one shared cell for all humans
//   temporal edge   h_t   = GRU_T(h_t,   tanh(f_temporal(v)))
//   attention       Q = H_s W_Q, K = h_t W_K, a = softmax((n / sqrt(d_k)) Q K^T), v_att = H_s^T a
//   node            e = tanh(f_edge([v_att, h_t])), m = tanh(f_node(x_w)), h_w = GRU_N(h_w, [e, m])
//   heads           V = f_value(h_w), mu = f_policy(h_w), shared learnable log-std

#include "crowdnav/net/batch.hpp"
#include "crowdnav/net/layers.hpp"
#include "crowdnav/net/node_head.hpp"

#include <cmath>
#include <vector>

namespace crowdnav::net {

class DsRnn {
 public:
  struct Layout {
    DenseIndex spatial_embed, temporal_embed, edge_embed;
    GruIndex spatial_rnn, temporal_rnn;
    std::size_t w_q = 0, w_k = 0;
    NodeHeadIndex node;
  };

  struct StepCache {
    VectorXd keep, keep_rows;
    MatrixXd spatial_in, temporal_in;
    MatrixXd spatial_embed, temporal_embed;
    GruCache spatial_gru, temporal_gru;
    MatrixXd hs, ht, q, k, alpha;
    MatrixXd edge_in, edge_embed;
    NodeHeadCache node;
    int n_humans = 0;
  };

  explicit DsRnn(NetworkDims dims) : dims_(dims) {
    dims_.kind = NetworkKind::DsRnn;
    dims_.validate();
    const int E = dims_.embed_size, H = dims_.rnn_size;
    layout_.spatial_embed = add_dense(template_, "spatial_embed", sim::kEdgeDim, E);
    layout_.spatial_rnn = add_gru(template_, "spatial_rnn", E, H);
    layout_.temporal_embed = add_dense(template_, "temporal_embed", sim::kEdgeDim, E);
    layout_.temporal_rnn = add_gru(template_, "temporal_rnn", E, H);
    layout_.w_q = template_.add("attn.w_q", H, dims_.attention_size);
    layout_.w_k = template_.add("attn.w_k", H, dims_.attention_size);
    layout_.edge_embed = add_dense(template_, "edge_embed", 2 * H, E);
    layout_.node = add_node_head(template_, dims_);
  }

  const NetworkDims& dims() const { return dims_; }
  const Layout& layout() const { return layout_; }

  /// All-zero parameters with this network's names and shapes.
  const ParamSet& zero_params() const { return template_; }

  void check_params(const ParamSet& p) const {
    if (!p.same_layout(template_)) throw ContractViolation("parameter set does not match ds_rnn layout");
  }

  /// Advances `hidden` by one step for every environment in the batch.
  StepOutput step(const ParamSet& p, const StepBatch& in, BatchHidden& hidden, StepCache* cache = nullptr) const {
    check_params(p);
    const Index B = in.batch();
    const int n = in.n_humans;
    const int H = dims_.rnn_size;
    check_shapes(in, hidden);

    const VectorXd keep_rows = expand_rows(in.keep, n);
    const MatrixXd hs_prev = keep_rows.asDiagonal() * hidden.spatial;
    const MatrixXd ht_prev = in.keep.asDiagonal() * hidden.temporal;
    const MatrixXd hn_prev = in.keep.asDiagonal() * hidden.node;

    MatrixXd es = tanh_dense_forward(p, layout_.spatial_embed, in.spatial);
    require_finite(es, "spatial_embed");
    MatrixXd hs = gru_forward(p, layout_.spatial_rnn, es, hs_prev, cache ? &cache->spatial_gru : nullptr);
    require_finite(hs, "spatial_rnn.hidden");

    MatrixXd et = tanh_dense_forward(p, layout_.temporal_embed, in.temporal);
    require_finite(et, "temporal_embed");
    MatrixXd ht = gru_forward(p, layout_.temporal_rnn, et, ht_prev, cache ? &cache->temporal_gru : nullptr);
    require_finite(ht, "temporal_rnn.hidden");

    MatrixXd q = hs * p[layout_.w_q];
    MatrixXd k = ht * p[layout_.w_k];
    const double scale = attention_scale(n);
    MatrixXd alpha(B, n);
    MatrixXd v_att = MatrixXd::Zero(B, H);
    for (Index b = 0; b < B && n > 0; ++b) {
      const Eigen::RowVectorXd logits = scale * (q.middleRows(b * n, n) * k.row(b).transpose()).transpose();
      alpha.row(b) = softmax(logits);
      v_att.row(b) = alpha.row(b) * hs.middleRows(b * n, n);
    }
    require_finite(alpha, "attention");

    MatrixXd edge_in(B, 2 * H);
    edge_in << v_att, ht;
    MatrixXd ee = tanh_dense_forward(p, layout_.edge_embed, edge_in);
    require_finite(ee, "edge_embed");

    StepOutput out;
    out.attention = alpha;
    MatrixXd hn = node_head_forward(p, layout_.node, ee, in.robot_node, hn_prev, out, cache ? &cache->node : nullptr);

    if (cache) {
      cache->keep = in.keep;
      cache->keep_rows = keep_rows;
      cache->spatial_in = in.spatial;
      cache->temporal_in = in.temporal;
      cache->spatial_embed = std::move(es);
      cache->temporal_embed = std::move(et);
      cache->hs = hs;
      cache->ht = ht;
      cache->q = std::move(q);
      cache->k = std::move(k);
      cache->alpha = alpha;
      cache->edge_in = std::move(edge_in);
      cache->edge_embed = std::move(ee);
      cache->n_humans = n;
    }
    hidden.spatial = std::move(hs);
    hidden.temporal = std::move(ht);
    hidden.node = std::move(hn);
    return out;
  }

  /// Backpropagates one step. On entry `carry` holds dL/d(hidden produced by
  /// this step); on exit it holds dL/d(hidden consumed by this step).
  void backward_step(const ParamSet& p, const StepCache& c, const OutputGrad& og, BatchHidden& carry,
                     ParamSet& grads) const {
    const Index B = c.keep.size();
    const int n = c.n_humans;
    const int H = dims_.rnn_size;

    MatrixXd dhn_prev;
    const MatrixXd dee = node_head_backward(p, layout_.node, grads, c.node, og, carry.node, dhn_prev);

    MatrixXd dedge_in;
    tanh_dense_backward(p, layout_.edge_embed, grads, c.edge_in, c.edge_embed, dee, &dedge_in);
    const MatrixXd dv_att = dedge_in.leftCols(H);
    MatrixXd dht = carry.temporal + dedge_in.rightCols(H);
    MatrixXd dhs = carry.spatial;

    if (n > 0) {
      const double scale = attention_scale(n);
      MatrixXd dq(B * n, dims_.attention_size);
      MatrixXd dk(B, dims_.attention_size);
      for (Index b = 0; b < B; ++b) {
        const auto hs_b = c.hs.middleRows(b * n, n);
        const Eigen::RowVectorXd alpha_b = c.alpha.row(b);
        Eigen::RowVectorXd dalpha = (hs_b * dv_att.row(b).transpose()).transpose();
        if (og.attention.size() > 0) dalpha += og.attention.row(b);
        dhs.middleRows(b * n, n) += alpha_b.transpose() * dv_att.row(b);
        const Eigen::RowVectorXd dlogit = scale * softmax_backward(alpha_b, dalpha);
        dq.middleRows(b * n, n) = dlogit.transpose() * c.k.row(b);
        dk.row(b) = dlogit * c.q.middleRows(b * n, n);
      }
      grads[layout_.w_q].noalias() += c.hs.transpose() * dq;
      dhs.noalias() += dq * p[layout_.w_q].transpose();
      grads[layout_.w_k].noalias() += c.ht.transpose() * dk;
      dht.noalias() += dk * p[layout_.w_k].transpose();
    }

    MatrixXd det, dht_prev;
    gru_backward(p, layout_.temporal_rnn, grads, c.temporal_gru, dht, &det, dht_prev);
    tanh_dense_backward(p, layout_.temporal_embed, grads, c.temporal_in, c.temporal_embed, det, nullptr);

    MatrixXd des, dhs_prev;
    gru_backward(p, layout_.spatial_rnn, grads, c.spatial_gru, dhs, &des, dhs_prev);
    tanh_dense_backward(p, layout_.spatial_embed, grads, c.spatial_in, c.spatial_embed, des, nullptr);

    carry.spatial = c.keep_rows.asDiagonal() * dhs_prev;
    carry.temporal = c.keep.asDiagonal() * dht_prev;
    carry.node = c.keep.asDiagonal() * dhn_prev;
  }

  /// The n / sqrt(d_k) logit multiplier, with n the scenario's human count.
  double attention_scale(int n) const { return n / std::sqrt(static_cast<double>(dims_.attention_size)); }

 private:
  void check_shapes(const StepBatch& in, const BatchHidden& h) const {
    const Index B = in.batch();
    const int n = in.n_humans;
    const Index H = dims_.rnn_size;
    if (in.robot_node.cols() != sim::kRobotNodeDim || in.temporal.rows() != B || in.spatial.rows() != B * n ||
        in.keep.size() != B)
      throw ContractViolation("step batch shapes are inconsistent");
    if (h.spatial.rows() != B * n || h.spatial.cols() != H || h.temporal.rows() != B || h.temporal.cols() != H ||
        h.node.rows() != B || h.node.cols() != H)
      throw ContractViolation("hidden state shape does not match observation batch (B=" + std::to_string(B) +
                              ", n=" + std::to_string(n) + ", H=" + std::to_string(H) + ")");
  }

  NetworkDims dims_;
  Layout layout_;
  ParamSet template_;
};

}  // namespace crowdnav::net
