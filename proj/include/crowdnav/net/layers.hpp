#pragma once

// Batched building blocks with hand-written backward passes. Rows are samples.

#include "crowdnav/errors.hpp"
#include "crowdnav/net/param_set.hpp"

#include <Eigen/Dense>

#include <string>

namespace crowdnav::net {

using Eigen::ArrayXXd;
using Eigen::Index;
using Eigen::MatrixXd;

inline void require_finite(const MatrixXd& m, const char* tensor) {
  if (!m.allFinite()) throw NonFiniteError(tensor);
}

// ---------------------------------------------------------------- dense

struct DenseIndex {
  std::size_t weight = 0;  // out x in
  std::size_t bias = 0;    // 1 x out
};

inline DenseIndex add_dense(ParamSet& p, const std::string& name, Index in, Index out) {
  DenseIndex d;
  d.weight = p.add(name + ".weight", out, in);
  d.bias = p.add(name + ".bias", 1, out);
  return d;
}

inline MatrixXd linear_forward(const ParamSet& p, const DenseIndex& d, const MatrixXd& x) {
  MatrixXd y = x * p[d.weight].transpose();
  y.rowwise() += p[d.bias].row(0);
  return y;
}

/// Accumulates parameter gradients; writes dL/dx into `dx` when non-null.
inline void linear_backward(const ParamSet& p, const DenseIndex& d, ParamSet& grads, const MatrixXd& x,
                            const MatrixXd& dy, MatrixXd* dx) {
  grads[d.weight].noalias() += dy.transpose() * x;
  grads[d.bias] += dy.colwise().sum();
  if (dx) *dx = dy * p[d.weight];
}

inline MatrixXd tanh_dense_forward(const ParamSet& p, const DenseIndex& d, const MatrixXd& x) {
  return linear_forward(p, d, x).array().tanh().matrix();
}

inline void tanh_dense_backward(const ParamSet& p, const DenseIndex& d, ParamSet& grads, const MatrixXd& x,
                                const MatrixXd& y, const MatrixXd& dy, MatrixXd* dx) {
  const MatrixXd da = (dy.array() * (1.0 - y.array().square())).matrix();
  linear_backward(p, d, grads, x, da, dx);
}

// ---------------------------------------------------------------- GRU

/// Gated recurrent cell, gate order (reset, update, candidate):
///   r = sig(W_ir x + b_ir + W_hr h + b_hr)
///   z = sig(W_iz x + b_iz + W_hz h + b_hz)
///   n = tanh(W_in x + b_in + r * (W_hn h + b_hn))
///   h' = (1 - z) * n + z * h
struct GruIndex {
  std::size_t w_ih = 0;  // 3H x I
  std::size_t w_hh = 0;  // 3H x H
  std::size_t b_ih = 0;  // 1 x 3H
  std::size_t b_hh = 0;  // 1 x 3H
};

inline GruIndex add_gru(ParamSet& p, const std::string& name, Index input, Index hidden) {
  GruIndex g;
  g.w_ih = p.add(name + ".w_ih", 3 * hidden, input);
  g.w_hh = p.add(name + ".w_hh", 3 * hidden, hidden);
  g.b_ih = p.add(name + ".b_ih", 1, 3 * hidden);
  g.b_hh = p.add(name + ".b_hh", 1, 3 * hidden);
  return g;
}

struct GruCache {
  MatrixXd x, h_prev;
  ArrayXXd r, z, n, hn;  // hn = W_hn h + b_hn
};

inline ArrayXXd sigmoid(const ArrayXXd& a) { return 1.0 / (1.0 + (-a).exp()); }

inline MatrixXd gru_forward(const ParamSet& p, const GruIndex& g, const MatrixXd& x, const MatrixXd& h,
                            GruCache* cache) {
  const Index H = h.cols();
  MatrixXd gi = x * p[g.w_ih].transpose();
  gi.rowwise() += p[g.b_ih].row(0);
  MatrixXd gh = h * p[g.w_hh].transpose();
  gh.rowwise() += p[g.b_hh].row(0);

  ArrayXXd r = sigmoid(gi.leftCols(H).array() + gh.leftCols(H).array());
  ArrayXXd z = sigmoid(gi.middleCols(H, H).array() + gh.middleCols(H, H).array());
  ArrayXXd hn = gh.rightCols(H).array();
  ArrayXXd n = (gi.rightCols(H).array() + r * hn).tanh();
  MatrixXd h_new = ((1.0 - z) * n + z * h.array()).matrix();

  if (cache) {
    cache->x = x;
    cache->h_prev = h;
    cache->r = std::move(r);
    cache->z = std::move(z);
    cache->n = std::move(n);
    cache->hn = std::move(hn);
  }
  return h_new;
}

/// Given dL/dh', accumulates weight gradients and returns dL/dx (if requested)
/// and dL/dh through `dh_prev`.
inline void gru_backward(const ParamSet& p, const GruIndex& g, ParamSet& grads, const GruCache& c,
                         const MatrixXd& dh, MatrixXd* dx, MatrixXd& dh_prev) {
  const Index N = dh.rows();
  const Index H = dh.cols();
  const ArrayXXd dha = dh.array();
  const ArrayXXd dn = dha * (1.0 - c.z);
  const ArrayXXd dz = dha * (c.h_prev.array() - c.n);
  const ArrayXXd dan = dn * (1.0 - c.n.square());
  const ArrayXXd dar = dan * c.hn * c.r * (1.0 - c.r);
  const ArrayXXd daz = dz * c.z * (1.0 - c.z);

  MatrixXd dgi(N, 3 * H);
  dgi.leftCols(H) = dar.matrix();
  dgi.middleCols(H, H) = daz.matrix();
  dgi.rightCols(H) = dan.matrix();
  MatrixXd dgh = dgi;
  dgh.rightCols(H) = (dan * c.r).matrix();

  grads[g.w_ih].noalias() += dgi.transpose() * c.x;
  grads[g.b_ih] += dgi.colwise().sum();
  grads[g.w_hh].noalias() += dgh.transpose() * c.h_prev;
  grads[g.b_hh] += dgh.colwise().sum();

  if (dx) *dx = dgi * p[g.w_ih];
  dh_prev = (dha * c.z).matrix();
  dh_prev.noalias() += dgh * p[g.w_hh];
}

// ---------------------------------------------------------------- softmax

/// Numerically stable softmax of a row vector.
inline Eigen::RowVectorXd softmax(const Eigen::RowVectorXd& logits) {
  if (logits.size() == 0) return logits;
  const Eigen::RowVectorXd e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

/// d(loss)/d(logits) given d(loss)/d(softmax output).
inline Eigen::RowVectorXd softmax_backward(const Eigen::RowVectorXd& alpha, const Eigen::RowVectorXd& dalpha) {
  const double dot = alpha.dot(dalpha);
  return (alpha.array() * (dalpha.array() - dot)).matrix();
}

}  // namespace crowdnav::net
