#pragma once

#include "crowdnav/net/param_set.hpp"

#include <cmath>
#include <cstdint>

namespace crowdnav::ppo {

class Adam {
 public:
  Adam() = default;
  Adam(const net::ParamSet& like, double beta1, double beta2, double eps)
      : m_(like.zeros_like()), v_(like.zeros_like()), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(net::ParamSet& params, const net::ParamSet& grads, double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i].cwiseAbs2();
      params[i].array() -= lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + eps_);
    }
  }

  std::int64_t step_count() const { return t_; }
  const net::ParamSet& first_moment() const { return m_; }
  const net::ParamSet& second_moment() const { return v_; }

  void restore(net::ParamSet m, net::ParamSet v, std::int64_t t) {
    m_ = std::move(m);
    v_ = std::move(v);
    t_ = t;
  }

 private:
  net::ParamSet m_, v_;
  double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-5;
  std::int64_t t_ = 0;
};

/// Scales `grads` in place so their global L2 norm is at most max_norm; returns the norm before clipping.
inline double clip_grad_norm(net::ParamSet& grads, double max_norm) {
  const double norm = std::sqrt(grads.squared_norm());
  if (norm > max_norm) {
    const double scale = max_norm / (norm + 1e-6);
    for (std::size_t i = 0; i < grads.size(); ++i) grads[i] *= scale;
  }
  return norm;
}

}  // namespace crowdnav::ppo
