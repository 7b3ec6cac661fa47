#pragma once

#include "crowdnav/errors.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace crowdnav::net {

/// Ordered collection of named double tensors (vectors are stored 1 x k).
/// Used both for trainable parameters and for their gradients / optimiser moments.
class ParamSet {
 public:
  std::size_t add(std::string name, Eigen::Index rows, Eigen::Index cols) {
    for (const auto& n : names_) {
      if (n == name) throw ContractViolation("duplicate tensor name " + name);
    }
    names_.push_back(std::move(name));
    tensors_.push_back(Eigen::MatrixXd::Zero(rows, cols));
    return tensors_.size() - 1;
  }

  std::size_t size() const { return tensors_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(std::size_t i) const { return names_.at(i); }

  Eigen::MatrixXd& operator[](std::size_t i) { return tensors_[i]; }
  const Eigen::MatrixXd& operator[](std::size_t i) const { return tensors_[i]; }

  std::size_t index(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i] == name) return i;
    }
    throw ContractViolation("no tensor named " + std::string(name));
  }
  bool contains(std::string_view name) const {
    for (const auto& n : names_) {
      if (n == name) return true;
    }
    return false;
  }
  Eigen::MatrixXd& at(std::string_view name) { return tensors_[index(name)]; }
  const Eigen::MatrixXd& at(std::string_view name) const { return tensors_[index(name)]; }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors_) n += static_cast<std::size_t>(t.size());
    return n;
  }

  /// Element `flat` when all tensors are laid end to end (column-major within each).
  double& scalar(std::size_t flat) {
    for (auto& t : tensors_) {
      const auto sz = static_cast<std::size_t>(t.size());
      if (flat < sz) return t.data()[flat];
      flat -= sz;
    }
    throw ContractViolation("flat parameter index out of range");
  }
  double scalar(std::size_t flat) const { return const_cast<ParamSet&>(*this).scalar(flat); }

  ParamSet zeros_like() const {
    ParamSet z = *this;
    z.set_zero();
    return z;
  }
  void set_zero() {
    for (auto& t : tensors_) t.setZero();
  }

  bool same_layout(const ParamSet& other) const {
    if (names_ != other.names_) return false;
    for (std::size_t i = 0; i < tensors_.size(); ++i) {
      if (tensors_[i].rows() != other.tensors_[i].rows() || tensors_[i].cols() != other.tensors_[i].cols())
        return false;
    }
    return true;
  }

  bool all_finite() const {
    for (const auto& t : tensors_) {
      if (!t.allFinite()) return false;
    }
    return true;
  }

  double squared_norm() const {
    double s = 0.0;
    for (const auto& t : tensors_) s += t.squaredNorm();
    return s;
  }

  /// Exact (bitwise for non-NaN values) equality of names, shapes and contents.
  bool operator==(const ParamSet& other) const {
    if (!same_layout(other)) return false;
    for (std::size_t i = 0; i < tensors_.size(); ++i) {
      if (tensors_[i] != other.tensors_[i]) return false;
    }
    return true;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Eigen::MatrixXd> tensors_;
};

}  // namespace crowdnav::net
