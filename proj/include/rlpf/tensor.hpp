#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>
#include <string>

namespace rlpf {

// Dense real array of rank 0..3, column-major, double precision.
// Rank 0 is stored as a single element; rank 1 as a column vector.
class Tensor {
 public:
  Tensor() = default;

  static Tensor scalar(double v) {
    Tensor t;
    t.rank_ = 0;
    t.dims_ = {1, 1, 1};
    t.flat_.resize(1);
    t.flat_[0] = v;
    return t;
  }

  static Tensor vector(Eigen::VectorXd v) {
    Tensor t;
    t.rank_ = 1;
    t.dims_ = {v.size(), 1, 1};
    t.flat_ = std::move(v);
    return t;
  }

  static Tensor matrix(const Eigen::MatrixXd& m) {
    Tensor t;
    t.rank_ = 2;
    t.dims_ = {m.rows(), m.cols(), 1};
    t.flat_ = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    return t;
  }

  static Tensor zeros_like(const Tensor& o) {
    Tensor t;
    t.rank_ = o.rank_;
    t.dims_ = o.dims_;
    t.flat_ = Eigen::VectorXd::Zero(o.size());
    return t;
  }

  static Tensor zeros(int rank, Eigen::Index d0, Eigen::Index d1 = 1,
                      Eigen::Index d2 = 1) {
    Tensor t;
    t.rank_ = rank;
    t.dims_ = {d0, d1, d2};
    t.flat_ = Eigen::VectorXd::Zero(d0 * d1 * d2);
    return t;
  }

  int rank() const { return rank_; }
  Eigen::Index dim(int i) const { return dims_[static_cast<size_t>(i)]; }
  Eigen::Index size() const { return flat_.size(); }
  const std::array<Eigen::Index, 3>& dims() const { return dims_; }

  bool same_shape(const Tensor& o) const {
    return rank_ == o.rank_ && dims_ == o.dims_;
  }

  std::string shape_str() const {
    std::string s = "(";
    for (int i = 0; i < (rank_ == 0 ? 1 : rank_); ++i) {
      if (i) s += "x";
      s += std::to_string(dims_[static_cast<size_t>(i)]);
    }
    return s + ")";
  }

  double value() const {
    if (size() != 1) throw std::logic_error("Tensor::value on non-scalar " + shape_str());
    return flat_[0];
  }

  Eigen::VectorXd& raw() { return flat_; }
  const Eigen::VectorXd& raw() const { return flat_; }

  Eigen::Map<Eigen::ArrayXd> array() { return {flat_.data(), flat_.size()}; }
  Eigen::Map<const Eigen::ArrayXd> array() const {
    return {flat_.data(), flat_.size()};
  }

  // Rank <= 2 view; a vector is seen as a single column.
  Eigen::Map<Eigen::MatrixXd> mat() {
    return {flat_.data(), dims_[0], rank_ <= 1 ? 1 : dims_[1]};
  }
  Eigen::Map<const Eigen::MatrixXd> mat() const {
    return {flat_.data(), dims_[0], rank_ <= 1 ? 1 : dims_[1]};
  }

  Eigen::Map<Eigen::VectorXd> vec() { return {flat_.data(), flat_.size()}; }
  Eigen::Map<const Eigen::VectorXd> vec() const {
    return {flat_.data(), flat_.size()};
  }

  double operator()(Eigen::Index i) const { return flat_[i]; }
  double& operator()(Eigen::Index i) { return flat_[i]; }
  double operator()(Eigen::Index i, Eigen::Index j) const {
    return flat_[j * dims_[0] + i];
  }
  double& operator()(Eigen::Index i, Eigen::Index j) {
    return flat_[j * dims_[0] + i];
  }

 private:
  int rank_ = 0;
  std::array<Eigen::Index, 3> dims_ = {1, 1, 1};
  Eigen::VectorXd flat_ = Eigen::VectorXd::Zero(1);
};

}  // namespace rlpf
