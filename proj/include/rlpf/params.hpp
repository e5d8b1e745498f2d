#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlpf/autodiff.hpp"
#include "rlpf/random.hpp"
#include "rlpf/tensor.hpp"

namespace rlpf {

// All learnable values with gradient slots and optimizer moments. Parameters
// live outside any tape; each filter pass binds copies as tape leaves and
// harvests gradients back after the reverse sweep.
class ParameterStore {
 public:
  struct Param {
    Tensor value;
    Tensor grad;
    Tensor m;  // first moment
    Tensor v;  // second moment
    bool weight_decay = true;
  };

  Param& add(const std::string& name, Tensor init, bool weight_decay = true) {
    auto [it, fresh] = items_.try_emplace(name);
    if (!fresh) throw std::logic_error("ParameterStore: duplicate parameter " + name);
    it->second.value = std::move(init);
    it->second.grad = Tensor::zeros_like(it->second.value);
    it->second.m = Tensor::zeros_like(it->second.value);
    it->second.v = Tensor::zeros_like(it->second.value);
    it->second.weight_decay = weight_decay;
    order_.push_back(name);
    return it->second;
  }

  bool has(const std::string& name) const { return items_.count(name) != 0; }

  Param& at(const std::string& name) {
    auto it = items_.find(name);
    if (it == items_.end())
      throw std::out_of_range("ParameterStore: unknown parameter " + name);
    return it->second;
  }
  const Param& at(const std::string& name) const {
    return const_cast<ParameterStore*>(this)->at(name);
  }

  const std::vector<std::string>& names() const { return order_; }

  void zero_grad() {
    for (auto& [_, p] : items_) p.grad.array() = 0.0;
  }

  // Per-pass leaf bindings. Leaves are invalidated by tape clears, so a
  // binding must not outlive the tape segment it was created on.
  struct Binding {
    std::map<std::string, ag::Value> leaves;
    ag::Value operator[](const std::string& name) const {
      auto it = leaves.find(name);
      if (it == leaves.end())
        throw std::out_of_range("ParameterStore binding: " + name);
      return it->second;
    }
  };

  Binding bind(ag::Tape& tape) const {
    Binding b;
    for (const auto& [name, p] : items_) b.leaves.emplace(name, tape.leaf(p.value, true));
    return b;
  }

  void harvest(ag::Tape& tape, const Binding& b) {
    for (auto& [name, p] : items_) {
      const Tensor& g = tape.grad(b.leaves.at(name));
      p.grad.array() += g.array();
    }
  }

  // Adam with decoupled weight decay; consumes and clears gradients.
  void adam_step(double lr, double weight_decay, double beta1 = 0.9,
                 double beta2 = 0.999, double eps = 1e-8) {
    ++step_;
    double bc1 = 1.0 - std::pow(beta1, step_);
    double bc2 = 1.0 - std::pow(beta2, step_);
    for (auto& [_, p] : items_) {
      auto g = p.grad.array();
      p.m.array() = beta1 * p.m.array() + (1.0 - beta1) * g;
      p.v.array() = beta2 * p.v.array() + (1.0 - beta2) * g.square();
      auto mhat = p.m.array() / bc1;
      auto vhat = p.v.array() / bc2;
      p.value.array() -= lr * (mhat / (vhat.sqrt() + eps));
      if (p.weight_decay && weight_decay > 0.0)
        p.value.array() -= lr * weight_decay * p.value.array();
      p.grad.array() = 0.0;
    }
  }

  int64_t step_count() const { return step_; }
  void set_step_count(int64_t s) { step_ = s; }

  // Scaled-uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static Tensor init_matrix(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
    double bound = 1.0 / std::sqrt(static_cast<double>(cols));
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(-bound, bound);
    return Tensor::matrix(m);
  }

 private:
  std::map<std::string, Param> items_;
  std::vector<std::string> order_;
  int64_t step_ = 0;
};

}  // namespace rlpf
