#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlpf/tensor.hpp"

namespace rlpf::ag {

class Tape;

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Handle into a tape node. Cheap to copy; only valid while the node it
// refers to has not been cleared.
struct Value {
  Tape* tape = nullptr;
  int id = -1;
};

// Append-only record of the forward computation. Node ids are
// topologically ordered: parents always precede children.
class Tape {
 public:
  using BackwardRule = std::function<void(Tape&, int self)>;

  Value leaf(Tensor data, bool requires_grad) {
    Node n;
    n.data = std::move(data);
    n.requires_grad = requires_grad;
    if (requires_grad) n.grad = Tensor::zeros_like(n.data);
    nodes_.push_back(std::move(n));
    return {this, static_cast<int>(nodes_.size()) - 1};
  }

  Value constant(Tensor data) { return leaf(std::move(data), false); }
  Value constant(double v) { return leaf(Tensor::scalar(v), false); }

  Value record(Tensor out, const std::vector<int>& parents, BackwardRule back) {
    Node n;
    n.data = std::move(out);
    n.parents = parents;
    for (int p : parents) {
      if (nodes_[static_cast<size_t>(p)].requires_grad) {
        n.requires_grad = true;
        break;
      }
    }
    if (n.requires_grad) {
      n.grad = Tensor::zeros_like(n.data);
      n.back = std::move(back);
    }
    nodes_.push_back(std::move(n));
    return {this, static_cast<int>(nodes_.size()) - 1};
  }

  const Tensor& data(int id) const { return nodes_[static_cast<size_t>(id)].data; }
  const Tensor& data(Value v) const { return data(v.id); }
  Tensor& grad(int id) { return nodes_[static_cast<size_t>(id)].grad; }
  Tensor& grad(Value v) { return grad(v.id); }
  bool requires_grad(int id) const {
    return nodes_[static_cast<size_t>(id)].requires_grad;
  }
  bool requires_grad(Value v) const { return requires_grad(v.id); }

  // Adds into a parent's gradient if it participates in differentiation.
  template <typename Expr>
  void accumulate(int id, const Expr& e) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (n.requires_grad) n.grad.array() += e;
  }

  int checkpoint() const { return static_cast<int>(nodes_.size()); }

  void clear_to(int mark) {
    if (mark < 0 || mark > static_cast<int>(nodes_.size()))
      throw std::logic_error("Tape::clear_to: bad checkpoint");
    nodes_.resize(static_cast<size_t>(mark));
  }

  void clear() { nodes_.clear(); }

  size_t node_count() const { return nodes_.size(); }

  // Reverse sweep from a scalar loss. Gradients accumulate additively
  // across repeated calls.
  void backward(Value loss, double seed = 1.0) {
    if (loss.tape != this) throw std::logic_error("backward: foreign value");
    Node& top = nodes_[static_cast<size_t>(loss.id)];
    if (top.data.size() != 1)
      throw std::invalid_argument("backward: loss must be scalar, got " +
                                  top.data.shape_str());
    if (!top.requires_grad) return;
    top.grad.array() += seed;
    for (int i = loss.id; i >= 0; --i) {
      Node& n = nodes_[static_cast<size_t>(i)];
      if (n.requires_grad && n.back && n.grad.array().abs().sum() != 0.0)
        n.back(*this, i);
    }
  }

 private:
  struct Node {
    Tensor data;
    Tensor grad;
    bool requires_grad = false;
    BackwardRule back;
    std::vector<int> parents;
  };
  std::vector<Node> nodes_;
};

namespace detail {
inline void require(bool ok, const std::string& op, const std::string& what) {
  if (!ok) throw ShapeError(op + ": " + what);
}
inline void require_same_tape(const Value& a, const Value& b,
                              const std::string& op) {
  require(a.tape == b.tape && a.tape != nullptr, op, "values on distinct tapes");
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise binary ops. Shapes must match exactly, or one operand may be a
// scalar (broadcast).
// ---------------------------------------------------------------------------

namespace detail {

enum class Bin { Add, Sub, Mul, Div };

inline Value binary(Value a, Value b, Bin op, const char* name) {
  require_same_tape(a, b, name);
  Tape& t = *a.tape;
  const Tensor& da = t.data(a);
  const Tensor& db = t.data(b);
  bool as = da.size() == 1, bs = db.size() == 1;
  require(da.same_shape(db) || as || bs, name,
          "shape mismatch " + da.shape_str() + " vs " + db.shape_str());
  const Tensor& shape_src = as ? db : da;
  Tensor out = Tensor::zeros_like(shape_src);
  auto av = as ? Eigen::ArrayXd::Constant(shape_src.size(), da.value()).eval()
               : Eigen::ArrayXd(da.array());
  auto bv = bs ? Eigen::ArrayXd::Constant(shape_src.size(), db.value()).eval()
               : Eigen::ArrayXd(db.array());
  switch (op) {
    case Bin::Add: out.array() = av + bv; break;
    case Bin::Sub: out.array() = av - bv; break;
    case Bin::Mul: out.array() = av * bv; break;
    case Bin::Div: out.array() = av / bv; break;
  }
  int ia = a.id, ib = b.id;
  return t.record(std::move(out), {ia, ib}, [=](Tape& tp, int self) {
    const auto g = tp.grad(self).array();
    const Tensor& xa = tp.data(ia);
    const Tensor& xb = tp.data(ib);
    bool sa = xa.size() == 1, sb = xb.size() == 1;
    auto reduce = [&](const Eigen::ArrayXd& e, bool scalar_side,
                      int target) {
      if (scalar_side)
        tp.accumulate(target, e.sum());
      else
        tp.accumulate(target, e);
    };
    switch (op) {
      case Bin::Add:
        reduce(g, sa, ia);
        reduce(g, sb, ib);
        break;
      case Bin::Sub:
        reduce(g, sa, ia);
        reduce(-g, sb, ib);
        break;
      case Bin::Mul: {
        Eigen::ArrayXd bb = sb ? Eigen::ArrayXd::Constant(g.size(), xb.value())
                               : Eigen::ArrayXd(xb.array());
        Eigen::ArrayXd aa = sa ? Eigen::ArrayXd::Constant(g.size(), xa.value())
                               : Eigen::ArrayXd(xa.array());
        reduce(g * bb, sa, ia);
        reduce(g * aa, sb, ib);
        break;
      }
      case Bin::Div: {
        Eigen::ArrayXd bb = sb ? Eigen::ArrayXd::Constant(g.size(), xb.value())
                               : Eigen::ArrayXd(xb.array());
        Eigen::ArrayXd aa = sa ? Eigen::ArrayXd::Constant(g.size(), xa.value())
                               : Eigen::ArrayXd(xa.array());
        reduce(g / bb, sa, ia);
        reduce(-g * aa / (bb * bb), sb, ib);
        break;
      }
    }
  });
}

}  // namespace detail

inline Value add(Value a, Value b) { return detail::binary(a, b, detail::Bin::Add, "add"); }
inline Value sub(Value a, Value b) { return detail::binary(a, b, detail::Bin::Sub, "sub"); }
inline Value mul(Value a, Value b) { return detail::binary(a, b, detail::Bin::Mul, "mul"); }
inline Value div(Value a, Value b) { return detail::binary(a, b, detail::Bin::Div, "div"); }

inline Value operator+(Value a, Value b) { return add(a, b); }
inline Value operator-(Value a, Value b) { return sub(a, b); }
inline Value operator*(Value a, Value b) { return mul(a, b); }
inline Value operator/(Value a, Value b) { return div(a, b); }

// ---------------------------------------------------------------------------
// Elementwise unary ops.
// ---------------------------------------------------------------------------

namespace detail {

template <typename Fwd, typename Dfdx>
Value unary(Value a, Fwd fwd, Dfdx dfdx, const char* /*name*/) {
  Tape& t = *a.tape;
  Tensor out = Tensor::zeros_like(t.data(a));
  out.array() = fwd(t.data(a).array());
  int ia = a.id;
  return t.record(std::move(out), {ia}, [=](Tape& tp, int self) {
    tp.accumulate(ia, tp.grad(self).array() *
                          dfdx(tp.data(ia).array(), tp.data(self).array()));
  });
}

}  // namespace detail

inline Value tanh(Value a) {
  return detail::unary(
      a, [](auto x) { return x.tanh(); },
      [](auto, auto y) { return 1.0 - y.square(); }, "tanh");
}

inline Value sigmoid(Value a) {
  return detail::unary(
      a,
      [](auto x) {
        // numerically stable logistic
        return (x >= 0.0).select(1.0 / (1.0 + (-x).exp()),
                                 x.exp() / (1.0 + x.exp()));
      },
      [](auto, auto y) { return y * (1.0 - y); }, "sigmoid");
}

inline Value abs(Value a) {
  // subgradient 0 at exactly 0
  return detail::unary(
      a, [](auto x) { return x.abs(); },
      [](auto x, auto) { return x.sign(); }, "abs");
}

inline Value log(Value a) {
  return detail::unary(
      a, [](auto x) { return x.log(); },
      [](auto x, auto) { return x.inverse(); }, "log");
}

inline Value exp(Value a) {
  return detail::unary(
      a, [](auto x) { return x.exp(); }, [](auto, auto y) { return y; },
      "exp");
}

inline Value square(Value a) {
  return detail::unary(
      a, [](auto x) { return x.square(); },
      [](auto x, auto) { return 2.0 * x; }, "square");
}

inline Value sqrt(Value a) {
  return detail::unary(
      a, [](auto x) { return x.sqrt(); },
      [](auto, auto y) { return 0.5 * y.inverse(); }, "sqrt");
}

inline Value neg(Value a) {
  return detail::unary(
      a, [](auto x) { return -x; },
      [](auto x, auto) { return Eigen::ArrayXd::Constant(x.size(), -1.0); },
      "neg");
}

inline Value operator-(Value a) { return neg(a); }

inline Value scalar_mul(Value a, double c) {
  Tape& t = *a.tape;
  Tensor out = Tensor::zeros_like(t.data(a));
  out.array() = t.data(a).array() * c;
  int ia = a.id;
  return t.record(std::move(out), {ia}, [=](Tape& tp, int self) {
    tp.accumulate(ia, tp.grad(self).array() * c);
  });
}

inline Value add_const(Value a, double c) {
  Tape& t = *a.tape;
  Tensor out = Tensor::zeros_like(t.data(a));
  out.array() = t.data(a).array() + c;
  int ia = a.id;
  return t.record(std::move(out), {ia}, [=](Tape& tp, int self) {
    tp.accumulate(ia, tp.grad(self).array());
  });
}

inline Value stop_gradient(Value a) {
  Tape& t = *a.tape;
  return t.constant(t.data(a));
}

// ---------------------------------------------------------------------------
// Linear algebra.
// ---------------------------------------------------------------------------

// Matrix-matrix or matrix-vector product; a vector is a single column and
// the result keeps rank 1 in that case.
inline Value matmul(Value a, Value b) {
  detail::require_same_tape(a, b, "matmul");
  Tape& t = *a.tape;
  const Tensor& da = t.data(a);
  const Tensor& db = t.data(b);
  detail::require(da.rank() == 2, "matmul", "left operand must be rank 2, got " + da.shape_str());
  detail::require(da.mat().cols() == db.mat().rows(), "matmul",
                  "inner dimensions " + da.shape_str() + " vs " + db.shape_str());
  Eigen::MatrixXd c = da.mat() * db.mat();
  Tensor out = db.rank() == 1 ? Tensor::vector(c.col(0)) : Tensor::matrix(c);
  int ia = a.id, ib = b.id;
  return t.record(std::move(out), {ia, ib}, [=](Tape& tp, int self) {
    Eigen::Map<const Eigen::MatrixXd> g(tp.grad(self).raw().data(),
                                        tp.data(self).mat().rows(),
                                        tp.data(self).mat().cols());
    tp.accumulate(ia, Eigen::ArrayXd(Eigen::Map<const Eigen::ArrayXd>(
                          Eigen::MatrixXd(g * tp.data(ib).mat().transpose()).data(),
                          tp.data(ia).size())));
    tp.accumulate(ib, Eigen::ArrayXd(Eigen::Map<const Eigen::ArrayXd>(
                          Eigen::MatrixXd(tp.data(ia).mat().transpose() * g).data(),
                          tp.data(ib).size())));
  });
}

// Adds a length-d vector to every column of a d x n matrix.
inline Value add_colwise(Value m, Value v) {
  detail::require_same_tape(m, v, "add_colwise");
  Tape& t = *m.tape;
  const Tensor& dm = t.data(m);
  const Tensor& dv = t.data(v);
  detail::require(dm.rank() == 2 && dv.rank() <= 1 && dv.size() == dm.dim(0),
                  "add_colwise",
                  "shapes " + dm.shape_str() + " vs " + dv.shape_str());
  Tensor out = Tensor::matrix(dm.mat().colwise() + dv.vec());
  int im = m.id, iv = v.id;
  return t.record(std::move(out), {im, iv}, [=](Tape& tp, int self) {
    Eigen::Map<const Eigen::MatrixXd> g(tp.grad(self).raw().data(),
                                        tp.data(im).dim(0), tp.data(im).dim(1));
    tp.accumulate(im, Eigen::Map<const Eigen::ArrayXd>(g.data(), g.size()));
    tp.accumulate(iv, Eigen::ArrayXd(g.rowwise().sum().array()));
  });
}

// Divides column j of a d x n matrix by v[j].
inline Value div_rowwise(Value m, Value v) {
  detail::require_same_tape(m, v, "div_rowwise");
  Tape& t = *m.tape;
  const Tensor& dm = t.data(m);
  const Tensor& dv = t.data(v);
  detail::require(dm.rank() == 2 && dv.rank() <= 1 && dv.size() == dm.dim(1),
                  "div_rowwise",
                  "shapes " + dm.shape_str() + " vs " + dv.shape_str());
  Eigen::MatrixXd c = dm.mat().array().rowwise() / dv.vec().transpose().array();
  Tensor out = Tensor::matrix(c);
  int im = m.id, iv = v.id;
  return t.record(std::move(out), {im, iv}, [=](Tape& tp, int self) {
    Eigen::Map<const Eigen::MatrixXd> g(tp.grad(self).raw().data(),
                                        tp.data(im).dim(0), tp.data(im).dim(1));
    Eigen::ArrayXd vv = tp.data(iv).vec().array();
    Eigen::MatrixXd gm = g.array().rowwise() / vv.transpose();
    tp.accumulate(im, Eigen::Map<const Eigen::ArrayXd>(gm.data(), gm.size()));
    Eigen::ArrayXd gv =
        -(g.array() * tp.data(im).mat().array()).colwise().sum().transpose() /
        (vv * vv);
    tp.accumulate(iv, gv);
  });
}

// ---------------------------------------------------------------------------
// Reductions.
// ---------------------------------------------------------------------------

inline Value sum(Value a) {
  Tape& t = *a.tape;
  int ia = a.id;
  return t.record(Tensor::scalar(t.data(a).array().sum()), {ia},
                  [=](Tape& tp, int self) {
                    tp.accumulate(ia, Eigen::ArrayXd::Constant(
                                          tp.data(ia).size(),
                                          tp.grad(self).value()));
                  });
}

inline Value mean(Value a) {
  Tape& t = *a.tape;
  int ia = a.id;
  double n = static_cast<double>(t.data(a).size());
  return t.record(Tensor::scalar(t.data(a).array().mean()), {ia},
                  [=](Tape& tp, int self) {
                    tp.accumulate(ia, Eigen::ArrayXd::Constant(
                                          tp.data(ia).size(),
                                          tp.grad(self).value() / n));
                  });
}

inline Value logsumexp(Value a) {
  Tape& t = *a.tape;
  int ia = a.id;
  const auto x = t.data(a).array();
  double m = x.maxCoeff();
  double lse = std::isfinite(m) ? m + std::log((x - m).exp().sum()) : m;
  return t.record(Tensor::scalar(lse), {ia}, [=](Tape& tp, int self) {
    const auto xi = tp.data(ia).array();
    double v = tp.data(self).value();
    tp.accumulate(ia, tp.grad(self).value() * (xi - v).exp());
  });
}

// Sums each column of a d x n matrix -> length-n vector.
inline Value colsum(Value m) {
  Tape& t = *m.tape;
  const Tensor& dm = t.data(m);
  detail::require(dm.rank() == 2, "colsum", "needs rank 2, got " + dm.shape_str());
  int im = m.id;
  return t.record(Tensor::vector(dm.mat().colwise().sum().transpose()), {im},
                  [=](Tape& tp, int self) {
                    const Tensor& src = tp.data(im);
                    Eigen::MatrixXd g = tp.grad(self).vec().transpose().replicate(
                        src.dim(0), 1);
                    tp.accumulate(im, Eigen::Map<const Eigen::ArrayXd>(g.data(), g.size()));
                  });
}

// ---------------------------------------------------------------------------
// Structure ops.
// ---------------------------------------------------------------------------

inline Value concat(const std::vector<Value>& parts) {
  detail::require(!parts.empty(), "concat", "no inputs");
  Tape& t = *parts[0].tape;
  Eigen::Index total = 0;
  std::vector<int> ids;
  ids.reserve(parts.size());
  for (const Value& p : parts) {
    detail::require(p.tape == &t, "concat", "values on distinct tapes");
    total += t.data(p).size();
    ids.push_back(p.id);
  }
  Eigen::VectorXd out(total);
  Eigen::Index at = 0;
  for (int id : ids) {
    out.segment(at, t.data(id).size()) = t.data(id).vec();
    at += t.data(id).size();
  }
  return t.record(Tensor::vector(std::move(out)), ids, [=](Tape& tp, int self) {
    Eigen::Index pos = 0;
    for (int id : ids) {
      Eigen::Index n = tp.data(id).size();
      tp.accumulate(id, Eigen::ArrayXd(tp.grad(self).vec().segment(pos, n).array()));
      pos += n;
    }
  });
}

inline Value slice(Value a, Eigen::Index begin, Eigen::Index len) {
  Tape& t = *a.tape;
  const Tensor& da = t.data(a);
  detail::require(da.rank() <= 1 && begin >= 0 && begin + len <= da.size(),
                  "slice", "range out of bounds for " + da.shape_str());
  int ia = a.id;
  return t.record(Tensor::vector(da.vec().segment(begin, len)), {ia},
                  [=](Tape& tp, int self) {
                    Eigen::ArrayXd g = Eigen::ArrayXd::Zero(tp.data(ia).size());
                    g.segment(begin, len) = tp.grad(self).array();
                    tp.accumulate(ia, g);
                  });
}

// Selects rows [begin, begin+len) of a matrix.
inline Value slice_rows(Value m, Eigen::Index begin, Eigen::Index len) {
  Tape& t = *m.tape;
  const Tensor& dm = t.data(m);
  detail::require(dm.rank() == 2 && begin >= 0 && begin + len <= dm.dim(0),
                  "slice_rows", "range out of bounds for " + dm.shape_str());
  int im = m.id;
  return t.record(Tensor::matrix(dm.mat().middleRows(begin, len)), {im},
                  [=](Tape& tp, int self) {
                    const Tensor& src = tp.data(im);
                    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(src.dim(0), src.dim(1));
                    g.middleRows(begin, len) =
                        Eigen::Map<const Eigen::MatrixXd>(
                            tp.grad(self).raw().data(), len, src.dim(1));
                    tp.accumulate(im, Eigen::Map<const Eigen::ArrayXd>(g.data(), g.size()));
                  });
}

inline Value reshape(Value a, int rank, Eigen::Index d0, Eigen::Index d1 = 1) {
  Tape& t = *a.tape;
  const Tensor& da = t.data(a);
  detail::require(d0 * d1 == da.size(), "reshape",
                  "element count mismatch for " + da.shape_str());
  Tensor out = rank == 1 ? Tensor::vector(da.vec())
                         : Tensor::matrix(Eigen::Map<const Eigen::MatrixXd>(
                               da.raw().data(), d0, d1));
  int ia = a.id;
  return t.record(std::move(out), {ia}, [=](Tape& tp, int self) {
    tp.accumulate(ia, tp.grad(self).array());
  });
}

// Selects entries of a vector by index; duplicates accumulate on backward.
inline Value gather(Value a, const Eigen::VectorXi& idx) {
  Tape& t = *a.tape;
  const Tensor& da = t.data(a);
  detail::require(da.rank() <= 1, "gather", "needs rank <= 1, got " + da.shape_str());
  Eigen::VectorXd out(idx.size());
  for (Eigen::Index i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= da.size())
      throw std::out_of_range("gather: index " + std::to_string(idx[i]) +
                              " out of range for " + da.shape_str());
    out[i] = da(idx[i]);
  }
  int ia = a.id;
  Eigen::VectorXi ix = idx;
  return t.record(Tensor::vector(std::move(out)), {ia},
                  [=](Tape& tp, int self) {
                    Eigen::ArrayXd g = Eigen::ArrayXd::Zero(tp.data(ia).size());
                    for (Eigen::Index i = 0; i < ix.size(); ++i)
                      g[ix[i]] += tp.grad(self)(i);
                    tp.accumulate(ia, g);
                  });
}

// Selects columns of a matrix by index; duplicates accumulate on backward.
inline Value gather_cols(Value m, const Eigen::VectorXi& idx) {
  Tape& t = *m.tape;
  const Tensor& dm = t.data(m);
  detail::require(dm.rank() == 2, "gather_cols", "needs rank 2, got " + dm.shape_str());
  Eigen::MatrixXd out(dm.dim(0), idx.size());
  for (Eigen::Index j = 0; j < idx.size(); ++j) {
    if (idx[j] < 0 || idx[j] >= dm.dim(1))
      throw std::out_of_range("gather_cols: index " + std::to_string(idx[j]) +
                              " out of range for " + dm.shape_str());
    out.col(j) = dm.mat().col(idx[j]);
  }
  int im = m.id;
  Eigen::VectorXi ix = idx;
  return t.record(Tensor::matrix(out), {im}, [=](Tape& tp, int self) {
    const Tensor& src = tp.data(im);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(src.dim(0), src.dim(1));
    Eigen::Map<const Eigen::MatrixXd> gs(tp.grad(self).raw().data(),
                                         src.dim(0), ix.size());
    for (Eigen::Index j = 0; j < ix.size(); ++j) g.col(ix[j]) += gs.col(j);
    tp.accumulate(im, Eigen::Map<const Eigen::ArrayXd>(g.data(), g.size()));
  });
}

// out[j] = M(rows[j], j); one entry per column.
inline Value gather_entry(Value m, const Eigen::VectorXi& rows) {
  Tape& t = *m.tape;
  const Tensor& dm = t.data(m);
  detail::require(dm.rank() == 2 && rows.size() == dm.dim(1), "gather_entry",
                  "needs rank 2 with one row index per column");
  Eigen::VectorXd out(rows.size());
  for (Eigen::Index j = 0; j < rows.size(); ++j) {
    if (rows[j] < 0 || rows[j] >= dm.dim(0))
      throw std::out_of_range("gather_entry: row " + std::to_string(rows[j]) +
                              " out of range for " + dm.shape_str());
    out[j] = dm(rows[j], j);
  }
  int im = m.id;
  Eigen::VectorXi rx = rows;
  return t.record(Tensor::vector(std::move(out)), {im},
                  [=](Tape& tp, int self) {
                    const Tensor& src = tp.data(im);
                    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(src.dim(0), src.dim(1));
                    for (Eigen::Index j = 0; j < rx.size(); ++j)
                      g(rx[j], j) += tp.grad(self)(j);
                    tp.accumulate(im, Eigen::Map<const Eigen::ArrayXd>(g.data(), g.size()));
                  });
}

// ---------------------------------------------------------------------------
// Finite-difference gradient checking.
// ---------------------------------------------------------------------------

// Returns max over all input coordinates of
// |analytic - central difference| / max(1, |central difference|).
inline double gradient_check(
    const std::function<Value(Tape&, const std::vector<Value>&)>& f,
    std::vector<Tensor> point, double step) {
  if (step <= 0.0) throw std::invalid_argument("gradient_check: step must be > 0");
  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Value> in;
    in.reserve(point.size());
    for (const Tensor& p : point) in.push_back(tape.leaf(p, true));
    Value out = f(tape, in);
    if (!std::isfinite(tape.data(out).value()))
      throw std::runtime_error("gradient_check: non-finite output");
    tape.backward(out);
    for (const Value& v : in) analytic.push_back(tape.grad(v));
  }
  auto eval = [&](const std::vector<Tensor>& pt) {
    Tape tape;
    std::vector<Value> in;
    in.reserve(pt.size());
    for (const Tensor& p : pt) in.push_back(tape.leaf(p, false));
    double y = tape.data(f(tape, in)).value();
    if (!std::isfinite(y))
      throw std::runtime_error("gradient_check: non-finite output at perturbed point");
    return y;
  };
  double worst = 0.0;
  for (size_t i = 0; i < point.size(); ++i) {
    for (Eigen::Index j = 0; j < point[i].size(); ++j) {
      double keep = point[i](j);
      point[i](j) = keep + step;
      double up = eval(point);
      point[i](j) = keep - step;
      double dn = eval(point);
      point[i](j) = keep;
      double cd = (up - dn) / (2.0 * step);
      double err = std::abs(analytic[i](j) - cd) / std::max(1.0, std::abs(cd));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace rlpf::ag
