#include <doctest.h>

#include <cmath>

#include "rlpf/autodiff.hpp"
#include "rlpf/random.hpp"

using namespace rlpf;
using namespace rlpf::ag;

namespace {

Tensor random_vector(Eigen::Index n, RngStream& rng, double lo = -1.0,
                     double hi = 1.0) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return Tensor::vector(v);
}

Tensor random_matrix(Eigen::Index r, Eigen::Index c, RngStream& rng) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.uniform(-1.0, 1.0);
  return Tensor::matrix(m);
}

}  // namespace

TEST_CASE("tanh at zero has unit derivative") {
  Tape tape;
  Value x = tape.leaf(Tensor::scalar(0.0), true);
  Value y = tanh(x);
  CHECK(tape.data(y).value() == 0.0);
  tape.backward(y);
  CHECK(tape.grad(x).value() == doctest::Approx(1.0));
}

TEST_CASE("stop-gradient blocks all flow") {
  Tape tape;
  Value x = tape.leaf(Tensor::scalar(1.5), true);
  Value y = sum(square(stop_gradient(x)));
  tape.backward(y);
  CHECK(tape.grad(x).value() == 0.0);
}

TEST_CASE("backward linearity on a sum of leaves") {
  Tape tape;
  Value a = tape.leaf(Tensor::scalar(2.0), true);
  Value b = tape.leaf(Tensor::scalar(3.0), true);
  tape.backward(add(a, b));
  CHECK(tape.grad(a).value() == 1.0);
  CHECK(tape.grad(b).value() == 1.0);
}

TEST_CASE("product rule") {
  Tape tape;
  Value a = tape.leaf(Tensor::scalar(2.0), true);
  Value b = tape.leaf(Tensor::scalar(3.0), true);
  tape.backward(mul(a, b));
  CHECK(tape.grad(a).value() == doctest::Approx(3.0));
  CHECK(tape.grad(b).value() == doctest::Approx(2.0));
}

TEST_CASE("matrix-vector product against finite differences") {
  RngStream rng(42);
  auto f = [](Tape& t, const std::vector<Value>& in) {
    return sum(tanh(matmul(in[0], in[1])));
  };
  double err =
      gradient_check(f, {random_matrix(4, 3, rng), random_vector(3, rng)}, 1e-6);
  CHECK(err < 1e-6);
}

TEST_CASE("two-layer tanh network weight gradients") {
  RngStream rng(7);
  auto f = [](Tape& t, const std::vector<Value>& in) {
    Value h = tanh(matmul(in[0], in[3]));
    return sum(tanh(matmul(in[1], h) + in[2]));
  };
  double err = gradient_check(f,
                              {random_matrix(5, 3, rng), random_matrix(1, 5, rng),
                               random_vector(1, rng), random_vector(3, rng)},
                              1e-6);
  CHECK(err < 1e-5);
}

TEST_CASE("gradient_check sanity: identity and exp") {
  auto ident = [](Tape&, const std::vector<Value>& in) { return sum(in[0]); };
  CHECK(gradient_check(ident, {Tensor::scalar(0.3)}, 1e-6) < 1e-12);
  auto ex = [](Tape&, const std::vector<Value>& in) { return sum(exp(in[0])); };
  CHECK(gradient_check(ex, {Tensor::scalar(0.0)}, 1e-6) < 1e-8);
}

TEST_CASE("every op kind passes finite differences at 10 random points") {
  RngStream master(123);
  using Fn = std::function<Value(Tape&, const std::vector<Value>&)>;
  struct OpCase {
    const char* name;
    Fn f;
    std::function<std::vector<Tensor>(RngStream&)> point;
  };
  auto vec4 = [](RngStream& r) {
    return std::vector<Tensor>{random_vector(4, r)};
  };
  auto vec4pos = [](RngStream& r) {
    return std::vector<Tensor>{random_vector(4, r, 0.5, 2.0)};
  };
  auto two_vec4 = [](RngStream& r) {
    return std::vector<Tensor>{random_vector(4, r), random_vector(4, r, 0.5, 2.0)};
  };
  Eigen::VectorXi idx(5);
  idx << 0, 2, 2, 3, 1;
  std::vector<OpCase> cases = {
      {"add", [](Tape&, const std::vector<Value>& in) { return sum(add(in[0], in[1])); }, two_vec4},
      {"sub", [](Tape&, const std::vector<Value>& in) { return sum(sub(in[0], in[1])); }, two_vec4},
      {"mul", [](Tape&, const std::vector<Value>& in) { return sum(mul(in[0], in[1])); }, two_vec4},
      {"div", [](Tape&, const std::vector<Value>& in) { return sum(div(in[0], in[1])); }, two_vec4},
      {"scalar_bcast_mul",
       [](Tape&, const std::vector<Value>& in) { return sum(mul(in[0], sum(in[1]))); },
       two_vec4},
      {"matmul",
       [](Tape&, const std::vector<Value>& in) { return sum(matmul(in[0], in[1])); },
       [&](RngStream& r) {
         return std::vector<Tensor>{random_matrix(3, 4, r), random_matrix(4, 2, r)};
       }},
      {"tanh", [](Tape&, const std::vector<Value>& in) { return sum(tanh(in[0])); }, vec4},
      {"sigmoid", [](Tape&, const std::vector<Value>& in) { return sum(sigmoid(in[0])); }, vec4},
      {"abs", [](Tape&, const std::vector<Value>& in) { return sum(abs(in[0])); }, vec4pos},
      {"log", [](Tape&, const std::vector<Value>& in) { return sum(log(in[0])); }, vec4pos},
      {"exp", [](Tape&, const std::vector<Value>& in) { return sum(exp(in[0])); }, vec4},
      {"square", [](Tape&, const std::vector<Value>& in) { return sum(square(in[0])); }, vec4},
      {"sqrt", [](Tape&, const std::vector<Value>& in) { return sum(sqrt(in[0])); }, vec4pos},
      {"mean", [](Tape&, const std::vector<Value>& in) { return mean(square(in[0])); }, vec4},
      {"logsumexp", [](Tape&, const std::vector<Value>& in) { return logsumexp(in[0]); }, vec4},
      {"concat",
       [](Tape&, const std::vector<Value>& in) {
         return sum(square(concat({in[0], in[1]})));
       },
       two_vec4},
      {"slice",
       [](Tape&, const std::vector<Value>& in) { return sum(square(slice(in[0], 1, 2))); },
       vec4},
      {"slice_rows",
       [](Tape&, const std::vector<Value>& in) {
         return sum(square(slice_rows(in[0], 1, 2)));
       },
       [&](RngStream& r) { return std::vector<Tensor>{random_matrix(4, 3, r)}; }},
      {"gather",
       [&](Tape&, const std::vector<Value>& in) { return sum(square(gather(in[0], idx))); },
       vec4},
      {"gather_cols",
       [&](Tape&, const std::vector<Value>& in) {
         return sum(square(gather_cols(in[0], idx)));
       },
       [&](RngStream& r) { return std::vector<Tensor>{random_matrix(3, 4, r)}; }},
      {"gather_entry",
       [&](Tape&, const std::vector<Value>& in) {
         Eigen::VectorXi rows(4);
         rows << 0, 2, 1, 2;
         return sum(square(gather_entry(in[0], rows)));
       },
       [&](RngStream& r) { return std::vector<Tensor>{random_matrix(3, 4, r)}; }},
      {"colsum",
       [](Tape&, const std::vector<Value>& in) { return sum(square(colsum(in[0]))); },
       [&](RngStream& r) { return std::vector<Tensor>{random_matrix(3, 4, r)}; }},
      {"add_colwise",
       [](Tape&, const std::vector<Value>& in) {
         return sum(square(add_colwise(in[0], in[1])));
       },
       [&](RngStream& r) {
         return std::vector<Tensor>{random_matrix(3, 4, r), random_vector(3, r)};
       }},
      {"div_rowwise",
       [](Tape&, const std::vector<Value>& in) {
         return sum(square(div_rowwise(in[0], in[1])));
       },
       [&](RngStream& r) {
         return std::vector<Tensor>{random_matrix(3, 4, r),
                                    random_vector(4, r, 0.5, 2.0)};
       }},
      {"reshape",
       [](Tape&, const std::vector<Value>& in) {
         return sum(square(reshape(in[0], 2, 2, 2)));
       },
       vec4},
  };
  for (const OpCase& c : cases) {
    CAPTURE(c.name);
    for (int rep = 0; rep < 10; ++rep) {
      RngStream rng = master.substream(c.name, rep);
      double err = gradient_check(c.f, c.point(rng), 1e-6);
      CHECK_MESSAGE(err < 1e-5, c.name << " rep " << rep << " err " << err);
    }
  }
}

TEST_CASE("adjoint linearity: backward of a sum equals summed backwards") {
  RngStream rng(9);
  Tensor pa = random_vector(5, rng);
  Tensor pb = random_vector(5, rng);

  Tape t1;
  Value a1 = t1.leaf(pa, true);
  Value b1 = t1.leaf(pb, true);
  Value l1 = sum(square(a1));
  Value l2 = sum(mul(a1, b1));
  t1.backward(add(l1, l2));
  Eigen::VectorXd joint = t1.grad(a1).raw();

  Tape t2;
  Value a2 = t2.leaf(pa, true);
  Value b2 = t2.leaf(pb, true);
  t2.backward(sum(square(a2)));
  t2.backward(sum(mul(a2, b2)));  // accumulates
  CHECK((t2.grad(a2).raw() - joint).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("shape mismatch raises a structured error naming the op") {
  Tape tape;
  Value a = tape.leaf(Tensor::vector(Eigen::VectorXd::Zero(3)), true);
  Value b = tape.leaf(Tensor::vector(Eigen::VectorXd::Zero(4)), true);
  CHECK_THROWS_WITH_AS(add(a, b),
                       doctest::Contains("add"), ShapeError);
  Eigen::VectorXi bad(1);
  bad << 7;
  CHECK_THROWS_AS(gather(a, bad), std::out_of_range);
}

TEST_CASE("non-scalar loss rejected") {
  Tape tape;
  Value a = tape.leaf(Tensor::vector(Eigen::VectorXd::Ones(3)), true);
  CHECK_THROWS_AS(tape.backward(a), std::invalid_argument);
}

TEST_CASE("clear-to-checkpoint replay is bit-identical with restored RNG") {
  Tape tape;
  Value w = tape.leaf(Tensor::scalar(0.7), true);
  int mark = tape.checkpoint();
  RngStream rng(11);

  auto run = [&](RngStream r) {
    Eigen::VectorXd noise(4);
    for (int i = 0; i < 4; ++i) noise[i] = r.normal();
    Value x = mul(tape.constant(Tensor::vector(noise)), w);
    return Eigen::VectorXd(tape.data(sum(square(x))).raw());
  };
  Eigen::VectorXd first = run(rng);
  tape.clear_to(mark);
  Eigen::VectorXd second = run(rng);  // same stream position: copies restart
  CHECK(first == second);
  CHECK(tape.node_count() > 0);
}
