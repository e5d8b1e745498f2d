#include "rlpf/regime_net.hpp"

#include <cmath>

namespace rlpf {

namespace {
double stable_sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}
}  // namespace

void init_switch_params(ParameterStore& store, const SwitchNetConfig& cfg,
                        RngStream rng) {
  int n = cfg.n_regimes, dr = cfg.d_r, dh = cfg.d_h;
  store.add("switch.theta1", ParameterStore::init_matrix(dr, dr, rng));
  store.add("switch.theta2", ParameterStore::init_matrix(dr, n, rng));
  store.add("switch.theta3", ParameterStore::init_matrix(dr, n, rng));
  store.add("switch.theta4", ParameterStore::init_matrix(dr, n, rng));
  store.add("switch.theta5", ParameterStore::init_matrix(n, dh, rng));
  store.add("switch.theta6", ParameterStore::init_matrix(dh, dr, rng));
  store.add("switch.prior_logits", Tensor::vector(Eigen::VectorXd::Zero(n)),
            /*weight_decay=*/false);
}

SwitchValues bind_switch(const ParameterStore::Binding& b) {
  return {b["switch.theta1"], b["switch.theta2"], b["switch.theta3"],
          b["switch.theta4"], b["switch.theta5"], b["switch.theta6"],
          b["switch.prior_logits"]};
}

SwitchMats snapshot_switch(const ParameterStore& store) {
  auto m = [&](const char* name) {
    return Eigen::MatrixXd(store.at(name).value.mat());
  };
  SwitchMats s;
  s.theta1 = m("switch.theta1");
  s.theta2 = m("switch.theta2");
  s.theta3 = m("switch.theta3");
  s.theta4 = m("switch.theta4");
  s.theta5 = m("switch.theta5");
  s.theta6 = m("switch.theta6");
  s.prior_logits = store.at("switch.prior_logits").value.vec();
  return s;
}

ag::Value memory_update(const SwitchValues& p, ag::Value r_prev,
                        const Eigen::VectorXi& k) {
  using namespace ag;
  Value keep = mul(sigmoid(matmul(p.theta1, r_prev)),
                   sigmoid(gather_cols(p.theta2, k)));
  Value write = mul(tanh(gather_cols(p.theta3, k)),
                    sigmoid(gather_cols(p.theta4, k)));
  return add(mul(keep, r_prev), write);
}

Eigen::MatrixXd memory_update_plain(const SwitchMats& p,
                                    const Eigen::MatrixXd& r_prev,
                                    const Eigen::VectorXi& k) {
  Eigen::MatrixXd g1 =
      (p.theta1 * r_prev).unaryExpr([](double v) { return stable_sigmoid(v); });
  Eigen::MatrixXd out(r_prev.rows(), r_prev.cols());
  for (Eigen::Index i = 0; i < k.size(); ++i) {
    Eigen::ArrayXd g2 =
        p.theta2.col(k[i]).unaryExpr([](double v) { return stable_sigmoid(v); });
    Eigen::ArrayXd g3 = p.theta3.col(k[i]).array().tanh();
    Eigen::ArrayXd g4 =
        p.theta4.col(k[i]).unaryExpr([](double v) { return stable_sigmoid(v); });
    out.col(i) =
        g1.col(i).array() * g2 * r_prev.col(i).array() + g3 * g4;
  }
  return out;
}

ag::Value regime_probs_matrix(const SwitchValues& p, ag::Value r_prev) {
  using namespace ag;
  Value mass = add_const(
      abs(matmul(p.theta5, tanh(matmul(p.theta6, r_prev)))), kRegimeMassFloor);
  return div_rowwise(mass, colsum(mass));
}

Eigen::MatrixXd regime_probs_matrix_plain(const SwitchMats& p,
                                          const Eigen::MatrixXd& r_prev) {
  Eigen::MatrixXd mass =
      ((p.theta5 * (p.theta6 * r_prev).array().tanh().matrix()).array().abs() +
       kRegimeMassFloor)
          .matrix();
  return mass.array().rowwise() / mass.colwise().sum().array();
}

Eigen::VectorXd regime_probs_plain(const SwitchMats& p,
                                   const Eigen::VectorXd& r_prev) {
  return regime_probs_matrix_plain(p, r_prev).col(0);
}

ag::Value regime_log_prob(const SwitchValues& p, ag::Value r_prev,
                          const Eigen::VectorXi& k) {
  return ag::log(ag::gather_entry(regime_probs_matrix(p, r_prev), k));
}

ag::Value prior_log_probs(const SwitchValues& p) {
  return ag::sub(p.prior_logits, ag::logsumexp(p.prior_logits));
}

Eigen::VectorXd prior_probs_plain(const Eigen::VectorXd& logits) {
  Eigen::ArrayXd shifted = logits.array() - logits.maxCoeff();
  Eigen::ArrayXd e = shifted.exp();
  return e / e.sum();
}

Eigen::VectorXi propose_regimes_plain(RegimeProposal mode, const SwitchMats& p,
                                      const Eigen::MatrixXd& r_prev,
                                      RngStream& rng) {
  Eigen::Index n_particles = r_prev.cols();
  Eigen::VectorXi k(n_particles);
  if (mode == RegimeProposal::Uniform) {
    int n = static_cast<int>(p.theta5.rows());
    for (Eigen::Index i = 0; i < n_particles; ++i) k[i] = rng.uniform_int(n);
  } else {
    Eigen::MatrixXd probs = regime_probs_matrix_plain(p, r_prev);
    for (Eigen::Index i = 0; i < n_particles; ++i)
      k[i] = rng.categorical(probs.col(i));
  }
  return k;
}

}  // namespace rlpf
