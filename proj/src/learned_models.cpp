#include "rlpf/learned_models.hpp"

#include <cmath>
#include <numbers>

namespace rlpf {

namespace {
std::string net_name(const std::string& prefix, const char* which, int k,
                     const char* field) {
  return prefix + "." + which + std::to_string(k) + "." + field;
}
}  // namespace

void init_model_params(ParameterStore& store, const LearnedModelConfig& cfg,
                       RngStream rng) {
  int H = cfg.hidden;
  for (const char* which : {"dyn", "obs"}) {
    for (int k = 0; k < cfg.n_regimes; ++k) {
      store.add(net_name(cfg.prefix, which, k, "W1"),
                ParameterStore::init_matrix(H, 1, rng));
      store.add(net_name(cfg.prefix, which, k, "b1"),
                Tensor::vector(Eigen::VectorXd::Zero(H)), false);
      store.add(net_name(cfg.prefix, which, k, "W2"),
                ParameterStore::init_matrix(1, H, rng));
      store.add(net_name(cfg.prefix, which, k, "b2"),
                Tensor::vector(Eigen::VectorXd::Zero(1)), false);
    }
  }
  // raw 0 maps to variance 0.5; excluded from weight decay
  store.add(cfg.prefix + ".dyn_var_raw", Tensor::scalar(0.0), false);
  store.add(cfg.prefix + ".obs_var_raw", Tensor::scalar(0.0), false);
}

ModelValues bind_models(const ParameterStore::Binding& b,
                        const LearnedModelConfig& cfg) {
  ModelValues mv;
  for (int k = 0; k < cfg.n_regimes; ++k) {
    mv.dyn.push_back({b[net_name(cfg.prefix, "dyn", k, "W1")],
                      b[net_name(cfg.prefix, "dyn", k, "b1")],
                      b[net_name(cfg.prefix, "dyn", k, "W2")],
                      b[net_name(cfg.prefix, "dyn", k, "b2")]});
    mv.obs.push_back({b[net_name(cfg.prefix, "obs", k, "W1")],
                      b[net_name(cfg.prefix, "obs", k, "b1")],
                      b[net_name(cfg.prefix, "obs", k, "W2")],
                      b[net_name(cfg.prefix, "obs", k, "b2")]});
  }
  mv.dyn_var_raw = b[cfg.prefix + ".dyn_var_raw"];
  mv.obs_var_raw = b[cfg.prefix + ".obs_var_raw"];
  return mv;
}

ModelMats snapshot_models(const ParameterStore& store,
                          const LearnedModelConfig& cfg) {
  ModelMats mm;
  auto net = [&](const char* which, int k) {
    NetMats n;
    n.W1 = store.at(net_name(cfg.prefix, which, k, "W1")).value.mat();
    n.b1 = store.at(net_name(cfg.prefix, which, k, "b1")).value.vec();
    n.W2 = store.at(net_name(cfg.prefix, which, k, "W2")).value.mat();
    n.b2 = store.at(net_name(cfg.prefix, which, k, "b2")).value.vec();
    return n;
  };
  for (int k = 0; k < cfg.n_regimes; ++k) {
    mm.dyn.push_back(net("dyn", k));
    mm.obs.push_back(net("obs", k));
  }
  mm.dyn_var = constrain_variance(store.at(cfg.prefix + ".dyn_var_raw").value.value());
  mm.obs_var = constrain_variance(store.at(cfg.prefix + ".obs_var_raw").value.value());
  return mm;
}

double constrain_variance(double raw) {
  return raw >= 0.0 ? 1.0 / (1.0 + std::exp(-raw))
                    : std::exp(raw) / (1.0 + std::exp(raw));
}

ag::Value variance(ag::Value raw) { return ag::sigmoid(raw); }

ag::Value net_mean(const NetValues& net, ag::Value x) {
  using namespace ag;
  Eigen::Index n = x.tape->data(x).size();
  Value row = reshape(x, 2, 1, n);
  Value hidden = tanh(add_colwise(matmul(net.W1, row), net.b1));
  Value out = add_colwise(matmul(net.W2, hidden), net.b2);
  return reshape(out, 1, n);
}

Eigen::VectorXd net_mean_plain(const NetMats& net, const Eigen::VectorXd& x) {
  Eigen::MatrixXd hidden =
      ((net.W1 * x.transpose()).colwise() + net.b1).array().tanh();
  return ((net.W2 * hidden).colwise() + net.b2).transpose();
}

ag::Value regime_net_mean(ag::Tape& tape, const std::vector<NetValues>& nets,
                          ag::Value x, const Eigen::VectorXi& k) {
  using namespace ag;
  Eigen::Index n = tape.data(x).size();
  Value acc{};
  for (size_t r = 0; r < nets.size(); ++r) {
    Eigen::VectorXd mask = Eigen::VectorXd::Zero(n);
    bool any = false;
    for (Eigen::Index i = 0; i < n; ++i)
      if (k[i] == static_cast<int>(r)) {
        mask[i] = 1.0;
        any = true;
      }
    if (!any) continue;
    Value term = mul(net_mean(nets[r], x), tape.constant(Tensor::vector(mask)));
    acc = acc.tape ? add(acc, term) : term;
  }
  if (!acc.tape) acc = tape.constant(Tensor::vector(Eigen::VectorXd::Zero(n)));
  return acc;
}

Eigen::VectorXd regime_net_mean_plain(const std::vector<NetMats>& nets,
                                      const Eigen::VectorXd& x,
                                      const Eigen::VectorXi& k) {
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const NetMats& net = nets[static_cast<size_t>(k[i])];
    Eigen::ArrayXd hidden = (net.W1.col(0).array() * x[i] + net.b1.array()).tanh();
    out[i] = (net.W2.row(0).array() * hidden.transpose()).sum() + net.b2[0];
  }
  return out;
}

ag::Value gaussian_log_pdf(ag::Tape& tape, ag::Value mean, ag::Value var,
                           const Eigen::VectorXd& y) {
  using namespace ag;
  Value yv = tape.constant(Tensor::vector(y));
  Value resid = square(sub(yv, mean));
  Value half_log = scalar_mul(log(scalar_mul(var, 2.0 * std::numbers::pi)), 0.5);
  return sub(neg(div(resid, scalar_mul(var, 2.0))), half_log);
}

Eigen::VectorXd gaussian_log_pdf_plain(const Eigen::VectorXd& mean, double var,
                                       const Eigen::VectorXd& y) {
  double norm = 0.5 * std::log(2.0 * std::numbers::pi * var);
  return (-(y - mean).array().square() / (2.0 * var) - norm).matrix();
}

double gaussian_log_pdf_plain(double mean, double var, double y) {
  return -0.5 * std::log(2.0 * std::numbers::pi * var) -
         (y - mean) * (y - mean) / (2.0 * var);
}

ag::Value reparam_sample(ag::Tape& tape, ag::Value mean, ag::Value var,
                         RngStream& rng) {
  using namespace ag;
  Eigen::Index n = tape.data(mean).size();
  Eigen::VectorXd eps(n);
  for (Eigen::Index i = 0; i < n; ++i) eps[i] = rng.normal();
  Value noise = mul(tape.constant(Tensor::vector(eps)), sqrt(var));
  return add(mean, noise);
}

}  // namespace rlpf
