#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rlpf/autodiff.hpp"
#include "rlpf/params.hpp"
#include "rlpf/random.hpp"

namespace rlpf {

// Neural per-regime dynamic and observation models: one hidden tanh layer
// (1 -> H -> 1) per network, plus shared raw variance parameters mapped
// through a logistic so realized variances stay in (0, 1).
struct LearnedModelConfig {
  int n_regimes = 8;
  int hidden = 16;
  std::string prefix = "model";
};

void init_model_params(ParameterStore& store, const LearnedModelConfig& cfg,
                       RngStream rng);

struct NetValues {
  ag::Value W1, b1, W2, b2;
};

struct ModelValues {
  std::vector<NetValues> dyn;
  std::vector<NetValues> obs;
  ag::Value dyn_var_raw, obs_var_raw;
};

ModelValues bind_models(const ParameterStore::Binding& b,
                        const LearnedModelConfig& cfg);

struct NetMats {
  Eigen::MatrixXd W1, W2;
  Eigen::VectorXd b1, b2;
};

struct ModelMats {
  std::vector<NetMats> dyn;
  std::vector<NetMats> obs;
  double dyn_var = 0.5, obs_var = 0.5;
};

ModelMats snapshot_models(const ParameterStore& store,
                          const LearnedModelConfig& cfg);

double constrain_variance(double raw);  // logistic, overflow-safe

// variance = sigmoid(raw) as a tape value.
ag::Value variance(ag::Value raw);

// Network mean over a batch of scalar inputs (length-N vector in/out).
ag::Value net_mean(const NetValues& net, ag::Value x);
Eigen::VectorXd net_mean_plain(const NetMats& net, const Eigen::VectorXd& x);

// Per-particle mean where particle i uses the network of regime k[i].
ag::Value regime_net_mean(ag::Tape& tape, const std::vector<NetValues>& nets,
                          ag::Value x, const Eigen::VectorXi& k);
Eigen::VectorXd regime_net_mean_plain(const std::vector<NetMats>& nets,
                                      const Eigen::VectorXd& x,
                                      const Eigen::VectorXi& k);

// Elementwise Gaussian log-density of observations under per-particle means.
ag::Value gaussian_log_pdf(ag::Tape& tape, ag::Value mean, ag::Value var,
                           const Eigen::VectorXd& y);
Eigen::VectorXd gaussian_log_pdf_plain(const Eigen::VectorXd& mean, double var,
                                       const Eigen::VectorXd& y);
double gaussian_log_pdf_plain(double mean, double var, double y);

// Reparameterized draw x = mean + sqrt(var) * eps with eps sampled
// gradient-free.
ag::Value reparam_sample(ag::Tape& tape, ag::Value mean, ag::Value var,
                         RngStream& rng);

}  // namespace rlpf
