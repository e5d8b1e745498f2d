#pragma once

#include <Eigen/Dense>

#include "rlpf/autodiff.hpp"
#include "rlpf/params.hpp"
#include "rlpf/random.hpp"

namespace rlpf {

// Learnable switching dynamic: gated memory update, regime probability head
// and regime prior. Parameter names carry the "switch." prefix.
struct SwitchNetConfig {
  int n_regimes = 8;
  int d_r = 8;  // memory dimensionality; defaults to n_regimes
  int d_h = 8;  // hidden width of the probability head; defaults to d_r
};

// Floor added to every unnormalized regime mass before normalization, so the
// head stays defined when the gated output is exactly zero.
inline constexpr double kRegimeMassFloor = 1e-8;

void init_switch_params(ParameterStore& store, const SwitchNetConfig& cfg,
                        RngStream rng);

struct SwitchValues {
  ag::Value theta1, theta2, theta3, theta4, theta5, theta6;
  ag::Value prior_logits;
};

SwitchValues bind_switch(const ParameterStore::Binding& b);

// Plain-double snapshot for evaluation-mode filtering.
struct SwitchMats {
  Eigen::MatrixXd theta1, theta2, theta3, theta4, theta5, theta6;
  Eigen::VectorXd prior_logits;
};

SwitchMats snapshot_switch(const ParameterStore& store);

// r_t = sigmoid(Th1 r) .* sigmoid(Th2 k') .* r + tanh(Th3 k') .* sigmoid(Th4 k'),
// vectorized over particles: r_prev is d_r x N, k holds one regime per column.
ag::Value memory_update(const SwitchValues& p, ag::Value r_prev,
                        const Eigen::VectorXi& k);
Eigen::MatrixXd memory_update_plain(const SwitchMats& p,
                                    const Eigen::MatrixXd& r_prev,
                                    const Eigen::VectorXi& k);

// Column-normalized regime masses |Th5 tanh(Th6 r)| + floor; n_regimes x N.
ag::Value regime_probs_matrix(const SwitchValues& p, ag::Value r_prev);
Eigen::MatrixXd regime_probs_matrix_plain(const SwitchMats& p,
                                          const Eigen::MatrixXd& r_prev);

// Probability vector for a single memory state.
Eigen::VectorXd regime_probs_plain(const SwitchMats& p,
                                   const Eigen::VectorXd& r_prev);

// log K(k_i | r_i) per particle.
ag::Value regime_log_prob(const SwitchValues& p, ag::Value r_prev,
                          const Eigen::VectorXi& k);

ag::Value prior_log_probs(const SwitchValues& p);  // log-softmax of the logits
Eigen::VectorXd prior_probs_plain(const Eigen::VectorXd& logits);

enum class RegimeProposal { Uniform, Target };

// Uniform mode draws k uniformly; the importance correction
// log K(k|r) - log(1/n) is returned by the training passes via
// regime_log_prob. Target mode draws from the head and needs no correction.
Eigen::VectorXi propose_regimes_plain(RegimeProposal mode, const SwitchMats& p,
                                      const Eigen::MatrixXd& r_prev,
                                      RngStream& rng);

}  // namespace rlpf
