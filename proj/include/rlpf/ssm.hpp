#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "rlpf/random.hpp"

namespace rlpf {

// Per-regime affine coefficients and the shared noise variance.
// Regime indices are 0-based everywhere in memory; files use 1-based labels.
struct RegimeBank {
  Eigen::VectorXd a;
  Eigen::VectorXd b;
  double sigma2 = 0.1;

  int n_regimes() const { return static_cast<int>(a.size()); }

  static RegimeBank paper_default();
};

double dynamic_mean(double x_prev, int k, const RegimeBank& bank);
double observation_mean(double x, int k, const RegimeBank& bank);

// Incremental regime-history summary sufficient for both true dynamics.
struct RegimeHistory {
  int last = -1;
  int len = 0;
  Eigen::VectorXi counts;  // occurrences per regime over s = 0..t-1

  explicit RegimeHistory(int n_regimes = 0)
      : counts(Eigen::VectorXi::Zero(n_regimes)) {}

  void push(int k) {
    last = k;
    ++len;
    ++counts[k];
  }
};

class SwitchingDynamic {
 public:
  virtual ~SwitchingDynamic() = default;
  virtual int n_regimes() const = 0;
  virtual Eigen::VectorXd initial_probs() const {
    return Eigen::VectorXd::Constant(n_regimes(), 1.0 / n_regimes());
  }
  virtual Eigen::VectorXd transition_probs(const RegimeHistory& h) const = 0;
};

// Column-stochastic transition matrix: B(i, j) = P(k_t = i | k_{t-1} = j).
struct MarkovDynamic final : SwitchingDynamic {
  Eigen::MatrixXd B;

  explicit MarkovDynamic(Eigen::MatrixXd transition);
  static MarkovDynamic paper_default(int n_regimes = 8);

  int n_regimes() const override { return static_cast<int>(B.rows()); }
  Eigen::VectorXd transition_probs(const RegimeHistory& h) const override;
};

// Urn with one initial ball per regime; counts run over s = 0..t-1.
struct PolyaDynamic final : SwitchingDynamic {
  int n;

  explicit PolyaDynamic(int n_regimes = 8) : n(n_regimes) {}

  int n_regimes() const override { return n; }
  Eigen::VectorXd transition_probs(const RegimeHistory& h) const override;
};

Eigen::VectorXd markov_probs(int k_prev, const MarkovDynamic& dyn);
Eigen::VectorXd polya_probs(const std::vector<int>& history, int n_regimes);

struct Trajectory {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXi k;

  int T() const { return static_cast<int>(x.size()) - 1; }
};

Trajectory simulate(const SwitchingDynamic& dyn, const RegimeBank& bank, int T,
                    RngStream rng);

struct Dataset {
  std::vector<Trajectory> train;
  std::vector<Trajectory> val;
  std::vector<Trajectory> test;
};

// Splits 50/25/25 with the remainder assigned to training. Each trajectory
// consumes an independent substream of the master seed.
Dataset generate_dataset(const SwitchingDynamic& dyn, const RegimeBank& bank,
                         int n_traj, int T, uint64_t seed);

// CSV interchange: header "traj_id,t,x,y,k" with 1-based regime labels.
void write_trajectories_csv(const std::string& path,
                            const std::vector<Trajectory>& trajs);
std::vector<Trajectory> read_trajectories_csv(const std::string& path);

// Packed binary with a 16-byte header (magic, version, n_traj, T).
void write_trajectories_bin(const std::string& path,
                            const std::vector<Trajectory>& trajs);
std::vector<Trajectory> read_trajectories_bin(const std::string& path);

uint64_t file_hash(const std::string& path);

}  // namespace rlpf
