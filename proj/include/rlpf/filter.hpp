#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "rlpf/autodiff.hpp"
#include "rlpf/random.hpp"
#include "rlpf/ssm.hpp"

namespace rlpf {

struct DegeneracyError : std::runtime_error {
  int step;
  explicit DegeneracyError(int t)
      : std::runtime_error("particle weights degenerate at step " +
                           std::to_string(t)),
        step(t) {}
};

enum class ResamplingScheme { Multinomial, Systematic };

// Per-step particle state for the plain (non-differentiable) filter path.
struct ParticleEnsemble {
  Eigen::VectorXd locations;
  Eigen::VectorXi regimes;
  Eigen::MatrixXd memory;              // d_r x N, optional (0 rows when unused)
  std::vector<RegimeHistory> history;  // optional, for history-dependent dynamics
  Eigen::VectorXd log_weights;
  Eigen::VectorXd norm_weights;
  Eigen::VectorXi ancestors;

  int n() const { return static_cast<int>(locations.size()); }
};

struct FilterOutput {
  Eigen::VectorXd estimates;            // x-hat per step
  Eigen::VectorXd log_lik_increments;   // logsumexp(log w_t) - log N
  double log_lik = 0.0;
  ParticleEnsemble final_ensemble;
};

// Model plugged into the generic filter: fills proposals and unnormalized
// log-weights; the filter owns resampling, normalization and estimates.
class FilterModel {
 public:
  virtual ~FilterModel() = default;
  // Sample initial particles and set log_weights to log(M0/Q0 * G(y0|.)).
  virtual void init(ParticleEnsemble& e, int n, double y0, RngStream& rng) const = 0;
  // Propose step-t particles from the (already resampled) ensemble and set
  // log_weights to the step increment log((M/Q) * G(y_t|.)); the carried
  // resampling weight is added by the filter.
  virtual void step(ParticleEnsemble& e, int t, double y, RngStream& rng) const = 0;
};

Eigen::VectorXi multinomial_resample(const Eigen::VectorXd& norm_weights,
                                     RngStream& rng);

// Single uniform u in [0,1); counts obey floor/ceil of N * w for every i.
Eigen::VectorXi systematic_resample(const Eigen::VectorXd& norm_weights,
                                    RngStream& rng);

// Proposal mixture q = alpha * w + (1 - alpha)/N used by soft resampling.
Eigen::VectorXd soft_mixture(const Eigen::VectorXd& norm_weights, double alpha);

struct SoftResampleResult {
  Eigen::VectorXi ancestors;
  Eigen::VectorXd corrected_weights;  // w[a_i] / q[a_i]
};

SoftResampleResult soft_resample(const Eigen::VectorXd& norm_weights,
                                 double alpha, RngStream& rng);

// Differentiable soft-resampling correction: ancestors are drawn from the
// mixture built on plain weight data, the returned log-correction
// log(w-bar[a]) - log(q[a]) keeps gradient through the normalized log-weights.
struct SoftResampleDiff {
  Eigen::VectorXi ancestors;
  ag::Value log_correction;
};

SoftResampleDiff soft_resample_diff(ag::Value norm_log_weights, double alpha,
                                    RngStream& rng);

// Multinomial draw whose gathered quantities must be routed through
// stop-gradient by the caller; the draw itself is the same as multinomial.
Eigen::VectorXi truncated_gradient_resample(const Eigen::VectorXd& norm_weights,
                                            RngStream& rng);

double estimate_mean(const ParticleEnsemble& e);

// Sum over steps of logsumexp(log w_t) - log N, from unnormalized log-weights.
double log_likelihood(const std::vector<Eigen::VectorXd>& step_log_weights);

struct FilterOptions {
  ResamplingScheme scheme = ResamplingScheme::Multinomial;
  // Resampling runs every step by default; when >= 0, resample only when
  // ESS / N falls below this threshold.
  double ess_threshold = -1.0;
};

FilterOutput run_filter(const FilterModel& model, const Eigen::VectorXd& observations,
                        int n_particles, const FilterOptions& opts, RngStream rng);

double logsumexp(const Eigen::VectorXd& v);

}  // namespace rlpf
