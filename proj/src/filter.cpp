#include "rlpf/filter.hpp"

#include <cmath>

namespace rlpf {

double logsumexp(const Eigen::VectorXd& v) {
  double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

Eigen::VectorXi multinomial_resample(const Eigen::VectorXd& w, RngStream& rng) {
  Eigen::Index n = w.size();
  Eigen::VectorXi anc(n);
  for (Eigen::Index i = 0; i < n; ++i) anc[i] = rng.categorical(w);
  return anc;
}

Eigen::VectorXi systematic_resample(const Eigen::VectorXd& w, RngStream& rng) {
  Eigen::Index n = w.size();
  double u = rng.uniform();
  Eigen::VectorXi anc(n);
  double cum = w[0];
  Eigen::Index j = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double target = (static_cast<double>(i) + u) / static_cast<double>(n);
    // Half-open strata [C_{j-1}, C_j): advance while target is at or past C_j.
    while (cum <= target && j + 1 < n) cum += w[++j];
    anc[i] = static_cast<int>(j);
  }
  return anc;
}

Eigen::VectorXd soft_mixture(const Eigen::VectorXd& w, double alpha) {
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("soft_resample: alpha must lie in [0, 1]");
  double n = static_cast<double>(w.size());
  return alpha * w.array() + (1.0 - alpha) / n;
}

SoftResampleResult soft_resample(const Eigen::VectorXd& w, double alpha,
                                 RngStream& rng) {
  Eigen::VectorXd q = soft_mixture(w, alpha);
  SoftResampleResult out;
  out.ancestors = multinomial_resample(q, rng);
  out.corrected_weights.resize(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    int a = out.ancestors[i];
    out.corrected_weights[i] = w[a] / q[a];
  }
  return out;
}

SoftResampleDiff soft_resample_diff(ag::Value norm_log_weights, double alpha,
                                    RngStream& rng) {
  ag::Tape& tape = *norm_log_weights.tape;
  Eigen::VectorXd w = tape.data(norm_log_weights).array().exp();
  Eigen::VectorXd q = soft_mixture(w, alpha);
  SoftResampleDiff out;
  out.ancestors = multinomial_resample(q, rng);
  ag::Value log_w_anc = ag::gather(norm_log_weights, out.ancestors);
  Eigen::VectorXd log_q_anc(out.ancestors.size());
  for (Eigen::Index i = 0; i < out.ancestors.size(); ++i)
    log_q_anc[i] = std::log(q[out.ancestors[i]]);
  out.log_correction =
      ag::sub(log_w_anc, tape.constant(Tensor::vector(log_q_anc)));
  return out;
}

Eigen::VectorXi truncated_gradient_resample(const Eigen::VectorXd& w,
                                            RngStream& rng) {
  return multinomial_resample(w, rng);
}

double estimate_mean(const ParticleEnsemble& e) {
  double v = e.norm_weights.dot(e.locations);
  if (!std::isfinite(v)) throw std::runtime_error("estimate_mean: non-finite");
  return v;
}

double log_likelihood(const std::vector<Eigen::VectorXd>& step_log_weights) {
  if (step_log_weights.empty())
    throw std::invalid_argument("log_likelihood: need at least one step");
  double total = 0.0;
  for (const Eigen::VectorXd& lw : step_log_weights)
    total += logsumexp(lw) - std::log(static_cast<double>(lw.size()));
  if (!std::isfinite(total))
    throw std::runtime_error("log_likelihood: non-finite");
  return total;
}

namespace {

void gather_ensemble(ParticleEnsemble& e, const Eigen::VectorXi& anc) {
  Eigen::VectorXd x(e.n());
  Eigen::VectorXi k(e.n());
  for (int i = 0; i < e.n(); ++i) {
    x[i] = e.locations[anc[i]];
    k[i] = e.regimes[anc[i]];
  }
  e.locations = x;
  e.regimes = k;
  if (e.memory.size() > 0) {
    Eigen::MatrixXd mem(e.memory.rows(), e.n());
    for (int i = 0; i < e.n(); ++i) mem.col(i) = e.memory.col(anc[i]);
    e.memory = mem;
  }
  if (!e.history.empty()) {
    std::vector<RegimeHistory> h(static_cast<size_t>(e.n()),
                                 RegimeHistory(0));
    for (int i = 0; i < e.n(); ++i) h[static_cast<size_t>(i)] = e.history[anc[i]];
    e.history = std::move(h);
  }
  e.ancestors = anc;
}

}  // namespace

FilterOutput run_filter(const FilterModel& model, const Eigen::VectorXd& obs,
                        int n_particles, const FilterOptions& opts,
                        RngStream rng) {
  if (n_particles < 1)
    throw std::invalid_argument("run_filter: need at least one particle");
  if (obs.size() < 1)
    throw std::invalid_argument("run_filter: need at least one observation");
  int T = static_cast<int>(obs.size()) - 1;
  double logN = std::log(static_cast<double>(n_particles));

  FilterOutput out;
  out.estimates.resize(T + 1);
  out.log_lik_increments.resize(T + 1);

  ParticleEnsemble e;
  RngStream propose_rng = rng.substream("proposal");
  RngStream resample_rng = rng.substream("resample");

  Eigen::VectorXd carried_log = Eigen::VectorXd::Zero(n_particles);
  for (int t = 0; t <= T; ++t) {
    if (t == 0) {
      RngStream step_rng = propose_rng.substream("step", 0);
      model.init(e, n_particles, obs[0], step_rng);
      e.ancestors = Eigen::VectorXi::LinSpaced(n_particles, 0, n_particles - 1);
    } else {
      double ess = 1.0 / e.norm_weights.array().square().sum();
      bool do_resample = opts.ess_threshold < 0.0 ||
                         ess < opts.ess_threshold * n_particles;
      if (do_resample) {
        RngStream r = resample_rng.substream("step", t);
        Eigen::VectorXi anc = opts.scheme == ResamplingScheme::Systematic
                                  ? systematic_resample(e.norm_weights, r)
                                  : multinomial_resample(e.norm_weights, r);
        gather_ensemble(e, anc);
        carried_log.setZero();
      } else {
        carried_log = e.log_weights.array() - logsumexp(e.log_weights) + logN;
      }
      RngStream step_rng = propose_rng.substream("step", t);
      model.step(e, t, obs[t], step_rng);
      e.log_weights += carried_log;
    }
    double lse = logsumexp(e.log_weights);
    if (!std::isfinite(lse)) throw DegeneracyError(t);
    e.norm_weights = (e.log_weights.array() - lse).exp();
    out.log_lik_increments[t] = lse - logN;
    out.estimates[t] = estimate_mean(e);
  }
  out.log_lik = out.log_lik_increments.sum();
  out.final_ensemble = std::move(e);
  return out;
}

}  // namespace rlpf
