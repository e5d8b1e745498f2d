#include "rlpf/ssm.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rlpf {

RegimeBank RegimeBank::paper_default() {
  RegimeBank bank;
  bank.a.resize(8);
  bank.a << -0.1, -0.3, -0.5, -0.9, 0.1, 0.3, 0.5, 0.9;
  bank.b.resize(8);
  bank.b << 0, -2, 2, -4, 0, 2, -2, 4;
  bank.sigma2 = 0.1;
  return bank;
}

namespace {
void check_regime(int k, int n, const char* op) {
  if (k < 0 || k >= n)
    throw std::out_of_range(std::string(op) + ": regime index " +
                            std::to_string(k) + " outside [0, " +
                            std::to_string(n) + ")");
}
}  // namespace

double dynamic_mean(double x_prev, int k, const RegimeBank& bank) {
  check_regime(k, bank.n_regimes(), "dynamic_mean");
  return bank.a[k] * x_prev + bank.b[k];
}

double observation_mean(double x, int k, const RegimeBank& bank) {
  check_regime(k, bank.n_regimes(), "observation_mean");
  return bank.a[k] * std::sqrt(std::abs(x)) + bank.b[k];
}

MarkovDynamic::MarkovDynamic(Eigen::MatrixXd transition) : B(std::move(transition)) {
  if (B.rows() != B.cols()) throw std::invalid_argument("MarkovDynamic: B must be square");
  for (Eigen::Index j = 0; j < B.cols(); ++j) {
    if (B.col(j).minCoeff() < 0.0 || std::abs(B.col(j).sum() - 1.0) > 1e-12)
      throw std::invalid_argument("MarkovDynamic: column " + std::to_string(j) +
                                  " is not a probability vector");
  }
}

MarkovDynamic MarkovDynamic::paper_default(int n) {
  double rho = 1.0 / 120.0;
  Eigen::MatrixXd B = Eigen::MatrixXd::Constant(n, n, rho);
  for (int j = 0; j < n; ++j) {
    B(j, j) = 0.8;
    B(((j - 1) % n + n) % n, j) = 0.15;  // one step "up" with wraparound
  }
  return MarkovDynamic(B);
}

Eigen::VectorXd MarkovDynamic::transition_probs(const RegimeHistory& h) const {
  check_regime(h.last, n_regimes(), "markov_probs");
  return B.col(h.last);
}

Eigen::VectorXd PolyaDynamic::transition_probs(const RegimeHistory& h) const {
  Eigen::VectorXd p(n);
  double denom = static_cast<double>(n + h.len);
  for (int c = 0; c < n; ++c) p[c] = (1.0 + h.counts[c]) / denom;
  return p;
}

Eigen::VectorXd markov_probs(int k_prev, const MarkovDynamic& dyn) {
  RegimeHistory h(dyn.n_regimes());
  h.push(0);
  h.last = k_prev;
  return dyn.transition_probs(h);
}

Eigen::VectorXd polya_probs(const std::vector<int>& history, int n_regimes) {
  RegimeHistory h(n_regimes);
  for (int k : history) {
    check_regime(k, n_regimes, "polya_probs");
    h.push(k);
  }
  PolyaDynamic dyn(n_regimes);
  return dyn.transition_probs(h);
}

Trajectory simulate(const SwitchingDynamic& dyn, const RegimeBank& bank, int T,
                    RngStream rng) {
  if (T < 0) throw std::invalid_argument("simulate: T must be >= 0");
  Trajectory traj;
  traj.x.resize(T + 1);
  traj.y.resize(T + 1);
  traj.k.resize(T + 1);
  double sigma = std::sqrt(bank.sigma2);
  RegimeHistory hist(dyn.n_regimes());
  for (int t = 0; t <= T; ++t) {
    Eigen::VectorXd probs =
        t == 0 ? dyn.initial_probs() : dyn.transition_probs(hist);
    int k = rng.categorical(probs);
    traj.k[t] = k;
    if (t == 0)
      traj.x[t] = rng.uniform(-0.5, 0.5);
    else
      traj.x[t] = rng.normal(dynamic_mean(traj.x[t - 1], k, bank), sigma);
    traj.y[t] = rng.normal(observation_mean(traj.x[t], k, bank), sigma);
    hist.push(k);
  }
  return traj;
}

Dataset generate_dataset(const SwitchingDynamic& dyn, const RegimeBank& bank,
                         int n_traj, int T, uint64_t seed) {
  if (n_traj <= 0) throw std::invalid_argument("generate_dataset: n_traj must be positive");
  RngStream master(seed);
  std::vector<Trajectory> all;
  all.reserve(n_traj);
  for (int i = 0; i < n_traj; ++i)
    all.push_back(simulate(dyn, bank, T, master.substream("trajectory", i)));
  int n_val = n_traj / 4;
  int n_test = n_traj / 4;
  int n_train = n_traj - n_val - n_test;
  Dataset ds;
  ds.train.assign(all.begin(), all.begin() + n_train);
  ds.val.assign(all.begin() + n_train, all.begin() + n_train + n_val);
  ds.test.assign(all.begin() + n_train + n_val, all.end());
  return ds;
}

void write_trajectories_csv(const std::string& path,
                            const std::vector<Trajectory>& trajs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "traj_id,t,x,y,k\n";
  out.precision(17);
  for (size_t i = 0; i < trajs.size(); ++i) {
    const Trajectory& tr = trajs[i];
    for (int t = 0; t <= tr.T(); ++t)
      out << i << ',' << t << ',' << tr.x[t] << ',' << tr.y[t] << ','
          << tr.k[t] + 1 << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<Trajectory> read_trajectories_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "traj_id,t,x,y,k")
    throw std::runtime_error("bad trajectory CSV header in " + path);
  std::vector<std::vector<double>> xs, ys;
  std::vector<std::vector<int>> ks;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');
    size_t id = std::stoul(field);
    std::getline(ss, field, ',');  // t, implied by row order
    std::getline(ss, field, ',');
    double x = std::stod(field);
    std::getline(ss, field, ',');
    double y = std::stod(field);
    std::getline(ss, field, ',');
    int k = std::stoi(field) - 1;
    if (id >= xs.size()) {
      xs.resize(id + 1);
      ys.resize(id + 1);
      ks.resize(id + 1);
    }
    xs[id].push_back(x);
    ys[id].push_back(y);
    ks[id].push_back(k);
  }
  std::vector<Trajectory> trajs(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    trajs[i].x = Eigen::Map<const Eigen::VectorXd>(xs[i].data(), xs[i].size());
    trajs[i].y = Eigen::Map<const Eigen::VectorXd>(ys[i].data(), ys[i].size());
    trajs[i].k = Eigen::Map<const Eigen::VectorXi>(ks[i].data(), ks[i].size());
  }
  return trajs;
}

namespace {
constexpr uint32_t kTrajMagic = 0x464C5254;  // "TRLF"
constexpr uint32_t kTrajVersion = 1;
}  // namespace

void write_trajectories_bin(const std::string& path,
                            const std::vector<Trajectory>& trajs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  uint32_t header[4] = {kTrajMagic, kTrajVersion,
                        static_cast<uint32_t>(trajs.size()),
                        trajs.empty() ? 0u
                                      : static_cast<uint32_t>(trajs[0].T())};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  for (const Trajectory& tr : trajs) {
    uint32_t len = static_cast<uint32_t>(tr.x.size());
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(reinterpret_cast<const char*>(tr.x.data()), len * sizeof(double));
    out.write(reinterpret_cast<const char*>(tr.y.data()), len * sizeof(double));
    out.write(reinterpret_cast<const char*>(tr.k.data()), len * sizeof(int));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<Trajectory> read_trajectories_bin(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  uint32_t header[4];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in || header[0] != kTrajMagic || header[1] != kTrajVersion)
    throw std::runtime_error("bad trajectory binary header in " + path);
  std::vector<Trajectory> trajs(header[2]);
  for (Trajectory& tr : trajs) {
    uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    tr.x.resize(len);
    tr.y.resize(len);
    tr.k.resize(len);
    in.read(reinterpret_cast<char*>(tr.x.data()), len * sizeof(double));
    in.read(reinterpret_cast<char*>(tr.y.data()), len * sizeof(double));
    in.read(reinterpret_cast<char*>(tr.k.data()), len * sizeof(int));
    if (!in) throw std::runtime_error("truncated trajectory binary: " + path);
  }
  return trajs;
}

uint64_t file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
    if (!in) break;
  }
  return h;
}

}  // namespace rlpf
