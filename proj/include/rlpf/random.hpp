#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string_view>

namespace rlpf {

namespace detail {
// SplitMix64 output mixer.
inline uint64_t mix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}
}  // namespace detail

// Counter-based stream: the i-th output is a pure function of (base, i), so
// substreams derived from the base key are independent of how much the
// parent stream has consumed.
class RngStream {
 public:
  explicit RngStream(uint64_t seed) : base_(detail::mix64(seed)) {}

  RngStream substream(uint64_t key) const {
    RngStream s(0);
    s.base_ = detail::mix64(base_ ^ detail::mix64(key ^ 0xA5A5A5A5A5A5A5A5ull));
    s.ctr_ = 0;
    return s;
  }

  RngStream substream(std::string_view name, uint64_t index = 0) const {
    return substream(detail::fnv1a(name) + 0x9E3779B97F4A7C15ull * index);
  }

  uint64_t next_u64() { return detail::mix64(base_ + (++ctr_) * 0xD1B54A32D192ED03ull); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; consumes exactly two draws per call.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Inverse-CDF categorical draw over an (unchecked) probability vector.
  int categorical(const Eigen::Ref<const Eigen::VectorXd>& probs) {
    double u = uniform();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size() - 1);
  }

  int uniform_int(int n) {  // 0..n-1
    if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
    return static_cast<int>(uniform() * n) % n;
  }

 private:
  uint64_t base_;
  uint64_t ctr_ = 0;
};

}  // namespace rlpf
