#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace ssrlab {

// splitmix64, used to derive independent sub-seeds from a master seed and a
// counter so that trial k of an experiment never shares a stream with trial
// k+1 regardless of how many draws each consumes.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_subseed(std::uint64_t seed, std::uint64_t counter) {
  return splitmix64(seed ^ splitmix64(counter + 1));
}

// Seeded PRNG wrapper. All randomness in the library flows through this
// class; uniform01() avoids std::uniform_real_distribution so the stream is
// identical wherever std::mt19937_64 is.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  std::complex<double> complex_gaussian() {
    return {gaussian(), gaussian()};
  }

  // Uniformly random qubit (alpha, beta) with |alpha|^2 + |beta|^2 = 1.
  std::pair<std::complex<double>, std::complex<double>> random_qubit() {
    std::complex<double> a = complex_gaussian();
    std::complex<double> b = complex_gaussian();
    double norm = std::sqrt(std::norm(a) + std::norm(b));
    while (norm < 1e-6) {
      a = complex_gaussian();
      b = complex_gaussian();
      norm = std::sqrt(std::norm(a) + std::norm(b));
    }
    return {a / norm, b / norm};
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace ssrlab
