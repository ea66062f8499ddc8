#pragma once

#include <cstdint>
#include <vector>

namespace tdscan {

// splitmix64; used to derive independent child seeds from (seed, salt).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro-free deterministic generator. std::shuffle and the distribution
// classes are implementation-defined, so shuffling and index draws are done
// by hand to keep outputs stable across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x1234567887654321ULL) {}

  std::uint64_t next() {
    // splitmix64 stream
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, bound); bound must be > 0
  std::size_t uniform(std::size_t bound) { return static_cast<std::size_t>(next() % bound); }

  // uniform double in [0, 1)
  double uniform_real() { return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::size_t j = uniform(i + 1);
      std::swap(v[i], v[j]);
    }
  }

  template <typename T>
  const T& choice(const std::vector<T>& v) {
    return v[uniform(v.size())];
  }

 private:
  std::uint64_t state_;
};

}  // namespace tdscan
