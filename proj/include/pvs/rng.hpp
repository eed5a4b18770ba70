#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pvs {

// splitmix64, used to decorrelate stream seeds derived from one user seed.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic standard-normal stream. Uniforms come straight from the
/// mt19937_64 bit stream and the Box-Muller transform is spelled out here,
/// because std::normal_distribution is implementation-defined and would not
/// reproduce byte-identical artifacts across standard libraries.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : eng_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_uniform();
    double u2 = next_uniform();
    // u1 in (0,1]: guard the log.
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  double next_uniform() {
    // 53-bit mantissa uniform in (0,1]; never returns 0.
    std::uint64_t bits = eng_() >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
  }

  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace pvs
