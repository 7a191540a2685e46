#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace cble {

// Philox4x32-10 counter-based generator (Salmon, Moraes, Dror, Shaw 2011).
//
// Every (seed, stream) pair addresses an independent substream: the key
// holds the seed, counter words c[2],c[3] hold the stream index and
// c[0],c[1] the position within the stream. Monte Carlo drivers derive one
// stream per path index, so path i draws the same numbers no matter how
// work is scheduled across threads.
class philox4x32 {
 public:
  using result_type = std::uint32_t;

  philox4x32() : philox4x32(0, 0) {}

  philox4x32(std::uint64_t seed, std::uint64_t stream) {
    key_[0] = static_cast<std::uint32_t>(seed);
    key_[1] = static_cast<std::uint32_t>(seed >> 32);
    ctr_[0] = 0;
    ctr_[1] = 0;
    ctr_[2] = static_cast<std::uint32_t>(stream);
    ctr_[3] = static_cast<std::uint32_t>(stream >> 32);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    if (buf_pos_ == 4) {
      generate();
      buf_pos_ = 0;
    }
    return buf_[buf_pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t lo = (*this)();
    const std::uint64_t hi = (*this)();
    return (hi << 32) | lo;
  }

  // Uniform on (0,1]; never returns 0 so logarithms stay finite.
  double next_double() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second variate is cached.
  double next_gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double next_exponential() { return -std::log(next_double()); }

  // Exact Poisson sample by counting unit-exponential arrivals. O(mean)
  // draws; callers keep per-call means modest by chunking.
  std::uint64_t next_poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    double acc = next_exponential();
    std::uint64_t k = 0;
    while (acc <= mean) {
      ++k;
      acc += next_exponential();
    }
    return k;
  }

 private:
  static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                      std::uint32_t& lo) {
    const std::uint64_t p =
        static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b);
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
  }

  void generate() {
    std::uint32_t c0 = ctr_[0], c1 = ctr_[1], c2 = ctr_[2], c3 = ctr_[3];
    std::uint32_t k0 = key_[0], k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      std::uint32_t hi0, lo0, hi1, lo1;
      mulhilo(0xD2511F53u, c0, hi0, lo0);
      mulhilo(0xCD9E8D57u, c2, hi1, lo1);
      const std::uint32_t n0 = hi1 ^ c1 ^ k0;
      const std::uint32_t n1 = lo1;
      const std::uint32_t n2 = hi0 ^ c3 ^ k1;
      const std::uint32_t n3 = lo0;
      c0 = n0;
      c1 = n1;
      c2 = n2;
      c3 = n3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    buf_[0] = c0;
    buf_[1] = c1;
    buf_[2] = c2;
    buf_[3] = c3;
    // advance the 64-bit in-stream position
    if (++ctr_[0] == 0) ++ctr_[1];
  }

  std::uint32_t ctr_[4];
  std::uint32_t key_[2];
  std::uint32_t buf_[4] = {0, 0, 0, 0};
  int buf_pos_ = 4;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace cble
