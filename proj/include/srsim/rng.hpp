#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace srsim {

// splitmix64 finalizer; full-period 64-bit mixer.
std::uint64_t mix64(std::uint64_t x);

// Seeded random stream with deterministic substream derivation.
//
// A stream is identified by a 64-bit key. Substreams are derived by folding
// tag words into the key with the splitmix64 mixer, so substream(a).substream(b)
// and substream(b).substream(a) are distinct streams and none collides with the
// parent in practice. Draws come from std::mt19937_64 seeded with the key;
// uniform/normal/CSCG variates are generated from raw 64-bit words (no
// std::*_distribution), so sequences are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Child stream derived from this stream's key and the given tags.
  // Does not consume state of the parent.
  Rng substream(std::initializer_list<std::uint64_t> tags) const;
  Rng substream(std::uint64_t a) const { return substream({a}); }
  Rng substream(std::uint64_t a, std::uint64_t b) const { return substream({a, b}); }
  Rng substream(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
    return substream({a, b, c});
  }

  std::uint64_t next_u64();
  double uniform01();       // [0, 1)
  double uniform01_open();  // (0, 1]
  double normal();          // N(0, 1)
  std::complex<double> cscg();  // CN(0, 1)

  std::uint64_t key() const { return key_; }

  // Identification strings recorded in experiment sidecar output.
  static const char* algorithm() { return "mt19937_64"; }
  static const char* seeding() {
    return "substream key = splitmix64 fold of (base seed, tag words); "
           "engine seeded directly with the key";
  }

 private:
  std::uint64_t key_;
  std::mt19937_64 gen_;
};

}  // namespace srsim
