#include "srsim/rng.hpp"

#include <cmath>
#include <numbers>

namespace srsim {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : key_(seed), gen_(seed) {}

Rng Rng::substream(std::initializer_list<std::uint64_t> tags) const {
  std::uint64_t k = key_;
  for (std::uint64_t t : tags) {
    k = mix64(k ^ mix64(t));
  }
  return Rng(k);
}

std::uint64_t Rng::next_u64() { return gen_(); }

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform01_open() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double Rng::normal() {
  // Box-Muller; one variate per call keeps substream copies stateless.
  const double u1 = uniform01_open();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::complex<double> Rng::cscg() {
  // Polar form: |z|^2 ~ Exp(1), phase uniform, so E|z|^2 = 1.
  const double u1 = uniform01_open();
  const double u2 = uniform01();
  const double r = std::sqrt(-std::log(u1));
  return std::polar(r, 2.0 * std::numbers::pi * u2);
}

}  // namespace srsim
