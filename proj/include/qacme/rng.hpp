#pragma once

#include <array>
#include <cstdint>

namespace qacme {

// splitmix64 step; used for seeding and for deriving independent sub-seeds.
std::uint64_t splitmix64(std::uint64_t& state);

// Derives a seed for an independent stream `stream` of a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

// xoshiro256** (Blackman & Vigna). Chosen over std::mt19937 + std
// distributions because the standard distributions are implementation
// defined; everything drawn here is a pinned algorithm, so a seed fixes the
// exact sequence of samples on every conforming platform.
class Rng {
 public:
  using State = std::array<std::uint64_t, 4>;

  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next();

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform in the open interval (0, 1).
  double uniform_open();
  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via the Marsaglia polar method (spare value discarded).
  double normal();
  // Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 uses the boost
  // Gamma(shape + 1) * U^(1/shape).
  double gamma(double shape);
  // Beta(a, b) as X / (X + Y) with X ~ Gamma(a), Y ~ Gamma(b).
  double beta(double a, double b);

  std::uint64_t seed() const { return seed_; }
  // Number of 64-bit words drawn since seeding.
  std::uint64_t draws() const { return draws_; }
  const State& state() const { return s_; }

  // Restores a generator captured by seed()/draws()/state().
  static Rng from_state(std::uint64_t seed, std::uint64_t draws, const State& s);

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
  State s_{};
};

}  // namespace qacme
