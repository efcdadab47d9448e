#pragma once

#include <array>
#include <cstdint>

namespace countflow {

// Deterministic sub-seed for replication or worker `stream_id`,
// derived from `seed` by a splitmix64 mix. Keeps parallel jobs
// reproducible independently of scheduling.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_id);

// xoshiro256++ with splitmix64 seeding. Chosen over <random> engines
// because every draw path here must replay bit-identically across
// platforms; the standard library's distributions are not pinned by
// the standard. All variate transforms below are inverse-cdf or
// rejection schemes built on this generator only.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed);

  // Independent substream for worker / replication `stream_id`.
  // Derivation: splitmix64 chain over (seed, stream_id); documented so
  // that per-replication results are reproducible regardless of how
  // jobs land on threads.
  static Xoshiro256pp stream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next();

  // Uniform on the open interval (0, 1); never returns 0 or 1, so
  // log() and quantile transforms are safe.
  double uniform();

  // Standard normal via the inverse cdf (norm_quantile).
  double normal();

  // Exponential(1).
  double exponential();

  // Gamma(shape, 1), Marsaglia-Tsang squeeze with the shape<1 boost.
  double gamma(double shape);

 private:
  std::array<std::uint64_t, 4> state_;
};

}  // namespace countflow
