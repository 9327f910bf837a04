#pragma once

#include <cstdint>
#include <random>

namespace nldp {

/// Per-path random stream identified by (master_seed, stream_index). The
/// same pair always yields the same sequence, regardless of which worker
/// runs the path.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  double normal() { return normal_(engine_); }
  /// Uniform on [0, 1).
  double uniform() { return uniform_(engine_); }
  /// Exp(1) variate.
  double exponential() { return exponential_(engine_); }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
  std::exponential_distribution<double> exponential_;
};

/// SplitMix64 finalizer; used to derive well-separated engine seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Seed for an independent sub-experiment (e.g. the other side of an identity).
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t salt);

}  // namespace nldp
