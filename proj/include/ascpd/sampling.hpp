#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ascpd/tensor.hpp"

namespace ascpd {

/// Seedable generator with a fixed algorithm. The integer engine is fully
/// specified by the standard; the real-valued transforms below are written
/// out explicitly so that streams agree across standard libraries.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Uniform on {0, ..., n-1} from exactly one draw (multiply-shift).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller; values are produced in pairs.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Seed of an independent stream derived from a user seed (splitmix64 mix).
/// Synthetic data uses stream 1, so a solver seeded with the same value does
/// not reproduce the ground-truth factors as its initial point.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

enum class ModeSelection { Uniform, RoundRobin };

/// Sampled mode plus distinct, sorted mode-i fiber (row) indices.
struct FiberSample {
  std::size_t mode = 0;
  std::vector<Index> indices;
  std::uint64_t draw_id = 0;
};

std::size_t pick_mode(Rng& rng, std::size_t order);

/// min(blocksize, fibers) distinct indices, uniform over subsets of that
/// size. Partial Fisher-Yates with a sparse swap table, O(blocksize) memory.
std::vector<Index> sample_fibers(Rng& rng, Index fibers, Index blocksize);

/// Surviving 0-based indices (i_n for n != mode, ascending n) of row `row`.
std::vector<Index> fiber_to_multi_index(const Dims& dims, std::size_t mode, Index row);

struct SamplerConfig {
  std::vector<Index> blocksizes;  // one entry broadcasts to every mode
  ModeSelection selection = ModeSelection::Uniform;
};

/// Draws (mode, fibers) pairs for one run. Mode picking and fiber sampling
/// share the caller's stream, in that order, once per iteration.
class FiberSampler {
 public:
  FiberSampler(const Dims& dims, SamplerConfig config);

  FiberSample draw(Rng& rng);

  Index blocksize(std::size_t mode) const { return blocks_.at(mode); }
  Index fibers(std::size_t mode) const { return fibers_.at(mode); }

 private:
  Dims dims_;
  std::vector<Index> blocks_;
  std::vector<Index> fibers_;
  ModeSelection selection_;
  std::uint64_t draws_ = 0;
  std::vector<bool> warned_;
};

}  // namespace ascpd
