#include "ascpd/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <unordered_map>

#include "ascpd/error.hpp"
#include "ascpd/log.hpp"

namespace ascpd {

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) fail(Errc::InvalidArgument, "Rng::below requires a positive bound");
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::size_t pick_mode(Rng& rng, std::size_t order) {
  if (order == 0) fail(Errc::InvalidArgument, "pick_mode requires order >= 1");
  return static_cast<std::size_t>(rng.below(order));
}

std::vector<Index> sample_fibers(Rng& rng, Index fibers, Index blocksize) {
  if (fibers == 0) fail(Errc::InvalidArgument, "sample_fibers requires at least one fiber");
  if (blocksize >= fibers) {
    std::vector<Index> all(fibers);
    std::iota(all.begin(), all.end(), Index{0});
    return all;
  }
  // Positions not in the table hold their own index.
  std::unordered_map<Index, Index> swapped;
  swapped.reserve(2 * blocksize);
  auto at = [&](Index pos) {
    auto it = swapped.find(pos);
    return it == swapped.end() ? pos : it->second;
  };
  std::vector<Index> out;
  out.reserve(blocksize);
  for (Index t = 0; t < blocksize; ++t) {
    const Index pick = t + static_cast<Index>(rng.below(fibers - t));
    out.push_back(at(pick));
    swapped[pick] = at(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Index> fiber_to_multi_index(const Dims& dims, std::size_t mode, Index row) {
  const UnfoldingIndexMap map(dims, mode);
  std::vector<Index> multi(dims.size(), 0);
  map.multi_index(row, multi);
  multi.erase(multi.begin() + static_cast<std::ptrdiff_t>(mode));
  return multi;
}

FiberSampler::FiberSampler(const Dims& dims, SamplerConfig config) : dims_(dims), selection_(config.selection) {
  if (dims.empty()) fail(Errc::InvalidArgument, "sampler needs a tensor of order >= 1");
  if (config.blocksizes.size() != 1 && config.blocksizes.size() != dims.size()) {
    fail(Errc::InvalidArgument, "expected 1 or " + std::to_string(dims.size()) + " blocksizes, got " +
                                    std::to_string(config.blocksizes.size()));
  }
  for (std::size_t n = 0; n < dims.size(); ++n) {
    const Index b = config.blocksizes.size() == 1 ? config.blocksizes[0] : config.blocksizes[n];
    if (b < 1) fail(Errc::InvalidArgument, "blocksizes must be >= 1");
    blocks_.push_back(b);
    fibers_.push_back(UnfoldingIndexMap(dims, n).rows());
  }
  warned_.assign(dims.size(), false);
}

FiberSample FiberSampler::draw(Rng& rng) {
  FiberSample s;
  s.draw_id = draws_;
  s.mode = selection_ == ModeSelection::RoundRobin ? static_cast<std::size_t>(draws_ % dims_.size())
                                                   : pick_mode(rng, dims_.size());
  const Index b = blocks_[s.mode];
  const Index j = fibers_[s.mode];
  if (b > j && !warned_[s.mode]) {
    warned_[s.mode] = true;
    log::warn("blocksize " + std::to_string(b) + " exceeds the " + std::to_string(j) + " mode-" +
              std::to_string(s.mode) + " fibers; sampling all of them");
  }
  s.indices = sample_fibers(rng, j, b);
  ++draws_;
  return s;
}

}  // namespace ascpd
