#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace sce {

struct Point2 {
  double x;
  double y;
};

/// Deterministic pair sampler over the log-uniform box [lo, hi]^2.
///
/// Points come from the R2 low-discrepancy sequence with a seeded
/// Cranley-Patterson rotation, so a (box, count, seed) triple always yields the
/// same sample. Optionally the rays y = x and y = kx for k in {2, 10, 100}
/// (and their mirrors) are appended, log-spaced over the box.
struct PairSampler {
  double lo = 1e-6;
  double hi = 1e6;
  std::size_t count = 100000;
  std::uint64_t seed = 20240521;
  bool include_rays = true;
  std::size_t ray_points = 400;

  std::vector<Point2> pairs() const;

  /// Same sampler with hi doubled (box-stability probe).
  PairSampler doubled() const;
};

/// Deterministic log-uniform 1D points in [lo, hi], sorted ascending.
std::vector<double> log_points(double lo, double hi, std::size_t count, std::uint64_t seed);

}  // namespace sce
