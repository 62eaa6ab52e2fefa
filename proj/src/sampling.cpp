#include "sce/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sce {

namespace {

// Plastic-number constants for the R2 sequence.
constexpr double kR2a1 = 0.7548776662466927;
constexpr double kR2a2 = 0.5698402909980532;
constexpr double kR1a = 0.6180339887498949;

double log_map(double unit, double log_lo, double log_hi) {
  return std::exp(log_lo + unit * (log_hi - log_lo));
}

}  // namespace

std::vector<Point2> PairSampler::pairs() const {
  std::vector<Point2> out;
  out.reserve(count + (include_rays ? 7 * ray_points : 0));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double s1 = unit(rng);
  const double s2 = unit(rng);
  const double llo = std::log(lo);
  const double lhi = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    const double n = static_cast<double>(i + 1);
    double u1 = s1 + n * kR2a1;
    double u2 = s2 + n * kR2a2;
    u1 -= std::floor(u1);
    u2 -= std::floor(u2);
    out.push_back({log_map(u1, llo, lhi), log_map(u2, llo, lhi)});
  }
  if (include_rays && ray_points > 1) {
    for (const double k : {1.0, 2.0, 10.0, 100.0}) {
      for (std::size_t i = 0; i < ray_points; ++i) {
        const double x = log_map(static_cast<double>(i) / static_cast<double>(ray_points - 1), llo, lhi);
        if (k * x > hi) break;
        out.push_back({x, k * x});
        if (k != 1.0) out.push_back({k * x, x});
      }
    }
  }
  return out;
}

PairSampler PairSampler::doubled() const {
  PairSampler d = *this;
  d.hi = 2.0 * hi;
  return d;
}

std::vector<double> log_points(double lo, double hi, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double s = unit(rng);
  const double llo = std::log(lo);
  const double lhi = std::log(hi);
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    double u = s + static_cast<double>(i + 1) * kR1a;
    u -= std::floor(u);
    out.push_back(log_map(u, llo, lhi));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace sce
