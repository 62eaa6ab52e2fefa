#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "sce/kernels.hpp"

namespace sce {

/// Draws initial masses from the density u0 / M0(0).
///
/// Exponential uses the closed-form inverse CDF of u0 = e^{-x}; Tabulated
/// inverts a piecewise-linear CDF of a general u0 built on [0, R].
class InitialSampler {
 public:
  static InitialSampler exponential();
  static InitialSampler tabulated(const std::function<double(double)>& u0, double R, std::size_t cells = 20000);

  double draw(std::mt19937_64& rng) const;
  double total_count() const noexcept { return m0_; }

 private:
  bool exponential_ = true;
  double m0_ = 1.0;
  std::vector<double> grid_;
  std::vector<double> cdf_;
};

/// Finite-N coalescent: masses, the volume V = N0 / M0(0) that converts
/// counts to densities, and a seeded generator.
struct ParticleSystem {
  std::vector<double> masses;
  std::size_t N0 = 0;
  double volume = 1.0;
  double t = 0.0;
  std::uint64_t seed = 0;
  std::mt19937_64 rng;
};

/// Throws Error{InvalidSampler} for N0 == 0 or a sampler with M0 <= 0.
ParticleSystem init_system(const InitialSampler& sampler, std::size_t N0, std::uint64_t seed);

struct CoalescenceEvent {
  double t;
  double x;
  double y;
};

struct OracleSample {
  double t = 0.0;
  double M0 = 0.0;               // count / V
  double M1 = 0.0;               // total mass / V
  double M1_without_largest = 0.0;
  double largest_fraction = 0.0;  // largest cluster mass / total mass
  std::size_t particles = 0;
};

struct OracleRun {
  std::vector<OracleSample> samples;  // one per requested output time
  std::vector<CoalescenceEvent> events;
  std::size_t event_count = 0;
};

/// Gillespie simulation: each unordered pair merges at rate K(x_i, x_j) / V.
/// Samples are taken at each of output_times (ascending, within [0, T]).
/// Throws Error{RateOverflow} if the total rate stops being finite.
OracleRun simulate(ParticleSystem& sys, const KernelSpec& k, double T, const std::vector<double>& output_times,
                   bool keep_events = false);

struct OracleAggregate {
  std::vector<double> t;
  std::vector<double> mean_M0, se_M0;
  std::vector<double> mean_M1, se_M1;
  std::vector<double> mean_largest, se_largest;
};

struct ReplicateResult {
  std::vector<OracleRun> runs;
  OracleAggregate aggregate;
};

/// Independent replicates seeded base_seed, base_seed + 1, ... and their
/// mean / standard error per output time.
ReplicateResult run_replicates(const InitialSampler& sampler, const KernelSpec& k, std::size_t N0, double T,
                               const std::vector<double>& output_times, std::size_t replicates,
                               std::uint64_t base_seed);

}  // namespace sce
