#include "sce/coalescent.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <string>
#include <thread>

#include "sce/error.hpp"

namespace sce {

InitialSampler InitialSampler::exponential() { return InitialSampler{}; }

InitialSampler InitialSampler::tabulated(const std::function<double(double)>& u0, double R, std::size_t cells) {
  if (!(R > 0.0) || cells < 2) throw Error(ErrorCode::InvalidSampler, "tabulated sampler needs R > 0 and cells >= 2");
  InitialSampler s;
  s.exponential_ = false;
  s.grid_.resize(cells + 1);
  s.cdf_.assign(cells + 1, 0.0);
  const double h = R / static_cast<double>(cells);
  for (std::size_t i = 0; i <= cells; ++i) s.grid_[i] = h * static_cast<double>(i);
  for (std::size_t i = 0; i < cells; ++i) {
    // Simpson on each cell.
    const double a = u0(s.grid_[i]), m = u0(s.grid_[i] + 0.5 * h), b = u0(s.grid_[i + 1]);
    if (!(a >= 0.0) || !(m >= 0.0) || !(b >= 0.0))
      throw Error(ErrorCode::InvalidSampler, "u0 negative or non-finite near x=" + std::to_string(s.grid_[i]));
    s.cdf_[i + 1] = s.cdf_[i] + h * (a + 4.0 * m + b) / 6.0;
  }
  s.m0_ = s.cdf_.back();
  if (!(s.m0_ > 0.0) || !std::isfinite(s.m0_)) throw Error(ErrorCode::InvalidSampler, "u0 has no finite positive mass");
  for (double& c : s.cdf_) c /= s.m0_;
  return s;
}

double InitialSampler::draw(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double u = unit(rng);
  if (exponential_) {
    // Inverse CDF of Exp(1); 1 - u lies in (0, 1].
    return -std::log1p(-u);
  }
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  const std::size_t lo = hi - 1;
  const double span = cdf_[hi] - cdf_[lo];
  const double frac = span > 0.0 ? (u - cdf_[lo]) / span : 0.5;
  return grid_[lo] + frac * (grid_[hi] - grid_[lo]);
}

ParticleSystem init_system(const InitialSampler& sampler, std::size_t N0, std::uint64_t seed) {
  if (N0 == 0) throw Error(ErrorCode::InvalidSampler, "N0 must be >= 1");
  if (!(sampler.total_count() > 0.0)) throw Error(ErrorCode::InvalidSampler, "sampler has M0 <= 0");
  ParticleSystem sys;
  sys.N0 = N0;
  sys.seed = seed;
  sys.rng.seed(seed);
  sys.volume = static_cast<double>(N0) / sampler.total_count();
  sys.masses.reserve(N0);
  for (std::size_t i = 0; i < N0; ++i) {
    double x = sampler.draw(sys.rng);
    // Redraw zero masses.
    while (!(x > 0.0)) x = sampler.draw(sys.rng);
    sys.masses.push_back(x);
  }
  return sys;
}

namespace {

OracleSample observe(const ParticleSystem& sys, double t, double largest) {
  OracleSample s;
  s.t = t;
  s.particles = sys.masses.size();
  double total = 0.0;
  for (double x : sys.masses) total += x;
  s.M0 = static_cast<double>(s.particles) / sys.volume;
  s.M1 = total / sys.volume;
  s.M1_without_largest = (total - largest) / sys.volume;
  s.largest_fraction = total > 0.0 ? largest / total : 0.0;
  return s;
}

}  // namespace

OracleRun simulate(ParticleSystem& sys, const KernelSpec& k, double T, const std::vector<double>& output_times,
                   bool keep_events) {
  OracleRun out;
  auto& x = sys.masses;
  std::size_t n = x.size();
  std::vector<double> rows(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = k(x[i], x[j]);
      rows[i] += v;
      rows[j] += v;
    }
  double largest = n ? *std::max_element(x.begin(), x.end()) : 0.0;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t next_out = 0;

  auto flush_outputs = [&](double until) {
    while (next_out < output_times.size() && output_times[next_out] <= until) {
      out.samples.push_back(observe(sys, output_times[next_out], largest));
      ++next_out;
    }
  };

  while (n > 1) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += rows[i];
    const double rate = 0.5 * total / sys.volume;
    if (!std::isfinite(rate))
      throw Error(ErrorCode::RateOverflow, "total coalescence rate not finite at t=" + std::to_string(sys.t));
    if (!(rate > 0.0)) break;
    const double tau = -std::log1p(-unit(sys.rng)) / rate;
    if (sys.t + tau > T) break;
    sys.t += tau;
    flush_outputs(sys.t);

    // Pick i proportional to its row, then j proportional to K(x_i, x_j).
    double target = unit(sys.rng) * total;
    std::size_t i = 0;
    for (; i + 1 < n; ++i) {
      target -= rows[i];
      if (target < 0.0) break;
    }
    double row_i = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) row_i += k(x[i], x[j]);
    double pick = unit(sys.rng) * row_i;
    std::size_t j = (i == 0) ? 1 : 0;
    for (std::size_t c = 0; c < n; ++c) {
      if (c == i) continue;
      j = c;
      pick -= k(x[i], x[c]);
      if (pick < 0.0) break;
    }

    const double xi = x[i], xj = x[j], merged = xi + xj;
    if (keep_events) out.events.push_back({sys.t, xi, xj});
    ++out.event_count;
    double new_row = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      if (c == i || c == j) continue;
      const double kn = k(x[c], merged);
      rows[c] += kn - k(x[c], xi) - k(x[c], xj);
      if (rows[c] < 0.0) rows[c] = 0.0;
      new_row += kn;
    }
    x[i] = merged;
    rows[i] = new_row;
    x[j] = x[n - 1];
    rows[j] = rows[n - 1];
    x.pop_back();
    rows.pop_back();
    --n;
    largest = std::max(largest, merged);
  }
  flush_outputs(T);
  return out;
}

ReplicateResult run_replicates(const InitialSampler& sampler, const KernelSpec& k, std::size_t N0, double T,
                               const std::vector<double>& output_times, std::size_t replicates,
                               std::uint64_t base_seed) {
  if (replicates == 0) throw Error(ErrorCode::InvalidParameters, "need at least one replicate");
  const auto policy = std::thread::hardware_concurrency() > 1 ? std::launch::async : std::launch::deferred;
  std::vector<std::future<OracleRun>> jobs;
  for (std::size_t r = 0; r < replicates; ++r) {
    jobs.push_back(std::async(policy, [&, r] {
      ParticleSystem sys = init_system(sampler, N0, base_seed + r);
      return simulate(sys, k, T, output_times);
    }));
  }
  ReplicateResult res;
  for (auto& j : jobs) res.runs.push_back(j.get());

  OracleAggregate& ag = res.aggregate;
  const std::size_t m = output_times.size();
  ag.t = output_times;
  auto stats = [&](auto field, std::vector<double>& mean, std::vector<double>& se) {
    mean.assign(m, 0.0);
    se.assign(m, 0.0);
    const double R = static_cast<double>(replicates);
    for (std::size_t q = 0; q < m; ++q) {
      double s = 0.0;
      for (const OracleRun& run : res.runs) s += field(run.samples[q]);
      const double mu = s / R;
      double v = 0.0;
      for (const OracleRun& run : res.runs) {
        const double d = field(run.samples[q]) - mu;
        v += d * d;
      }
      mean[q] = mu;
      se[q] = replicates > 1 ? std::sqrt(v / (R - 1.0) / R) : 0.0;
    }
  };
  stats([](const OracleSample& s) { return s.M0; }, ag.mean_M0, ag.se_M0);
  stats([](const OracleSample& s) { return s.M1; }, ag.mean_M1, ag.se_M1);
  stats([](const OracleSample& s) { return s.largest_fraction; }, ag.mean_largest, ag.se_largest);
  return res;
}

}  // namespace sce
