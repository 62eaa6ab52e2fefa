#include <cmath>
#include <numeric>

#include <doctest.h>

#include "sce/coalescent.hpp"
#include "sce/error.hpp"

using namespace sce;

TEST_CASE("initial masses are reproducible") {
  const auto a = init_system(InitialSampler::exponential(), 1000, 42);
  const auto b = init_system(InitialSampler::exponential(), 1000, 42);
  const auto c = init_system(InitialSampler::exponential(), 1000, 43);
  CHECK(a.masses == b.masses);
  CHECK(a.masses != c.masses);
}

TEST_CASE("exponential mean mass within 3 standard errors of 1") {
  const auto s = init_system(InitialSampler::exponential(), 10000, 5);
  const double n = double(s.masses.size());
  const double mean = std::accumulate(s.masses.begin(), s.masses.end(), 0.0) / n;
  double var = 0.0;
  for (double m : s.masses) var += (m - mean) * (m - mean);
  const double se = std::sqrt(var / (n - 1) / n);
  CHECK(std::abs(mean - 1.0) <= 3 * se);
  CHECK(s.volume == doctest::Approx(10000.0));
}

TEST_CASE("tabulated sampler mean") {
  const auto smp = InitialSampler::tabulated([](double x) { return 2.0 * std::exp(-2.0 * x); }, 30.0);
  CHECK(smp.total_count() == doctest::Approx(1.0).epsilon(1e-4));
  const auto s = init_system(smp, 20000, 9);
  const double mean = std::accumulate(s.masses.begin(), s.masses.end(), 0.0) / 20000.0;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("invalid samplers") {
  CHECK_THROWS_AS(init_system(InitialSampler::exponential(), 0, 1), Error);
  CHECK_THROWS_AS(InitialSampler::tabulated([](double) { return 0.0; }, 10.0), Error);
}

TEST_CASE("single particle never merges") {
  auto s = init_system(InitialSampler::exponential(), 1, 3);
  const auto r = simulate(s, KernelSpec::product(), 5.0, {0.0, 5.0});
  CHECK(r.event_count == 0);
  CHECK(s.masses.size() == 1);
}

TEST_CASE("zero kernel keeps moments constant") {
  auto s = init_system(InitialSampler::exponential(), 500, 3);
  const auto r = simulate(s, KernelSpec::constant(0), 3.0, {0.0, 1.0, 3.0});
  CHECK(r.event_count == 0);
  REQUIRE(r.samples.size() == 3);
  for (const auto& x : r.samples) {
    CHECK(x.M0 == r.samples[0].M0);
    CHECK(x.M1 == r.samples[0].M1);
  }
}

TEST_CASE("merge bookkeeping") {
  auto s = init_system(InitialSampler::exponential(), 2000, 11);
  const double mass0 = std::accumulate(s.masses.begin(), s.masses.end(), 0.0);
  const auto r = simulate(s, KernelSpec::sum(), 1.0, {0.0, 0.5, 1.0}, true);
  CHECK(r.event_count == 2000 - s.masses.size());
  CHECK(r.events.size() == r.event_count);
  const double mass1 = std::accumulate(s.masses.begin(), s.masses.end(), 0.0);
  CHECK(mass1 == doctest::Approx(mass0).epsilon(1e-12));
  for (const auto& x : r.samples) CHECK(x.M1 == doctest::Approx(r.samples[0].M1).epsilon(1e-12));
  for (std::size_t i = 1; i < r.events.size(); ++i) CHECK(r.events[i].t >= r.events[i - 1].t);
}

TEST_CASE("replicates are deterministic") {
  const std::vector<double> ts{0.0, 0.5, 1.0};
  const auto a = run_replicates(InitialSampler::exponential(), KernelSpec::constant(2), 500, 1.0, ts, 3, 7);
  const auto b = run_replicates(InitialSampler::exponential(), KernelSpec::constant(2), 500, 1.0, ts, 3, 7);
  CHECK(a.aggregate.mean_M0 == b.aggregate.mean_M0);
  CHECK(a.aggregate.se_M0 == b.aggregate.se_M0);
}

TEST_CASE("constant kernel count decays like 1/(1+t)") {
  const std::vector<double> ts{0.5, 1.0, 2.0, 3.0};
  const auto r = run_replicates(InitialSampler::exponential(), KernelSpec::constant(2), 10000, 3.0, ts, 5, 1);
  for (std::size_t q = 0; q < ts.size(); ++q) {
    CAPTURE(ts[q]);
    CHECK(r.aggregate.mean_M0[q] * (1 + ts[q]) == doctest::Approx(1.0).epsilon(0.03));
  }
}

TEST_CASE("product kernel forms a large cluster near t = 0.5") {
  auto s = init_system(InitialSampler::exponential(), 10000, 7);
  const auto r = simulate(s, KernelSpec::product(), 0.7, {0.4, 0.7});
  REQUIRE(r.samples.size() == 2);
  CHECK(r.samples[0].largest_fraction < 0.1);
  CHECK(r.samples[1].largest_fraction > 0.1);
  CHECK(r.samples[1].M1_without_largest < r.samples[1].M1);
}
