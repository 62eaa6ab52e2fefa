#include <cmath>

#include <doctest.h>

#include "sce/error.hpp"
#include "sce/gelation.hpp"

using namespace sce;

namespace {

MomentSeries series(std::vector<MomentSample> s) { return MomentSeries{"M1", 0.0, std::move(s)}; }

}  // namespace

TEST_CASE("constant mass gives no gel") {
  std::vector<MomentSample> s;
  for (int i = 0; i <= 30; ++i) s.push_back({0.1 * i, 1.0});
  const auto r = detect(series(s));
  CHECK(r.verdict == GelVerdict::NoGelDetected);
  CHECK_FALSE(r.T_gel);
}

TEST_CASE("onset is interpolated and must be sustained") {
  const auto r = detect(series({{0, 1.0}, {1, 0.995}, {2, 0.985}, {3, 0.9}, {4, 0.8}}));
  REQUIRE(r.T_gel);
  CHECK(*r.T_gel == doctest::Approx(1.5));
  CHECK(r.verdict == GelVerdict::GelDetected);

  const auto blip = detect(series({{0, 1.0}, {1, 0.98}, {2, 1.0}, {3, 1.0}}), 0.01, 2);
  CHECK_FALSE(blip.T_gel);
}

TEST_CASE("larger theta never detects earlier") {
  std::vector<MomentSample> s;
  for (int i = 0; i <= 300; ++i) {
    const double t = 0.01 * i;
    s.push_back({t, t < 1 ? 1.0 : std::exp(-(t - 1) * (t - 1))});
  }
  double prev = 0.0;
  for (double theta : {0.001, 0.01, 0.05, 0.2, 0.5}) {
    const auto r = detect(series(s), theta);
    REQUIRE(r.T_gel);
    CHECK(*r.T_gel >= prev);
    prev = *r.T_gel;
  }
}

TEST_CASE("detector input validation") {
  CHECK_THROWS_AS(detect(series({})), Error);
  CHECK_THROWS_AS(detect(series({{0, 1}, {1, 1}}), 0.0), Error);
  CHECK_THROWS_AS(detect(series({{0, 1}, {1, 1}}), 1.5), Error);
}

TEST_CASE("gel time bound") {
  CHECK(gel_time_bound(0.0, 1.0, 1.0) == 0.0);
  const double Mb0 = std::tgamma(1.5);
  CHECK(Mb0 == doctest::Approx(std::sqrt(M_PI) / 2));
  CHECK(gel_time_bound(Mb0, 1.0, 1.0) == doctest::Approx(1.7725).epsilon(1e-4));
  CHECK(gel_time_bound(Mb0, 2.0, 1.0) == doctest::Approx(gel_time_bound(Mb0, 1.0, 1.0) / 2));
  CHECK_THROWS_AS(gel_time_bound(1.0, 0.0, 1.0), Error);
  CHECK_THROWS_AS(gel_time_bound(1.0, 1.0, 0.0), Error);
  CHECK_THROWS_AS(gel_time_bound(-1.0, 1.0, 1.0), Error);
}

TEST_CASE("mass-conserving run shows no gel") {
  SolverConfig c;
  c.kernel = KernelSpec::sqrt_product();
  c.time.T = 3;
  CHECK(detect(mass_series(run(c))).verdict == GelVerdict::NoGelDetected);
}

TEST_CASE("product-plus-sum run gels before T = 3") {
  SolverConfig c;
  c.kernel = KernelSpec::product_plus_sum();
  c.time.T = 3;
  const auto r = detect(mass_series(run(c)));
  CHECK(r.verdict == GelVerdict::GelDetected);
  REQUIRE(r.T_gel);
  CHECK(*r.T_gel < 3.0);
}

TEST_CASE("zero kernel sweep") {
  SolverConfig c;
  c.kernel = KernelSpec::constant(0);
  c.n = 50;
  c.time.T = 1;
  c.time.N = 10;
  const auto r = r_sweep(c, {{50, {}}, {100, {}}, {200, {}}});
  CHECK(r.verdict == GelVerdict::NoGelDetected);
  REQUIRE(r.sweep.size() == 3);
  for (const auto& row : r.sweep) CHECK_FALSE(row.T_gel);
}

TEST_CASE("small truncations of the log-quotient kernel are R-dependent") {
  SolverConfig c;
  c.kernel = log_quotient_gelling_kernel();
  c.time.T = 3;
  const auto r = r_sweep(c, {{50, 1000}, {200, 1000}, {1000, 1000}});
  CHECK(r.verdict == GelVerdict::TruncationSuspected);
  REQUIRE(r.sweep.size() == 3);
  for (const auto& row : r.sweep) CHECK(row.T_gel);
  CHECK(*r.sweep[0].T_gel < *r.sweep[1].T_gel);
  CHECK(*r.sweep[1].T_gel < *r.sweep[2].T_gel);
}
