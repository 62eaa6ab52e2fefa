#include <cmath>
#include <limits>

#include <doctest.h>

#include "sce/error.hpp"
#include "sce/weights.hpp"

using namespace sce;

namespace {

PairSampler box(double hi, std::size_t count = 100000) {
  PairSampler s;
  s.hi = hi;
  s.count = count;
  return s;
}

}  // namespace

TEST_CASE("weight values") {
  CHECK(WeightSpec::power(3)(2.0) == doctest::Approx(8.0));
  CHECK(WeightSpec::log_quotient()(0.0) == 0.0);
  CHECK(WeightSpec::log_quotient()(2.0) == doctest::Approx(1.4427).epsilon(1e-4));
  CHECK(WeightSpec::one()(123.0) == 1.0);
  CHECK(WeightSpec::identity()(4.5) == 4.5);
  CHECK(WeightSpec::power_plus_one(0.5)(4.0) == doctest::Approx(8.0));
  CHECK(WeightSpec::exponential()(1.0) == doctest::Approx(std::exp(1.0)));
  CHECK(WeightSpec::custom("x^2 + 1")(3.0) == 10.0);
}

TEST_CASE("weight overflow is reported") {
  CHECK_THROWS_AS(WeightSpec::exponential()(800.0), Error);
  try {
    WeightSpec::custom("log(x - 10)")(1.0);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteEvaluation);
  }
}

TEST_CASE("subadditivity: square root strictly subadditive") {
  const auto r = check_subadditive(WeightSpec::power(0.5), box(1e3), true);
  CHECK(r.verdict == Verdict::HoldsOnSample);
}

TEST_CASE("subadditivity: cube violated") {
  const auto b = WeightSpec::power(3);
  const auto r = check_subadditive(b, box(1e3, 10000), false);
  REQUIRE(r.verdict == Verdict::Violated);
  REQUIRE(r.witness);
  CHECK(b(r.witness->x + r.witness->y) > b(r.witness->x) + b(r.witness->y));
  CHECK(subadditivity_gap(b, 1, 1) == doctest::Approx(-6.0));
}

TEST_CASE("subadditivity: identity holds only non-strictly") {
  const auto b = WeightSpec::identity();
  CHECK(check_subadditive(b, box(1e3, 10000), false).verdict == Verdict::HoldsOnSample);
  CHECK(check_subadditive(b, box(1e3, 10000), true).verdict == Verdict::Violated);
}

TEST_CASE("witness margin reproduces on re-evaluation") {
  const auto b = WeightSpec::power(2);
  const auto r = check_subadditive(b, box(1e2, 5000), false);
  REQUIRE(r.witness);
  const double m = subadditivity_gap(b, r.witness->x, r.witness->y);
  CHECK(m == doctest::Approx(r.witness->margin).epsilon(1e-12));
}

TEST_CASE("concavity implies subadditivity on the sample") {
  const auto s = box(1e6, 20000);
  for (const auto& b : {WeightSpec::log_quotient(), WeightSpec::one(), WeightSpec::power(0.5),
                        WeightSpec::power(0.25), WeightSpec::power(0.9)}) {
    CAPTURE(b.label());
    CHECK(check_midpoint_concave(b, s).holds());
    CHECK(check_concavity_implies_subadditive(b, s).holds());
  }
  try {
    check_concavity_implies_subadditive(WeightSpec::power(3), s);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConcavityNotDetected);
  }
}

TEST_CASE("log-quotient gap is nonnegative on the sample") {
  const auto b = WeightSpec::log_quotient();
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& p : box(1e6).pairs()) worst = std::min(worst, subadditivity_gap(b, p.x, p.y));
  CHECK(worst >= -1e-12);
}

TEST_CASE("monotone weights") {
  const auto xs = log_points(1e-6, 1e6, 20000, 3);
  for (const auto& b : {WeightSpec::one(), WeightSpec::identity(), WeightSpec::power(0.5), WeightSpec::log_quotient()})
    CHECK(check_nondecreasing(b, xs).holds());
  CHECK(check_nondecreasing(WeightSpec::custom("exp(-x)"), xs).verdict == Verdict::Violated);
}

TEST_CASE("superadditive cube") {
  CHECK(check_superadditive(WeightSpec::power(3), box(1e3, 10000)).holds());
  CHECK(check_superadditive(WeightSpec::power(0.5), box(1e3, 10000)).verdict == Verdict::Violated);
}

TEST_CASE("tag names round-trip") {
  for (auto t : {WeightTag::Nonnegative, WeightTag::Nondecreasing, WeightTag::Subadditive, WeightTag::Superadditive,
                 WeightTag::StrictlySubadditive, WeightTag::Concave, WeightTag::Convex})
    CHECK(parse_weight_tag(to_string(t)) == t);
  CHECK_FALSE(parse_weight_tag("bogus"));
}
