#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "sce/error.hpp"
#include "sce/solver.hpp"

using namespace sce;

namespace {

State exp_state(double R, std::size_t n, double p = 3.0) {
  return project_initial([](double x) { return std::exp(-x); }, build_mesh(R, n, p));
}

}  // namespace

TEST_CASE("flux vanishes at edge 0 and for zero data") {
  const State s = exp_state(20, 40);
  CHECK(discrete_flux(s, KernelSpec::sum(), 0) == 0.0);
  State z = s;
  std::fill(z.g.begin(), z.g.end(), 0.0);
  for (std::size_t i = 0; i <= 40; ++i) CHECK(discrete_flux(z, KernelSpec::sum(), i) == 0.0);
}

TEST_CASE("single-cell flux follows the overlap rule") {
  const double R = 4.0, c = 3.0;
  State s{build_mesh(R, 1, 1), {c}, 0.0};
  const double m = 2.0, w = 4.0;
  const auto k = KernelSpec::sum();
  // R - m is the midpoint.
  CHECK(discrete_flux(s, k, 1) == doctest::Approx(0.5 * w * w * c * (c / m) * k(m, m)));
}

TEST_CASE("precomputed and direct flux agree") {
  const State s = exp_state(30, 60);
  const auto k = KernelSpec::product_plus_sum();
  FluxOperator op(s.mesh, k);
  FluxOperator::Workspace ws;
  std::vector<double> J;
  op.edge_fluxes(s.g, ws, J);
  REQUIRE(J.size() == 61);
  for (std::size_t i : {0u, 1u, 7u, 30u, 59u, 60u}) CHECK(J[i] == doctest::Approx(discrete_flux(s, k, i)).epsilon(1e-12));
  CHECK(discrete_flux_at(s, k, s.mesh->edges[30]) == doctest::Approx(J[30]).epsilon(1e-12));
}

TEST_CASE("zero kernel step is the identity") {
  const State s = exp_state(20, 50);
  const auto r = step(s, KernelSpec::constant(0), 0.1);
  REQUIRE(r.accepted);
  CHECK(r.state.g == s.g);
  CHECK(r.state.t == doctest::Approx(0.1));
}

TEST_CASE("zero state stays zero") {
  State s = exp_state(20, 50);
  std::fill(s.g.begin(), s.g.end(), 0.0);
  const auto r = step(s, KernelSpec::product(), 0.1);
  REQUIRE(r.accepted);
  for (double g : r.state.g) CHECK(g == 0.0);
}

TEST_CASE("mass balance of one step telescopes") {
  const State s = exp_state(10, 100);
  for (const auto& k : {KernelSpec::sum(), KernelSpec::product(), KernelSpec::sqrt_product()}) {
    const auto r = step(s, k, 0.01);
    REQUIRE(r.accepted);
    CHECK(r.boundary_flux >= 0.0);
    CHECK(std::abs(discrete_mass(r.state) - discrete_mass(s) + 0.01 * r.boundary_flux) <= 1e-14 * discrete_mass(s));
    CHECK(r.mass_defect <= 1e-14);
  }
}

TEST_CASE("oversized step is rejected and leaves the input untouched") {
  const State s = exp_state(20, 50);
  const auto r = step(s, KernelSpec::product(), 50.0);
  CHECK_FALSE(r.accepted);
  CHECK(r.state.g == s.g);
}

TEST_CASE("zero kernel run conserves mass") {
  SolverConfig c;
  c.kernel = KernelSpec::constant(0);
  c.R = 50;
  c.n = 100;
  c.time.T = 3;
  c.time.N = 30;
  const auto tr = run(c);
  REQUIRE(tr.steps.size() == 31);
  for (const auto& s : tr.steps) CHECK(std::abs(s.M1 - tr.steps.front().M1) <= 1e-14 * tr.steps.front().M1);
}

TEST_CASE("square-root product kernel conserves mass") {
  SolverConfig c;
  c.kernel = KernelSpec::sqrt_product();
  c.time.T = 3;
  const auto tr = run(c);
  CHECK(tr.steps.back().M1 / tr.steps.front().M1 >= 0.99);
  CHECK(tr.steps.back().t == doctest::Approx(3.0));
}

TEST_CASE("product-plus-sum kernel loses mass") {
  SolverConfig c;
  c.kernel = KernelSpec::product_plus_sum();
  c.n = 200;
  c.time.T = 3;
  const auto tr = run(c);
  CHECK(tr.steps.back().M1 < tr.steps.front().M1);
  const std::size_t tail = tr.steps.size() / 2;
  for (std::size_t i = tail + 1; i < tr.steps.size(); ++i) CHECK(tr.steps[i].M1 < tr.steps[i - 1].M1);
}

TEST_CASE("every accepted step is nonnegative and mass-balanced") {
  SolverConfig c;
  c.kernel = KernelSpec::product_plus_sum();
  c.n = 150;
  c.time.T = 1;
  c.outputs.every = 1;
  c.time.N = 200;
  const auto tr = run(c);
  for (const auto& st : tr.samples)
    for (double g : st.g) CHECK(g >= 0.0);
  for (std::size_t i = 1; i < tr.steps.size(); ++i) {
    const auto& a = tr.steps[i - 1];
    const auto& b = tr.steps[i];
    CHECK(b.boundary_flux >= 0.0);
    CHECK(std::abs(b.M1 - a.M1 + b.dt * b.boundary_flux) <= 1e-12 * tr.steps.front().M1);
  }
}

TEST_CASE("constant kernel follows 1/(1+t)") {
  SolverConfig c;
  c.kernel = KernelSpec::constant(2);
  c.time.T = 3;
  const auto tr = run(c);
  for (const auto& s : tr.steps) CHECK(std::abs(s.M0 * (1 + s.t) - 1.0) <= 0.01);
}

TEST_CASE("fixed steps of a stiff run are split into substeps") {
  SolverConfig c;
  c.kernel = KernelSpec::constant(2);
  c.R = 20;
  c.n = 50;
  c.time.T = 5;
  c.time.N = 1;
  const auto tr = run(c);
  CHECK(tr.rejected_steps > 0);
  CHECK(tr.steps.size() > 2);
  CHECK(tr.steps.back().t == doctest::Approx(5.0));
  CHECK(tr.fixed_dt);
}

TEST_CASE("mass defect at T = 3 shrinks with refinement") {
  std::vector<double> defect;
  for (std::size_t n : {250, 500, 1000}) {
    SolverConfig c;
    c.kernel = KernelSpec::sqrt_product();
    c.n = n;
    c.time.T = 3;
    const auto tr = run(c);
    defect.push_back(1.0 - tr.steps.back().M1 / tr.steps.front().M1);
  }
  CAPTURE(defect[0]);
  CAPTURE(defect[1]);
  CAPTURE(defect[2]);
  CHECK(std::abs(defect[2] - defect[1]) < std::abs(defect[1] - defect[0]));
  for (double d : defect) CHECK(d < 1e-3);
}

TEST_CASE("snapshots land on requested times") {
  SolverConfig c;
  c.kernel = KernelSpec::sum();
  c.n = 80;
  c.R = 40;
  c.time.T = 1;
  c.outputs.snapshot_times = {0.25, 0.5};
  const auto tr = run(c);
  auto has = [&](double t) {
    return std::any_of(tr.samples.begin(), tr.samples.end(), [&](const State& s) { return std::abs(s.t - t) < 1e-12; });
  };
  CHECK(has(0.0));
  CHECK(has(0.25));
  CHECK(has(0.5));
  CHECK(has(1.0));
}
