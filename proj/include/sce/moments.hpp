#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sce/kernels.hpp"
#include "sce/report.hpp"
#include "sce/solver.hpp"
#include "sce/weights.hpp"

namespace sce {

struct MomentSample {
  double t;
  double value;
};

struct MomentSeries {
  std::string label;
  double r = 0.0;
  std::vector<MomentSample> samples;
};

/// Growth bound L(t) = (M^b(0) + mu0) exp(C2 mu0 t), mu0 = M0(0) + M1(0).
struct ConservationBound {
  double mu0 = 0.0;
  double C2 = 0.0;
  double Mb0 = 0.0;
  double operator()(double t) const;
};

/// Overlap fraction of cell i with [0, r].
double fraction_below(const Mesh& m, std::size_t i, double r);

/// m^b(r) = sum_i frac_i w_i b(m_i) g_i / m_i with frac_i the overlap of cell i with [0, r].
double truncated_moment(const State& s, const WeightSpec& b, double r);

/// Full-domain M^b.
double generalized_moment(const State& s, const WeightSpec& b);

/// Truncated moment along the sampled states of a trajectory.
MomentSeries moment_series(const Trajectory& traj, const WeightSpec& b, double r);

/// Per-cell Q = Q1 - Q2 (density units). The gain term spreads each pair
/// (m_j, m_k) onto the two midpoints bracketing m_j + m_k so that count and
/// mass are both preserved; pairs with m_j + m_k >= R leave the domain.
std::vector<double> collision_operator(const State& s, const KernelSpec& k);
double eval_collision(const State& s, const KernelSpec& k, std::size_t cell);

/// |J(X) + sum_{cells below X} w m Q| with X snapped to the nearest edge.
double flux_vs_collision_residual(const State& s, const KernelSpec& k, double x);

/// Right-hand side of the truncated moment identity on the discrete state.
double tmi_rhs(const State& s, const KernelSpec& k, const WeightSpec& b, double r);

/// |d/dt m^b(r, t) - rhs| at the sample closest to t. The derivative is the
/// second-order central difference over the neighbouring samples. Throws
/// Error{InsufficientSamples} when t has no sample on both sides.
double tmi_residual(const Trajectory& traj, const WeightSpec& b, double r, double t);

/// Full-domain M^b nonincreasing step to step within 1e-10 M^b(0).
ConditionReport check_monotone_subadditive(const Trajectory& traj, const WeightSpec& b);

/// M^b(t) <= L(t) on every step.
ConditionReport check_L_bound(const Trajectory& traj, const WeightSpec& b, double C2);

/// M0 nonincreasing, and M0(T) <= theta M0(0). Also reports the smallest
/// ratio of the observed decay rate to the floor bound (eps_floor/2) M0^2.
ConditionReport check_M0_decay(const Trajectory& traj, double eps_floor, double theta = 1.0);

inline constexpr double kMonotoneTolerance = 1e-10;

}  // namespace sce
