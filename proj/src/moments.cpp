#include "sce/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sce/error.hpp"

namespace sce {

namespace {

struct Series {
  std::vector<double> t;
  std::vector<double> v;
};

// Full-domain M^b per accepted step when b is a configured weight, else per sample.
Series full_moment_series(const Trajectory& traj, const WeightSpec& b) {
  Series s;
  if (const auto idx = traj.weight_index(b.label())) {
    for (const StepRecord& r : traj.steps) {
      s.t.push_back(r.t);
      s.v.push_back(r.Mb[*idx]);
    }
    return s;
  }
  for (const State& st : traj.samples) {
    s.t.push_back(st.t);
    s.v.push_back(generalized_moment(st, b));
  }
  return s;
}

}  // namespace

double ConservationBound::operator()(double t) const { return (Mb0 + mu0) * std::exp(C2 * mu0 * t); }

double fraction_below(const Mesh& m, std::size_t i, double r) {
  const double lo = m.edges[i], hi = m.edges[i + 1];
  if (r >= hi) return 1.0;
  if (r <= lo) return 0.0;
  return (r - lo) / m.widths[i];
}

double truncated_moment(const State& s, const WeightSpec& b, double r) {
  const Mesh& m = *s.mesh;
  double acc = 0.0;
  for (std::size_t i = 0; i < m.n; ++i) {
    const double f = fraction_below(m, i, r);
    if (f == 0.0) break;
    acc += f * m.widths[i] * b(m.midpoints[i]) * s.g[i] / m.midpoints[i];
  }
  return acc;
}

double generalized_moment(const State& s, const WeightSpec& b) { return truncated_moment(s, b, s.mesh->R); }

MomentSeries moment_series(const Trajectory& traj, const WeightSpec& b, double r) {
  MomentSeries out;
  out.label = b.label();
  out.r = r;
  for (const State& st : traj.samples) out.samples.push_back({st.t, truncated_moment(st, b, r)});
  return out;
}

std::vector<double> collision_operator(const State& s, const KernelSpec& k) {
  const Mesh& m = *s.mesh;
  const std::size_t n = m.n;
  std::vector<double> a(n), gain(n, 0.0), Q(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) a[i] = m.widths[i] * s.u(i);
  for (std::size_t j = 0; j < n; ++j) {
    if (a[j] == 0.0) continue;
    double loss = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      if (a[l] == 0.0) continue;
      const double kv = k(m.midpoints[j], m.midpoints[l]);
      const double c = 0.5 * a[j] * a[l] * kv;
      loss += a[l] * kv;
      const double sum = m.midpoints[j] + m.midpoints[l];
      if (sum >= m.R) continue;
      const auto it = std::upper_bound(m.midpoints.begin(), m.midpoints.end(), sum);
      const std::size_t hi = static_cast<std::size_t>(it - m.midpoints.begin());
      if (hi >= n) {
        gain[n - 1] += c * sum / m.midpoints[n - 1];
        continue;
      }
      const std::size_t lo = hi - 1;
      const double upper = c * (sum - m.midpoints[lo]) / (m.midpoints[hi] - m.midpoints[lo]);
      gain[hi] += upper;
      gain[lo] += c - upper;
    }
    Q[j] -= s.u(j) * loss;
  }
  for (std::size_t i = 0; i < n; ++i) Q[i] += gain[i] / m.widths[i];
  return Q;
}

double eval_collision(const State& s, const KernelSpec& k, std::size_t cell) {
  if (cell >= s.mesh->n) throw Error(ErrorCode::InvalidParameters, "cell index out of range");
  return collision_operator(s, k)[cell];
}

double flux_vs_collision_residual(const State& s, const KernelSpec& k, double x) {
  const Mesh& m = *s.mesh;
  if (x < 0.0 || x > m.R) throw Error(ErrorCode::InvalidParameters, "x outside [0, R]");
  const auto it = std::lower_bound(m.edges.begin(), m.edges.end(), x);
  std::size_t edge = static_cast<std::size_t>(it - m.edges.begin());
  if (edge > 0 && (edge > m.n || x - m.edges[edge - 1] < m.edges[edge] - x)) --edge;
  if (edge == 0) return 0.0;
  const std::vector<double> Q = collision_operator(s, k);
  double moment = 0.0;
  for (std::size_t i = 0; i < edge; ++i) moment += m.widths[i] * m.midpoints[i] * Q[i];
  return std::abs(discrete_flux(s, k, edge) + moment);
}

double tmi_rhs(const State& s, const KernelSpec& k, const WeightSpec& b, double r) {
  const Mesh& m = *s.mesh;
  const std::size_t n = m.n;
  std::vector<double> a(n), bm(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = m.widths[i] * s.u(i);
    bm[i] = b(m.midpoints[i]);
  }
  double domain = 0.0, boundary = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double alpha = fraction_below(m, j, r);
    if (alpha == 0.0) break;
    if (a[j] == 0.0) continue;
    const double reach = r - m.midpoints[j];
    double dsum = 0.0, bsum = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      if (a[l] == 0.0) continue;
      const double beta = reach > 0.0 ? fraction_below(m, l, reach) : 0.0;
      const double kv = k(m.midpoints[j], m.midpoints[l]) * a[l];
      if (beta > 0.0) dsum += beta * (b(m.midpoints[j] + m.midpoints[l]) - bm[j] - bm[l]) * kv;
      if (beta < 1.0) bsum += (1.0 - beta) * kv;
    }
    domain += 0.5 * alpha * a[j] * dsum;
    boundary += alpha * bm[j] * a[j] * bsum;
  }
  return domain - boundary;
}

double tmi_residual(const Trajectory& traj, const WeightSpec& b, double r, double t) {
  const auto& smp = traj.samples;
  if (smp.size() < 3) throw Error(ErrorCode::InsufficientSamples, "need at least 3 samples");
  std::size_t c = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < smp.size(); ++i) {
    const double d = std::abs(smp[i].t - t);
    if (d < best) {
      best = d;
      c = i;
    }
  }
  if (c == 0 || c + 1 >= smp.size())
    throw Error(ErrorCode::InsufficientSamples, "t has no samples on both sides");
  const double h1 = smp[c].t - smp[c - 1].t;
  const double h2 = smp[c + 1].t - smp[c].t;
  const double fm = truncated_moment(smp[c - 1], b, r);
  const double f0 = truncated_moment(smp[c], b, r);
  const double fp = truncated_moment(smp[c + 1], b, r);
  const double deriv = (h1 * h1 * (fp - f0) + h2 * h2 * (f0 - fm)) / (h1 * h2 * (h1 + h2));
  return std::abs(deriv - tmi_rhs(smp[c], traj.kernel, b, r));
}

ConditionReport check_monotone_subadditive(const Trajectory& traj, const WeightSpec& b) {
  ConditionReport rep;
  rep.condition = "Monotone[" + b.label() + "]";
  if (!b.claims(WeightTag::Nonnegative) || !b.claims(WeightTag::Subadditive)) {
    rep.verdict = Verdict::Inconclusive;
    rep.note = "weight not tagged nonnegative and subadditive";
    return rep;
  }
  const Series s = full_moment_series(traj, b);
  if (s.v.empty()) throw Error(ErrorCode::EmptySeries, "trajectory has no samples");
  const double tol = kMonotoneTolerance * std::abs(s.v.front());
  double worst = -std::numeric_limits<double>::infinity();
  Witness w;
  for (std::size_t i = 1; i < s.v.size(); ++i) {
    const double inc = s.v[i] - s.v[i - 1];
    if (inc > worst) {
      worst = inc;
      w = {s.t[i], s.v[i], inc};
    }
  }
  rep.witness = w;
  rep.constants.emplace_back("max_increase", s.v.size() > 1 ? worst : 0.0);
  rep.constants.emplace_back("tolerance", tol);
  rep.verdict = (s.v.size() < 2 || worst <= tol) ? Verdict::HoldsOnSample : Verdict::Violated;
  return rep;
}

ConditionReport check_L_bound(const Trajectory& traj, const WeightSpec& b, double C2) {
  ConditionReport rep;
  rep.condition = "LBound[" + b.label() + "]";
  if (traj.steps.empty()) throw Error(ErrorCode::EmptySeries, "trajectory has no steps");
  const Series s = full_moment_series(traj, b);
  ConservationBound L;
  L.mu0 = traj.steps.front().M0 + traj.steps.front().M1;
  L.C2 = C2;
  L.Mb0 = s.v.front();
  rep.constants = {{"mu0", L.mu0}, {"C2", C2}, {"Mb0", L.Mb0}};
  double worst = std::numeric_limits<double>::infinity();
  Witness w;
  bool ok = true;
  for (std::size_t i = 0; i < s.v.size(); ++i) {
    const double bound = L(s.t[i]);
    const double margin = bound - s.v[i];
    if (margin < worst) {
      worst = margin;
      w = {s.t[i], s.v[i], margin};
    }
    if (s.v[i] > bound * (1.0 + 1e-12)) ok = false;
  }
  rep.witness = w;
  rep.verdict = ok ? Verdict::HoldsOnSample : Verdict::Violated;
  return rep;
}

ConditionReport check_M0_decay(const Trajectory& traj, double eps_floor, double theta) {
  ConditionReport rep;
  rep.condition = "M0Decay";
  if (traj.steps.empty()) throw Error(ErrorCode::EmptySeries, "trajectory has no steps");
  const StepRecord& first = traj.steps.front();
  const StepRecord& last = traj.steps.back();
  const double M00 = first.M0;
  const double tol = kMonotoneTolerance * M00;
  bool monotone = true;
  double min_ratio = std::numeric_limits<double>::infinity();
  Witness w{first.t, M00, 0.0};
  double worst_inc = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < traj.steps.size(); ++i) {
    const StepRecord& a = traj.steps[i - 1];
    const StepRecord& b = traj.steps[i];
    const double inc = b.M0 - a.M0;
    if (inc > worst_inc) {
      worst_inc = inc;
      w = {b.t, b.M0, inc};
    }
    if (inc > tol) monotone = false;
    const double floor_rate = 0.5 * eps_floor * a.M0 * a.M0;
    if (b.dt > 0.0 && floor_rate > 0.0) min_ratio = std::min(min_ratio, (-inc / b.dt) / floor_rate);
  }
  const double elapsed = last.t - first.t;
  const double mean_rate = elapsed > 0.0 ? (M00 - last.M0) / elapsed : 0.0;
  rep.witness = w;
  rep.constants = {{"M0_initial", M00},
                   {"M0_final", last.M0},
                   {"mean_decay_rate", mean_rate},
                   {"min_rate_over_floor_bound", std::isfinite(min_ratio) ? min_ratio : 0.0},
                   {"theta", theta}};
  const bool reached = last.M0 <= theta * M00 || M00 == 0.0;
  rep.verdict = monotone && reached ? Verdict::HoldsOnSample : Verdict::Violated;
  if (monotone && !reached) rep.note = "M0 nonincreasing but final ratio above theta";
  return rep;
}

}  // namespace sce
