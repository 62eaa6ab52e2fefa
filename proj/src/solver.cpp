#include "sce/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sce/error.hpp"

namespace sce {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kUnderflowFraction = 1e-14;

// Fraction of cell k lying in [thr, inf).
double fraction_above(const Mesh& m, std::size_t k, double thr) {
  const double lo = m.edges[k], hi = m.edges[k + 1];
  if (thr <= lo) return 1.0;
  if (thr >= hi) return 0.0;
  return (hi - thr) / m.widths[k];
}

struct Coefficients {
  std::vector<double> count;              // w_i / m_i
  std::vector<std::vector<double>> wgt;   // w_i b(m_i) / m_i per weight
};

Coefficients moment_coefficients(const Mesh& m, const std::vector<WeightSpec>& weights) {
  Coefficients c;
  c.count.resize(m.n);
  for (std::size_t i = 0; i < m.n; ++i) c.count[i] = m.widths[i] / m.midpoints[i];
  for (const WeightSpec& b : weights) {
    std::vector<double> row(m.n);
    for (std::size_t i = 0; i < m.n; ++i) row[i] = m.widths[i] * b(m.midpoints[i]) / m.midpoints[i];
    c.wgt.push_back(std::move(row));
  }
  return c;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

StepRecord make_record(const State& s, const Coefficients& c, double dt, double jr, double defect) {
  StepRecord r;
  r.t = s.t;
  r.dt = dt;
  r.M0 = dot(c.count, s.g);
  r.M1 = discrete_mass(s);
  for (const auto& row : c.wgt) r.Mb.push_back(dot(row, s.g));
  r.boundary_flux = jr;
  r.mass_defect = defect;
  return r;
}

// g' = g - dt/w (J_{i+1} - J_i) with J precomputed for s. Rounding-level
// negatives are flushed to zero; anything larger rejects the step.
StepResult apply_update(const State& s, const std::vector<double>& J, double dt, double max_rate) {
  const Mesh& m = *s.mesh;
  StepResult r;
  r.state.mesh = s.mesh;
  r.state.t = s.t + dt;
  r.state.g.resize(m.n);
  r.boundary_flux = J[m.n];
  r.max_rate = max_rate;
  for (std::size_t i = 0; i < m.n; ++i) {
    const double change = dt / m.widths[i] * (J[i + 1] - J[i]);
    double gi = s.g[i] - change;
    if (gi < 0.0) {
      const double tol = 64.0 * kEps * (s.g[i] + dt / m.widths[i] * (J[i + 1] + J[i]));
      if (gi < -tol) {
        r.accepted = false;
        r.negative_cell = i;
        r.state = s;
        return r;
      }
      gi = 0.0;
    }
    r.state.g[i] = gi;
  }
  r.accepted = true;
  const double before = discrete_mass(s);
  const double after = discrete_mass(r.state);
  r.mass_defect = std::abs(after - before + dt * J[m.n]);
  return r;
}

}  // namespace

FluxOperator::FluxOperator(std::shared_ptr<const Mesh> mesh, const KernelSpec& kernel)
    : mesh_(std::move(mesh)), n_(mesh_->n) {
  const Mesh& m = *mesh_;
  if (m.R > kernel.domain_limit())
    throw Error(ErrorCode::NonFiniteEvaluation,
                "kernel " + kernel.label() + " is clamped below R = " + std::to_string(m.R));
  kmat_.resize(n_ * n_);
  for (std::size_t j = 0; j < n_; ++j) {
    for (std::size_t k = j; k < n_; ++k) {
      const double v = kernel(m.midpoints[j], m.midpoints[k]);
      kmat_[j * n_ + k] = v;
      kmat_[k * n_ + j] = v;
    }
  }
  const std::size_t tri_size = n_ * (n_ + 1) / 2;
  straddle_.resize(tri_size);
  fraction_.resize(tri_size);
  for (std::size_t i = 1; i <= n_; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double thr = m.edges[i] - m.midpoints[j];
      const std::size_t s = m.locate(thr);
      straddle_[tri(i, j)] = s;
      fraction_[tri(i, j)] = fraction_above(m, s, thr);
    }
  }
}

void FluxOperator::edge_fluxes(const std::vector<double>& g, Workspace& ws, std::vector<double>& J,
                               double* max_rate) const {
  const Mesh& m = *mesh_;
  ws.a.resize(n_);
  ws.active.clear();
  for (std::size_t k = 0; k < n_; ++k) {
    ws.a[k] = m.widths[k] * g[k] / m.midpoints[k];
    if (g[k] > 0.0) ws.active.push_back(k);
  }
  const std::size_t stride = n_ + 1;
  ws.suffix.resize(ws.active.size() * stride);
  double rate = 0.0;
  for (std::size_t r = 0; r < ws.active.size(); ++r) {
    const std::size_t j = ws.active[r];
    const double* krow = &kmat_[j * n_];
    double* srow = &ws.suffix[r * stride];
    srow[n_] = 0.0;
    double acc = 0.0;
    for (std::size_t k = n_; k-- > 0;) {
      acc += ws.a[k] * krow[k];
      srow[k] = acc;
    }
    rate = std::max(rate, acc);
  }
  if (max_rate) *max_rate = rate;

  J.assign(n_ + 1, 0.0);
  for (std::size_t i = 1; i <= n_; ++i) {
    double acc = 0.0;
    const std::size_t base = i * (i - 1) / 2;
    for (std::size_t r = 0; r < ws.active.size(); ++r) {
      const std::size_t j = ws.active[r];
      if (j >= i) break;
      const std::size_t s = straddle_[base + j];
      const double* srow = &ws.suffix[r * stride];
      const double inner = fraction_[base + j] * ws.a[s] * kmat_[j * n_ + s] + srow[s + 1];
      acc += m.widths[j] * g[j] * inner;
    }
    J[i] = acc;
  }
}

double discrete_flux_at(const State& s, const KernelSpec& k, double X) {
  const Mesh& m = *s.mesh;
  if (X <= 0.0) return 0.0;
  double J = 0.0;
  for (std::size_t j = 0; j < m.n && m.midpoints[j] < X; ++j) {
    if (s.g[j] == 0.0) continue;
    const double thr = X - m.midpoints[j];
    const std::size_t first = m.locate(thr);
    double inner = 0.0;
    for (std::size_t kk = first; kk < m.n; ++kk) {
      const double frac = kk == first ? fraction_above(m, kk, thr) : 1.0;
      inner += frac * m.widths[kk] * s.u(kk) * k(m.midpoints[j], m.midpoints[kk]);
    }
    J += m.widths[j] * s.g[j] * inner;
  }
  return J;
}

double discrete_flux(const State& s, const KernelSpec& k, std::size_t i_edge) {
  const Mesh& m = *s.mesh;
  if (i_edge > m.n) throw Error(ErrorCode::InvalidParameters, "edge index out of range");
  if (i_edge == 0) return 0.0;
  return discrete_flux_at(s, k, m.edges[i_edge]);
}

StepResult step(const State& s, const FluxOperator& op, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidParameters, "step needs dt > 0");
  FluxOperator::Workspace ws;
  std::vector<double> J;
  double rate = 0.0;
  op.edge_fluxes(s.g, ws, J, &rate);
  return apply_update(s, J, dt, rate);
}

StepResult step(const State& s, const KernelSpec& k, double dt) { return step(s, FluxOperator(s.mesh, k), dt); }

std::optional<std::size_t> Trajectory::weight_index(const std::string& label) const {
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (weights[i].label() == label) return i;
  return std::nullopt;
}

Trajectory run(const SolverConfig& cfg) {
  const auto mesh = build_mesh(cfg.R, cfg.n, cfg.p);
  return run_from(project_initial(cfg.u0, mesh), cfg);
}

Trajectory run_from(const State& initial, const SolverConfig& cfg) {
  const double T = cfg.time.T;
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorCode::ValidationError, "time.T must be > 0");
  if (cfg.time.N && *cfg.time.N == 0) throw Error(ErrorCode::ValidationError, "time.N must be >= 1");

  const FluxOperator op(initial.mesh, cfg.kernel);
  const Mesh& mesh = *initial.mesh;
  const Coefficients coef = moment_coefficients(mesh, cfg.weights);
  const double dt_floor = kUnderflowFraction * T;

  Trajectory traj;
  traj.mesh = initial.mesh;
  traj.kernel = cfg.kernel;
  traj.weights = cfg.weights;
  traj.T = T;
  traj.fixed_dt = cfg.time.N.has_value();

  FluxOperator::Workspace ws;
  std::vector<double> J;
  State cur = initial;
  double rate = 0.0;
  op.edge_fluxes(cur.g, ws, J, &rate);

  traj.steps.push_back(make_record(cur, coef, 0.0, J[mesh.n], 0.0));
  traj.samples.push_back(cur);
  traj.sampled.push_back(traj.steps.back());

  std::vector<double> snaps = cfg.outputs.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  std::size_t next_snap = 0;
  while (next_snap < snaps.size() && snaps[next_snap] <= 0.0) ++next_snap;

  auto record_sample = [&] {
    traj.samples.push_back(cur);
    traj.sampled.push_back(traj.steps.back());
  };

  // Advances cur by exactly dt using the fluxes J of cur, splitting on
  // rejection. Returns after cur.t reaches the target.
  auto accept = [&](const StepResult& r, double dt) {
    cur = r.state;
    const double jr = J[mesh.n];
    op.edge_fluxes(cur.g, ws, J, &rate);
    traj.steps.push_back(make_record(cur, coef, dt, jr, r.mass_defect));
  };

  if (cfg.time.N) {
    const std::size_t N = *cfg.time.N;
    const std::size_t every = cfg.outputs.every ? cfg.outputs.every : std::max<std::size_t>(1, N / 300);
    for (std::size_t k = 0; k < N; ++k) {
      const double target = T * static_cast<double>(k + 1) / static_cast<double>(N);
      std::size_t pieces = 1;
      while (cur.t < target) {
        const double remaining = target - cur.t;
        const double dt = remaining / static_cast<double>(pieces);
        if (dt < dt_floor)
          throw Error(ErrorCode::StiffnessFailure, "fixed step split below 1e-14 T at t=" + std::to_string(cur.t));
        StepResult r = apply_update(cur, J, dt, rate);
        if (!r.accepted) {
          ++traj.rejected_steps;
          pieces *= 2;
          continue;
        }
        if (pieces == 1) r.state.t = target;
        accept(r, dt);
        if (pieces > 1) --pieces;
      }
      bool snap_due = false;
      while (next_snap < snaps.size() && snaps[next_snap] <= cur.t + 1e-12 * T) {
        snap_due = true;
        ++next_snap;
      }
      if ((k + 1) % every == 0 || k + 1 == N || snap_due) record_sample();
    }
    return traj;
  }

  const double interval = cfg.outputs.interval > 0.0 ? cfg.outputs.interval : T / 300.0;
  std::vector<double> out_times;
  for (std::size_t k = 1;; ++k) {
    const double t = std::min(T, interval * static_cast<double>(k));
    out_times.push_back(t);
    if (t >= T) break;
  }
  for (double s : snaps)
    if (s > 0.0 && s < T) out_times.push_back(s);
  std::sort(out_times.begin(), out_times.end());
  out_times.erase(std::unique(out_times.begin(), out_times.end()), out_times.end());

  const double max_rel = cfg.time.max_relative_change;
  double dt_prev = cfg.time.dt_initial > 0.0 ? cfg.time.dt_initial : std::numeric_limits<double>::infinity();
  for (const double target : out_times) {
    while (cur.t < target) {
      double dt = std::min(target - cur.t, 2.0 * dt_prev);
      if (rate > 0.0) dt = std::min(dt, max_rel / rate);
      for (;;) {
        if (dt < dt_floor)
          throw Error(ErrorCode::StiffnessFailure, "adaptive dt below 1e-14 T at t=" + std::to_string(cur.t));
        StepResult r = apply_update(cur, J, dt, rate);
        if (r.accepted) {
          if (target - r.state.t <= 1e-12 * T) r.state.t = target;
          accept(r, dt);
          dt_prev = dt;
          break;
        }
        ++traj.rejected_steps;
        dt *= 0.5;
      }
    }
    record_sample();
  }
  return traj;
}

}  // namespace sce
