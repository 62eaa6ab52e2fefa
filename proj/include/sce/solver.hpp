#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sce/kernels.hpp"
#include "sce/mesh.hpp"
#include "sce/weights.hpp"

namespace sce {

/// Precomputed kernel matrix and straddle tables for one (mesh, kernel) pair.
///
/// The flux through edge X_i is
///   J_i = sum_{j < i} w_j g_j sum_k theta_{ijk} w_k u_k K(m_j, m_k)
/// where theta_{ijk} is the fraction of cell k lying above X_i - m_j.
/// J_0 = 0. Immutable after construction; scratch lives in Workspace.
class FluxOperator {
 public:
  FluxOperator(std::shared_ptr<const Mesh> mesh, const KernelSpec& kernel);

  const Mesh& mesh() const noexcept { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const noexcept { return mesh_; }
  double K(std::size_t j, std::size_t k) const { return kmat_[j * n_ + k]; }

  /// Straddle cell of X_i - m_j and the fraction of it above the threshold (j < i).
  std::size_t straddle_cell(std::size_t i, std::size_t j) const { return straddle_[tri(i, j)]; }
  double straddle_fraction(std::size_t i, std::size_t j) const { return fraction_[tri(i, j)]; }

  struct Workspace {
    std::vector<double> a;       // w_k u_k
    std::vector<double> suffix;  // per active row: suffix sums of a_k K_jk, length n+1
    std::vector<std::size_t> active;
  };

  /// Fills J (size n+1). If max_rate is given, stores max over occupied cells
  /// of the collision frequency sum_k a_k K_jk.
  void edge_fluxes(const std::vector<double>& g, Workspace& ws, std::vector<double>& J,
                   double* max_rate = nullptr) const;

 private:
  static std::size_t tri(std::size_t i, std::size_t j) { return i * (i - 1) / 2 + j; }

  std::shared_ptr<const Mesh> mesh_;
  std::size_t n_;
  std::vector<double> kmat_;
  std::vector<std::size_t> straddle_;
  std::vector<double> fraction_;
};

/// Direct evaluation of the flux at edge i_edge, without precomputation.
double discrete_flux(const State& s, const KernelSpec& k, std::size_t i_edge);

/// Flux through an arbitrary size X in [0, R] with the same quadrature.
double discrete_flux_at(const State& s, const KernelSpec& k, double X);

struct StepResult {
  bool accepted = false;
  State state;
  double boundary_flux = 0.0;   // J at x = R
  double mass_defect = 0.0;     // |M1' - M1 + dt J_R|
  double max_rate = 0.0;
  std::size_t negative_cell = 0;
};

/// One explicit Euler step g' = g - dt/w (J_{i+1} - J_i). A step producing a
/// negative cell (beyond rounding) comes back with accepted = false and the
/// input state untouched.
StepResult step(const State& s, const FluxOperator& op, double dt);
StepResult step(const State& s, const KernelSpec& k, double dt);

struct TimeConfig {
  double T = 0.0;
  std::optional<std::size_t> N;  // fixed dt = T/N when set, else adaptive
  double max_relative_change = 0.1;
  double dt_initial = 0.0;       // adaptive only; 0 picks from the rate bound
};

struct OutputConfig {
  std::size_t every = 0;         // fixed mode: steps per output sample (0: N/300)
  double interval = 0.0;         // adaptive mode: time between samples (0: T/300)
  std::vector<double> snapshot_times;
};

struct SolverConfig {
  KernelSpec kernel = KernelSpec::constant(0.0);
  std::vector<WeightSpec> weights;
  double R = 200.0;
  std::size_t n = 500;
  double p = 3.0;
  std::function<double(double)> u0 = [](double x) { return std::exp(-x); };
  TimeConfig time;
  OutputConfig outputs;
};

/// Per accepted step (plus the initial row).
struct StepRecord {
  double t = 0.0;
  double dt = 0.0;
  double M0 = 0.0;
  double M1 = 0.0;
  std::vector<double> Mb;
  double boundary_flux = 0.0;
  double mass_defect = 0.0;
};

struct Trajectory {
  std::shared_ptr<const Mesh> mesh;
  KernelSpec kernel = KernelSpec::constant(0.0);
  std::vector<WeightSpec> weights;
  std::vector<StepRecord> steps;    // every accepted step
  std::vector<State> samples;       // states at output times (t = 0 first)
  std::vector<StepRecord> sampled;  // step records matching samples
  std::size_t rejected_steps = 0;
  bool fixed_dt = false;
  double T = 0.0;

  std::optional<std::size_t> weight_index(const std::string& label) const;
};

/// Advances the projected initial data to T. Fixed mode splits a rejected
/// step into 2, 4, ... substeps; adaptive mode halves dt on rejection and
/// keeps dt * max_rate <= max_relative_change. Throws Error{StiffnessFailure}
/// once dt falls below 1e-14 T.
Trajectory run(const SolverConfig& cfg);

/// Same, starting from an explicit state.
Trajectory run_from(const State& initial, const SolverConfig& cfg);

}  // namespace sce
