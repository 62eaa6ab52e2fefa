#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "sce/moments.hpp"
#include "sce/solver.hpp"

namespace sce {

enum class GelVerdict { GelDetected, NoGelDetected, TruncationSuspected };

std::string_view to_string(GelVerdict v);

inline constexpr double kDefaultGelTheta = 0.01;
inline constexpr std::size_t kDefaultSustain = 2;
/// Relative shift of the onset between the two largest R values tolerated as stable.
inline constexpr double kSweepStability = 0.05;

struct SweepEntry {
  double R = 0.0;
  std::optional<std::size_t> N;  // fixed steps for this R; template's time policy otherwise
};

struct SweepRow {
  double R = 0.0;
  std::optional<double> T_gel;
  double M1_final = 0.0;
  double M1_initial = 0.0;
};

struct GelReport {
  GelVerdict verdict = GelVerdict::NoGelDetected;
  std::optional<double> T_gel;
  double theta = kDefaultGelTheta;
  std::vector<SweepRow> sweep;
  std::optional<double> T_bound;
};

/// M1(t) per accepted step.
MomentSeries mass_series(const Trajectory& traj);

/// First time M1 falls below (1 - theta) M1(0) and stays there for `sustain`
/// consecutive samples, linearly interpolated between the bracketing samples.
/// Throws Error{EmptySeries} or Error{InvalidParameters}.
GelReport detect(const MomentSeries& m1, double theta = kDefaultGelTheta, std::size_t sustain = kDefaultSustain);

/// Runs the template once per entry (R overridden, optionally N) and detects
/// the onset for each. TRUNCATION_SUSPECTED when the onsets of the two
/// largest R differ by more than kSweepStability or only one of them gels.
/// When runs is given, the trajectories are appended to it in entry order.
GelReport r_sweep(const SolverConfig& tmpl, const std::vector<SweepEntry>& entries,
                  double theta = kDefaultGelTheta, std::size_t sustain = kDefaultSustain,
                  std::vector<Trajectory>* runs = nullptr);

/// 2 M^b(0) / (lambda M1(0)^2). Throws Error{InvalidParameters}.
double gel_time_bound(double Mb0, double lambda, double M10);

}  // namespace sce
