#include "sce/gelation.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <optional>
#include <thread>
#include <utility>

#include "sce/error.hpp"

namespace sce {

std::string_view to_string(GelVerdict v) {
  switch (v) {
    case GelVerdict::GelDetected: return "GEL_DETECTED";
    case GelVerdict::NoGelDetected: return "NO_GEL_DETECTED";
    case GelVerdict::TruncationSuspected: return "TRUNCATION_SUSPECTED";
  }
  return "UNKNOWN";
}

MomentSeries mass_series(const Trajectory& traj) {
  MomentSeries s;
  s.label = "M1";
  s.r = traj.mesh ? traj.mesh->R : 0.0;
  s.samples.reserve(traj.steps.size());
  for (const StepRecord& r : traj.steps) s.samples.push_back({r.t, r.M1});
  return s;
}

GelReport detect(const MomentSeries& m1, double theta, std::size_t sustain) {
  if (m1.samples.empty()) throw Error(ErrorCode::EmptySeries, "M1 series is empty");
  if (!(theta > 0.0 && theta < 1.0)) throw Error(ErrorCode::InvalidParameters, "theta must lie in (0, 1)");
  if (sustain < 1) throw Error(ErrorCode::InvalidParameters, "sustain must be >= 1");
  GelReport rep;
  rep.theta = theta;
  const auto& s = m1.samples;
  const double threshold = (1.0 - theta) * s.front().value;
  std::size_t run = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i].value < threshold) {
      ++run;
      if (run == sustain) {
        const std::size_t first = i + 1 - sustain;
        const MomentSample& a = s[first - 1];
        const MomentSample& b = s[first];
        const double frac = (a.value - threshold) / (a.value - b.value);
        rep.T_gel = a.t + std::clamp(frac, 0.0, 1.0) * (b.t - a.t);
        rep.verdict = GelVerdict::GelDetected;
        return rep;
      }
    } else {
      run = 0;
    }
  }
  rep.verdict = GelVerdict::NoGelDetected;
  return rep;
}

GelReport r_sweep(const SolverConfig& tmpl, const std::vector<SweepEntry>& entries, double theta,
                  std::size_t sustain, std::vector<Trajectory>* runs) {
  if (entries.empty()) throw Error(ErrorCode::InvalidParameters, "sweep needs at least one R");
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (!(entries[i].R > entries[i - 1].R)) throw Error(ErrorCode::InvalidParameters, "sweep R must increase");

  const auto policy = std::thread::hardware_concurrency() > 1 ? std::launch::async : std::launch::deferred;
  const bool keep = runs != nullptr;
  std::vector<std::future<std::pair<SweepRow, std::optional<Trajectory>>>> jobs;
  for (const SweepEntry& e : entries) {
    jobs.push_back(std::async(policy, [&tmpl, e, theta, sustain, keep] {
      SolverConfig cfg = tmpl;
      cfg.R = e.R;
      if (e.N) cfg.time.N = e.N;
      Trajectory traj = run(cfg);
      const GelReport one = detect(mass_series(traj), theta, sustain);
      SweepRow row;
      row.R = e.R;
      row.T_gel = one.T_gel;
      row.M1_initial = traj.steps.front().M1;
      row.M1_final = traj.steps.back().M1;
      return std::make_pair(row, keep ? std::optional<Trajectory>(std::move(traj)) : std::nullopt);
    }));
  }
  GelReport rep;
  rep.theta = theta;
  for (auto& j : jobs) {
    auto [row, traj] = j.get();
    rep.sweep.push_back(row);
    if (keep) runs->push_back(std::move(*traj));
  }

  const bool any_gel = std::any_of(rep.sweep.begin(), rep.sweep.end(), [](const SweepRow& r) { return r.T_gel; });
  if (!any_gel) {
    rep.verdict = GelVerdict::NoGelDetected;
    return rep;
  }
  const SweepRow& top = rep.sweep.back();
  rep.T_gel = top.T_gel;
  if (rep.sweep.size() < 2) {
    rep.verdict = top.T_gel ? GelVerdict::GelDetected : GelVerdict::TruncationSuspected;
    return rep;
  }
  const SweepRow& prev = rep.sweep[rep.sweep.size() - 2];
  if (top.T_gel && prev.T_gel && std::abs(*top.T_gel - *prev.T_gel) <= kSweepStability * *top.T_gel)
    rep.verdict = GelVerdict::GelDetected;
  else
    rep.verdict = GelVerdict::TruncationSuspected;
  return rep;
}

double gel_time_bound(double Mb0, double lambda, double M10) {
  if (!(lambda > 0.0) || !(M10 > 0.0) || !(Mb0 >= 0.0) || !std::isfinite(Mb0) || !std::isfinite(lambda) ||
      !std::isfinite(M10))
    throw Error(ErrorCode::InvalidParameters, "gel_time_bound needs lambda > 0, M1(0) > 0, M^b(0) >= 0");
  return 2.0 * Mb0 / (lambda * M10 * M10);
}

}  // namespace sce
