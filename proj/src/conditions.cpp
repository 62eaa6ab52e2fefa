#include "sce/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "sce/error.hpp"

namespace sce {

namespace {

struct SupResult {
  double value = -std::numeric_limits<double>::infinity();
  Witness witness;
};

SupResult sample_sup(const PairSampler& sample, const std::function<double(double, double)>& f,
                     const char* what) {
  SupResult r;
  for (const Point2& p : sample.pairs()) {
    const double v = f(p.x, p.y);
    if (!std::isfinite(v))
      throw Error(ErrorCode::NonFiniteRatio, std::string(what) + " ratio not finite at (" + std::to_string(p.x) +
                                                 ", " + std::to_string(p.y) + ")");
    if (v > r.value) r = {v, {p.x, p.y, v}};
  }
  return r;
}

bool stable(double base, double grown) {
  const double scale = std::max(std::abs(base), std::abs(grown));
  if (scale == 0.0) return true;
  return std::abs(grown - base) <= kBoxStability * scale;
}

ConditionReport bounded_ratio_report(const char* id, const char* constant, const PairSampler& sample,
                                     const std::function<double(double, double)>& ratio) {
  ConditionReport rep;
  rep.condition = id;
  rep.sample = sample;
  const SupResult base = sample_sup(sample, ratio, id);
  const SupResult grown = sample_sup(sample.doubled(), ratio, id);
  rep.constants = {{constant, base.value}, {std::string(constant) + "_doubled_box", grown.value}};
  rep.witness = base.witness;
  if (stable(base.value, grown.value)) {
    rep.verdict = Verdict::HoldsOnSample;
  } else {
    rep.verdict = Verdict::Inconclusive;
    rep.note = "diverging: constant grows with the sample box";
  }
  return rep;
}

// Lower-left anchored box [r, hi]^2 with the same count and seed.
PairSampler shifted(const PairSampler& s, double r) {
  PairSampler out = s;
  out.lo = r;
  return out;
}

}  // namespace

double comparison_kernel_1(const WeightSpec& b, double x, double y) { return (b(x) + x + 1.0) * (b(y) + y + 1.0); }

double comparison_kernel_2(const WeightSpec& b, double x, double y) {
  return (b(y) + y + 1.0) * (x + 1.0) + (b(x) + x + 1.0) * (y + 1.0);
}

ConditionReport check_A1(const KernelSpec& k, const WeightSpec& b, const PairSampler& sample) {
  return bounded_ratio_report("A1", "C1", sample,
                              [&](double x, double y) { return (x + y) * k(x, y) / comparison_kernel_1(b, x, y); });
}

ConditionReport check_A2(const KernelSpec& k, const WeightSpec& b, const PairSampler& sample) {
  return bounded_ratio_report("A2", "C2", sample, [&](double x, double y) {
    const double lhs = -subadditivity_gap(b, x, y) * k(x, y);
    return std::max(lhs, 0.0) / comparison_kernel_2(b, x, y);
  });
}

ConditionReport check_A3(const KernelSpec& k, const WeightSpec& b, const PairSampler& sample) {
  ConditionReport rep;
  rep.condition = "A3";
  rep.sample = sample;
  // F(x,y) = (b(x+y) - b(x) - b(y)) K(x,y), with the gap evaluated as in the gelling kernel.
  auto F = [&](double x, double y) { return -subadditivity_gap(b, x, y) * k(x, y); };

  const std::vector<Point2> base_pts = sample.pairs();
  const std::vector<Point2> grown_pts = sample.doubled().pairs();

  auto lambda_mu0 = [&](const std::vector<Point2>& pts, Witness* w) {
    double lam = std::numeric_limits<double>::infinity();
    for (const Point2& p : pts) {
      const double v = -F(p.x, p.y) / (p.x * p.y);
      if (v < lam) {
        lam = v;
        if (w) *w = {p.x, p.y, v};
      }
    }
    return lam;
  };

  Witness w0;
  const double lam0 = lambda_mu0(base_pts, &w0);
  const double lam0_grown = lambda_mu0(grown_pts, nullptr);
  if (lam0 > 0.0 && stable(lam0, lam0_grown)) {
    rep.verdict = Verdict::HoldsOnSample;
    rep.constants = {{"lambda", lam0}, {"mu", 0.0}, {"lambda_doubled_box", lam0_grown}};
    rep.witness = w0;
    return rep;
  }

  auto mu_for = [&](const std::vector<Point2>& pts, double lam, Witness* w) {
    double mu = 0.0;
    for (const Point2& p : pts) {
      const double v = (F(p.x, p.y) + lam * p.x * p.y) / (p.x + p.y + 1.0);
      if (v > mu) {
        mu = v;
        if (w) *w = {p.x, p.y, v};
      }
    }
    return mu;
  };

  // Largest lambda whose required mu agrees between the two point sets.
  auto largest_lambda = [&](const std::vector<Point2>& a, const std::vector<Point2>& b) {
    auto feasible = [&](double lam) { return stable(mu_for(a, lam, nullptr), mu_for(b, lam, nullptr)); };
    double hi = 0.0;
    for (const Point2& p : a)
      if (p.x >= 1.0 && p.y >= 1.0) hi = std::max(hi, -F(p.x, p.y) / (p.x * p.y));
    hi *= 2.0;
    if (!(hi > 0.0) || !feasible(std::numeric_limits<double>::min())) return 0.0;
    if (feasible(hi)) return hi;
    double lo = 0.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (feasible(mid)) lo = mid;
      else hi = mid;
    }
    return lo;
  };

  const double lam = largest_lambda(base_pts, grown_pts);
  if (!(lam > 0.0)) {
    rep.verdict = Verdict::Violated;
    rep.constants = {{"lambda", lam0}, {"mu", 0.0}, {"lambda_doubled_box", lam0_grown}};
    rep.witness = w0;
    rep.note = "no lambda > 0 with a box-stable mu";
    return rep;
  }
  const double lam_grown = largest_lambda(grown_pts, sample.doubled().doubled().pairs());
  Witness wm;
  const double mu = mu_for(base_pts, lam, &wm);
  rep.constants = {{"lambda", lam}, {"mu", mu}, {"lambda_doubled_box", lam_grown}};
  rep.witness = wm;
  if (!stable(lam, lam_grown)) {
    rep.verdict = Verdict::Violated;
    rep.note = "feasible lambda shrinks with the sample box";
    return rep;
  }
  rep.verdict = Verdict::HoldsOnSample;
  return rep;
}

ConditionReport check_Kr(const KernelSpec& k, const std::vector<double>& r_list, const PairSampler& sample) {
  ConditionReport rep;
  rep.condition = "Kr";
  rep.sample = sample;
  rep.verdict = Verdict::HoldsOnSample;
  Witness worst{0.0, 0.0, std::numeric_limits<double>::infinity()};
  bool violated = false, diverging = false;
  for (const double r : r_list) {
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidParameters, "Kr needs positive r");
    if (r >= sample.hi) throw Error(ErrorCode::InvalidParameters, "Kr needs r below the box edge");
    // Infima over the nested boxes [r, B_q]^2, B_q = r (hi/r)^(q/8), q = 1..8.
    constexpr int kNest = 8;
    auto nested_inf = [&](const PairSampler& s, Witness* w) {
      std::vector<Point2> pts = shifted(s, r).pairs();
      pts.push_back({r, r});
      pts.push_back({r, s.hi});
      pts.push_back({s.hi, s.hi});
      std::vector<double> m(kNest, std::numeric_limits<double>::infinity());
      const double span = std::log(s.hi / r);
      for (const Point2& p : pts) {
        const double v = k(p.x, p.y);
        const double reach = std::log(std::max(p.x, p.y) / r) / span;
        const int q = std::clamp(static_cast<int>(std::ceil(reach * kNest - 1e-9)) - 1, 0, kNest - 1);
        if (v < m[q]) m[q] = v;
        if (w && v < w->margin) *w = {p.x, p.y, v};
      }
      for (int q = 1; q < kNest; ++q) m[q] = std::min(m[q], m[q - 1]);
      return m;
    };
    Witness w{0.0, 0.0, std::numeric_limits<double>::infinity()};
    const std::vector<double> base = nested_inf(sample, &w);
    const std::vector<double> grown = nested_inf(sample.doubled(), nullptr);
    rep.constants.emplace_back("inf_r=" + std::to_string(r), base.back());
    if (w.margin < worst.margin) worst = w;
    if (base.front() <= kFloorThreshold) {
      violated = true;
    } else if (base.back() <= kFloorThreshold || (grown.back() < base.back() && !stable(base.back(), grown.back()))) {
      diverging = true;
    }
  }
  if (violated) {
    rep.verdict = Verdict::Violated;
  } else if (diverging) {
    rep.verdict = Verdict::Inconclusive;
    rep.note = "diverging: infimum shrinks with the sample box";
  }
  rep.witness = worst;
  return rep;
}

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::MassConservingCandidate: return "MassConservingCandidate";
    case Classification::GelationCandidate: return "GelationCandidate";
    case Classification::Inconclusive: return "Inconclusive";
  }
  return "Unknown";
}

ClassifyResult classify(const KernelSpec& k, const WeightSpec& b, const PairSampler& sample) {
  ClassifyResult res;
  const ConditionReport a1 = check_A1(k, b, sample);
  const ConditionReport a2 = check_A2(k, b, sample);
  res.reports = {a1, a2};
  if (a1.holds() && a2.holds()) {
    res.verdict = Classification::MassConservingCandidate;
    return res;
  }
  const ConditionReport a3 = check_A3(k, b, sample);
  const double rmin = std::max(sample.lo, 1e-3);
  std::vector<double> rs;
  for (double r = rmin; r < sample.hi / 10.0 && rs.size() < 6; r *= 100.0) rs.push_back(r);
  const ConditionReport kr = check_Kr(k, rs, sample);
  const ConditionReport mono = check_nondecreasing(b, log_points(sample.lo, sample.hi, 2000, sample.seed));
  res.reports.push_back(a3);
  res.reports.push_back(kr);
  res.reports.push_back(mono);
  if (a3.holds() && kr.holds() && mono.holds()) res.verdict = Classification::GelationCandidate;
  return res;
}

}  // namespace sce
