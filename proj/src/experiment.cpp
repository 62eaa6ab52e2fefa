#include "sce/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "sce/conditions.hpp"
#include "sce/error.hpp"
#include "sce/moments.hpp"

namespace sce {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const fs::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + file.string());
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::IoError, "cannot create output directory " + dir.string());
}

std::string verdict_word(Verdict v) {
  switch (v) {
    case Verdict::HoldsOnSample: return "PASS";
    case Verdict::Violated: return "FAIL";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

std::string moment_header(const std::vector<WeightSpec>& weights) {
  std::string h;
  for (const WeightSpec& w : weights) h += ",Mb_" + w.label();
  return h;
}

void write_moments(const fs::path& dir, const Trajectory& traj) {
  std::ofstream out = open_out(dir / "moments.csv");
  out << "t,M0,M1" << moment_header(traj.weights) << ",boundary_flux\n";
  for (const StepRecord& r : traj.sampled) {
    out << num(r.t) << ',' << num(r.M0) << ',' << num(r.M1);
    for (double v : r.Mb) out << ',' << num(v);
    out << ',' << num(r.boundary_flux) << '\n';
  }
}

void write_steps(const fs::path& dir, const Trajectory& traj) {
  std::ofstream out = open_out(dir / "steps.csv");
  out << "t,dt,M0,M1" << moment_header(traj.weights) << ",boundary_flux,mass_defect\n";
  for (const StepRecord& r : traj.steps) {
    out << num(r.t) << ',' << num(r.dt) << ',' << num(r.M0) << ',' << num(r.M1);
    for (double v : r.Mb) out << ',' << num(v);
    out << ',' << num(r.boundary_flux) << ',' << num(r.mass_defect) << '\n';
  }
}

void write_samples(const fs::path& dir, const Trajectory& traj) {
  std::ofstream out = open_out(dir / "samples.csv");
  out << "t,cell,g\n";
  for (const State& s : traj.samples)
    for (std::size_t i = 0; i < s.g.size(); ++i) out << num(s.t) << ',' << i << ',' << num(s.g[i]) << '\n';
}

void write_snapshots(const fs::path& dir, const Trajectory& traj, const std::vector<double>& times) {
  for (double t : times) {
    const auto it = std::min_element(traj.samples.begin(), traj.samples.end(), [t](const State& a, const State& b) {
      return std::abs(a.t - t) < std::abs(b.t - t);
    });
    if (it == traj.samples.end()) continue;
    std::ofstream out = open_out(dir / ("u_" + num(t) + ".csv"));
    out << "x_mid,u,g\n";
    const Mesh& m = *it->mesh;
    for (std::size_t i = 0; i < m.n; ++i) out << num(m.midpoints[i]) << ',' << num(it->u(i)) << ',' << num(it->g[i]) << '\n';
  }
}

void write_plot_script(const fs::path& dir, const Trajectory& traj) {
  std::ofstream out = open_out(dir / "plot.py");
  out << "import glob\nimport os\n\nimport matplotlib\nmatplotlib.use(\"Agg\")\n"
         "import matplotlib.pyplot as plt\nimport pandas as pd\n\n"
         "here = os.path.dirname(os.path.abspath(__file__))\n"
         "m = pd.read_csv(os.path.join(here, \"moments.csv\"))\n\n"
         "fig, (ax_u, ax_m) = plt.subplots(1, 2, figsize=(11, 4))\n"
         "for path in sorted(glob.glob(os.path.join(here, \"u_*.csv\")), key=lambda p: float(os.path.basename(p)[2:-4])):\n"
         "    s = pd.read_csv(path)\n"
         "    s = s[s.u > 0]\n"
         "    ax_u.loglog(s.x_mid, s.u, label=\"t = \" + os.path.basename(path)[2:-4])\n"
         "ax_u.set_xlabel(\"x\")\nax_u.set_ylabel(\"u(x, t)\")\nax_u.legend()\n"
         "ax_m.plot(m.t, m.M1, label=\"M1\")\n"
         "ax_m.plot(m.t, m.M0, label=\"M0\", linestyle=\"--\")\n"
         "ax_m.set_xlabel(\"t\")\nax_m.legend()\n"
         "ax_m.set_title(\""
      << traj.kernel.label() << ", R = " << num(traj.mesh->R) << "\")\n"
      << "fig.tight_layout()\nfig.savefig(os.path.join(here, \"figure.png\"), dpi=150)\n";
}

json report_json(const ConditionReport& r) {
  json j{{"condition", r.condition}, {"verdict", std::string(to_string(r.verdict))}};
  json constants = json::object();
  for (const auto& [k, v] : r.constants) constants[k] = v;
  j["constants"] = constants;
  if (r.witness) j["witness"] = {{"x", r.witness->x}, {"y", r.witness->y}, {"margin", r.witness->margin}};
  j["sample"] = {{"lo", r.sample.lo}, {"hi", r.sample.hi}, {"count", r.sample.count}, {"seed", r.sample.seed}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json gel_json(const GelReport& g) {
  json j{{"verdict", std::string(to_string(g.verdict))}, {"theta", g.theta}};
  j["T_gel"] = g.T_gel ? json(*g.T_gel) : json(nullptr);
  j["T_bound"] = g.T_bound ? json(*g.T_bound) : json(nullptr);
  json rows = json::array();
  for (const SweepRow& r : g.sweep)
    rows.push_back({{"R", r.R},
                    {"T_gel", r.T_gel ? json(*r.T_gel) : json(nullptr)},
                    {"M1_initial", r.M1_initial},
                    {"M1_final", r.M1_final}});
  j["sweep"] = rows;
  return j;
}

void write_json(const fs::path& file, const json& j) {
  std::ofstream out = open_out(file);
  out << j.dump(2) << '\n';
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  return out;
}

double parse_num(const std::string& s, const fs::path& file, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    throw Error(ErrorCode::ParseError, file.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

std::vector<std::vector<double>> read_csv(const fs::path& file, std::vector<std::string>* header) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, file.string() + ": missing header");
  *header = split(line);
  std::vector<std::vector<double>> rows;
  std::size_t ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header->size())
      throw Error(ErrorCode::ParseError, file.string() + ":" + std::to_string(ln) + ": wrong column count");
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_num(c, file, ln));
    rows.push_back(std::move(row));
  }
  return rows;
}

const WeightSpec* find_weight(const std::vector<WeightSpec>& ws, const std::string& label) {
  for (const WeightSpec& w : ws)
    if (w.label() == label) return &w;
  return nullptr;
}

}  // namespace

bool ExperimentResult::any_failed() const {
  return std::any_of(checks.begin(), checks.end(), [](const CheckRow& r) { return r.failed(); });
}

std::optional<double> gel_bound_for(const SimConfig& cfg, const State& initial) {
  const KernelSpec& k = cfg.solver.kernel;
  if (k.kind() != KernelKind::Gelling || k.gelling().mu != 0.0) return std::nullopt;
  const WeightSpec* b = k.gelling_weight();
  if (!cfg.gel.bound_weight.empty()) b = find_weight(cfg.solver.weights, cfg.gel.bound_weight);
  if (!b) return std::nullopt;
  return gel_time_bound(generalized_moment(initial, *b), k.gelling().lambda * k.scale(), discrete_mass(initial));
}

std::vector<CheckRow> evaluate_checks(const Trajectory& traj, const SimConfig& cfg, std::optional<GelReport>* gel) {
  std::vector<CheckRow> rows;
  auto wanted = [&](std::string_view name) {
    return std::find(cfg.checks.begin(), cfg.checks.end(), name) != cfg.checks.end();
  };
  const double M10 = traj.steps.front().M1;

  if (wanted("mass_balance")) {
    double worst = 0.0;
    for (const StepRecord& r : traj.steps) worst = std::max(worst, r.mass_defect);
    const double tol = 1e-12 * M10;
    rows.push_back({"mass_balance", "steps=" + std::to_string(traj.steps.size()), worst <= tol ? "PASS" : "FAIL",
                    worst, tol});
  }
  if (wanted("monotone")) {
    for (const WeightSpec& b : traj.weights) {
      const ConditionReport rep = check_monotone_subadditive(traj, b);
      rows.push_back({"monotone", "b=" + b.label(), verdict_word(rep.verdict),
                      rep.constant("max_increase").value_or(0.0), rep.constant("tolerance").value_or(0.0)});
    }
  }
  if (wanted("tmi")) {
    const double r = cfg.tmi.r_fraction * traj.mesh->R;
    const double t = cfg.tmi.t > 0.0 ? cfg.tmi.t : 0.5 * traj.T;
    for (const WeightSpec& b : traj.weights) {
      const std::string params = "b=" + b.label() + ";r=" + num(r) + ";t=" + num(t);
      try {
        const double res = tmi_residual(traj, b, r, t);
        const auto it = std::min_element(traj.samples.begin(), traj.samples.end(), [t](const State& a, const State& c) {
          return std::abs(a.t - t) < std::abs(c.t - t);
        });
        const double tol = 0.05 * std::abs(tmi_rhs(*it, traj.kernel, b, r)) + 1e-12;
        rows.push_back({"tmi", params, res <= tol ? "PASS" : "FAIL", res, tol});
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InsufficientSamples) throw;
        rows.push_back({"tmi", params, "INCONCLUSIVE", 0.0, 0.0});
      }
    }
  }
  if (wanted("l_bound")) {
    const WeightSpec* b = cfg.l_bound.weight.empty() ? (traj.weights.empty() ? nullptr : &traj.weights.back())
                                                     : find_weight(traj.weights, cfg.l_bound.weight);
    if (!b) throw Error(ErrorCode::ValidationError, "l_bound.weight: not a configured weight");
    double C2 = cfg.l_bound.C2;
    std::string verdict;
    if (!(C2 > 0.0)) {
      const ConditionReport a2 = check_A2(traj.kernel, *b, cfg.classify_sample);
      C2 = a2.constant("C2").value_or(0.0);
      if (!a2.holds()) verdict = "INCONCLUSIVE";
    }
    const ConditionReport rep = check_L_bound(traj, *b, C2);
    if (verdict.empty()) verdict = verdict_word(rep.verdict);
    const double margin = rep.witness ? rep.witness->margin : 0.0;
    rows.push_back({"l_bound", "b=" + b->label() + ";C2=" + num(C2), verdict, -margin, 0.0});
  }
  if (wanted("m0_decay")) {
    double eps = cfg.m0_decay.eps_floor;
    if (!(eps > 0.0) && traj.kernel.kind() == KernelKind::Gelling)
      eps = traj.kernel.gelling().epsilon * traj.kernel.scale();
    const ConditionReport rep = check_M0_decay(traj, eps, cfg.m0_decay.theta);
    const double inc = rep.witness ? rep.witness->margin : 0.0;
    rows.push_back({"m0_decay",
                    "eps_floor=" + num(eps) + ";theta=" + num(cfg.m0_decay.theta) +
                        ";min_rate_over_floor_bound=" + num(rep.constant("min_rate_over_floor_bound").value_or(0.0)),
                    verdict_word(rep.verdict), std::max(inc, 0.0), kMonotoneTolerance * traj.steps.front().M0});
  }
  if (wanted("gel")) {
    GelReport g = detect(mass_series(traj), cfg.gel.theta, cfg.gel.sustain);
    g.T_bound = gel_bound_for(cfg, traj.samples.front());
    const double M1T = traj.steps.back().M1;
    rows.push_back({"gel", "theta=" + num(cfg.gel.theta) + ";T_gel=" + (g.T_gel ? num(*g.T_gel) : "none"),
                    std::string(to_string(g.verdict)), 1.0 - M1T / M10, cfg.gel.theta});
    if (gel) *gel = g;
  }
  return rows;
}

void write_checks_csv(const fs::path& file, const std::vector<CheckRow>& rows) {
  std::ofstream out = open_out(file);
  out << "name,params,verdict,max_residual,tolerance\n";
  for (const CheckRow& r : rows)
    out << r.name << ',' << r.params << ',' << r.verdict << ',' << num(r.max_residual) << ',' << num(r.tolerance)
        << '\n';
}

ExperimentResult run_experiment(const SimConfig& cfg) {
  ensure_dir(cfg.outdir);
  ExperimentResult res;
  res.trajectory = run(cfg.solver);
  const Trajectory& traj = res.trajectory;

  write_moments(cfg.outdir, traj);
  write_steps(cfg.outdir, traj);
  write_samples(cfg.outdir, traj);
  write_snapshots(cfg.outdir, traj, cfg.solver.outputs.snapshot_times);
  write_plot_script(cfg.outdir, traj);

  if (!cfg.checks.empty()) {
    res.checks = evaluate_checks(traj, cfg, &res.gel);
    write_checks_csv(cfg.outdir / "checks.csv", res.checks);
    if (res.gel) write_json(cfg.outdir / "gel_report.json", gel_json(*res.gel));
  }

  json meta{{"config", cfg.resolved},
            {"kernel_label", traj.kernel.label()},
            {"accepted_steps", traj.steps.size() - 1},
            {"rejected_steps", traj.rejected_steps},
            {"fixed_dt", traj.fixed_dt},
            {"M1_initial", traj.steps.front().M1},
            {"M1_final", traj.steps.back().M1}};
  write_json(cfg.outdir / "metadata.json", meta);
  return res;
}

std::pair<SimConfig, Trajectory> load_run(const fs::path& dir) {
  std::ifstream in(dir / "metadata.json", std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + (dir / "metadata.json").string());
  json meta;
  try {
    meta = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, (dir / "metadata.json").string() + ": " + e.what());
  }
  if (!meta.contains("config")) throw Error(ErrorCode::ParseError, "metadata.json has no config");
  SimConfig cfg = config_from_json(meta["config"]);
  cfg.outdir = dir;

  Trajectory traj;
  traj.mesh = build_mesh(cfg.solver.R, cfg.solver.n, cfg.solver.p);
  traj.kernel = cfg.solver.kernel;
  traj.weights = cfg.solver.weights;
  traj.T = cfg.solver.time.T;
  traj.fixed_dt = cfg.solver.time.N.has_value();

  std::vector<std::string> header;
  const auto steps = read_csv(dir / "steps.csv", &header);
  const std::size_t nw = traj.weights.size();
  if (header.size() != 6 + nw) throw Error(ErrorCode::ParseError, "steps.csv columns do not match the weights");
  for (std::size_t w = 0; w < nw; ++w)
    if (header[4 + w] != "Mb_" + traj.weights[w].label())
      throw Error(ErrorCode::ParseError, "steps.csv column " + header[4 + w] + " does not match the weights");
  for (const auto& row : steps) {
    StepRecord r;
    r.t = row[0];
    r.dt = row[1];
    r.M0 = row[2];
    r.M1 = row[3];
    r.Mb.assign(row.begin() + 4, row.begin() + 4 + static_cast<std::ptrdiff_t>(nw));
    r.boundary_flux = row[4 + nw];
    r.mass_defect = row[5 + nw];
    traj.steps.push_back(std::move(r));
  }
  if (traj.steps.empty()) throw Error(ErrorCode::EmptySeries, "steps.csv has no rows");

  // Recompute the per-step balance from the recorded moments.
  for (std::size_t i = 1; i < traj.steps.size(); ++i) {
    StepRecord& r = traj.steps[i];
    r.mass_defect = std::abs(r.M1 - traj.steps[i - 1].M1 + r.dt * r.boundary_flux);
  }

  const auto samples = read_csv(dir / "samples.csv", &header);
  std::map<double, std::size_t> by_time;
  for (std::size_t i = 0; i < traj.steps.size(); ++i) by_time.emplace(traj.steps[i].t, i);
  for (const auto& row : samples) {
    if (traj.samples.empty() || traj.samples.back().t != row[0]) {
      State s;
      s.mesh = traj.mesh;
      s.t = row[0];
      s.g.reserve(traj.mesh->n);
      traj.samples.push_back(std::move(s));
      const auto it = by_time.find(row[0]);
      if (it == by_time.end()) throw Error(ErrorCode::ParseError, "samples.csv time " + num(row[0]) + " not in steps.csv");
      traj.sampled.push_back(traj.steps[it->second]);
    }
    traj.samples.back().g.push_back(row[2]);
  }
  for (const State& s : traj.samples)
    if (s.g.size() != traj.mesh->n) throw Error(ErrorCode::ParseError, "samples.csv has an incomplete state");
  return {std::move(cfg), std::move(traj)};
}

std::vector<CheckRow> verify_run(const fs::path& dir) {
  auto [cfg, traj] = load_run(dir);
  if (cfg.checks.empty()) cfg.checks = {"mass_balance", "monotone"};
  std::optional<GelReport> gel;
  auto rows = evaluate_checks(traj, cfg, &gel);
  write_checks_csv(dir / "checks.csv", rows);
  if (gel) write_json(dir / "gel_report.json", gel_json(*gel));
  return rows;
}

GelReport run_gel(const SimConfig& cfg) {
  ensure_dir(cfg.outdir);
  std::vector<SweepEntry> entries = cfg.gel.sweep;
  if (entries.empty()) entries.push_back({cfg.solver.R, std::nullopt});
  GelReport rep = r_sweep(cfg.solver, entries, cfg.gel.theta, cfg.gel.sustain);
  const auto mesh = build_mesh(entries.back().R, cfg.solver.n, cfg.solver.p);
  rep.T_bound = gel_bound_for(cfg, project_initial(cfg.solver.u0, mesh));

  std::ofstream out = open_out(cfg.outdir / "gel_sweep.csv");
  out << "R,T_gel,M1_final\n";
  for (const SweepRow& r : rep.sweep) out << num(r.R) << ',' << (r.T_gel ? num(*r.T_gel) : "") << ',' << num(r.M1_final) << '\n';
  write_json(cfg.outdir / "gel_report.json", gel_json(rep));
  return rep;
}

json run_classify(const SimConfig& cfg) {
  ensure_dir(cfg.outdir);
  json all = json::array();
  for (const WeightSpec& b : cfg.solver.weights) {
    const ClassifyResult c = classify(cfg.solver.kernel, b, cfg.classify_sample);
    json reports = json::array();
    for (const ConditionReport& r : c.reports) reports.push_back(report_json(r));
    all.push_back({{"kernel", cfg.solver.kernel.label()},
                   {"weight", b.label()},
                   {"verdict", std::string(to_string(c.verdict))},
                   {"note", c.note},
                   {"reports", reports}});
  }
  write_json(cfg.outdir / "classify.json", all);
  return all;
}

OracleAggregate run_oracle(const SimConfig& cfg) {
  ensure_dir(cfg.outdir);
  std::string src = cfg.u0_source;
  src.erase(std::remove(src.begin(), src.end(), ' '), src.end());
  const InitialSampler sampler =
      src == "exp(-x)" ? InitialSampler::exponential() : InitialSampler::tabulated(cfg.solver.u0, cfg.solver.R);
  std::vector<double> times = cfg.oracle.times;
  if (times.empty())
    for (int i = 0; i <= 30; ++i) times.push_back(cfg.solver.time.T * i / 30.0);
  const ReplicateResult res = run_replicates(sampler, cfg.solver.kernel, cfg.oracle.N0, cfg.solver.time.T, times,
                                             cfg.oracle.replicates, cfg.oracle.seed);
  for (std::size_t r = 0; r < res.runs.size(); ++r) {
    std::ofstream out = open_out(cfg.outdir / ("oracle_replicate_" + std::to_string(r) + ".csv"));
    out << "t,M0,M1,M1_without_largest,largest_fraction,particles\n";
    for (const OracleSample& s : res.runs[r].samples)
      out << num(s.t) << ',' << num(s.M0) << ',' << num(s.M1) << ',' << num(s.M1_without_largest) << ','
          << num(s.largest_fraction) << ',' << s.particles << '\n';
  }
  const OracleAggregate& a = res.aggregate;
  std::ofstream out = open_out(cfg.outdir / "oracle_aggregate.csv");
  out << "t,mean_M0,se_M0,mean_M1,se_M1,mean_largest_fraction,se_largest_fraction\n";
  for (std::size_t q = 0; q < a.t.size(); ++q)
    out << num(a.t[q]) << ',' << num(a.mean_M0[q]) << ',' << num(a.se_M0[q]) << ',' << num(a.mean_M1[q]) << ','
        << num(a.se_M1[q]) << ',' << num(a.mean_largest[q]) << ',' << num(a.se_largest[q]) << '\n';
  return a;
}

}  // namespace sce
