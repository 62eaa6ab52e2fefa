#include "sce/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "sce/error.hpp"
#include "sce/expr.hpp"
#include "sce/kernels.hpp"
#include "sce/weights.hpp"

namespace sce {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ValidationError, path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Typed access to one JSON object that remembers which keys were consumed.
class Table {
 public:
  Table(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) invalid(path_.empty() ? "<root>" : path_, "expected a table");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string field(const std::string& key) const { return join(path_, key); }

  double number(const std::string& key) {
    if (!has(key)) invalid(field(key), "required");
    const json& v = j_.at(key);
    if (!v.is_number()) invalid(field(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) invalid(field(key), "not finite");
    return d;
  }

  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::size_t count(const std::string& key, std::size_t fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::size_t>(v.get<long long>());
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= 0.0 && d == std::floor(d) && d < 1e15) return static_cast<std::size_t>(d);
    }
    invalid(field(key), "expected a nonnegative integer");
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) invalid(field(key), "expected a string");
    return v.get<std::string>();
  }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) invalid(field(key), "expected true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    if (!has(key)) return out;
    const json& v = j_.at(key);
    if (!v.is_array()) invalid(field(key), "expected a list of numbers");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) invalid(field(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) invalid(field(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Runs a constructor that may throw domain errors and rethrows them against a field path.
template <class F>
auto at_field(const std::string& path, F&& make) {
  try {
    return make();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ValidationError) throw;
    invalid(path, e.what());
  }
}

WeightSpec parse_weight(const json& j, const std::string& path) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "one") return WeightSpec::one();
    if (s == "x" || s == "identity") return WeightSpec::identity();
    if (s == "exp") return WeightSpec::exponential();
    if (s == "x_over_log") return WeightSpec::log_quotient();
    invalid(path, "unknown weight '" + s + "'");
  }
  Table t(j, path);
  const std::string type = t.text("type", "");
  if (type.empty()) invalid(t.field("type"), "required");
  WeightSpec w = at_field(path, [&]() -> WeightSpec {
    if (type == "one") return WeightSpec::one();
    if (type == "x" || type == "identity") return WeightSpec::identity();
    if (type == "power") return WeightSpec::power(t.number("p"));
    if (type == "power_plus_one") return WeightSpec::power_plus_one(t.number("beta"));
    if (type == "exp") return WeightSpec::exponential();
    if (type == "x_over_log") return WeightSpec::log_quotient();
    if (type == "custom") {
      if (!t.has("expr")) invalid(t.field("expr"), "required");
      return WeightSpec::custom(t.text("expr", ""));
    }
    invalid(t.field("type"), "unknown weight type '" + type + "'");
  });
  if (t.has("tags")) {
    const json& tags = t.raw("tags");
    if (!tags.is_array()) invalid(t.field("tags"), "expected a list of names");
    std::set<WeightTag> set;
    for (std::size_t i = 0; i < tags.size(); ++i) {
      const auto tag = tags[i].is_string() ? parse_weight_tag(tags[i].get<std::string>()) : std::nullopt;
      if (!tag) invalid(t.field("tags") + "[" + std::to_string(i) + "]", "unknown tag");
      set.insert(*tag);
    }
    w.with_tags(std::move(set));
  }
  if (t.has("label")) w.with_label(t.text("label", ""));
  t.finish();
  return w;
}

KernelSpec parse_kernel(const json& j, const std::string& path) {
  Table t(j, path);
  const std::string type = t.text("type", "");
  if (type.empty()) invalid(t.field("type"), "required");
  KernelSpec k = at_field(path, [&]() -> KernelSpec {
    if (type == "constant") return KernelSpec::constant(t.number("c", 1.0));
    if (type == "sum") return KernelSpec::sum();
    if (type == "product") return KernelSpec::product();
    if (type == "homogeneous")
      return KernelSpec::homogeneous(t.number("alpha"), t.number("beta"), t.flag("allow_wide", false));
    if (type == "sqrt_product") return KernelSpec::sqrt_product();
    if (type == "product_plus_sum") return KernelSpec::product_plus_sum();
    if (type == "quadratic") return KernelSpec::quadratic_ratio();
    if (type == "exponential") return KernelSpec::exponential_ratio();
    if (type == "gelling") {
      if (!t.has("weight")) invalid(t.field("weight"), "required");
      const WeightSpec b = parse_weight(t.raw("weight"), t.field("weight"));
      return gelling_kernel(b, t.number("lambda", 1.0), t.number("mu", 0.0), t.number("epsilon", 1e-3));
    }
    if (type == "log_quotient_gelling")
      return log_quotient_gelling_kernel(t.number("lambda", 1.0), t.number("mu", 0.0), t.number("epsilon", 1e-3));
    if (type == "custom") {
      if (!t.has("expr")) invalid(t.field("expr"), "required");
      return KernelSpec::custom(t.text("expr", ""));
    }
    invalid(t.field("type"), "unknown kernel type '" + type + "'");
  });
  if (t.has("scale")) {
    const double s = t.number("scale");
    if (!(s >= 0.0)) invalid(t.field("scale"), "must be >= 0");
    k = k.scaled(s);
  }
  if (t.has("label")) k.with_label(t.text("label", ""));
  t.finish();
  return k;
}

json base_defaults() {
  return json{{"u0", "exp(-x)"},
              {"mesh", {{"R", 200.0}, {"n", 500}, {"p", 3.0}}},
              {"weights", json::array({"one"})},
              {"outputs", json::object()},
              {"checks", json::array()}};
}

json fig4_preset(double R, double N) {
  return json{{"kernel", {{"type", "log_quotient_gelling"}, {"lambda", 1.0}, {"mu", 0.0}, {"epsilon", 1e-3}}},
              {"weights", json::array({"one", {{"type", "power"}, {"p", 0.5}}, "x_over_log"})},
              {"mesh", {{"R", R}, {"n", 500}, {"p", 3.0}}},
              {"time", {{"T", 3.0}, {"N", N}}},
              {"outputs", {{"snapshot_times", {0.0, 1.0, 2.0, 2.5, 3.0}}}},
              {"checks", {"mass_balance", "monotone", "gel", "m0_decay"}},
              {"gel", {{"sweep", json::array({{{"R", 1e5}, {"N", 80000}}, {{"R", 1.5e5}, {"N", 120000}}})}}}};
}

std::size_t line_of(std::string_view text, std::size_t byte, std::size_t* column) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  *column = col;
  return line;
}

}  // namespace

std::vector<std::string> preset_names() { return {"fig1", "fig2", "fig4b", "fig4c", "fig4d", "fig4e", "fig4f"}; }

json preset_json(std::string_view name) {
  if (name == "fig1")
    return json{{"kernel", {{"type", "sqrt_product"}}},
                {"weights", json::array({"one", {{"type", "power"}, {"p", 0.5}}})},
                {"mesh", {{"R", 200.0}, {"n", 500}, {"p", 3.0}}},
                {"time", {{"T", 3.0}, {"adaptive", true}}},
                {"outputs", {{"snapshot_times", {0.0, 1.0, 2.0, 3.0}}}},
                {"checks", {"mass_balance", "monotone", "tmi"}}};
  if (name == "fig2")
    return json{{"kernel", {{"type", "product_plus_sum"}}},
                {"weights", json::array({"one", {{"type", "power"}, {"p", 0.5}}})},
                {"mesh", {{"R", 200.0}, {"n", 500}, {"p", 3.0}}},
                {"time", {{"T", 3.0}, {"adaptive", true}}},
                {"outputs", {{"snapshot_times", {0.0, 0.25, 0.5, 1.0, 3.0}}}},
                {"checks", {"mass_balance", "monotone", "gel"}},
                {"gel", {{"sweep", json::array({{{"R", 200.0}}, {{"R", 1000.0}}, {{"R", 10000.0}}})}}}};
  if (name == "fig4b") return fig4_preset(50.0, 1000);
  if (name == "fig4c") return fig4_preset(200.0, 1000);
  if (name == "fig4d") return fig4_preset(1000.0, 1000);
  if (name == "fig4e") return fig4_preset(1e5, 80000);
  if (name == "fig4f") return fig4_preset(1.5e5, 120000);
  invalid("preset", "unknown preset '" + std::string(name) + "'");
}

SimConfig config_from_json(const json& input) {
  if (!input.is_object()) invalid("<root>", "expected a table");
  json merged = base_defaults();
  if (input.contains("preset")) {
    if (!input.at("preset").is_string()) invalid("preset", "expected a string");
    merged.merge_patch(preset_json(input.at("preset").get<std::string>()));
  }
  json patch = input;
  // A different kernel type replaces the preset kernel instead of merging into it.
  if (patch.contains("kernel") && patch["kernel"].is_object() && merged.contains("kernel") &&
      patch["kernel"].contains("type") && patch["kernel"]["type"] != merged["kernel"].value("type", json()))
    merged.erase("kernel");
  merged.merge_patch(patch);

  SimConfig cfg;
  Table root(merged, "");
  cfg.preset = root.text("preset", "");

  if (!root.has("kernel")) invalid("kernel", "required");
  cfg.solver.kernel = parse_kernel(root.raw("kernel"), "kernel");

  const json& ws = root.raw("weights");
  if (!ws.is_array()) invalid("weights", "expected a list");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const std::string path = "weights[" + std::to_string(i) + "]";
    WeightSpec w = parse_weight(ws[i], path);
    if (!labels.insert(w.label()).second) invalid(path, "duplicate weight label '" + w.label() + "'");
    cfg.solver.weights.push_back(std::move(w));
  }

  cfg.u0_source = root.text("u0", "exp(-x)");
  const Expr u0 = at_field("u0", [&] { return Expr::parse(cfg.u0_source); });
  if (u0.uses_y()) invalid("u0", "may only depend on x");
  cfg.solver.u0 = [u0](double x) { return u0(x); };

  {
    Table mesh(root.raw("mesh"), "mesh");
    cfg.solver.R = mesh.number("R", 200.0);
    cfg.solver.n = mesh.count("n", 500);
    cfg.solver.p = mesh.number("p", 3.0);
    if (!(cfg.solver.R > 0.0)) invalid("mesh.R", "must be > 0");
    if (cfg.solver.n < 1) invalid("mesh.n", "must be >= 1");
    if (!(cfg.solver.p >= 1.0)) invalid("mesh.p", "must be >= 1");
    mesh.finish();
  }

  if (!root.has("time")) invalid("time.T", "required");
  {
    Table time(root.raw("time"), "time");
    if (!time.has("T")) invalid("time.T", "required");
    cfg.solver.time.T = time.number("T");
    if (!(cfg.solver.time.T > 0.0)) invalid("time.T", "must be > 0");
    const bool adaptive = time.flag("adaptive", false);
    if (time.has("N")) {
      if (adaptive) invalid("time.N", "conflicts with time.adaptive = true");
      const std::size_t N = time.count("N", 0);
      if (N < 1) invalid("time.N", "must be >= 1");
      cfg.solver.time.N = N;
    } else if (!adaptive) {
      invalid("time", "needs N or adaptive = true");
    }
    cfg.solver.time.max_relative_change = time.number("max_relative_change", 0.1);
    if (!(cfg.solver.time.max_relative_change > 0.0)) invalid("time.max_relative_change", "must be > 0");
    cfg.solver.time.dt_initial = time.number("dt_initial", 0.0);
    time.finish();
  }

  {
    Table out(root.raw("outputs"), "outputs");
    if (out.has("cadence")) {
      const double c = out.number("cadence");
      if (!(c > 0.0)) invalid("outputs.cadence", "must be > 0");
      if (cfg.solver.time.N) {
        if (c != std::floor(c)) invalid("outputs.cadence", "must be a whole number of steps in fixed-step mode");
        cfg.solver.outputs.every = static_cast<std::size_t>(c);
      } else {
        cfg.solver.outputs.interval = c;
      }
    }
    cfg.solver.outputs.snapshot_times = out.numbers("snapshot_times");
    for (double t : cfg.solver.outputs.snapshot_times)
      if (!(t >= 0.0 && t <= cfg.solver.time.T)) invalid("outputs.snapshot_times", "times must lie in [0, T]");
    cfg.outdir = out.text("outdir", cfg.preset.empty() ? "out" : "out/" + cfg.preset);
    out.finish();
  }

  {
    const json& checks = root.raw("checks");
    if (!checks.is_array()) invalid("checks", "expected a list of names");
    for (std::size_t i = 0; i < checks.size(); ++i) {
      const std::string path = "checks[" + std::to_string(i) + "]";
      if (!checks[i].is_string()) invalid(path, "expected a name");
      const std::string name = checks[i].get<std::string>();
      bool known = false;
      for (auto c : kCheckNames) known = known || c == name;
      if (!known) invalid(path, "unknown check '" + name + "'");
      cfg.checks.push_back(name);
    }
  }

  if (root.has("tmi")) {
    Table t(root.raw("tmi"), "tmi");
    cfg.tmi.r_fraction = t.number("r_fraction", 0.5);
    cfg.tmi.t = t.number("t", 0.0);
    if (!(cfg.tmi.r_fraction > 0.0 && cfg.tmi.r_fraction <= 1.0)) invalid("tmi.r_fraction", "must lie in (0, 1]");
    t.finish();
  }
  if (root.has("l_bound")) {
    Table t(root.raw("l_bound"), "l_bound");
    cfg.l_bound.weight = t.text("weight", "");
    cfg.l_bound.C2 = t.number("C2", 0.0);
    t.finish();
  }
  if (root.has("m0_decay")) {
    Table t(root.raw("m0_decay"), "m0_decay");
    cfg.m0_decay.eps_floor = t.number("eps_floor", 0.0);
    cfg.m0_decay.theta = t.number("theta", 1.0);
    t.finish();
  }
  if (root.has("gel")) {
    Table t(root.raw("gel"), "gel");
    cfg.gel.theta = t.number("theta", kDefaultGelTheta);
    if (!(cfg.gel.theta > 0.0 && cfg.gel.theta < 1.0)) invalid("gel.theta", "must lie in (0, 1)");
    cfg.gel.sustain = t.count("sustain", kDefaultSustain);
    if (cfg.gel.sustain < 1) invalid("gel.sustain", "must be >= 1");
    cfg.gel.bound_weight = t.text("bound_weight", "");
    if (t.has("sweep")) {
      const json& sw = t.raw("sweep");
      if (!sw.is_array()) invalid("gel.sweep", "expected a list");
      for (std::size_t i = 0; i < sw.size(); ++i) {
        const std::string path = "gel.sweep[" + std::to_string(i) + "]";
        SweepEntry e;
        if (sw[i].is_number()) {
          e.R = sw[i].get<double>();
        } else {
          Table s(sw[i], path);
          e.R = s.number("R");
          if (s.has("N")) e.N = s.count("N", 0);
          s.finish();
        }
        if (!(e.R > 0.0)) invalid(path + ".R", "must be > 0");
        if (!cfg.gel.sweep.empty() && !(e.R > cfg.gel.sweep.back().R)) invalid(path + ".R", "must increase");
        cfg.gel.sweep.push_back(e);
      }
    }
    t.finish();
  }
  if (root.has("classify")) {
    Table t(root.raw("classify"), "classify");
    cfg.classify_sample.lo = t.number("lo", cfg.classify_sample.lo);
    cfg.classify_sample.hi = t.number("hi", cfg.classify_sample.hi);
    cfg.classify_sample.count = t.count("count", cfg.classify_sample.count);
    cfg.classify_sample.seed = t.count("seed", cfg.classify_sample.seed);
    cfg.classify_sample.include_rays = t.flag("rays", true);
    if (!(cfg.classify_sample.lo > 0.0 && cfg.classify_sample.hi > cfg.classify_sample.lo))
      invalid("classify", "needs 0 < lo < hi");
    t.finish();
  }
  if (root.has("oracle")) {
    Table t(root.raw("oracle"), "oracle");
    cfg.oracle.N0 = t.count("N0", cfg.oracle.N0);
    cfg.oracle.replicates = t.count("replicates", cfg.oracle.replicates);
    cfg.oracle.seed = t.count("seed", cfg.oracle.seed);
    cfg.oracle.times = t.numbers("times");
    if (cfg.oracle.N0 < 1) invalid("oracle.N0", "must be >= 1");
    if (cfg.oracle.replicates < 1) invalid("oracle.replicates", "must be >= 1");
    for (std::size_t i = 0; i < cfg.oracle.times.size(); ++i) {
      const double tt = cfg.oracle.times[i];
      if (!(tt >= 0.0 && tt <= cfg.solver.time.T) || (i && !(tt > cfg.oracle.times[i - 1])))
        invalid("oracle.times", "must increase within [0, T]");
    }
    t.finish();
  }
  root.finish();

  merged["outputs"]["outdir"] = cfg.outdir.string();
  cfg.resolved = merged;
  return cfg;
}

SimConfig parse_config(std::string_view text, std::string_view origin) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t col = 0;
    const std::size_t line = line_of(text, e.byte > 0 ? e.byte - 1 : 0, &col);
    std::string msg = e.what();
    const auto pos = msg.find("syntax error");
    if (pos != std::string::npos) msg = msg.substr(pos);
    throw Error(ErrorCode::ParseError,
                std::string(origin) + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }
  return config_from_json(j);
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

}  // namespace sce
