// SPDX-License-Identifier: Apache-2.0
//
// Experiment orchestration: JSON configuration parsing with strict key
// checking and default tracking, single runs, 2-D robustness sweeps with a
// deterministic worker pool, a diagnostics suite, and manifest/CSV output.

#ifndef MAGNONLINK_HARNESS_HPP
#define MAGNONLINK_HARNESS_HPP

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "magnonlink/control.hpp"
#include "magnonlink/dynamics.hpp"
#include "magnonlink/metrics.hpp"
#include "magnonlink/model.hpp"

namespace magnonlink {

using Json = nlohmann::json;

inline constexpr const char* kToolName = "magnon-link";
inline constexpr const char* kToolVersion = "0.1.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { kSingle, kSweep, kCheck };

inline std::string experiment_kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::kSingle: return "single";
    case ExperimentKind::kSweep: return "sweep";
    default: return "check";
  }
}

struct SweepAxis {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  int points = 21;
};

struct SweepSpec {
  SweepAxis axis1, axis2;
  std::vector<std::string> metrics = {"F", "maxN2"};
};

struct OutputSpec {
  std::string dir = ".";
  std::vector<std::string> formats = {"csv", "json"};
};

struct RunConfig {
  SystemParams system;
  IntegratorConfig integrator;
  ExperimentKind kind = ExperimentKind::kSingle;
  SweepSpec sweep;
  OutputSpec output;
  std::vector<std::string> defaulted;  // dotted keys filled from defaults
  Json resolved;                       // fully explicit config document
};

namespace detail {

inline const std::vector<std::string>& sweepable_names() {
  static const std::vector<std::string> names = {
      "gamma_q", "gamma_phi", "kappa_c", "kappa_mL", "kappa_mR"};
  return names;
}

// Default sweep ranges in configured rate units; chosen to bracket the
// baseline rates by about 5x (figure axes are not stated in prose).
inline std::pair<double, double> default_sweep_range(const std::string& name) {
  if (name == "gamma_q") return {0.0, 0.05};
  if (name == "gamma_phi") return {0.0, 0.5};
  return {0.0, 2.5};  // the three kappa channels
}

inline double* rate_slot(SystemParams& p, const std::string& name) {
  if (name == "gamma_q") return &p.gamma_q;
  if (name == "gamma_phi") return &p.gamma_phi;
  if (name == "kappa_c") return &p.kappa_c;
  if (name == "kappa_mL") return &p.kappa_mL;
  if (name == "kappa_mR") return &p.kappa_mR;
  return nullptr;
}

inline void reject_unknown_keys(const Json& obj, const std::string& section,
                                const std::vector<std::string>& known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      std::string msg = "unknown key \"" + it.key() + "\" in " + section +
                        "; known keys:";
      for (const auto& k : known) msg += " " + k;
      throw ConfigError(msg);
    }
  }
}

template <typename T>
inline T take(const Json& obj, const std::string& section,
              const std::string& key, const T& fallback,
              std::vector<std::string>* defaulted) {
  if (obj.contains(key)) {
    try {
      return obj.at(key).get<T>();
    } catch (const Json::exception& e) {
      throw ConfigError("bad value for " + section + "." + key + ": " +
                        e.what());
    }
  }
  if (defaulted) defaulted->push_back(section + "." + key);
  return fallback;
}

inline std::string format_sci(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.11e", x);
  return buf;
}

}  // namespace detail

// Largest rate appearing in the generator (angular units), used to enforce
// the integrator step bound dt <= 0.01 / max_rate.
inline double max_generator_rate(const SystemParams& p) {
  const ControlSchedule s = build_schedule(p);
  double m = std::max(std::abs(s.g1_const), std::abs(s.g2_const));
  // stage-2 extremes: G_L, G_R <= Omega, so |g_eff| <= 2 Omega^2 / g and the
  // largest structured coefficient is 2 Omega^2 / g
  m = std::max(m, 2.0 * s.Omega_ang * s.Omega_ang / s.g_wg_ang);
  m = std::max({m, p.gamma_q_ang(), p.gamma_phi_ang(), p.kappa_c_ang(),
                p.kappa_mL_ang(), p.kappa_mR_ang()});
  return m;
}

inline void validate_step(const RunConfig& cfg) {
  const double dt = cfg.integrator.resolved_dt(cfg.system);
  const double bound = 0.01 / max_generator_rate(cfg.system);
  if (dt <= 0) throw ConfigError("integrator.dt must be > 0");
  if (dt > bound)
    throw ConfigError("integrator.dt = " + std::to_string(dt) +
                      " exceeds stability bound 0.01/max_rate = " +
                      std::to_string(bound));
}

// Parse a fully structured config document. A manifest produced by a prior
// run is accepted transparently: if the document carries "resolved_config",
// that subtree is parsed instead (exact re-run support). The experiment kind
// may be supplied by the CLI subcommand; a conflicting kind in the file is an
// error.
inline RunConfig parse_config(
    const Json& document,
    std::optional<ExperimentKind> kind_from_cli = std::nullopt) {
  const Json& doc =
      document.contains("resolved_config") ? document.at("resolved_config") : document;
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
  detail::reject_unknown_keys(doc, "config root",
                              {"system", "integrator", "experiment", "output"});

  RunConfig cfg;
  auto* dflt = &cfg.defaulted;

  // --- system ---
  const Json sys = doc.value("system", Json::object());
  if (!sys.is_object()) throw ConfigError("\"system\" must be an object");
  detail::reject_unknown_keys(
      sys, "system",
      {"omega_q", "omega_c", "omega_mL", "omega_mR", "gamma_q", "gamma_phi",
       "kappa_c", "kappa_mL", "kappa_mR", "rates_are_angular", "T_th", "g_wg",
       "Omega", "T1", "T2", "truncation"});
  SystemParams& p = cfg.system;
  p.omega_q = detail::take(sys, "system", "omega_q", p.omega_q, dflt);
  p.omega_c = detail::take(sys, "system", "omega_c", p.omega_c, dflt);
  p.omega_mL = detail::take(sys, "system", "omega_mL", p.omega_mL, dflt);
  p.omega_mR = detail::take(sys, "system", "omega_mR", p.omega_mR, dflt);
  p.gamma_q = detail::take(sys, "system", "gamma_q", p.gamma_q, dflt);
  p.gamma_phi = detail::take(sys, "system", "gamma_phi", p.gamma_phi, dflt);
  p.kappa_c = detail::take(sys, "system", "kappa_c", p.kappa_c, dflt);
  p.kappa_mL = detail::take(sys, "system", "kappa_mL", p.kappa_mL, dflt);
  p.kappa_mR = detail::take(sys, "system", "kappa_mR", p.kappa_mR, dflt);
  p.rates_are_angular = detail::take(sys, "system", "rates_are_angular",
                                     p.rates_are_angular, dflt);
  p.T_th = detail::take(sys, "system", "T_th", p.T_th, dflt);
  p.g_wg = detail::take(sys, "system", "g_wg", p.g_wg, dflt);
  p.Omega = detail::take(sys, "system", "Omega", p.Omega, dflt);
  p.T1 = detail::take(sys, "system", "T1", p.T1, dflt);
  // T2's default tracks T1 and g_wg (tail long enough for pulse saturation)
  p.T2 = detail::take(sys, "system", "T2",
                      p.T1 + 200.0 / (kTwoPi * p.g_wg), dflt);
  p.truncation = detail::take(sys, "system", "truncation", p.truncation, dflt);
  try {
    p.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("system: ") + e.what());
  }

  // --- integrator ---
  const Json integ = doc.value("integrator", Json::object());
  if (!integ.is_object()) throw ConfigError("\"integrator\" must be an object");
  detail::reject_unknown_keys(integ, "integrator",
                              {"dt", "record_stride", "trace_abort_tol",
                               "renorm_threshold", "max_renorms"});
  IntegratorConfig& ic = cfg.integrator;
  ic.dt = detail::take(integ, "integrator", "dt", 0.0, dflt);
  ic.record_stride =
      detail::take(integ, "integrator", "record_stride", ic.record_stride, dflt);
  ic.trace_abort_tol = detail::take(integ, "integrator", "trace_abort_tol",
                                    ic.trace_abort_tol, dflt);
  ic.renorm_threshold = detail::take(integ, "integrator", "renorm_threshold",
                                     ic.renorm_threshold, dflt);
  ic.max_renorms =
      detail::take(integ, "integrator", "max_renorms", ic.max_renorms, dflt);
  if (ic.record_stride < 1)
    throw ConfigError("integrator.record_stride must be >= 1");

  // --- experiment ---
  const Json exp = doc.value("experiment", Json::object());
  if (!exp.is_object()) throw ConfigError("\"experiment\" must be an object");
  detail::reject_unknown_keys(exp, "experiment", {"kind", "sweep"});
  std::optional<ExperimentKind> kind_from_file;
  if (exp.contains("kind")) {
    const std::string k = exp.at("kind").get<std::string>();
    if (k == "single") kind_from_file = ExperimentKind::kSingle;
    else if (k == "sweep") kind_from_file = ExperimentKind::kSweep;
    else if (k == "check") kind_from_file = ExperimentKind::kCheck;
    else throw ConfigError("experiment.kind must be one of single, sweep, check");
  }
  if (kind_from_file && kind_from_cli && *kind_from_file != *kind_from_cli)
    throw ConfigError("experiment.kind \"" +
                      experiment_kind_name(*kind_from_file) +
                      "\" conflicts with the requested subcommand \"" +
                      experiment_kind_name(*kind_from_cli) + "\"");
  if (kind_from_file) cfg.kind = *kind_from_file;
  else if (kind_from_cli) cfg.kind = *kind_from_cli;
  else throw ConfigError("experiment kind required");

  // sweep block (validated whenever present; required defaults otherwise)
  {
    const Json sw = exp.value("sweep", Json::object());
    if (!sw.is_object()) throw ConfigError("experiment.sweep must be an object");
    detail::reject_unknown_keys(sw, "experiment.sweep",
                                {"axis1", "axis2", "metrics"});
    auto parse_axis = [&](const char* key, const std::string& fallback_name)
        -> SweepAxis {
      SweepAxis ax;
      const Json a = sw.value(key, Json::object());
      if (!a.is_object())
        throw ConfigError(std::string("experiment.sweep.") + key +
                          " must be an object");
      detail::reject_unknown_keys(a, std::string("experiment.sweep.") + key,
                                  {"name", "min", "max", "points"});
      ax.name = a.value("name", fallback_name);
      const auto& valid = detail::sweepable_names();
      if (std::find(valid.begin(), valid.end(), ax.name) == valid.end()) {
        std::string msg = "unknown sweep axis \"" + ax.name + "\"; valid axes:";
        for (const auto& n : valid) msg += " " + n;
        throw ConfigError(msg);
      }
      const auto [lo, hi] = detail::default_sweep_range(ax.name);
      ax.min = a.value("min", lo);
      ax.max = a.value("max", hi);
      ax.points = a.value("points", 21);
      if (ax.points < 2) throw ConfigError("sweep axis points must be >= 2");
      if (!(ax.min <= ax.max))
        throw ConfigError("sweep axis requires min <= max");
      return ax;
    };
    cfg.sweep.axis1 = parse_axis("axis1", "gamma_q");
    cfg.sweep.axis2 = parse_axis("axis2", "gamma_phi");
    if (cfg.sweep.axis1.name == cfg.sweep.axis2.name)
      throw ConfigError("sweep axes must name distinct parameters");
    if (sw.contains("metrics")) {
      cfg.sweep.metrics = sw.at("metrics").get<std::vector<std::string>>();
      for (const auto& m : cfg.sweep.metrics)
        if (m != "F" && m != "F_phase" && m != "maxN1" && m != "maxN2")
          throw ConfigError("unknown sweep metric \"" + m +
                            "\"; valid metrics: F F_phase maxN1 maxN2");
      if (cfg.sweep.metrics.empty())
        throw ConfigError("sweep metric list must not be empty");
    }
  }

  // --- output ---
  const Json outp = doc.value("output", Json::object());
  if (!outp.is_object()) throw ConfigError("\"output\" must be an object");
  detail::reject_unknown_keys(outp, "output", {"dir", "formats"});
  cfg.output.dir = outp.value("dir", std::string("."));
  if (outp.contains("formats"))
    cfg.output.formats = outp.at("formats").get<std::vector<std::string>>();

  validate_step(cfg);

  // fully resolved document (every value explicit) for the manifest
  Json r;
  r["system"] = {{"omega_q", p.omega_q},   {"omega_c", p.omega_c},
                 {"omega_mL", p.omega_mL}, {"omega_mR", p.omega_mR},
                 {"gamma_q", p.gamma_q},   {"gamma_phi", p.gamma_phi},
                 {"kappa_c", p.kappa_c},   {"kappa_mL", p.kappa_mL},
                 {"kappa_mR", p.kappa_mR},
                 {"rates_are_angular", p.rates_are_angular},
                 {"T_th", p.T_th},         {"g_wg", p.g_wg},
                 {"Omega", p.Omega},       {"T1", p.T1},
                 {"T2", p.T2},             {"truncation", p.truncation}};
  r["integrator"] = {{"dt", ic.resolved_dt(p)},
                     {"record_stride", ic.record_stride},
                     {"trace_abort_tol", ic.trace_abort_tol},
                     {"renorm_threshold", ic.renorm_threshold},
                     {"max_renorms", ic.max_renorms}};
  r["experiment"] = {{"kind", experiment_kind_name(cfg.kind)},
                     {"sweep",
                      {{"axis1",
                        {{"name", cfg.sweep.axis1.name},
                         {"min", cfg.sweep.axis1.min},
                         {"max", cfg.sweep.axis1.max},
                         {"points", cfg.sweep.axis1.points}}},
                       {"axis2",
                        {{"name", cfg.sweep.axis2.name},
                         {"min", cfg.sweep.axis2.min},
                         {"max", cfg.sweep.axis2.max},
                         {"points", cfg.sweep.axis2.points}}},
                       {"metrics", cfg.sweep.metrics}}}};
  r["output"] = {{"dir", cfg.output.dir}, {"formats", cfg.output.formats}};
  cfg.resolved = std::move(r);
  return cfg;
}

inline RunConfig parse_config_text(
    const std::string& text,
    std::optional<ExperimentKind> kind_from_cli = std::nullopt) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(doc, kind_from_cli);
}

// Apply a dotted-path override such as "system.T1=0.1" to a raw document.
inline void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like section.key=value: \"" +
                      assignment + "\"");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::parse_error&) {
    value = raw;  // unquoted strings pass through verbatim
  }
  Json* node = doc.contains("resolved_config") ? &doc["resolved_config"] : &doc;
  size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string part = path.substr(start, dot - start);
    if (part.empty()) throw ConfigError("empty path component in override");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

// The protocol's final Bell target (|e000> - |g001>)/sqrt(2); the minus sign
// is the phase actually produced by the two-stage schedule.
inline BellTarget final_bell_target(const HilbertLayout& layout) {
  BellTarget t;
  t.ket_a = StateVector::basis(layout, {1, 0, 0, 0});
  t.ket_b = StateVector::basis(layout, {0, 0, 0, 1});
  t.relative_phase = -1.0;
  return t;
}

// Stage-1 intermediate Bell target (|e000> - |g010>)/sqrt(2).
inline BellTarget stage1_bell_target(const HilbertLayout& layout) {
  BellTarget t;
  t.ket_a = StateVector::basis(layout, {1, 0, 0, 0});
  t.ket_b = StateVector::basis(layout, {0, 0, 1, 0});
  t.relative_phase = -1.0;
  return t;
}

struct RunSummary {
  double F = 0.0;
  double F_up_to_phase = 0.0;
  Complex phase_best = 1.0;
  double max_N1 = 0.0, max_N2 = 0.0, t_max_N2 = 0.0;
  TrajectoryRecord record;  // diagnostics aggregated inside
  double dt = 0.0;
  double wall_seconds = 0.0;
};

// Evaluate one protocol run and score it against the final Bell target.
inline RunSummary evaluate_run(const SystemParams& params,
                               const IntegratorConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  ProtocolResult res = run_protocol(params, config);
  RunSummary s;
  const BellTarget target = final_bell_target(params.layout());
  s.F = fidelity(res.final_state, target.state());
  const PhaseAuditedFidelity pf = fidelity_up_to_phase(res.final_state, target);
  s.F_up_to_phase = pf.F_best;
  s.phase_best = pf.phase_best;
  s.max_N1 = res.record.max_N1;
  s.max_N2 = res.record.max_N2;
  s.t_max_N2 = res.record.t_max_N2;
  s.record = std::move(res.record);
  s.dt = res.dt;
  s.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return s;
}

namespace detail {

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& text) {
  std::ofstream f(path, std::ios::binary);  // binary: LF endings everywhere
  if (!f) throw std::runtime_error("cannot open " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

inline std::string timeseries_csv(const TrajectoryRecord& rec) {
  std::string out =
      "t_us,P_e000,P_g100,P_g010,P_g001,N1,N2,trace_err,herm_err,min_eig\n";
  for (const auto& s : rec.samples) {
    out += format_sci(s.t);
    for (int k = 0; k < 4; ++k) out += "," + format_sci(s.pops[k]);
    out += "," + format_sci(s.N1) + "," + format_sci(s.N2);
    out += "," + format_sci(s.trace_err) + "," + format_sci(s.herm_err);
    out += "," + format_sci(s.min_eig) + "\n";
  }
  return out;
}

inline Json schedule_samples(const ControlSchedule& sched, int per_stage) {
  Json stage1 = Json::array(), stage2 = Json::array();
  for (int i = 0; i < per_stage; ++i) {
    const double t = sched.T1 * (i + 0.5) / per_stage;
    stage1.push_back({t, sched.g1(t), sched.g2(t)});
  }
  for (int i = 0; i < per_stage; ++i) {
    const double t = sched.T1 + (sched.T2 - sched.T1) * (i + 0.5) / per_stage;
    const auto [gl, gr] = sched.stage2_GLGR(t);
    stage2.push_back({t, gl, gr, sched.g_eff(t).imag()});
  }
  return Json{{"stage1_columns", {"t_us", "g1", "g2"}},
              {"stage2_columns", {"t_us", "G_L", "G_R", "Im_g_eff"}},
              {"stage1", std::move(stage1)},
              {"stage2", std::move(stage2)}};
}

}  // namespace detail

// Manifest carrying everything needed to reproduce the run bit-identically:
// feeding this file back as --config re-resolves the identical RunConfig.
inline Json build_manifest(const RunConfig& cfg, double wall_seconds) {
  Json defaulted = Json::object();
  for (const auto& k : cfg.defaulted) defaulted[k] = true;
  const ControlSchedule sched = build_schedule(cfg.system);
  return Json{
      {"tool", kToolName},
      {"version", kToolVersion},
      {"experiment", experiment_kind_name(cfg.kind)},
      {"resolved_config", cfg.resolved},
      {"defaulted", std::move(defaulted)},
      {"units",
       {{"frequencies", "cyclic GHz (omega/2pi)"},
        {"couplings", "cyclic MHz (g/2pi); internal units rad/us"},
        {"rates", cfg.system.rates_are_angular
                      ? "direct angular rates, 1/us"
                      : "cyclic MHz, multiplied by 2pi internally"},
        {"times", "us"},
        {"temperature", "K"}}},
      {"interpretations",
       {"coherent term applied as -i[H(t), rho] with H the active-stage "
        "interaction-picture Hamiltonian",
        "structured magnon dissipator acts on the full composite state",
        "final Bell target carries relative phase -1 as produced by the "
        "schedule"}},
      {"integrator",
       {{"method", "rk4"},
        {"dt", cfg.integrator.resolved_dt(cfg.system)},
        {"record_stride", cfg.integrator.record_stride}}},
      {"schedule_samples", detail::schedule_samples(sched, 512)},
      {"wall_seconds", wall_seconds}};
}

// --- single run -------------------------------------------------------------

inline int run_single(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output.dir);
  const fs::path dir = cfg.output.dir;
  Json summary;
  int exit_code = 0;
  double wall = 0.0;
  try {
    RunSummary s = evaluate_run(cfg.system, cfg.integrator);
    wall = s.wall_seconds;
    detail::write_text_file(dir / "timeseries.csv",
                            detail::timeseries_csv(s.record));
    summary = Json{
        {"status", "ok"},
        {"F", s.F},
        {"F_up_to_phase", s.F_up_to_phase},
        {"phase_best", {s.phase_best.real(), s.phase_best.imag()}},
        {"max_N1", s.max_N1},
        {"max_N2", s.max_N2},
        {"t_max_N2", s.t_max_N2},
        {"diagnostics",
         {{"max_trace_err", s.record.max_trace_err},
          {"max_herm_err", s.record.max_herm_err},
          {"min_eigenvalue", s.record.min_eig},
          {"renormalizations", s.record.renorm_count},
          {"samples", s.record.samples.size()},
          {"dt", s.dt}}}};
  } catch (const std::exception& e) {
    summary = Json{{"status", "failed"}, {"error", e.what()}};
    exit_code = 1;
  }
  detail::write_text_file(dir / "summary.json", summary.dump(2) + "\n");
  detail::write_text_file(dir / "manifest.json",
                          build_manifest(cfg, wall).dump(2) + "\n");
  return exit_code;
}

// --- sweep ------------------------------------------------------------------

struct SweepResult {
  std::vector<double> axis1_values, axis2_values;
  // metric name -> row-major matrix (axis1 rows, axis2 columns)
  std::map<std::string, std::vector<double>> matrices;
  std::vector<std::string> cell_errors;  // "" for clean cells
  int failed_cells = 0;
};

inline int sweep_worker_count(int cells) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("MAGNON_LINK_WORKERS")) {
    try {
      n = std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      throw ConfigError("MAGNON_LINK_WORKERS must be a positive integer");
    }
  }
  return std::min(n, std::max(1, cells));
}

inline SweepResult evaluate_sweep(const RunConfig& cfg) {
  const SweepAxis& a1 = cfg.sweep.axis1;
  const SweepAxis& a2 = cfg.sweep.axis2;
  SweepResult res;
  for (int i = 0; i < a1.points; ++i)
    res.axis1_values.push_back(
        a1.min + (a1.max - a1.min) * i / double(a1.points - 1));
  for (int j = 0; j < a2.points; ++j)
    res.axis2_values.push_back(
        a2.min + (a2.max - a2.min) * j / double(a2.points - 1));
  const int cells = a1.points * a2.points;
  for (const auto& m : cfg.sweep.metrics)
    res.matrices[m].assign(cells, std::nan(""));
  res.cell_errors.assign(cells, "");

  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      const int cell = next.fetch_add(1);
      if (cell >= cells) return;
      const int i = cell / a2.points, j = cell % a2.points;
      SystemParams p = cfg.system;
      *detail::rate_slot(p, a1.name) = res.axis1_values[i];
      *detail::rate_slot(p, a2.name) = res.axis2_values[j];
      try {
        const RunSummary s = evaluate_run(p, cfg.integrator);
        for (auto& [name, mat] : res.matrices) {
          if (name == "F") mat[cell] = s.F;
          else if (name == "F_phase") mat[cell] = s.F_up_to_phase;
          else if (name == "maxN1") mat[cell] = s.max_N1;
          else mat[cell] = s.max_N2;
        }
      } catch (const std::exception& e) {
        res.cell_errors[cell] = e.what();
      }
    }
  };
  const int workers = sweep_worker_count(cells);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : res.cell_errors)
    if (!e.empty()) ++res.failed_cells;
  return res;
}

inline std::string sweep_csv(const SweepResult& res, const RunConfig& cfg,
                             const std::string& metric) {
  std::string out = cfg.sweep.axis1.name + "\\" + cfg.sweep.axis2.name;
  for (double v : res.axis2_values) out += "," + detail::format_sci(v);
  out += "\n";
  const auto& mat = res.matrices.at(metric);
  const int cols = static_cast<int>(res.axis2_values.size());
  for (size_t i = 0; i < res.axis1_values.size(); ++i) {
    out += detail::format_sci(res.axis1_values[i]);
    for (int j = 0; j < cols; ++j)
      out += "," + detail::format_sci(mat[i * cols + j]);
    out += "\n";
  }
  return out;
}

inline int run_sweep(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output.dir);
  const fs::path dir = cfg.output.dir;
  const auto t0 = std::chrono::steady_clock::now();
  const SweepResult res = evaluate_sweep(cfg);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  for (const auto& metric : cfg.sweep.metrics)
    detail::write_text_file(dir / (metric + ".csv"),
                            sweep_csv(res, cfg, metric));
  Json cell_errors = Json::array();
  const int cols = static_cast<int>(res.axis2_values.size());
  for (size_t c = 0; c < res.cell_errors.size(); ++c)
    if (!res.cell_errors[c].empty())
      cell_errors.push_back({{"axis1_index", c / cols},
                             {"axis2_index", c % cols},
                             {"error", res.cell_errors[c]}});
  const Json summary{
      {"status", res.failed_cells == 0 ? "ok" : "partial"},
      {"cells", res.cell_errors.size()},
      {"failed_cells", res.failed_cells},
      {"cell_errors", std::move(cell_errors)}};
  detail::write_text_file(dir / "summary.json", summary.dump(2) + "\n");
  detail::write_text_file(dir / "manifest.json",
                          build_manifest(cfg, wall).dump(2) + "\n");
  return res.failed_cells == 0 ? 0 : 2;
}

// --- diagnostics suite ------------------------------------------------------

struct CheckOutcome {
  std::string name;
  bool passed = false;
  std::string detail;
};

inline std::vector<CheckOutcome> run_check_suite(const RunConfig& cfg) {
  std::vector<CheckOutcome> out;
  const SystemParams& p = cfg.system;
  const HilbertLayout layout = p.layout();
  auto add = [&](const std::string& name, bool ok, const std::string& detail) {
    out.push_back({name, ok, detail});
  };

  // 1. invariant-condition residual i dI/dt - [H, I] on a 1000-point grid
  {
    const InvariantSpec spec = InvariantSpec::bell_ramp(p.T1);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const double t = p.T1 * (k + 0.5) / 1000.0;
      const auto [g1, g2] = sta_couplings(spec, t);
      const ComplexMatrix h = h_stage1_logical(g1, g2);
      const ComplexMatrix i_mat = invariant_matrix(spec, t);
      const ComplexMatrix resid = Complex(0, 1) * invariant_matrix_dot(spec, t)
                                  - (h * i_mat - i_mat * h);
      worst = std::max(worst, resid.cwiseAbs().maxCoeff());
    }
    add("invariant_residual", worst <= 1e-8 * spec.Omega0,
        "max residual " + detail::format_sci(worst));
  }

  // 2. invariant-eigenframe reconstruction vs direct integration, 20 points
  {
    const InvariantSpec spec = InvariantSpec::bell_ramp(p.T1);
    auto h3 = [&](double t) {
      const auto [g1, g2] = sta_couplings(spec, t);
      return h_stage1_logical(g1, g2);
    };
    ComplexVector psi0 = ComplexVector::Zero(3);
    psi0(1) = 1.0;  // logical |g100>
    const Complex c0 =
        invariant_eigenstates(spec, 0.0).phi0.dot(psi0);  // <phi0(0)|psi0>
    const double quad_step = p.T1 / 2000.0;
    const double dt = p.T1 / 20000.0;
    double worst = 1.0;
    HilbertLayout lay3({3});
    for (int k = 1; k <= 20; ++k) {
      const double t = p.T1 * k / 20.0;
      const StateVector evolved = evolve_schrodinger(
          StateVector(lay3, psi0), {0.0, t}, h3, dt, nullptr);
      const double alpha =
          lr_phase(spec, InvariantMode::kZero, t, h3, quad_step);
      const ComplexVector recon = c0 * std::exp(Complex(0, 1) * alpha) *
                                  invariant_eigenstates(spec, t).phi0;
      worst = std::min(worst, std::abs(recon.dot(evolved.amplitudes)));
    }
    add("lr_reconstruction", worst >= 1.0 - 1e-6,
        "min overlap " + detail::format_sci(worst));
  }

  // default dissipative run feeds checks 3-4
  RunSummary base;
  bool base_ok = true;
  try {
    base = evaluate_run(p, cfg.integrator);
  } catch (const std::exception& e) {
    base_ok = false;
    add("state_validity", false, std::string("run failed: ") + e.what());
    add("step_halving", false, "skipped (baseline run failed)");
  }
  if (base_ok) {
    // 3. trace / Hermiticity / positivity on every recorded sample
    const bool ok = base.record.max_trace_err <= 1e-8 &&
                    base.record.max_herm_err <= 1e-10 &&
                    base.record.min_eig >= -1e-7;
    add("state_validity", ok,
        "max |tr-1| " + detail::format_sci(base.record.max_trace_err) +
            ", max herm err " + detail::format_sci(base.record.max_herm_err) +
            ", min eig " + detail::format_sci(base.record.min_eig));

    // 4. step-halving convergence of F
    IntegratorConfig half = cfg.integrator;
    half.dt = 0.5 * cfg.integrator.resolved_dt(p);
    half.record_stride = 1 << 20;  // endpoints only
    try {
      const RunSummary fine = evaluate_run(p, half);
      const double delta = std::abs(fine.F - base.F);
      add("step_halving", delta <= 1e-6,
          "|F(dt) - F(dt/2)| = " + detail::format_sci(delta));
    } catch (const std::exception& e) {
      add("step_halving", false, std::string("halved run failed: ") + e.what());
    }
  }

  // 5. negativity unit values: Bell 0.5, product 0, separability threshold
  {
    BellTarget bell = stage1_bell_target(layout);
    const double n_bell =
        negativity(DensityMatrix::pure(bell.state()), {kQubit, kMagnonL});
    const double n_prod = negativity(
        DensityMatrix::pure(StateVector::basis(layout, {1, 0, 0, 0})),
        {kQubit, kMagnonL});
    // Werner family on the qubit-magnon pair: bisection for the p where
    // negativity vanishes (analytically 1/3)
    auto werner_neg = [&](double prob) {
      DensityMatrix pure = DensityMatrix::pure(bell.state());
      DensityMatrix red = partial_trace(pure, {kQubit, kMagnonL});
      const int d = red.layout.total_dim();
      ComplexMatrix w = prob * red.matrix +
                        (1.0 - prob) / d * ComplexMatrix::Identity(d, d);
      return 0.5 * (trace_norm(partial_transpose(
                        DensityMatrix(red.layout, std::move(w)), 0)) -
                    1.0);
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (werner_neg(mid) > 0.0 ? hi : lo) = mid;
    }
    const double p_threshold = 0.5 * (lo + hi);
    const bool ok = std::abs(n_bell - 0.5) <= 1e-10 && n_prod <= 1e-12 &&
                    std::abs(p_threshold - 1.0 / 3.0) <= 1e-6;
    add("negativity_units", ok,
        "Bell " + detail::format_sci(n_bell) + ", product " +
            detail::format_sci(n_prod) + ", threshold p " +
            detail::format_sci(p_threshold));
  }

  // 6. stage-1 Bell-phase audit on the closed system
  {
    SystemParams closed = p;
    closed.gamma_q = closed.gamma_phi = 0.0;
    closed.kappa_c = closed.kappa_mL = closed.kappa_mR = 0.0;
    const ControlSchedule sched = build_schedule(closed);
    const DissipatorSet diss = build_dissipators(closed, layout);
    DensityMatrix rho =
        DensityMatrix::pure(StateVector::basis(layout, {0, 1, 0, 0}));
    IntegratorConfig ic = cfg.integrator;
    rho = evolve_lindblad(rho, {0.0, closed.T1}, sched, diss, ic,
                          ic.resolved_dt(closed), nullptr);
    const PhaseAuditedFidelity pf =
        fidelity_up_to_phase(rho, stage1_bell_target(layout));
    const bool ok = pf.F_best >= 1.0 - 1e-4 &&
                    std::abs(pf.phase_best + Complex(1.0)) <= 1e-3;
    add("bell_phase_audit", ok,
        "stage-1 F " + detail::format_sci(pf.F_best) +
            ", produced relative phase " +
            detail::format_sci(pf.phase_best.real()) + " + " +
            detail::format_sci(pf.phase_best.imag()) + "i");
  }

  return out;
}

inline int run_check(const RunConfig& cfg, std::ostream& os) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output.dir);
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<CheckOutcome> checks = run_check_suite(cfg);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  Json report = Json::array();
  bool all_ok = true;
  for (const auto& c : checks) {
    os << "check " << c.name << ": " << (c.passed ? "PASS" : "FAIL") << " ("
       << c.detail << ")\n";
    report.push_back({{"name", c.name}, {"passed", c.passed},
                      {"detail", c.detail}});
    all_ok = all_ok && c.passed;
  }
  detail::write_text_file(
      fs::path(cfg.output.dir) / "check_report.json",
      Json{{"status", all_ok ? "ok" : "failed"}, {"checks", report}}.dump(2) +
          "\n");
  detail::write_text_file(fs::path(cfg.output.dir) / "manifest.json",
                          build_manifest(cfg, wall).dump(2) + "\n");
  return all_ok ? 0 : 1;
}

}  // namespace magnonlink

#endif  // MAGNONLINK_HARNESS_HPP
