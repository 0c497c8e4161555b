// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "magnonlink/harness.hpp"

using namespace magnonlink;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

// coarse-but-stable step for fast orchestration tests (still well under the
// stability bound 0.01/max_rate ~= 2.9e-4 for default parameters)
constexpr double kCoarseDt = 2.5e-4;

Json base_doc() {
  return Json{{"experiment", {{"kind", "single"}}},
              {"integrator", {{"dt", kCoarseDt}, {"record_stride", 50}}}};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("magnonlink_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config parsing errors") {
  REQUIRE_THROWS_WITH(parse_config(Json{{"experiment", Json::object()}}),
                      ContainsSubstring("experiment kind required"));
  REQUIRE_THROWS_WITH(
      parse_config(Json{{"experiment", {{"kind", "banana"}}}}),
      ContainsSubstring("single, sweep, check"));
  REQUIRE_THROWS_WITH(
      parse_config(Json{{"experiment", {{"kind", "single"}}},
                        {"system", {{"gama_q", 0.1}}}}),
      ContainsSubstring("unknown key \"gama_q\""));
  REQUIRE_THROWS_WITH(
      parse_config(Json{{"experiment", {{"kind", "single"}}},
                        {"bogus", 1}}),
      ContainsSubstring("unknown key \"bogus\""));
  REQUIRE_THROWS_WITH(
      parse_config(Json{{"experiment", {{"kind", "single"}}},
                        {"system", {{"gamma_q", -0.5}}}}),
      ContainsSubstring("rates must be >= 0"));

  // invalid sweep axis lists the valid names
  Json sweep_doc{{"experiment",
                  {{"kind", "sweep"},
                   {"sweep", {{"axis1", {{"name", "kappa_q"}}}}}}}};
  REQUIRE_THROWS_WITH(parse_config(sweep_doc),
                      ContainsSubstring("unknown sweep axis \"kappa_q\""));
  REQUIRE_THROWS_WITH(parse_config(sweep_doc),
                      ContainsSubstring("gamma_q gamma_phi kappa_c"));

  // duplicate axes rejected
  Json dup{{"experiment",
            {{"kind", "sweep"},
             {"sweep",
              {{"axis1", {{"name", "kappa_c"}}},
               {"axis2", {{"name", "kappa_c"}}}}}}}};
  REQUIRE_THROWS_WITH(parse_config(dup), ContainsSubstring("distinct"));

  // kind conflict between file and subcommand
  REQUIRE_THROWS_WITH(parse_config(Json{{"experiment", {{"kind", "sweep"}}}},
                                   ExperimentKind::kSingle),
                      ContainsSubstring("conflicts"));

  // malformed JSON text carries position info
  REQUIRE_THROWS_WITH(parse_config_text("{ nope", ExperimentKind::kSingle),
                      ContainsSubstring("parse error"));
}

TEST_CASE("defaults are filled and flagged") {
  const RunConfig cfg = parse_config(Json::object(), ExperimentKind::kSingle);
  auto defaulted = [&](const std::string& key) {
    return std::find(cfg.defaulted.begin(), cfg.defaulted.end(), key) !=
           cfg.defaulted.end();
  };
  REQUIRE(defaulted("system.T1"));
  REQUIRE(defaulted("system.T2"));
  REQUIRE(defaulted("system.g_wg"));
  REQUIRE(defaulted("system.omega_q"));
  REQUIRE(defaulted("integrator.dt"));
  REQUIRE_THAT(cfg.system.T1, WithinAbs(std::sqrt(2.0) / 20.0, 1e-12));

  // the T2 default tracks explicitly supplied T1 and g_wg
  const RunConfig c2 = parse_config(
      Json{{"system", {{"T1", 0.1}, {"g_wg", 100.0}}}}, ExperimentKind::kSingle);
  REQUIRE_THAT(c2.system.T2, WithinAbs(0.1 + 200.0 / (kTwoPi * 100.0), 1e-12));
  REQUIRE(std::find(c2.defaulted.begin(), c2.defaulted.end(), "system.T1") ==
          c2.defaulted.end());

  // explicit values win
  const RunConfig c3 = parse_config(Json{{"system", {{"T2", 0.5}}}},
                                    ExperimentKind::kSingle);
  REQUIRE(c3.system.T2 == 0.5);
}

TEST_CASE("step bound enforcement") {
  Json doc{{"integrator", {{"dt", 0.1}}}};
  REQUIRE_THROWS_WITH(parse_config(doc, ExperimentKind::kSingle),
                      ContainsSubstring("stability bound"));
}

TEST_CASE("dotted-path overrides") {
  Json doc = Json::object();
  apply_override(doc, "system.T1=0.2");
  apply_override(doc, "system.rates_are_angular=false");
  apply_override(doc, "experiment.kind=single");
  REQUIRE(doc["system"]["T1"] == 0.2);
  REQUIRE(doc["system"]["rates_are_angular"] == false);
  const RunConfig cfg = parse_config(doc);
  REQUIRE(cfg.system.T1 == 0.2);
  REQUIRE_FALSE(cfg.system.rates_are_angular);

  REQUIRE_THROWS_AS(apply_override(doc, "no_equals_sign"), ConfigError);
  REQUIRE_THROWS_AS(apply_override(doc, "=5"), ConfigError);
}

TEST_CASE("manifest round-trips to an identical configuration") {
  Json doc = base_doc();
  doc["system"] = {{"gamma_q", 0.02}, {"T1", 0.08}};
  const RunConfig cfg = parse_config(doc);
  const Json manifest = build_manifest(cfg, 1.23);

  // all paper-unspecified defaults appear explicitly in the manifest
  const Json& sys = manifest.at("resolved_config").at("system");
  for (const char* key : {"T1", "T2", "g_wg", "omega_q", "rates_are_angular"})
    REQUIRE(sys.contains(key));
  REQUIRE(manifest.at("defaulted").contains("system.g_wg"));

  const RunConfig again = parse_config(manifest);
  REQUIRE(again.resolved == cfg.resolved);
  REQUIRE(again.defaulted.empty());  // everything explicit the second time
}

TEST_CASE("single run writes the expected artifacts") {
  Json doc = base_doc();
  for (const char* r : {"gamma_q", "gamma_phi", "kappa_c", "kappa_mL", "kappa_mR"})
    doc["system"][r] = 0.0;
  RunConfig cfg = parse_config(doc);
  const auto dir = fresh_dir("single");
  cfg.output.dir = dir.string();
  REQUIRE(run_single(cfg) == 0);

  const std::string csv = slurp(dir / "timeseries.csv");
  REQUIRE(csv.rfind(
              "t_us,P_e000,P_g100,P_g010,P_g001,N1,N2,trace_err,herm_err,"
              "min_eig\n",
              0) == 0);
  REQUIRE(csv.find('\r') == std::string::npos);  // LF endings only

  const Json summary = Json::parse(slurp(dir / "summary.json"));
  REQUIRE(summary.at("status") == "ok");
  REQUIRE(summary.at("F_up_to_phase").get<double>() >= 0.99);
  REQUIRE(summary.at("max_N2").get<double>() >= 0.49);
  const auto phase = summary.at("phase_best");
  REQUIRE_THAT(phase[0].get<double>(), WithinAbs(-1.0, 1e-3));

  const Json manifest = Json::parse(slurp(dir / "manifest.json"));
  REQUIRE(manifest.at("schedule_samples").at("stage1").size() == 512);
  REQUIRE(manifest.at("schedule_samples").at("stage2").size() == 512);
}

TEST_CASE("sweep baseline grid is constant and deterministic") {
  Json doc = base_doc();
  doc["experiment"]["kind"] = "sweep";
  doc["experiment"]["sweep"] = {
      {"axis1", {{"name", "gamma_q"}, {"min", 0.01}, {"max", 0.01}, {"points", 2}}},
      {"axis2", {{"name", "gamma_phi"}, {"min", 0.1}, {"max", 0.1}, {"points", 2}}}};
  const RunConfig cfg = parse_config(doc);
  const SweepResult res = evaluate_sweep(cfg);
  REQUIRE(res.failed_cells == 0);
  const auto& f = res.matrices.at("F");
  REQUIRE(f.size() == 4);
  for (int k = 1; k < 4; ++k) REQUIRE_THAT(f[k], WithinAbs(f[0], 1e-12));
}

TEST_CASE("sweep output is invariant under worker count") {
  Json doc = base_doc();
  doc["experiment"]["kind"] = "sweep";
  doc["experiment"]["sweep"] = {
      {"axis1", {{"name", "gamma_phi"}, {"min", 0.0}, {"max", 0.3}, {"points", 2}}},
      {"axis2", {{"name", "kappa_mL"}, {"min", 0.0}, {"max", 1.0}, {"points", 3}}}};
  RunConfig cfg = parse_config(doc);

  const auto d1 = fresh_dir("sweep_w1"), d2 = fresh_dir("sweep_w3");
  setenv("MAGNON_LINK_WORKERS", "1", 1);
  cfg.output.dir = d1.string();
  REQUIRE(run_sweep(cfg) == 0);
  setenv("MAGNON_LINK_WORKERS", "3", 1);
  cfg.output.dir = d2.string();
  REQUIRE(run_sweep(cfg) == 0);
  unsetenv("MAGNON_LINK_WORKERS");

  for (const char* f : {"F.csv", "maxN2.csv"})
    REQUIRE(slurp(d1 / f) == slurp(d2 / f));

  // monotonicity along the dephasing axis at fixed second axis
  const SweepResult res = evaluate_sweep(cfg);
  const auto& fmat = res.matrices.at("F");
  for (int j = 0; j < 3; ++j) REQUIRE(fmat[0 * 3 + j] >= fmat[1 * 3 + j]);
}

TEST_CASE("sweep records per-cell failures and signals partial success") {
  Json doc = base_doc();
  doc["experiment"]["kind"] = "sweep";
  doc["experiment"]["sweep"] = {
      {"axis1", {{"name", "kappa_c"}, {"min", 0.0}, {"max", 1e6}, {"points", 2}}},
      {"axis2", {{"name", "gamma_q"}, {"min", 0.0}, {"max", 0.01}, {"points", 2}}}};
  RunConfig cfg = parse_config(doc);
  const auto dir = fresh_dir("sweep_partial");
  cfg.output.dir = dir.string();
  REQUIRE(run_sweep(cfg) == 2);
  const Json summary = Json::parse(slurp(dir / "summary.json"));
  REQUIRE(summary.at("status") == "partial");
  REQUIRE(summary.at("failed_cells").get<int>() == 2);
  const std::string csv = slurp(dir / "F.csv");
  REQUIRE_THAT(csv, ContainsSubstring("nan"));
}

TEST_CASE("diagnostics suite passes on a fast configuration") {
  Json doc = base_doc();
  doc["experiment"]["kind"] = "check";
  RunConfig cfg = parse_config(doc);
  const auto dir = fresh_dir("check");
  cfg.output.dir = dir.string();
  std::ostringstream os;
  const int rc = run_check(cfg, os);
  INFO(os.str());
  REQUIRE(rc == 0);
  const Json report = Json::parse(slurp(dir / "check_report.json"));
  REQUIRE(report.at("status") == "ok");
  REQUIRE(report.at("checks").size() == 6);
  bool saw_phase_audit = false;
  for (const auto& c : report.at("checks"))
    if (c.at("name") == "bell_phase_audit") {
      saw_phase_audit = true;
      REQUIRE_THAT(c.at("detail").get<std::string>(),
                   ContainsSubstring("relative phase"));
    }
  REQUIRE(saw_phase_audit);
}

TEST_CASE("command-line interface end to end") {
  const char* bin = std::getenv("MAGNON_LINK_BIN");
  REQUIRE(bin != nullptr);
  const auto dir = fresh_dir("cli");
  const auto cfg_path = dir / "cfg.json";
  {
    Json doc = base_doc();
    doc["system"] = {{"gamma_q", 0.0}, {"gamma_phi", 0.0}, {"kappa_c", 0.0},
                     {"kappa_mL", 0.0}, {"kappa_mR", 0.0}};
    std::ofstream f(cfg_path);
    f << doc.dump(2);
  }
  auto run_cli = [&](const std::string& args) {
    const std::string cmd =
        std::string(bin) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };

  const auto out1 = dir / "out1";
  REQUIRE(run_cli("run --config " + cfg_path.string() + " --out " +
                  out1.string()) == 0);
  const Json summary = Json::parse(slurp(out1 / "summary.json"));
  REQUIRE(summary.at("status") == "ok");

  // re-running from the emitted manifest reproduces the CSV bit-for-bit
  const auto out2 = dir / "out2";
  REQUIRE(run_cli("run --config " + (out1 / "manifest.json").string() +
                  " --out " + out2.string()) == 0);
  REQUIRE(slurp(out1 / "timeseries.csv") == slurp(out2 / "timeseries.csv"));

  // --set overrides reach the physics
  const auto out3 = dir / "out3";
  REQUIRE(run_cli("run --config " + cfg_path.string() + " --set system.T2=0.2" +
                  " --out " + out3.string()) == 0);
  const Json m3 = Json::parse(slurp(out3 / "manifest.json"));
  REQUIRE(m3.at("resolved_config").at("system").at("T2") == 0.2);

  // invalid values exit with failure
  REQUIRE(run_cli("run --config " + cfg_path.string() +
                  " --set system.gamma_q=-1 --out " + (dir / "bad").string()) ==
          1);
  REQUIRE(run_cli("run --config /nonexistent.json") != 0);
}
