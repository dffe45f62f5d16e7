#include "hsps/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hsps/coincidence.hpp"
#include "hsps/discrete.hpp"
#include "hsps/errors.hpp"
#include "hsps/fit.hpp"
#include "hsps/model.hpp"
#include "hsps/response.hpp"
#include "hsps/simulate.hpp"
#include "hsps/tags.hpp"
#include "hsps/version.hpp"

namespace hsps {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct ConfigFile {
  ordered_json json;
  std::string hash;
  fs::path dir;  // directory of the config file, for relative paths
};

ConfigFile load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  ConfigFile c;
  c.hash = fnv1a_hex(ss.str());
  try {
    c.json = ordered_json::parse(ss.str());
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  c.dir = fs::path(path).parent_path();
  if (!c.json.contains("schema") ||
      c.json["schema"].get<std::string>() != "hsps-config/1")
    throw ConfigError("config: schema must be \"hsps-config/1\"");
  return c;
}

void check_top_level(const ordered_json& j);

void require_keys(const ordered_json& j,
                  std::initializer_list<const char*> allowed,
                  const std::string& ctx) {
  if (!j.is_object()) throw ConfigError(ctx + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw ConfigError("config: unknown key '" + it.key() + "' in " + ctx);
  }
}

double num_or(const ordered_json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw ConfigError(std::string("config: '") + key + "' must be a number");
  return j[key].get<double>();
}

// Shared sections, paper units: rates in MHz, bandwidth in THz, times in ns,
// resolution in ps, pump in mW.
struct SourceSection {
  double rate_per_mw = 1.2e6;
  double bandwidth = 3e12;
};

SourceSection parse_source(const ordered_json& cfg) {
  SourceSection s;
  if (!cfg.contains("source")) return s;
  const auto& j = cfg["source"];
  require_keys(j, {"rate_per_mw_mhz", "bandwidth_thz"}, "source");
  s.rate_per_mw = num_or(j, "rate_per_mw_mhz", 1.2) * 1e6;
  s.bandwidth = num_or(j, "bandwidth_thz", 3.0) * 1e12;
  return s;
}

DetectorModel parse_detector(const ordered_json& j, const std::string& ctx) {
  require_keys(j, {"jitter_ns", "efficiency", "dead_ns", "resolution_ps"}, ctx);
  DetectorModel d;
  d.jitter_halfwidth = num_or(j, "jitter_ns", 0.35) * 1e-9;
  d.efficiency = num_or(j, "efficiency", 0.4);
  d.dead_time = num_or(j, "dead_ns", 45.0) * 1e-9;
  d.tag_resolution = num_or(j, "resolution_ps", 156.25) * 1e-12;
  d.validate();
  return d;
}

DetectorModel parse_detector_section(const ordered_json& cfg) {
  if (!cfg.contains("detector")) return DetectorModel{};
  return parse_detector(cfg["detector"], "detector");
}

CoincidenceConfig parse_window(const ordered_json& cfg, double fallback_ns) {
  CoincidenceConfig c;
  c.coin_halfwidth = 0.5 * num_or(cfg, "window_ns", fallback_ns) * 1e-9;
  c.validate();
  if (!c.in_apparatus_range())
    std::cerr << "warning: coincidence window " << fmt(c.coin_halfwidth * 2e9)
              << " ns is outside the 0.5-20 ns apparatus range\n";
  return c;
}

void write_curve(const fs::path& path, const std::string& header_x,
                 const std::string& header_cols,
                 const std::vector<std::vector<double>>& rows,
                 const std::string& hash) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot open for writing: " + path.string());
  f << "# hsps " << kVersion << " curve\n";
  f << "# config_hash=" << hash << "\n";
  f << header_x << ',' << header_cols << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      f << (i ? "," : "") << fmt(row[i]);
    f << "\n";
  }
  if (!f) throw DataError("write failed: " + path.string());
}

fs::path out_path(const ConfigFile& cfg, const std::string& out_dir,
                  const std::string& name) {
  fs::path base = out_dir.empty() ? cfg.dir : fs::path(out_dir);
  if (!base.empty()) fs::create_directories(base);
  return base / name;
}

// ---------------------------------------------------------------- predict

void check_top_level(const ordered_json& j) {
  require_keys(j,
               {"schema", "source", "detector", "window_ns", "predict",
                "simulate", "count", "fit", "report"},
               "config");
}

int run_predict(const ConfigFile& cfg, const std::string& out_dir) {
  const SourceSection src = parse_source(cfg.json);
  const DetectorModel det = parse_detector_section(cfg.json);
  const CoincidenceConfig win = parse_window(cfg.json, 0.78);
  ordered_json jp = cfg.json.contains("predict") ? cfg.json["predict"]
                                                 : ordered_json::object();
  require_keys(jp,
               {"pump_mw", "tau_range_ns", "tau_points", "powers_mw",
                "windows_ns"},
               "predict");
  const double pump = num_or(jp, "pump_mw", 11.9);
  const double range_ns = num_or(jp, "tau_range_ns", 3.0);
  const int points = static_cast<int>(num_or(jp, "tau_points", 241));
  if (points < 2 || range_ns <= 0.0)
    throw ConfigError("predict: need tau_points >= 2 and tau_range_ns > 0");

  const SpdcParams p = SpdcParams::from_pump(src.rate_per_mw, pump, src.bandwidth);
  const ResponseModel model(p, det, win, EvalMode::delta);

  std::vector<std::vector<double>> gsi_rows, gc_rows;
  for (int i = 0; i < points; ++i) {
    const double tau_ns = -range_ns + 2.0 * range_ns * i / (points - 1);
    const double tau = tau_ns * 1e-9;
    gsi_rows.push_back({tau_ns, model.g2bar_si(tau)});
    gc_rows.push_back({tau_ns, model.g2bar_c(tau)});
  }
  write_curve(out_path(cfg, out_dir, "gsi_curve.csv"), "tau_ns", "g2bar_si",
              gsi_rows, cfg.hash);
  write_curve(out_path(cfg, out_dir, "gc_curve.csv"), "tau_ns", "g2bar_c",
              gc_rows, cfg.hash);

  std::vector<double> powers;
  if (jp.contains("powers_mw"))
    for (const auto& v : jp["powers_mw"]) powers.push_back(v.get<double>());
  if (powers.empty())
    for (int i = 1; i <= 20; ++i) powers.push_back(i);
  const auto power_sweep = g2bar_c_zero_power_sweep(
      src.rate_per_mw, src.bandwidth, det, win, powers, EvalMode::delta);
  std::vector<std::vector<double>> prow;
  for (const auto& s : power_sweep) prow.push_back({s.x, s.value});
  write_curve(out_path(cfg, out_dir, "gc0_vs_power.csv"), "power_mw", "g2bar_c0",
              prow, cfg.hash);

  std::vector<double> windows;
  if (jp.contains("windows_ns"))
    for (const auto& v : jp["windows_ns"]) windows.push_back(v.get<double>());
  if (windows.empty())
    for (double w = 0.5; w <= 20.0 + 1e-9; w += 0.5) windows.push_back(w);
  std::vector<double> windows_s;
  for (double w : windows) windows_s.push_back(w * 1e-9);
  const auto wsweep = g2bar_c_zero_window_sweep(p, det, windows_s, EvalMode::delta);
  DetectorModel ideal = det;
  ideal.jitter_halfwidth = 0.0;
  const auto wsweep0 = g2bar_c_zero_window_sweep(p, ideal, windows_s, EvalMode::delta);
  std::vector<std::vector<double>> wrow;
  for (std::size_t i = 0; i < wsweep.size(); ++i)
    wrow.push_back({windows[i], wsweep[i].value, wsweep0[i].value});
  write_curve(out_path(cfg, out_dir, "gc0_vs_window.csv"), "window_ns",
              "g2bar_c0,g2bar_c0_taud0", wrow, cfg.hash);
  return 0;
}

// --------------------------------------------------------------- simulate

SimConfig parse_sim(const ConfigFile& cfg, const ordered_json& js) {
  const SourceSection src = parse_source(cfg.json);
  SimConfig sim;
  const double pump = num_or(js, "pump_mw", 11.9);
  sim.source = SpdcParams::from_pump(src.rate_per_mw, pump, src.bandwidth);
  DetectorModel det = parse_detector_section(cfg.json);
  sim.detectors = {det, det, det};
  if (js.contains("detectors")) {
    const auto& jd = js["detectors"];
    require_keys(jd, {"idler", "s1", "s2"}, "detectors");
    if (jd.contains("idler"))
      sim.detectors[0] = parse_detector(jd["idler"], "detectors.idler");
    if (jd.contains("s1"))
      sim.detectors[1] = parse_detector(jd["s1"], "detectors.s1");
    if (jd.contains("s2"))
      sim.detectors[2] = parse_detector(jd["s2"], "detectors.s2");
  }
  sim.splitter_ratio = num_or(js, "splitter_ratio", 0.5);
  sim.duration = num_or(js, "duration_s", 1.0);
  sim.rng_seed = static_cast<std::uint64_t>(num_or(js, "seed", 1));
  sim.threads = static_cast<int>(num_or(js, "threads", 1));
  if (js.contains("tag_budget_bytes"))
    sim.tag_budget_bytes =
        static_cast<std::uint64_t>(js["tag_budget_bytes"].get<double>());
  sim.validate();
  return sim;
}

int run_simulate(const ConfigFile& cfg, const std::string& out_dir) {
  if (!cfg.json.contains("simulate"))
    throw ConfigError("config: missing 'simulate' section");
  const auto& js = cfg.json["simulate"];
  require_keys(js,
               {"pump_mw", "detectors", "splitter_ratio", "duration_s", "seed",
                "threads", "tag_budget_bytes", "background_rate_hz", "out",
                "format"},
               "simulate");
  const SimConfig sim = parse_sim(cfg, js);
  TagStream tags = generate(sim);
  const double bg = num_or(js, "background_rate_hz", 0.0);
  if (bg > 0.0) tags = inject_background(tags, bg, sim.rng_seed ^ 0xb6u);
  const std::string name =
      js.contains("out") ? js["out"].get<std::string>() : "tags.htag";
  const fs::path path = out_path(cfg, out_dir, name);
  std::string format = js.contains("format") ? js["format"].get<std::string>()
                                             : std::string();
  if (format.empty())
    format = path.extension() == ".csv" ? "csv" : "binary";
  if (format == "csv")
    save_tags_csv(tags, path.string(), {"config_hash=" + cfg.hash});
  else if (format == "binary")
    save_tags_binary(tags, path.string());
  else
    throw ConfigError("simulate: format must be 'binary' or 'csv'");
  std::cout << "wrote " << tags.size() << " tags to " << path.string() << "\n";
  return 0;
}

// ------------------------------------------------------------------ count

int run_count(const ConfigFile& cfg, const std::string& out_dir) {
  if (!cfg.json.contains("count"))
    throw ConfigError("config: missing 'count' section");
  const auto& jc = cfg.json["count"];
  require_keys(jc,
               {"input", "duration_s", "bin_width_ps", "range_ns",
                "out_prefix"},
               "count");
  if (!jc.contains("input")) throw ConfigError("count: missing 'input'");
  const fs::path input = cfg.dir / jc["input"].get<std::string>();
  const TagStream tags =
      load_tags(input.string(), num_or(jc, "duration_s", 0.0));
  const CoincidenceConfig win = parse_window(cfg.json, 0.78);
  const double bin_width = num_or(jc, "bin_width_ps", 156.25) * 1e-12;
  const double range = num_or(jc, "range_ns", 5.0) * 1e-9;
  const std::string prefix =
      jc.contains("out_prefix") ? jc["out_prefix"].get<std::string>() : "counts";

  const auto rates = singles(tags);
  ordered_json jsingles;
  jsingles["schema"] = "hsps-singles/1";
  jsingles["config_hash"] = cfg.hash;
  jsingles["duration_s"] = tags.duration;
  jsingles["rates_hz"] = rates;
  {
    std::ofstream f(out_path(cfg, out_dir, prefix + "_singles.json"),
                    std::ios::trunc);
    f << jsingles.dump(2) << "\n";
  }

  const std::vector<std::string> note = {"config_hash=" + cfg.hash};
  const Histogram1D hist =
      delay_histogram(tags, kIdler, kSignal1, bin_width, range);
  save_histogram_csv(hist, out_path(cfg, out_dir, prefix + "_delays.csv").string(),
                     note);
  const auto gsi = g2si_curve(hist, win.coin_halfwidth);
  save_curve_csv(gsi, out_path(cfg, out_dir, prefix + "_gsi.csv").string(),
                 "tau_s", "g2bar_si", note);
  if (tags.n_channels >= 3) {
    const Histogram2D surface = triple_surface(tags, win.coin_halfwidth, range);
    save_histogram_csv(surface,
                       out_path(cfg, out_dir, prefix + "_triples.csv").string(),
                       note);
    const auto gc = g2c_profile(tags, win.coin_halfwidth, range);
    save_curve_csv(gc, out_path(cfg, out_dir, prefix + "_gc.csv").string(),
                   "tau_s", "g2bar_c", note);
  }
  return 0;
}

// -------------------------------------------------------------------- fit

int run_fit(const ConfigFile& cfg, const std::string& out_dir) {
  if (!cfg.json.contains("fit"))
    throw ConfigError("config: missing 'fit' section");
  const auto& jf = cfg.json["fit"];
  require_keys(jf, {"problem", "out"}, "fit");
  if (!jf.contains("problem")) throw ConfigError("fit: missing 'problem'");
  const fs::path ppath = cfg.dir / jf["problem"].get<std::string>();
  std::ifstream f(ppath);
  if (!f) throw DataError("cannot open fit problem: " + ppath.string());
  std::stringstream ss;
  ss << f.rdbuf();
  const FitProblem problem = fit_problem_from_json(ss.str());
  const FitResult result = fit(problem);
  const std::string name =
      jf.contains("out") ? jf["out"].get<std::string>() : "fit_result.json";
  std::ofstream out(out_path(cfg, out_dir, name), std::ios::trunc);
  out << fit_result_to_json(result) << "\n";
  std::cout << "fit: rate_per_mw=" << fmt(result.rate_per_mw)
            << " tau_d=" << fmt(result.tau_d) << " g2c0=" << fmt(result.g2c0)
            << " chi2/dof=" << fmt(result.chi2 / std::max<long>(result.dof, 1))
            << "\n";
  return 0;
}

// ----------------------------------------------------------------- report

struct PowerRun {
  double pump_mw = 0.0;
  std::vector<double> rates;
  GsiCurveData curve;
  std::string curve_path;
};

PowerRun pipeline_one_power(const ConfigFile& cfg, const SimConfig& sim,
                            const CoincidenceConfig& win, double pump_mw,
                            const std::string& out_dir, int index) {
  PowerRun run;
  run.pump_mw = pump_mw;

  const double res = sim.detectors[0].tag_resolution;
  const double w = 2.0 * win.coin_halfwidth;
  const double tau_d = sim.detectors[0].jitter_halfwidth;
  const int half = static_cast<int>(std::ceil((2.0 * tau_d + 1e-9) / w)) + 2;

  WindowedPairAccumulator pairs(kIdler, kSignal1, win.coin_halfwidth, res, half);
  std::array<std::uint64_t, 3> counts{};
  generate_stream(sim, [&](const TagStream& chunk) {
    pairs.feed(chunk.ticks, chunk.channels);
    for (auto c : chunk.channels) counts[c]++;
  });

  run.rates = {counts[0] / sim.duration, counts[1] / sim.duration,
               counts[2] / sim.duration};
  if (counts[0] == 0 || counts[1] == 0)
    throw DataError("report: no tags on a required channel");

  run.curve.pump_mw = pump_mw;
  run.curve.tau_coin = win.coin_halfwidth;
  const double norm =
      1.0 / (sim.duration * w * run.rates[kIdler] * run.rates[kSignal1]);
  // Non-overlapping windows tile the delay axis, so point errors are
  // independent; windows with fewer than 5 counts pool into their
  // neighbour.
  std::uint64_t pooled = 0;
  double pooled_tau = 0.0;
  int pooled_n = 0;
  auto flush = [&] {
    if (pooled_n == 0 || pooled < 5) return;
    CurvePoint pt;
    pt.tau = pooled_tau / pooled_n;
    pt.value = static_cast<double>(pooled) * norm / pooled_n;
    pt.sigma = pt.value / std::sqrt(static_cast<double>(pooled));
    run.curve.points.push_back(pt);
    pooled = 0;
    pooled_tau = 0.0;
    pooled_n = 0;
  };
  for (int k = -half; k <= half; ++k) {
    pooled += pairs.count(k);
    pooled_tau += static_cast<double>(k) * w;
    pooled_n += 1;
    flush();
  }

  char name[64];
  std::snprintf(name, sizeof name, "report_gsi_p%d.csv", index);
  std::vector<std::string> note = {"config_hash=" + cfg.hash,
                                   "pump_mw=" + fmt(pump_mw)};
  save_curve_csv(run.curve.points, out_path(cfg, out_dir, name).string(),
                 "tau_s", "g2bar_si", note);
  run.curve_path = name;
  return run;
}

int run_report(const ConfigFile& cfg, const std::string& out_dir) {
  if (!cfg.json.contains("report"))
    throw ConfigError("config: missing 'report' section");
  const auto& jr = cfg.json["report"];
  require_keys(jr,
               {"powers_mw", "duration_s", "seed", "threads", "out",
                "fit_bandwidth", "reference_power_mw"},
               "report");
  const SourceSection src = parse_source(cfg.json);
  const DetectorModel det = parse_detector_section(cfg.json);
  const CoincidenceConfig win = parse_window(cfg.json, 0.78);

  std::vector<double> powers;
  if (jr.contains("powers_mw"))
    for (const auto& v : jr["powers_mw"]) powers.push_back(v.get<double>());
  if (powers.empty()) powers = {4.0, 8.0, 12.0};
  const double duration = num_or(jr, "duration_s", 1.0);
  const auto seed = static_cast<std::uint64_t>(num_or(jr, "seed", 1));
  const int threads = static_cast<int>(num_or(jr, "threads", 1));

  FitProblem problem;
  problem.bandwidth.value = src.bandwidth;
  problem.bandwidth.free = jr.contains("fit_bandwidth") &&
                           jr["fit_bandwidth"].get<bool>();
  problem.reference_power_mw = num_or(jr, "reference_power_mw", 0.0);

  ordered_json jruns = ordered_json::array();
  for (std::size_t i = 0; i < powers.size(); ++i) {
    SimConfig sim;
    sim.source = SpdcParams::from_pump(src.rate_per_mw, powers[i], src.bandwidth);
    sim.detectors = {det, det, det};
    sim.duration = duration;
    sim.rng_seed = seed + i;
    sim.threads = threads;
    sim.validate();
    PowerRun run = pipeline_one_power(cfg, sim, win, powers[i], out_dir,
                                      static_cast<int>(i));
    ordered_json jrun;
    jrun["pump_mw"] = run.pump_mw;
    jrun["seed"] = seed + i;
    jrun["singles_hz"] = run.rates;
    jrun["gsi_curve_csv"] = run.curve_path;
    jruns.push_back(std::move(jrun));
    problem.gsi_curves.push_back(std::move(run.curve));
  }

  const FitResult result = fit(problem);

  ordered_json report;
  report["schema"] = "hsps-report/1";
  report["version"] = kVersion;
  report["config_hash"] = cfg.hash;
  report["seed"] = seed;
  report["window_ns"] = 2.0 * win.coin_halfwidth * 1e9;
  report["duration_s"] = duration;
  report["runs"] = std::move(jruns);
  report["fit"] = ordered_json::parse(fit_result_to_json(result));
  report["inferred_g2c0"] = {{"value", result.g2c0},
                             {"sigma", result.g2c0_sigma},
                             {"at_rate_hz", result.reference_rate}};
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  report["timestamp_unix"] =
      std::chrono::duration_cast<std::chrono::seconds>(now).count();
  const std::string name =
      jr.contains("out") ? jr["out"].get<std::string>() : "report.json";
  std::ofstream f(out_path(cfg, out_dir, name), std::ios::trunc);
  f << report.dump(2) << "\n";
  if (!f) throw DataError("write failed: " + name);
  std::cout << "report: inferred g2c0 = " << fmt(result.g2c0) << " +- "
            << fmt(result.g2c0_sigma) << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"heralded single-photon source coherence toolkit"};
  app.require_subcommand(1);
  std::string config_path, out_dir;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out-dir", out_dir,
                    "output directory (default: config directory)");
  };
  add_common(app.add_subcommand("predict", "analytic coherence curves"));
  add_common(app.add_subcommand("simulate", "generate a tag stream"));
  add_common(app.add_subcommand("count", "histograms and estimators"));
  add_common(app.add_subcommand("fit", "parameter inference"));
  add_common(app.add_subcommand(
      "report", "simulate + count + fit + infer, one JSON report"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const ConfigFile cfg = load_config(config_path);
    check_top_level(cfg.json);
    if (app.got_subcommand("predict")) return run_predict(cfg, out_dir);
    if (app.got_subcommand("simulate")) return run_simulate(cfg, out_dir);
    if (app.got_subcommand("count")) return run_count(cfg, out_dir);
    if (app.got_subcommand("fit")) return run_fit(cfg, out_dir);
    if (app.got_subcommand("report")) return run_report(cfg, out_dir);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const FitError& e) {
    std::cerr << "fit error: " << e.what() << "\n";
    return 4;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cli_run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("hsps");
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace hsps
