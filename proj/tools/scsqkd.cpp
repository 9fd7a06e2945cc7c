// scsqkd — command-line front end for the SCS-QKD security calculus and
// simulators. Every subcommand is reproducible: identical flags and seed give
// byte-identical output.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scsqkd/calibration.hpp"
#include "scsqkd/channel.hpp"
#include "scsqkd/dataset.hpp"
#include "scsqkd/document.hpp"
#include "scsqkd/errors.hpp"
#include "scsqkd/feedback.hpp"
#include "scsqkd/optimize.hpp"
#include "scsqkd/security.hpp"

namespace {

constexpr int kExitParse = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitDegenerate = 4;
constexpr int kExitDomain = 5;

// --out resolution: bare filenames land in $SCSQKD_OUT_DIR when it is set.
std::filesystem::path resolve_out(const std::string& out) {
  std::filesystem::path path(out);
  if (path.is_relative() && !path.has_parent_path()) {
    if (const char* dir = std::getenv("SCSQKD_OUT_DIR")) return std::filesystem::path(dir) / path;
  }
  return path;
}

void emit(const scsqkd::Document& doc, const std::string& out) {
  std::cout << doc.serialize();
  if (!out.empty()) doc.save(resolve_out(out));
}

void emit_text(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  const auto path = resolve_out(out);
  std::ofstream stream(path);
  if (!stream) throw scsqkd::parse_error("cannot write " + path.string());
  stream << text;
}

struct KeyrateArgs {
  std::string data;
  std::string out;
  std::string calibration;
  double eps_coh = 1e-10;
  int effective_channel = 0;
  std::optional<double> ec_inefficiency;
  std::optional<double> p_send;
  std::optional<double> mu_a_up, mu_b_up, mu_vac_up;
  std::optional<double> effective_rate_mhz;
  std::optional<std::uint64_t> dimension_d;
};

scsqkd::KeyRateReport run_keyrate(const scsqkd::ProtocolParams& params,
                                  const scsqkd::CountTable& counts, int effective_channel,
                                  double eps_coh) {
  const scsqkd::DetectorMapping mapping{effective_channel, 1 - effective_channel};
  return scsqkd::analyze(params, counts, mapping, scsqkd::LogFailureProb::from_xi(eps_coh));
}

int cmd_keyrate(const KeyrateArgs& args) {
  scsqkd::Dataset ds = scsqkd::resolve_dataset(args.data);
  if (args.ec_inefficiency) ds.params.ec_inefficiency = *args.ec_inefficiency;
  if (args.p_send) ds.params.p_send = *args.p_send;
  if (args.mu_a_up) ds.params.mu_a_up = *args.mu_a_up;
  if (args.mu_b_up) ds.params.mu_b_up = *args.mu_b_up;
  if (args.mu_vac_up) ds.params.mu_vac_up = *args.mu_vac_up;
  if (args.effective_rate_mhz) ds.params.effective_rate_mhz = *args.effective_rate_mhz;
  if (args.dimension_d) ds.params.dimension_d = static_cast<int>(*args.dimension_d);
  if (!args.calibration.empty()) {
    const scsqkd::Document cal = scsqkd::Document::load(resolve_out(args.calibration));
    cal.require_schema("scsqkd/calibration v1");
    const double ratio = cal.get_num("intensity", "mu_up_ratio");
    const double extinction = cal.get_num("extinction", "ratio_db");
    ds.params.mu_a_up = ds.params.mu_a * ratio;
    ds.params.mu_b_up = ds.params.mu_b * ratio;
    ds.params.mu_vac_up =
        scsqkd::vacuum_intensity_bound(ds.params.mu_a_up, ds.params.mu_b_up, extinction);
  }
  const scsqkd::KeyRateReport report =
      run_keyrate(ds.params, ds.counts, args.effective_channel, args.eps_coh);
  scsqkd::Document doc = scsqkd::report_to_document(ds.params, report);
  doc.set_str("input", "data", args.data);
  doc.set_num("input", "eps_coh", args.eps_coh);
  emit(doc, args.out);
  return 0;
}

struct SimulateArgs {
  std::string scenario;
  std::string out;
  std::string report_out;
  std::string mode = "analytic";
  bool analyze = false;
  std::uint64_t seed = 1;
  std::uint64_t mc_windows = 10000000;
  int quad_order = 24;
  std::string sweep;  // "start:stop:step" in total km, symmetric arms
  std::optional<double> len_ac, len_bc, phase_sigma, extra_loss_a, extra_loss_b;
  std::optional<double> mu_a, mu_b, p_send;
  std::optional<std::uint64_t> n_windows;
  double eps_coh = 1e-10;
};

scsqkd::SimulationScenario build_scenario(const SimulateArgs& args) {
  scsqkd::SimulationScenario s = args.scenario.empty()
                                     ? scsqkd::paper_scenario("paper_50p5km")
                                     : scsqkd::paper_scenario(args.scenario);
  if (args.len_ac) s.channel.len_ac_km = *args.len_ac;
  if (args.len_bc) s.channel.len_bc_km = *args.len_bc;
  if (args.phase_sigma) s.channel.phase_sigma_rad = *args.phase_sigma;
  if (args.extra_loss_a) s.channel.extra_loss_a_db = *args.extra_loss_a;
  if (args.extra_loss_b) s.channel.extra_loss_b_db = *args.extra_loss_b;
  if (args.mu_a) s.params.mu_a = *args.mu_a;
  if (args.mu_b) s.params.mu_b = *args.mu_b;
  if (args.p_send) s.params.p_send = *args.p_send;
  if (args.n_windows) s.params.n_windows = *args.n_windows;
  scsqkd::apply_intensity_bounds(s.params);
  return s;
}

int cmd_simulate(const SimulateArgs& args) {
  const scsqkd::SimulationScenario s = build_scenario(args);

  if (!args.sweep.empty()) {
    double start = 0.0, stop = 0.0, step = 0.0;
    if (std::sscanf(args.sweep.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 || step <= 0.0)
      throw scsqkd::parse_error("--sweep expects start:stop:step in km");
    std::string tsv = "total_km\tqber_both_send\tr_col_per_window\tr_coh_per_window\n";
    char line[160];
    for (double total = start; total <= stop + 1e-9; total += step) {
      scsqkd::SimulationScenario point = s;
      point.channel.len_ac_km = total / 2.0;
      point.channel.len_bc_km = total / 2.0;
      const scsqkd::ExpectedCountTable table = scsqkd::expected_count_table(
          point.params, point.channel, point.detectors, point.frame, args.quad_order);
      const scsqkd::KeyRateReport report =
          run_keyrate(point.params, table.counts, 0, args.eps_coh);
      std::snprintf(line, sizeof line, "%.6g\t%.9g\t%.9g\t%.9g\n", total, report.tally.qber_bb,
                    report.r_col, report.r_coh);
      tsv += line;
    }
    emit_text(tsv, args.out);
    return 0;
  }

  scsqkd::CountTable counts;
  scsqkd::ProtocolParams params = s.params;
  if (args.mode == "analytic") {
    counts = scsqkd::expected_count_table(params, s.channel, s.detectors, s.frame, args.quad_order)
                 .counts;
  } else if (args.mode == "mc") {
    params.n_windows = args.mc_windows;
    counts = scsqkd::simulate_count_table_mc(params, s.channel, s.detectors, s.frame,
                                             args.mc_windows, args.seed);
  } else {
    throw scsqkd::parse_error("--mode must be analytic or mc");
  }

  scsqkd::Document doc = scsqkd::dataset_to_document(params, counts);
  doc.set_str("provenance", "generator", args.mode == "mc" ? "monte-carlo" : "analytic");
  doc.set_str("provenance", "scenario", s.name);
  doc.set_count("provenance", "seed", args.seed);
  doc.set_num("provenance", "phase_sigma_rad", s.channel.phase_sigma_rad);
  emit(doc, args.out);

  if (args.analyze) {
    const scsqkd::KeyRateReport report = run_keyrate(params, counts, 0, args.eps_coh);
    scsqkd::Document report_doc = scsqkd::report_to_document(params, report);
    report_doc.set_str("input", "scenario", s.name);
    emit(report_doc, args.report_out);
  }
  return 0;
}

struct PhasesimArgs {
  std::string feedback = "on";
  double duration_ms = 200.0;
  std::uint64_t seed = 1;
  std::string trace_out;
  std::string out;
  std::optional<double> drift_rate, window_us, target_r, kp, ki, kd, ref_rate;
};

int cmd_phasesim(const PhasesimArgs& args) {
  scsqkd::DriftProcess process;
  if (args.drift_rate) process.rate_rad_per_sqrt_us = *args.drift_rate;
  scsqkd::ControllerConfig cfg;
  if (args.window_us) cfg.integration_window_us = *args.window_us;
  if (args.target_r) cfg.target_r = *args.target_r;
  if (args.kp) cfg.kp = *args.kp;
  if (args.ki) cfg.ki = *args.ki;
  if (args.kd) cfg.kd = *args.kd;
  if (args.ref_rate) cfg.ref_rate_mcps = *args.ref_rate;
  const bool on = args.feedback == "on";
  if (!on && args.feedback != "off")
    throw scsqkd::parse_error("--feedback must be 'on' or 'off'");

  const scsqkd::LoopResult result =
      scsqkd::run_loop(process, cfg, scsqkd::HardwareModel{}, args.duration_ms, on, args.seed);

  scsqkd::Document doc;
  doc.set_schema("scsqkd/phasesim v1");
  doc.set_str("phasesim", "feedback", on ? "on" : "off");
  doc.set_num("phasesim", "duration_ms", args.duration_ms);
  doc.set_count("phasesim", "seed", args.seed);
  doc.set_num("phasesim", "drift_rate_rad_per_sqrt_us", process.rate_rad_per_sqrt_us);
  doc.set_num("phasesim", "integration_window_us", cfg.integration_window_us);
  doc.set_num("phasesim", "target_r", cfg.target_r);
  doc.set_num("phasesim", "lock_phase_rad", result.lock_phase_rad);
  doc.set_num("phasesim", "residual_std_rad", result.residual_std_rad);
  doc.set_num("phasesim", "residual_mean_rad", result.residual_mean_rad);
  emit(doc, args.out);

  if (!args.trace_out.empty()) emit_text(scsqkd::trace_to_tsv(result.trace), args.trace_out);
  return 0;
}

struct CalibrateArgs {
  std::string input;
  std::string out;
  std::vector<double> extinction;   // n_signal n_vacuum [factor] [dark]
  std::vector<double> intensity;    // mean stddev k_sigma
  std::string intensity_samples;    // file of per-pulse readings
  double k_sigma = 4.0;
  std::vector<std::uint64_t> patterning;  // sent_vv det_vv sent_vs det_vs sent_sv det_sv sent_ss det_ss
};

int cmd_calibrate(const CalibrateArgs& args) {
  scsqkd::Document out;
  out.set_schema("scsqkd/calibration v1");
  bool produced = false;

  std::optional<scsqkd::Document> input;
  if (!args.input.empty()) {
    input = scsqkd::Document::load(resolve_out(args.input));
    input->require_schema("scsqkd/calibration-input v1");
  }

  // extinction ratio
  {
    std::optional<scsqkd::ExtinctionResult> result;
    if (args.extinction.size() >= 2) {
      const double factor = args.extinction.size() > 2 ? args.extinction[2] : 4.0;
      const double dark = args.extinction.size() > 3 ? args.extinction[3] : 0.0;
      result = scsqkd::extinction_ratio_db(args.extinction[0], args.extinction[1], factor, dark);
    } else if (input && input->has("extinction", "n_signal")) {
      result = scsqkd::extinction_ratio_db(input->get_num("extinction", "n_signal"),
                                           input->get_num("extinction", "n_vacuum"),
                                           input->get_num_or("extinction", "factor", 4.0),
                                           input->get_num_or("extinction", "dark_counts", 0.0));
    }
    if (result) {
      out.set_num("extinction", "ratio_db", result->ratio_db);
      out.set_str("extinction", "lower_bound", result->vacuum_floor_applied ? "true" : "false");
      produced = true;
    }
  }

  // intensity fluctuation
  {
    std::optional<scsqkd::IntensityStats> stats;
    if (args.intensity.size() == 3) {
      stats = scsqkd::IntensityStats{args.intensity[0], args.intensity[1],
                                     scsqkd::intensity_upper_ratio(
                                         args.intensity[0], args.intensity[1], args.intensity[2])};
    } else if (!args.intensity_samples.empty()) {
      std::ifstream in(resolve_out(args.intensity_samples));
      if (!in) throw scsqkd::parse_error("cannot open " + args.intensity_samples);
      std::vector<double> samples;
      std::string line;
      while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream row(line);
        double value = 0.0;
        while (row >> value) samples.push_back(value);
      }
      stats = scsqkd::intensity_upper_bound(samples, args.k_sigma);
    } else if (input && input->has("intensity", "mean")) {
      const double mean = input->get_num("intensity", "mean");
      const double stddev = input->get_num("intensity", "stddev");
      const double k = input->get_num_or("intensity", "k_sigma", 4.0);
      stats = scsqkd::IntensityStats{mean, stddev,
                                     scsqkd::intensity_upper_ratio(mean, stddev, k)};
    }
    if (stats) {
      out.set_num("intensity", "mean", stats->mean);
      out.set_num("intensity", "stddev", stats->stddev);
      out.set_num("intensity", "mu_up_ratio", stats->mu_up_ratio);
      produced = true;
    }
  }

  // pulse correlation
  {
    std::optional<scsqkd::PatternCounts> counts;
    if (args.patterning.size() == 8) {
      counts = scsqkd::PatternCounts{args.patterning[0], args.patterning[2], args.patterning[4],
                                     args.patterning[6], args.patterning[1], args.patterning[3],
                                     args.patterning[5], args.patterning[7]};
    } else if (input && input->has("patterning", "sent_vv")) {
      counts = scsqkd::PatternCounts{
          input->get_count("patterning", "sent_vv"), input->get_count("patterning", "sent_vs"),
          input->get_count("patterning", "sent_sv"), input->get_count("patterning", "sent_ss"),
          input->get_count("patterning", "det_vv"), input->get_count("patterning", "det_vs"),
          input->get_count("patterning", "det_sv"), input->get_count("patterning", "det_ss")};
    }
    if (counts) {
      const scsqkd::PatterningRates rates = scsqkd::patterning_rates(*counts);
      out.set_num("patterning", "r_vv", rates.r_vv);
      out.set_num("patterning", "r_vs", rates.r_vs);
      out.set_num("patterning", "r_sv", rates.r_sv);
      out.set_num("patterning", "r_ss", rates.r_ss);
      out.set_num("patterning", "rel_diff_vs_ss", rates.rel_diff_vs_ss);
      out.set_num("patterning", "rel_diff_sv_vv", rates.rel_diff_sv_vv);
      produced = true;
    }
  }

  if (!produced)
    throw scsqkd::parse_error("calibrate: no inputs given (see --help for the three blocks)");
  emit(out, args.out);
  return 0;
}

struct OptimizeArgs {
  std::string scenario = "paper_50p5km";
  std::string out;
  std::vector<double> box;  // mua_min mua_max mub_min mub_max p_min p_max
  std::uint64_t seed = 1;
  int grid = 3;
  int sweeps = 40;
  double eps_coh = 1e-10;
};

int cmd_optimize(const OptimizeArgs& args) {
  const scsqkd::SimulationScenario s = scsqkd::paper_scenario(args.scenario);
  scsqkd::SearchBox box;
  if (!args.box.empty()) {
    if (args.box.size() != 6)
      throw scsqkd::parse_error(
          "--box expects 6 numbers: mua_min mua_max mub_min mub_max p_min p_max");
    box = {args.box[0], args.box[1], args.box[2], args.box[3], args.box[4], args.box[5]};
  }
  scsqkd::OptimizerSettings settings;
  settings.seed = args.seed;
  settings.grid_points = args.grid;
  settings.max_sweeps = args.sweeps;
  const scsqkd::LogFailureProb eps = scsqkd::LogFailureProb::from_xi(args.eps_coh);

  const scsqkd::ExpectedCountTable baseline_table = scsqkd::expected_count_table(
      s.params, s.channel, s.detectors, s.frame, settings.quadrature_order);
  const scsqkd::KeyRateReport baseline =
      run_keyrate(s.params, baseline_table.counts, 0, args.eps_coh);
  const scsqkd::OptimizationResult result =
      scsqkd::optimize_parameters(s.channel, s.detectors, s.frame, s.params, eps, box, settings);

  scsqkd::Document doc;
  doc.set_schema("scsqkd/optimize v1");
  doc.set_str("input", "scenario", s.name);
  doc.set_count("input", "seed", args.seed);
  doc.set_num("baseline", "mu_a", s.params.mu_a);
  doc.set_num("baseline", "mu_b", s.params.mu_b);
  doc.set_num("baseline", "p_send", s.params.p_send);
  doc.set_num("baseline", "r_coh_per_window", baseline.r_coh);
  doc.set_num("optimum", "mu_a", result.params.mu_a);
  doc.set_num("optimum", "mu_b", result.params.mu_b);
  doc.set_num("optimum", "p_send", result.params.p_send);
  doc.set_num("optimum", "r_coh_per_window", result.r_coh);
  doc.set_count("optimum", "evaluations", result.evaluations);
  emit(doc, args.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SCS-QKD finite-key security calculus and simulators"};
  app.require_subcommand(1);

  KeyrateArgs keyrate;
  CLI::App* keyrate_cmd =
      app.add_subcommand("keyrate", "Key-rate analysis of a measured or simulated dataset");
  keyrate_cmd
      ->add_option("--data", keyrate.data,
                   "Embedded dataset name (paper_0km, paper_25p3km, paper_50p5km, paper_75p7km, "
                   "paper_101p1km) or a dataset file path")
      ->required();
  keyrate_cmd->add_option("--out", keyrate.out, "Write the report document here");
  keyrate_cmd->add_option("--eps-coh", keyrate.eps_coh, "Coherent-attack failure probability");
  keyrate_cmd
      ->add_option("--effective-channel", keyrate.effective_channel,
                   "Which detector channel defines effective windows")
      ->check(CLI::Range(0, 1));
  keyrate_cmd->add_option("--calibration", keyrate.calibration,
                          "Calibration block; rederives the intensity bounds");
  keyrate_cmd->add_option("--ec-inefficiency", keyrate.ec_inefficiency);
  keyrate_cmd->add_option("--p-send", keyrate.p_send);
  keyrate_cmd->add_option("--mu-a-up", keyrate.mu_a_up);
  keyrate_cmd->add_option("--mu-b-up", keyrate.mu_b_up);
  keyrate_cmd->add_option("--mu-vac-up", keyrate.mu_vac_up);
  keyrate_cmd->add_option("--effective-rate-mhz", keyrate.effective_rate_mhz);
  keyrate_cmd->add_option("--dimension-d", keyrate.dimension_d);

  SimulateArgs simulate;
  CLI::App* simulate_cmd =
      app.add_subcommand("simulate", "Generate a count table from a channel model");
  simulate_cmd->add_option("--scenario", simulate.scenario,
                           "Named operating point (same names as the embedded datasets)");
  simulate_cmd->add_option("--mode", simulate.mode, "analytic (expected counts) or mc");
  simulate_cmd->add_option("--out", simulate.out, "Write the dataset (or sweep table) here");
  simulate_cmd->add_option("--report-out", simulate.report_out,
                           "With --analyze, write the report here");
  simulate_cmd->add_flag("--analyze", simulate.analyze, "Chain into key-rate analysis");
  simulate_cmd->add_option("--seed", simulate.seed, "Monte Carlo seed");
  simulate_cmd->add_option("--mc-windows", simulate.mc_windows, "Monte Carlo window count");
  simulate_cmd->add_option("--quad-order", simulate.quad_order, "Gauss-Hermite order")
      ->check(CLI::Range(8, 512));
  simulate_cmd->add_option("--sweep", simulate.sweep,
                           "start:stop:step total fibre km, symmetric arms; emits a TSV table");
  simulate_cmd->add_option("--len-ac", simulate.len_ac, "Alice-Charlie fibre, km");
  simulate_cmd->add_option("--len-bc", simulate.len_bc, "Bob-Charlie fibre, km");
  simulate_cmd->add_option("--phase-sigma", simulate.phase_sigma, "Phase mismatch std, rad");
  simulate_cmd->add_option("--extra-loss-a", simulate.extra_loss_a, "Alice-arm extra loss, dB");
  simulate_cmd->add_option("--extra-loss-b", simulate.extra_loss_b, "Bob-arm extra loss, dB");
  simulate_cmd->add_option("--mu-a", simulate.mu_a);
  simulate_cmd->add_option("--mu-b", simulate.mu_b);
  simulate_cmd->add_option("--p-send", simulate.p_send);
  simulate_cmd->add_option("--windows", simulate.n_windows, "Signal window count N");
  simulate_cmd->add_option("--eps-coh", simulate.eps_coh);

  PhasesimArgs phasesim;
  CLI::App* phasesim_cmd =
      app.add_subcommand("phasesim", "Phase-drift and feedback-loop simulation");
  phasesim_cmd->add_option("--feedback", phasesim.feedback, "on or off")->required();
  phasesim_cmd->add_option("--duration-ms", phasesim.duration_ms);
  phasesim_cmd->add_option("--seed", phasesim.seed);
  phasesim_cmd->add_option("--trace", phasesim.trace_out, "Write the 1 us trace TSV here");
  phasesim_cmd->add_option("--out", phasesim.out, "Write the summary document here");
  phasesim_cmd->add_option("--drift-rate", phasesim.drift_rate, "rad per sqrt(us)");
  phasesim_cmd->add_option("--window-us", phasesim.window_us, "Counting window, us (2-10)");
  phasesim_cmd->add_option("--target-r", phasesim.target_r, "Setpoint for R = D0/(D0+D1)");
  phasesim_cmd->add_option("--kp", phasesim.kp);
  phasesim_cmd->add_option("--ki", phasesim.ki);
  phasesim_cmd->add_option("--kd", phasesim.kd);
  phasesim_cmd->add_option("--ref-rate", phasesim.ref_rate, "Reference detections, Mcps");

  CalibrateArgs calibrate;
  CLI::App* calibrate_cmd = app.add_subcommand("calibrate", "Calibration statistics");
  calibrate_cmd->add_option("--input", calibrate.input,
                            "Calibration-input document with any of the three blocks");
  calibrate_cmd->add_option("--out", calibrate.out);
  calibrate_cmd
      ->add_option("--extinction", calibrate.extinction, "n_signal n_vacuum [factor] [dark_counts]")
      ->expected(2, 4);
  calibrate_cmd->add_option("--intensity", calibrate.intensity, "mean stddev k_sigma")->expected(3);
  calibrate_cmd->add_option("--intensity-samples", calibrate.intensity_samples,
                            "File of per-pulse intensity readings");
  calibrate_cmd->add_option("--k-sigma", calibrate.k_sigma,
                            "Sigma multiple for --intensity-samples");
  calibrate_cmd
      ->add_option("--patterning", calibrate.patterning,
                   "sent_vv det_vv sent_vs det_vs sent_sv det_sv sent_ss det_ss")
      ->expected(8);

  OptimizeArgs optimize;
  CLI::App* optimize_cmd =
      app.add_subcommand("optimize", "Optimize (mu_A, mu_B, p_send) on a simulated channel");
  optimize_cmd->add_option("--scenario", optimize.scenario);
  optimize_cmd->add_option("--out", optimize.out);
  optimize_cmd->add_option("--box", optimize.box, "mua_min mua_max mub_min mub_max p_min p_max")
      ->expected(6);
  optimize_cmd->add_option("--seed", optimize.seed);
  optimize_cmd->add_option("--grid", optimize.grid, "Coarse grid points per axis");
  optimize_cmd->add_option("--sweeps", optimize.sweeps, "Coordinate-descent sweeps");
  optimize_cmd->add_option("--eps-coh", optimize.eps_coh);

  CLI::App* datasets_cmd = app.add_subcommand("datasets", "List or dump the embedded datasets");
  std::string dump_name;
  std::string dump_out;
  datasets_cmd->add_option("--dump", dump_name, "Print the named embedded dataset");
  datasets_cmd->add_option("--out", dump_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (keyrate_cmd->parsed()) return cmd_keyrate(keyrate);
    if (simulate_cmd->parsed()) return cmd_simulate(simulate);
    if (phasesim_cmd->parsed()) return cmd_phasesim(phasesim);
    if (calibrate_cmd->parsed()) return cmd_calibrate(calibrate);
    if (optimize_cmd->parsed()) return cmd_optimize(optimize);
    if (datasets_cmd->parsed()) {
      if (dump_name.empty()) {
        for (const auto& name : scsqkd::embedded_dataset_names()) std::cout << name << "\n";
      } else {
        emit_text(std::string(scsqkd::embedded_dataset_text(dump_name)), dump_out);
      }
      return 0;
    }
  } catch (const scsqkd::parse_error& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const scsqkd::invariant_error& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const scsqkd::degenerate_data_error& e) {
    std::cerr << "degenerate data: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return 0;
}
