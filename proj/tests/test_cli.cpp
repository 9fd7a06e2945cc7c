#include <catch2/catch.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "scsqkd/dataset.hpp"
#include "scsqkd/document.hpp"

#ifndef SCSQKD_CLI_PATH
#error "SCSQKD_CLI_PATH must point at the built binary"
#endif

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout
};

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("scsqkd_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RunResult run_cli(const std::string& args) {
  const fs::path out = work_dir() / "stdout.txt";
  const std::string cmd =
      std::string(SCSQKD_CLI_PATH) + " " + args + " > " + out.string() + " 2> /dev/null";
  const int status = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out);
  std::ostringstream buf;
  buf << in.rdbuf();
  result.output = buf.str();
  return result;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("keyrate reproduces published rates through the CLI", "[cli]") {
  const fs::path report_path = work_dir() / "report_0km.txt";
  const RunResult r = run_cli("keyrate --data paper_0km --out " + report_path.string());
  REQUIRE(r.exit_code == 0);
  const scsqkd::Document report = scsqkd::Document::load(report_path);
  report.require_schema("scsqkd/report v1");
  CHECK(report.get_num("keyrate", "r_coh_per_window") == Approx(6.47e-4).epsilon(0.15));
  CHECK(report.get_num("keyrate", "r_bps") == Approx(6.47e4).epsilon(0.15));

  const RunResult far = run_cli("keyrate --data paper_75p7km --out " +
                                (work_dir() / "report_75km.txt").string());
  REQUIRE(far.exit_code == 0);
  const scsqkd::Document far_report = scsqkd::Document::load(work_dir() / "report_75km.txt");
  CHECK(far_report.get_num("keyrate", "r_coh_per_window") == Approx(1.28e-5).epsilon(0.15));
}

TEST_CASE("keyrate exit codes distinguish failure classes", "[cli]") {
  SECTION("degenerate data") {
    scsqkd::Dataset ds = scsqkd::embedded_dataset("paper_0km");
    for (auto& row : ds.counts.detected)
      for (auto& cell : row) cell = {0, 0};
    const fs::path path = work_dir() / "empty_counts.txt";
    scsqkd::dataset_to_document(ds.params, ds.counts).save(path);
    CHECK(run_cli("keyrate --data " + path.string()).exit_code == 4);
  }
  SECTION("parse failure") {
    const fs::path path = work_dir() / "garbage.txt";
    std::ofstream(path) << "not a dataset at all\n";
    CHECK(run_cli("keyrate --data " + path.string()).exit_code == 2);
  }
  SECTION("invariant violation") {
    std::string text(scsqkd::embedded_dataset_text("paper_0km"));
    const auto pos = text.find("sent_00 = 231594000000");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 22, "sent_00 = 231594000001");
    const fs::path path = work_dir() / "bad_sum.txt";
    std::ofstream(path) << text;
    CHECK(run_cli("keyrate --data " + path.string()).exit_code == 3);
  }
  SECTION("missing file") {
    CHECK(run_cli("keyrate --data /nonexistent/nowhere.txt").exit_code == 2);
  }
}

TEST_CASE("simulate is reproducible byte for byte", "[cli]") {
  const fs::path a = work_dir() / "mc_a.txt";
  const fs::path b = work_dir() / "mc_b.txt";
  const std::string flags = "simulate --scenario paper_0km --mode mc --mc-windows 200000 --seed 7";
  REQUIRE(run_cli(flags + " --out " + a.string()).exit_code == 0);
  REQUIRE(run_cli(flags + " --out " + b.string()).exit_code == 0);
  CHECK(slurp(a) == slurp(b));

  const fs::path c = work_dir() / "mc_c.txt";
  REQUIRE(run_cli("simulate --scenario paper_0km --mode mc --mc-windows 200000 --seed 8 --out " +
                  c.string())
              .exit_code == 0);
  CHECK(slurp(a) != slurp(c));
}

TEST_CASE("simulate --analyze chains into a key-rate report", "[cli]") {
  const fs::path dataset = work_dir() / "sim_0km.txt";
  const fs::path report = work_dir() / "sim_0km_report.txt";
  const RunResult r = run_cli("simulate --scenario paper_0km --analyze --out " + dataset.string() +
                              " --report-out " + report.string());
  REQUIRE(r.exit_code == 0);

  const scsqkd::Dataset sim = scsqkd::load_dataset(dataset);
  CHECK(sim.params.n_windows == 363000000000ULL);

  const scsqkd::Document doc = scsqkd::Document::load(report);
  // simulated both-send QBER within one percentage point of the published 1.95%
  CHECK(std::abs(doc.get_num("tally", "qber_both_send") - 0.0195) < 0.01);
  CHECK(doc.get_num("keyrate", "r_coh_per_window") > 0.0);
}

TEST_CASE("simulate sweep emits a monotone rate column", "[cli]") {
  const fs::path table = work_dir() / "sweep.tsv";
  const RunResult r = run_cli("simulate --sweep 0:110:10 --out " + table.string());
  REQUIRE(r.exit_code == 0);
  std::ifstream in(table);
  std::string header;
  std::getline(in, header);
  CHECK(header == "total_km\tqber_both_send\tr_col_per_window\tr_coh_per_window");
  double last_rate = 1.0;
  int rows = 0;
  double km, qber, r_col, r_coh;
  while (in >> km >> qber >> r_col >> r_coh) {
    CHECK(r_coh <= last_rate + 1e-15);
    last_rate = r_coh;
    ++rows;
  }
  CHECK(rows == 12);
}

TEST_CASE("phasesim summaries through the CLI", "[cli]") {
  const fs::path on_path = work_dir() / "phase_on.txt";
  REQUIRE(run_cli("phasesim --feedback on --duration-ms 120 --seed 5 --out " + on_path.string())
              .exit_code == 0);
  const scsqkd::Document on = scsqkd::Document::load(on_path);
  CHECK(on.get_num("phasesim", "residual_std_rad") <= 0.25);

  const fs::path off_path = work_dir() / "phase_off.txt";
  REQUIRE(run_cli("phasesim --feedback off --duration-ms 120 --seed 5 --out " + off_path.string())
              .exit_code == 0);
  const double open_std = scsqkd::Document::load(off_path).get_num("phasesim", "residual_std_rad");
  CHECK(open_std >= 0.4);
  CHECK(open_std <= 1.8);

  const fs::path frozen_path = work_dir() / "phase_frozen.txt";
  REQUIRE(run_cli("phasesim --feedback off --drift-rate 0 --duration-ms 20 --seed 5 --out " +
                  frozen_path.string())
              .exit_code == 0);
  CHECK(scsqkd::Document::load(frozen_path).get_num("phasesim", "residual_std_rad") ==
        Approx(0.0).margin(1e-12));

  const fs::path trace_path = work_dir() / "trace.tsv";
  REQUIRE(run_cli("phasesim --feedback on --duration-ms 5 --seed 1 --trace " + trace_path.string())
              .exit_code == 0);
  const std::string trace = slurp(trace_path);
  CHECK(trace.rfind("t_us\t", 0) == 0);
}

TEST_CASE("calibrate reproduces the published calibration numbers", "[cli]") {
  const fs::path out = work_dir() / "calibration.txt";
  const RunResult r = run_cli(
      "calibrate --extinction 2.5717e10 3639 4"
      " --intensity 0.2231 0.0012 4"
      " --patterning 1000000000000 42952 100000000 35011 1000000000000 42938 100000000 35002"
      " --out " +
      out.string());
  REQUIRE(r.exit_code == 0);
  const scsqkd::Document doc = scsqkd::Document::load(out);
  doc.require_schema("scsqkd/calibration v1");
  CHECK(std::round(doc.get_num("extinction", "ratio_db") * 10.0) / 10.0 == 74.5);
  CHECK(std::round(doc.get_num("intensity", "mu_up_ratio") * 1e4) / 1e2 == 102.15);
  CHECK(std::abs(doc.get_num("patterning", "rel_diff_vs_ss") * 100.0 - 0.03) <= 0.01);
  CHECK(std::abs(doc.get_num("patterning", "rel_diff_sv_vv") * 100.0 - 0.04) <= 0.01);

  // same numbers through an input document
  const fs::path input = work_dir() / "calibration_input.txt";
  std::ofstream(input) << "schema = scsqkd/calibration-input v1\n\n[extinction]\n"
                          "n_signal = 2.5717e10\nn_vacuum = 3639\nfactor = 4\n";
  const fs::path out2 = work_dir() / "calibration2.txt";
  REQUIRE(run_cli("calibrate --input " + input.string() + " --out " + out2.string()).exit_code ==
          0);
  CHECK(scsqkd::Document::load(out2).get_num("extinction", "ratio_db") ==
        Approx(doc.get_num("extinction", "ratio_db")));

  CHECK(run_cli("calibrate").exit_code == 2);
}

TEST_CASE("a calibration block feeds the intensity bounds of keyrate", "[cli]") {
  const fs::path calib = work_dir() / "calib_block.txt";
  REQUIRE(run_cli("calibrate --extinction 2.5717e10 3639 4 --intensity 0.2231 0.0012 4 --out " +
                  calib.string())
              .exit_code == 0);
  const fs::path report = work_dir() / "report_calibrated.txt";
  REQUIRE(run_cli("keyrate --data paper_0km --calibration " + calib.string() + " --out " +
                  report.string())
              .exit_code == 0);
  const scsqkd::Document doc = scsqkd::Document::load(report);
  // bounds rederived as mu * ratio and max(mu_up) * 10^(-ER/10)
  const double ratio = 1.0 + 4.0 * 0.0012 / 0.2231;
  CHECK(doc.get_num("input", "mu_a_up") == Approx(0.0174 * ratio).epsilon(1e-12));
  CHECK(doc.get_num("input", "mu_b_up") == Approx(0.0348 * ratio).epsilon(1e-12));
  const double extinction = 10.0 * std::log10(2.5717e10 * 4.0 / 3639.0);
  CHECK(doc.get_num("input", "mu_vac_up") ==
        Approx(0.0348 * ratio * std::pow(10.0, -extinction / 10.0)).epsilon(1e-9));
  // measured-bound column is reproduced with the rederived bounds as well
  CHECK(doc.get_num("keyrate", "r_coh_per_window") == Approx(6.47e-4).epsilon(0.15));
}

TEST_CASE("optimize echoes a collapsed box and prints the baseline", "[cli]") {
  const fs::path out = work_dir() / "optimize_point.txt";
  const RunResult r = run_cli(
      "optimize --scenario paper_50p5km --box 0.0061 0.0061 0.0122 0.0122 0.2 0.2 --out " +
      out.string());
  REQUIRE(r.exit_code == 0);
  const scsqkd::Document doc = scsqkd::Document::load(out);
  CHECK(doc.get_num("optimum", "mu_a") == 0.0061);
  CHECK(doc.get_num("optimum", "p_send") == 0.2);
  CHECK(doc.get_num("baseline", "r_coh_per_window") > 0.0);
  // quadrature order differs between baseline (16) and unit evaluation elsewhere;
  // a collapsed box must still match its own baseline exactly
  CHECK(doc.get_num("optimum", "r_coh_per_window") ==
        Approx(doc.get_num("baseline", "r_coh_per_window")).epsilon(1e-9));
}

TEST_CASE("datasets subcommand lists and dumps fixtures", "[cli]") {
  const RunResult list = run_cli("datasets");
  REQUIRE(list.exit_code == 0);
  CHECK(list.output.find("paper_0km") != std::string::npos);
  CHECK(list.output.find("paper_101p1km") != std::string::npos);

  const RunResult dump = run_cli("datasets --dump paper_0km");
  REQUIRE(dump.exit_code == 0);
  CHECK(dump.output == std::string(scsqkd::embedded_dataset_text("paper_0km")));

  CHECK(run_cli("datasets --dump paper_nowhere").exit_code == 2);
}

TEST_CASE("bare --out filenames land in SCSQKD_OUT_DIR", "[cli]") {
  const fs::path dir = work_dir() / "outdir";
  fs::create_directories(dir);
  ::setenv("SCSQKD_OUT_DIR", dir.c_str(), 1);
  const RunResult r = run_cli("keyrate --data paper_0km --out envreport.txt");
  ::unsetenv("SCSQKD_OUT_DIR");
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(dir / "envreport.txt"));
}
