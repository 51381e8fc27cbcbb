// Process-level checks of the command-line tool: exit codes, output files,
// seed reproducibility, and manifest-driven reruns. CLI path in argv[1].

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::string g_cli;
fs::path g_dir;

void expect(bool ok, const std::string& what) {
  if (ok) {
    std::printf("[PASS] %s\n", what.c_str());
  } else {
    std::printf("[FAIL] %s\n", what.c_str());
    ++g_failures;
  }
}

int run(const std::string& args, const std::string& log_name = "log.txt") {
  const std::string cmd =
      "'" + g_cli + "' " + args + " > '" + (g_dir / log_name).string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

const char* kScanConfig = R"({
  "overlap": {"sigma_input_fs": 120.0, "sigma_dc_fs": 42.553308073493916},
  "detector": {"efficiency": 1.0},
  "input": {"photon_number": {"poisson_mean": 0.05}},
  "delay_grid_fs": {"min": -636.6, "max": 636.6, "points": 9},
  "duration_per_point_s": 0.02,
  "seed": 11,
  "mode": "mc"
})";

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: cli_behavior_test <path-to-stimclone>\n");
    return 2;
  }
  g_cli = argv[1];
  g_dir = fs::path("cli_test_tmp_" + std::to_string(::getpid()));
  fs::create_directories(g_dir);

  const fs::path cfg = g_dir / "scan.json";
  write(cfg, kScanConfig);

  // Exit code 2 with a field diagnostic on bad config.
  write(g_dir / "bad.json", R"({"detector": {"efficiency": 1.5}})");
  expect(run("scan --config '" + (g_dir / "bad.json").string() + "'", "bad.txt") == 2,
         "invalid config exits 2");
  expect(slurp(g_dir / "bad.txt").find("efficiency") != std::string::npos,
         "diagnostic names the offending field");
  write(g_dir / "unparseable.json", "{nope");
  expect(run("scan --config '" + (g_dir / "unparseable.json").string() + "'") == 2,
         "unparseable config exits 2");
  expect(run("scan --config '" + (g_dir / "does_not_exist.json").string() + "'") == 2,
         "missing config exits 2");

  // Exit code 3 on an analysis failure (no baseline points in the grid).
  write(g_dir / "nobase.json", R"({
    "overlap": {"sigma_input_fs": 120.0, "sigma_dc_fs": 42.553308073493916},
    "delay_grid_fs": [0.0, 10.0, 20.0], "mode": "exact"})");
  expect(run("scan --config '" + (g_dir / "nobase.json").string() + "' --out '" +
             (g_dir / "nobase_out").string() + "'") == 3,
         "analysis failure exits 3");

  // A normal scan writes CSV + fidelity + manifest and exits 0.
  const fs::path out1 = g_dir / "out1";
  expect(run("scan --config '" + cfg.string() + "' --out '" + out1.string() + "'") == 0,
         "scan exits 0");
  expect(fs::exists(out1 / "scan_vh.csv"), "scan writes scan_vh.csv");
  expect(fs::exists(out1 / "fidelity.json"), "scan writes fidelity.json");
  expect(fs::exists(out1 / "manifest.json"), "scan writes manifest.json");

  // Same seed, same bytes; different seed, different sampled counts.
  const fs::path out2 = g_dir / "out2", out3 = g_dir / "out3";
  run("scan --config '" + cfg.string() + "' --out '" + out2.string() + "'");
  run("scan --config '" + cfg.string() + "' --seed 99 --out '" + out3.string() + "'");
  expect(slurp(out1 / "scan_vh.csv") == slurp(out2 / "scan_vh.csv"),
         "identical seed gives byte-identical CSV");
  expect(slurp(out1 / "scan_vh.csv") != slurp(out3 / "scan_vh.csv"),
         "different seed changes sampled counts");

  // Rerunning from the manifest reproduces the outputs.
  const fs::path out4 = g_dir / "out4";
  expect(run("scan --config '" + (out1 / "manifest.json").string() + "' --out '" +
             out4.string() + "'") == 0,
         "manifest is accepted as config");
  expect(slurp(out1 / "scan_vh.csv") == slurp(out4 / "scan_vh.csv"),
         "manifest rerun reproduces the CSV");

  // --basis all emits one CSV per basis plus a universality report.
  const fs::path out5 = g_dir / "out5";
  expect(run("scan --config '" + cfg.string() + "' --basis all --out '" + out5.string() + "'") == 0,
         "scan --basis all exits 0");
  expect(fs::exists(out5 / "scan_vh.csv") && fs::exists(out5 / "scan_45.csv") &&
             fs::exists(out5 / "scan_circ.csv"),
         "scan --basis all writes three CSVs");
  expect(slurp(out5 / "fidelity.json").find("universality") != std::string::npos,
         "universality report present");

  // --mode both populates expected and sampled columns side by side.
  const fs::path out7 = g_dir / "out7";
  expect(run("scan --config '" + cfg.string() + "' --mode both --out '" + out7.string() + "'") == 0,
         "scan --mode both exits 0");
  {
    std::istringstream csv(slurp(out7 / "scan_vh.csv"));
    std::string line;
    std::getline(csv, line);  // header
    bool sampled_nonzero = false, expected_nonzero = false;
    while (std::getline(csv, line)) {
      std::vector<std::string> cols;
      std::istringstream ls(line);
      for (std::string c; std::getline(ls, c, ',');) cols.push_back(c);
      if (cols.size() == 8 && cols[5] != "0" && cols[5] != "") expected_nonzero = true;
      if (cols.size() == 8 && cols[6] != "0") sampled_nonzero = true;
    }
    expect(expected_nonzero && sampled_nonzero,
           "scan --mode both fills expected and sampled counts");
  }

  // fidelity subcommand: optimal point.
  write(g_dir / "fid.json", R"({
    "overlap": {"sigma_input_fs": 120.0, "sigma_dc_fs": 120.0},
    "fidelity_gamma": 1.0, "delay_grid_fs": [0.0]})");
  const fs::path out6 = g_dir / "out6";
  expect(run("fidelity --config '" + (g_dir / "fid.json").string() + "' --out '" +
             out6.string() + "'", "fid.txt") == 0,
         "fidelity exits 0");
  const std::string fid_log = slurp(g_dir / "fid.txt");
  expect(fid_log.find("clone fidelity 0.833333") != std::string::npos,
         "fidelity prints clone fidelity 0.833333");
  expect(fid_log.find("anti-clone fidelity 0.666667") != std::string::npos,
         "fidelity prints anti-clone fidelity 0.666667");

  // Zero overlap: spontaneous emission only.
  write(g_dir / "fid0.json", R"({
    "overlap": {"sigma_input_fs": 120.0, "sigma_dc_fs": 120.0},
    "fidelity_gamma": 0.0, "delay_grid_fs": [0.0]})");
  expect(run("fidelity --config '" + (g_dir / "fid0.json").string() + "' --out '" +
             out6.string() + "'", "fid0.txt") == 0,
         "fidelity (gamma 0) exits 0");
  expect(slurp(g_dir / "fid0.txt").find("clone fidelity 0.750000") != std::string::npos,
         "fidelity prints clone fidelity 0.750000 at zero overlap");

  fs::remove_all(g_dir);
  if (g_failures == 0) std::printf("all CLI behavior checks passed\n");
  return g_failures == 0 ? 0 : 1;
}
