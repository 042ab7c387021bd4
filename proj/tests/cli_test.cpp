// End-to-end checks of the command-line tool: exit codes and artifacts.
// The binary path is injected by the build as DLL_CLI_PATH.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
  if (ok) {
    std::cout << "[ok] " << what << "\n";
  } else {
    std::cout << "[FAILED] " << what << "\n";
    ++failures;
  }
}

int run(const std::string& args) {
  const std::string cmd =
      std::string(DLL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "dll_cli_test";
  fs::remove_all(work);
  fs::create_directories(work);

  expect(run("--help") == 0, "--help exits 0");
  expect(run("run") == 2, "run without --config exits 2");
  expect(run("run --config " + (work / "missing.json").string()) == 2,
         "missing config file exits 2");

  {
    std::ofstream bad(work / "bad.json");
    bad << "{\"train\": {\"epochs\": \"ten\"}}";
  }
  expect(run("run --config " + (work / "bad.json").string()) == 2,
         "malformed config exits 2");

  expect(run("gen-data --task regression --n 120 --d 3 --gen-seed 5 --out " +
             work.string() + " --file data.csv") == 0,
         "gen-data exits 0");
  expect(fs::exists(work / "data.csv"), "gen-data writes the CSV");

  {
    std::ofstream cfg(work / "run.json");
    cfg << R"({
      "dataset": {"source": "csv", "task": "regression",
                  "path": ")" << (work / "data.csv").string() << R"("},
      "missing": {"rate1": 0.3, "rate2": 0.3},
      "seeds": [1],
      "methods": ["DLL", "ID"],
      "model": {"encoder_widths": [0, 8, 4], "embedding_widths": [1, 2],
                "tower_widths": [6, 4, 1]},
      "train": {"epochs": 2, "batch_size": 4, "learning_rate": 0.02},
      "inference": {"y0": 1.0, "iterations": 10, "epsilon": 1e-6}
    })";
  }
  const std::string out1 = (work / "out1").string();
  const std::string out2 = (work / "out2").string();
  expect(run("run --config " + (work / "run.json").string() + " --out " +
             out1) == 0,
         "run exits 0");
  expect(fs::exists(fs::path(out1) / "results.json"), "run writes results.json");
  expect(fs::exists(fs::path(out1) / "history.csv"), "run writes history.csv");

  expect(run("run --config " + (work / "run.json").string() + " --out " +
             out2) == 0,
         "second run exits 0");
  expect(slurp(fs::path(out1) / "results.json") ==
             slurp(fs::path(out2) / "results.json"),
         "two runs emit byte-identical results.json");

  const std::string sweep_out = (work / "sweep").string();
  expect(run("sweep --config " + (work / "run.json").string() +
             " --rates 0.2 --rates 0.5 --out " + sweep_out) == 0,
         "sweep exits 0");
  expect(fs::exists(fs::path(sweep_out) / "sweep.csv"), "sweep writes sweep.csv");

  const std::string trace_out = (work / "trace").string();
  expect(run("trace --config " + (work / "run.json").string() + " --out " +
             trace_out) == 0,
         "trace exits 0");
  expect(fs::exists(fs::path(trace_out) / "convergence.csv") &&
             fs::exists(fs::path(trace_out) / "trace.csv"),
         "trace writes convergence.csv and trace.csv");

  // Ablation demands a classification preset; the regression config must
  // be rejected as a configuration error.
  expect(run("ablate --config " + (work / "run.json").string() + " --out " +
             (work / "ablate").string()) == 2,
         "ablate on a regression config exits 2");

  fs::remove_all(work);
  if (failures) {
    std::cout << failures << " cli checks failed\n";
    return 1;
  }
  std::cout << "all cli checks passed\n";
  return 0;
}
