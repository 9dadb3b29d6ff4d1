#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "sensegen/checkpoint.hpp"
#include "sensegen/cli.hpp"
#include "sensegen/data.hpp"

using namespace sensegen;
namespace fs = std::filesystem;

namespace {

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"sensegen"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("sensegen_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::size_t line_count(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

// first data row and last data row of a csv with one header line
std::pair<std::vector<double>, std::vector<double>> csv_first_last(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> first, last;
  bool have_first = false;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());  // label column
      }
    }
    if (!have_first) {
      first = row;
      have_first = true;
    }
    last = row;
  }
  return {first, last};
}

struct Workspace {
  fs::path dir = fresh_dir("ws");
  fs::path sine = dir / "sine.txt";
  fs::path noise = dir / "noise.txt";

  Workspace() {
    REQUIRE(run({"synth-data", "--kind", "sine", "--length", "600", "--seed", "100",
                 "--noise", "0.05", "--out", sine.string()}) == 0);
    REQUIRE(run({"synth-data", "--kind", "ar1", "--length", "600", "--seed", "101",
                 "--phi", "0.0", "--noise", "1.0", "--out", noise.string()}) == 0);
  }
};

}  // namespace

TEST_CASE("synth-data writes deterministic column files") {
  fs::path dir = fresh_dir("synth");
  fs::path a = dir / "a.txt", b = dir / "b.txt", c = dir / "c.txt";
  CHECK(run({"synth-data", "--kind", "sine", "--length", "50", "--seed", "9", "--out",
             a.string()}) == 0);
  CHECK(run({"synth-data", "--kind", "sine", "--length", "50", "--seed", "9", "--out",
             b.string()}) == 0);
  CHECK(run({"synth-data", "--kind", "sine", "--length", "50", "--seed", "10", "--out",
             c.string()}) == 0);
  CHECK(line_count(a) == 50);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) != slurp(c));
  CHECK(run({"synth-data", "--kind", "square", "--length", "10", "--seed", "1", "--out",
             (dir / "d.txt").string()}) == 2);
}

TEST_CASE("train-gen validates inputs with exit code 2") {
  fs::path dir = fresh_dir("tg_bad");
  CHECK(run({"train-gen", "--data", (dir / "missing.txt").string(), "--seed", "1",
             "--out", dir.string()}) == 2);
  // no partial outputs
  CHECK(!fs::exists(dir / "gen.ckpt"));
  CHECK(!fs::exists(dir / "gen_loss.csv"));
}

TEST_CASE("train-gen writes a learning curve and is byte-reproducible") {
  Workspace ws;
  fs::path out1 = fresh_dir("tg1"), out2 = fresh_dir("tg2");
  std::vector<std::string> args{"train-gen", "--data",   ws.sine.string(),
                                "--seed",    "42",       "--epochs",
                                "25",        "--window", "16",
                                "--stride",  "8",        "--layers",
                                "1",         "--units",  "8",
                                "--fc-units", "6",       "--mixtures",
                                "2",         "--batch",  "8",
                                "--lr",      "0.01"};
  std::vector<std::string> run1 = args;
  run1.push_back("--out");
  run1.push_back(out1.string());
  REQUIRE(run(run1) == 0);

  CHECK(fs::exists(out1 / "gen.ckpt"));
  CHECK(line_count(out1 / "gen_loss.csv") == 26);  // header + 25 epochs

  auto [first, last] = csv_first_last(out1 / "gen_loss.csv");
  CHECK(first[0] == 1.0);
  CHECK(last[0] == 25.0);
  CHECK(last[1] < first[1]);  // NLL went down

  std::vector<std::string> run2 = args;
  run2.push_back("--out");
  run2.push_back(out2.string());
  REQUIRE(run(run2) == 0);
  CHECK(slurp(out1 / "gen.ckpt") == slurp(out2 / "gen.ckpt"));
  CHECK(slurp(out1 / "gen_loss.csv") == slurp(out2 / "gen_loss.csv"));
}

TEST_CASE("generate emits count traces of the requested length in range") {
  Workspace ws;
  fs::path train_out = fresh_dir("gen_train");
  REQUIRE(run({"train-gen", "--data", ws.sine.string(), "--seed", "7", "--epochs", "5",
               "--window", "12", "--stride", "6", "--layers", "1", "--units", "6",
               "--fc-units", "4", "--mixtures", "2", "--batch", "8", "--out",
               train_out.string()}) == 0);

  fs::path gen1 = fresh_dir("gen1"), gen2 = fresh_dir("gen2");
  std::vector<std::string> args{"generate", "--checkpoint",
                                (train_out / "gen.ckpt").string(), "--length", "400",
                                "--count", "4", "--seed", "3"};
  std::vector<std::string> run1 = args;
  run1.push_back("--out");
  run1.push_back(gen1.string());
  REQUIRE(run(run1) == 0);

  for (int i = 1; i <= 4; ++i) {
    fs::path trace = gen1 / ("trace_" + std::to_string(i) + ".txt");
    REQUIRE(fs::exists(trace));
    CHECK(line_count(trace) == 400);
  }
  CHECK(fs::exists(gen1 / "traces.json"));

  // denormalized values stay inside the training range
  Checkpoint ckpt = load_checkpoint(train_out / "gen.ckpt");
  NormRecord rec = norm_record_from_json(ckpt.meta.at("normalization"));
  for (double v : load_column(gen1 / "trace_1.txt")) {
    CHECK(v >= rec.min - 1e-12);
    CHECK(v <= rec.max + 1e-12);
  }

  std::vector<std::string> run2 = args;
  run2.push_back("--out");
  run2.push_back(gen2.string());
  REQUIRE(run(run2) == 0);
  for (int i = 1; i <= 4; ++i) {
    std::string name = "trace_" + std::to_string(i) + ".txt";
    CHECK(slurp(gen1 / name) == slurp(gen2 / name));
  }
  CHECK(slurp(gen1 / "traces.json") == slurp(gen2 / "traces.json"));
}

TEST_CASE("train-disc separates sine from noise and evaluate reports it") {
  Workspace ws;
  fs::path disc_out = fresh_dir("td");
  REQUIRE(run({"train-disc", "--real", ws.sine.string(), "--fake", ws.noise.string(),
               "--seed", "11", "--epochs", "150", "--window", "16", "--stride", "8",
               "--units", "8", "--fc-units", "4", "--batch", "8", "--lr", "0.01",
               "--out", disc_out.string()}) == 0);
  CHECK(fs::exists(disc_out / "disc.ckpt"));
  CHECK(line_count(disc_out / "disc_metrics.csv") == 151);
  auto [first, last] = csv_first_last(disc_out / "disc_metrics.csv");
  CHECK(last[1] >= 0.95);

  // fresh data from different seeds, same processes
  fs::path real2 = ws.dir / "sine2.txt", fake2 = ws.dir / "noise2.txt";
  REQUIRE(run({"synth-data", "--kind", "sine", "--length", "400", "--seed", "200",
               "--noise", "0.05", "--out", real2.string()}) == 0);
  REQUIRE(run({"synth-data", "--kind", "ar1", "--length", "400", "--seed", "201",
               "--phi", "0.0", "--noise", "1.0", "--out", fake2.string()}) == 0);

  fs::path eval_out = fresh_dir("ev");
  REQUIRE(run({"evaluate", "--checkpoint", (disc_out / "disc.ckpt").string(), "--real",
               real2.string(), "--fake", fake2.string(), "--out",
               eval_out.string()}) == 0);
  std::string csv = slurp(eval_out / "evaluation.csv");
  CHECK(csv.rfind("class,count,mean_score,accuracy\n", 0) == 0);  // golden header

  auto [r_first, r_last] = csv_first_last(eval_out / "evaluation.csv");
  CHECK(r_last[3] >= 0.95);  // overall accuracy on held-out series
}

TEST_CASE("evaluate on identical files is exactly one half") {
  Workspace ws;
  fs::path disc_out = fresh_dir("td_same");
  REQUIRE(run({"train-disc", "--real", ws.sine.string(), "--fake", ws.noise.string(),
               "--seed", "13", "--epochs", "10", "--window", "16", "--units", "4",
               "--fc-units", "3", "--batch", "4", "--out", disc_out.string()}) == 0);
  fs::path eval_out = fresh_dir("ev_same");
  REQUIRE(run({"evaluate", "--checkpoint", (disc_out / "disc.ckpt").string(), "--real",
               ws.sine.string(), "--fake", ws.sine.string(), "--out",
               eval_out.string()}) == 0);
  auto [first, last] = csv_first_last(eval_out / "evaluation.csv");
  CHECK(last[3] == 0.5);  // exactly, by the tie rule
}

TEST_CASE("alternate writes per-round metrics and checkpoints deterministically") {
  Workspace ws;
  fs::path out1 = fresh_dir("alt1"), out2 = fresh_dir("alt2");
  std::vector<std::string> args{
      "alternate", "--data", ws.sine.string(), "--seed", "21", "--rounds", "1",
      "--window", "16", "--tbptt", "15", "--epochs-d", "8", "--epochs-g", "4",
      "--mb-per-round", "2", "--batch", "4", "--layers", "1", "--units", "6",
      "--fc-units", "4", "--mixtures", "2", "--d-units", "4", "--d-fc-units", "3"};
  std::vector<std::string> run1 = args;
  run1.push_back("--out");
  run1.push_back(out1.string());
  REQUIRE(run(run1) == 0);

  CHECK(line_count(out1 / "rounds.csv") == 2);  // header + one round
  CHECK(fs::exists(out1 / "gen_round_1.ckpt"));
  CHECK(fs::exists(out1 / "disc_round_1.ckpt"));
  CHECK(fs::exists(out1 / "gen.ckpt"));
  CHECK(fs::exists(out1 / "disc.ckpt"));

  std::vector<std::string> run2 = args;
  run2.push_back("--out");
  run2.push_back(out2.string());
  REQUIRE(run(run2) == 0);
  CHECK(slurp(out1 / "rounds.csv") == slurp(out2 / "rounds.csv"));
  CHECK(slurp(out1 / "gen.ckpt") == slurp(out2 / "gen.ckpt"));
}

TEST_CASE("corrupt checkpoints exit with code 4") {
  fs::path dir = fresh_dir("corrupt");
  fs::path bad = dir / "bad.ckpt";
  std::ofstream(bad) << "this is not a checkpoint";
  CHECK(run({"generate", "--checkpoint", bad.string(), "--seed", "1", "--out",
             dir.string()}) == 4);
  Workspace ws;
  CHECK(run({"evaluate", "--checkpoint", bad.string(), "--real", ws.sine.string(),
             "--fake", ws.noise.string(), "--out", dir.string()}) == 4);
}

TEST_CASE("SENSEGEN_LOG gates logging and rejects unknown levels") {
  fs::path dir = fresh_dir("log");
  setenv("SENSEGEN_LOG", "debug", 1);
  CHECK(run({"synth-data", "--kind", "sine", "--length", "5", "--seed", "1", "--out",
             (dir / "a.txt").string()}) == 0);
  setenv("SENSEGEN_LOG", "loud", 1);
  CHECK(run({"synth-data", "--kind", "sine", "--length", "5", "--seed", "1", "--out",
             (dir / "b.txt").string()}) == 2);
  setenv("SENSEGEN_LOG", "error", 1);
}

TEST_CASE("config file values are applied and flags win") {
  Workspace ws;
  fs::path dir = fresh_dir("cfg");
  fs::path cfg = dir / "run.cfg";
  {
    std::ofstream out(cfg);
    out << "[synth-data]\n";
    out << "kind = sine\n";
    out << "length = 30\n";
    out << "seed = 5\n";
    out << "out = " << (dir / "from_config.txt").string() << "\n";
  }
  REQUIRE(run({"--config", cfg.string(), "synth-data"}) == 0);
  CHECK(line_count(dir / "from_config.txt") == 30);

  // flag overrides the config value
  REQUIRE(run({"--config", cfg.string(), "synth-data", "--length", "12", "--out",
               (dir / "override.txt").string()}) == 0);
  CHECK(line_count(dir / "override.txt") == 12);
}

TEST_CASE("windowed text input feeds training through --row-width") {
  fs::path dir = fresh_dir("rows");
  // 8 rows of 17 values -> windows for tbptt_window = 16
  auto series = synthetic_dataset(SynthKind::sine, 8 * 17, 55);
  fs::path rows = dir / "rows.txt";
  {
    std::ofstream out(rows);
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 17; ++c) out << series[r * 17 + c] << (c == 16 ? "" : " ");
      out << "\n";
    }
  }
  REQUIRE(run({"train-gen", "--data", rows.string(), "--row-width", "17", "--seed", "3",
               "--epochs", "2", "--window", "16", "--stride", "17", "--layers", "1",
               "--units", "4", "--fc-units", "3", "--mixtures", "2", "--batch", "4",
               "--out", dir.string()}) == 0);
  CHECK(fs::exists(dir / "gen.ckpt"));

  // ragged rows surface as parse errors, exit 3
  fs::path ragged = dir / "ragged.txt";
  std::ofstream(ragged) << "1 2 3\n4 5\n";
  CHECK(run({"train-gen", "--data", ragged.string(), "--row-width", "3", "--seed", "3",
             "--epochs", "1", "--window", "2", "--layers", "1", "--units", "4",
             "--fc-units", "3", "--mixtures", "2", "--out", dir.string()}) == 3);
}
