#include "sensegen/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sensegen/checkpoint.hpp"
#include "sensegen/data.hpp"
#include "sensegen/discriminator.hpp"
#include "sensegen/errors.hpp"
#include "sensegen/generator.hpp"
#include "sensegen/training.hpp"

namespace sensegen {

namespace {

namespace fs = std::filesystem;

enum class LogLevel { error = 0, info = 1, debug = 2 };

LogLevel g_log_level = LogLevel::info;

void read_log_level() {
  const char* env = std::getenv("SENSEGEN_LOG");
  if (env == nullptr) {
    g_log_level = LogLevel::info;
    return;
  }
  std::string v(env);
  if (v == "error") {
    g_log_level = LogLevel::error;
  } else if (v == "info") {
    g_log_level = LogLevel::info;
  } else if (v == "debug") {
    g_log_level = LogLevel::debug;
  } else {
    throw ConfigError("SENSEGEN_LOG must be error|info|debug, got '" + v + "'");
  }
}

void log_info(const std::string& msg) {
  if (g_log_level >= LogLevel::info) std::cerr << "info: " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (g_log_level >= LogLevel::debug) std::cerr << "debug: " << msg << "\n";
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void require_readable(const std::string& path, const char* what) {
  if (!fs::exists(path)) {
    throw ConfigError(std::string(what) + " path does not exist: '" + path + "'");
  }
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << content;
}

// ---- shared option blocks ----

struct DataArgs {
  std::string path;
  std::size_t row_width = 0;  // 0 = column file

  // Loads and flattens to one series (rows concatenated in order).
  std::vector<double> load_series(const char* what) const {
    require_readable(path, what);
    if (row_width == 0) return load_column(path);
    std::vector<double> series;
    for (const auto& row : load_windowed_text(path, row_width)) {
      series.insert(series.end(), row.begin(), row.end());
    }
    return series;
  }
};

struct GenModelArgs {
  std::size_t layers = 3;
  std::size_t units = 256;
  std::size_t fc_units = 128;
  std::size_t mixtures = 24;
  std::string head = "sigmoid";
  double sigma_floor = 1e-4;

  GeneratorConfig config() const {
    GeneratorConfig cfg;
    cfg.lstm_layers = layers;
    cfg.lstm_units = units;
    cfg.fc_units = fc_units;
    cfg.mixtures = mixtures;
    if (head == "sigmoid") {
      cfg.head = HeadMode::sigmoid_literal;
    } else if (head == "linear") {
      cfg.head = HeadMode::linear;
    } else {
      throw ConfigError("--head must be sigmoid or linear, got '" + head + "'");
    }
    cfg.sigma_floor = sigma_floor;
    return cfg;
  }
};

void add_train_flags(CLI::App* cmd, TrainConfig& cfg) {
  cmd->add_option("--batch", cfg.minibatch, "Minibatch size");
  cmd->add_option("--lr", cfg.learning_rate, "RMSProp learning rate");
  cmd->add_option("--d-lr", cfg.d_learning_rate,
                  "Discriminator learning rate (0 = use --lr)");
  cmd->add_option("--decay", cfg.rmsprop_decay, "RMSProp decay rho");
  cmd->add_option("--eps", cfg.rmsprop_eps, "RMSProp epsilon");
  cmd->add_option("--clip", cfg.clip_norm, "Gradient clip threshold");
}

std::string metrics_csv(const std::string& header, const std::vector<double>& values) {
  std::string csv = header + "\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    csv += std::to_string(i + 1) + "," + fmt_g(values[i]) + "\n";
  }
  return csv;
}

// ---- commands ----

struct TrainGenArgs {
  DataArgs data;
  GenModelArgs model;
  TrainConfig train;
  std::size_t stride = 0;  // 0 -> half window
  std::string out;
  std::string channel = "series";
  double sample_rate_hz = 0.0;
};

void cmd_train_gen(const TrainGenArgs& a) {
  std::vector<double> raw = a.data.load_series("--data");
  auto [series, rec] = normalize(raw);
  std::size_t wlen = a.train.tbptt_window + 1;
  std::size_t stride = a.stride == 0 ? std::max<std::size_t>(1, wlen / 2) : a.stride;
  SeriesBatch batch{window_series(series, wlen, stride), a.channel, a.sample_rate_hz, rec};
  log_info("train-gen: " + std::to_string(batch.windows.size()) + " windows of " +
           std::to_string(wlen) + ", " + std::to_string(a.train.g_epochs) + " epochs");

  GeneratorModel model = GeneratorModel::init(a.model.config(), a.train.seed);
  GenTrainResult result = train_generator(model, batch.windows, a.train);

  ensure_out_dir(a.out);
  nlohmann::json meta;
  meta["normalization"] = to_json(batch.norm);
  meta["train"] = to_json(a.train);
  meta["history"] = {{"mean_nll", result.epoch_mean_nll}};
  meta["channel"] = batch.channel;
  meta["sample_rate_hz"] = batch.sample_rate_hz;
  save_checkpoint(fs::path(a.out) / "gen.ckpt", make_checkpoint(model, meta));
  write_file(fs::path(a.out) / "gen_loss.csv",
             metrics_csv("epoch,mean_nll", result.epoch_mean_nll));
  std::cout << "trained generator: epochs=" << result.epoch_mean_nll.size()
            << " first_nll=" << fmt_g(result.epoch_mean_nll.front())
            << " last_nll=" << fmt_g(result.epoch_mean_nll.back()) << "\n";
}

struct TrainDiscArgs {
  DataArgs real;
  DataArgs fake;
  TrainConfig train;
  std::size_t window = 400;
  std::size_t units = 64;
  std::size_t fc_units = 16;
  std::size_t stride = 0;  // 0 -> disjoint
  std::string out;
};

void cmd_train_disc(const TrainDiscArgs& a) {
  std::vector<double> raw_real = a.real.load_series("--real");
  std::vector<double> raw_fake = a.fake.load_series("--fake");
  auto [real_series, rec] = normalize(raw_real);
  // the real data defines the scale both classes are judged on
  std::vector<double> fake_series = normalize_with(raw_fake, rec);
  std::size_t stride = a.stride == 0 ? a.window : a.stride;
  auto real_windows = window_series(real_series, a.window, stride);
  auto fake_windows = window_series(fake_series, a.window, stride);
  log_info("train-disc: " + std::to_string(real_windows.size()) + " real / " +
           std::to_string(fake_windows.size()) + " fake windows");

  DiscriminatorConfig cfg;
  cfg.lstm_units = a.units;
  cfg.fc_units = a.fc_units;
  cfg.window_len = a.window;
  DiscriminatorModel model = DiscriminatorModel::init(cfg, a.train.seed);
  DiscTrainResult result = train_discriminator(model, real_windows, fake_windows, a.train);

  ensure_out_dir(a.out);
  nlohmann::json meta;
  meta["normalization"] = to_json(rec);
  meta["train"] = to_json(a.train);
  meta["history"] = {{"holdout_accuracy", result.epoch_accuracy}};
  save_checkpoint(fs::path(a.out) / "disc.ckpt", make_checkpoint(model, meta));
  write_file(fs::path(a.out) / "disc_metrics.csv",
             metrics_csv("epoch,holdout_accuracy", result.epoch_accuracy));
  std::cout << "trained discriminator: epochs=" << result.epoch_accuracy.size()
            << " final_accuracy=" << fmt_g(result.epoch_accuracy.back()) << "\n";
}

struct AlternateArgs {
  DataArgs data;
  GenModelArgs gen;
  TrainConfig train;
  std::size_t window = 400;
  std::size_t d_units = 64;
  std::size_t d_fc_units = 16;
  std::string out;
};

void cmd_alternate(const AlternateArgs& a) {
  std::vector<double> raw = a.data.load_series("--data");
  auto [series, rec] = normalize(raw);

  GeneratorModel gen_model = GeneratorModel::init(a.gen.config(), a.train.seed);
  DiscriminatorConfig d_cfg;
  d_cfg.lstm_units = a.d_units;
  d_cfg.fc_units = a.d_fc_units;
  d_cfg.window_len = a.window;
  DiscriminatorModel disc_model = DiscriminatorModel::init(d_cfg, a.train.seed + 1);

  ensure_out_dir(a.out);
  nlohmann::json base_meta;
  base_meta["normalization"] = to_json(rec);
  base_meta["train"] = to_json(a.train);

  std::string csv = "round,d_accuracy,g_nll\n";
  auto on_round = [&](const RoundMetrics& m, GeneratorModel& g, DiscriminatorModel& d) {
    log_info("round " + std::to_string(m.round) + ": d_accuracy=" + fmt_g(m.d_accuracy) +
             " g_nll=" + fmt_g(m.g_nll));
    std::string suffix = "_round_" + std::to_string(m.round) + ".ckpt";
    save_checkpoint(fs::path(a.out) / ("gen" + suffix), make_checkpoint(g, base_meta));
    save_checkpoint(fs::path(a.out) / ("disc" + suffix), make_checkpoint(d, base_meta));
  };
  std::vector<RoundMetrics> metrics =
      alternating_loop(gen_model, disc_model, series, a.train, on_round);

  for (const RoundMetrics& m : metrics) {
    csv += std::to_string(m.round) + "," + fmt_g(m.d_accuracy) + "," + fmt_g(m.g_nll) + "\n";
  }
  write_file(fs::path(a.out) / "rounds.csv", csv);
  save_checkpoint(fs::path(a.out) / "gen.ckpt", make_checkpoint(gen_model, base_meta));
  save_checkpoint(fs::path(a.out) / "disc.ckpt", make_checkpoint(disc_model, base_meta));
  std::cout << "alternating run: rounds=" << metrics.size()
            << " final_d_accuracy=" << fmt_g(metrics.back().d_accuracy)
            << " final_g_nll=" << fmt_g(metrics.back().g_nll) << "\n";
}

struct GenerateArgs {
  std::string checkpoint;
  std::size_t length = 400;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  std::string out;
};

void cmd_generate(const GenerateArgs& a) {
  require_readable(a.checkpoint, "--checkpoint");
  Checkpoint ckpt = load_checkpoint(a.checkpoint);
  GeneratorModel model = generator_from_checkpoint(ckpt);
  NormRecord rec = norm_record_from_json(ckpt.meta.at("normalization"));

  ensure_out_dir(a.out);
  Rng base(a.seed);
  for (std::size_t i = 1; i <= a.count; ++i) {
    Rng rng = base.fork("generate/trace-" + std::to_string(i));
    std::vector<double> trace = generate(model, a.length, 0.0, rng);
    save_column(fs::path(a.out) / ("trace_" + std::to_string(i) + ".txt"),
                denormalize(trace, rec));
  }
  nlohmann::json sidecar;
  sidecar["channel"] = ckpt.meta.value("channel", "series");
  sidecar["sample_rate_hz"] = ckpt.meta.value("sample_rate_hz", 0.0);
  sidecar["normalization"] = to_json(rec);
  sidecar["length"] = a.length;
  sidecar["count"] = a.count;
  sidecar["seed"] = a.seed;
  write_file(fs::path(a.out) / "traces.json", sidecar.dump(2) + "\n");
  std::cout << "generated " << a.count << " trace(s) of " << a.length << " values\n";
}

struct EvaluateArgs {
  std::string checkpoint;
  DataArgs real;
  DataArgs fake;
  std::string out;
};

void cmd_evaluate(const EvaluateArgs& a) {
  require_readable(a.checkpoint, "--checkpoint");
  Checkpoint ckpt = load_checkpoint(a.checkpoint);
  DiscriminatorModel model = discriminator_from_checkpoint(ckpt);
  NormRecord rec = norm_record_from_json(ckpt.meta.at("normalization"));

  std::size_t wlen = model.config.window_len;
  auto real_windows = window_series(normalize_with(a.real.load_series("--real"), rec),
                                    wlen, wlen);
  auto fake_windows = window_series(normalize_with(a.fake.load_series("--fake"), rec),
                                    wlen, wlen);

  double real_mean = 0.0, fake_mean = 0.0;
  std::size_t real_correct = 0, fake_correct = 0;
  for (const auto& w : real_windows) {
    double s = score(model, w);
    real_mean += s;
    if (s > 0.5) ++real_correct;
  }
  for (const auto& w : fake_windows) {
    double s = score(model, w);
    fake_mean += s;
    if (s <= 0.5) ++fake_correct;
  }
  real_mean /= static_cast<double>(real_windows.size());
  fake_mean /= static_cast<double>(fake_windows.size());
  double real_acc = static_cast<double>(real_correct) / static_cast<double>(real_windows.size());
  double fake_acc = static_cast<double>(fake_correct) / static_cast<double>(fake_windows.size());
  double all_acc = static_cast<double>(real_correct + fake_correct) /
                   static_cast<double>(real_windows.size() + fake_windows.size());

  std::string csv = "class,count,mean_score,accuracy\n";
  csv += "real," + std::to_string(real_windows.size()) + "," + fmt_g(real_mean) + "," +
         fmt_g(real_acc) + "\n";
  csv += "fake," + std::to_string(fake_windows.size()) + "," + fmt_g(fake_mean) + "," +
         fmt_g(fake_acc) + "\n";
  csv += "all," + std::to_string(real_windows.size() + fake_windows.size()) + "," +
         fmt_g((real_mean + fake_mean) / 2.0) + "," + fmt_g(all_acc) + "\n";

  std::cout << csv;
  ensure_out_dir(a.out);
  write_file(fs::path(a.out) / "evaluation.csv", csv);
}

struct SynthArgs {
  std::string kind = "sine";
  std::size_t length = 0;
  std::uint64_t seed = 0;
  std::string out;
  SynthParams params;
};

void cmd_synth_data(const SynthArgs& a) {
  std::vector<double> series =
      synthetic_dataset(parse_synth_kind(a.kind), a.length, a.seed, a.params);
  fs::path out(a.out);
  if (out.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(out.parent_path(), ec);
  }
  save_column(out, series);
  std::cout << "wrote " << series.size() << " values to " << a.out << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"sensegen: train, sample and evaluate sensor time-series models"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Config file (key = value lines; flags win)");

  TrainGenArgs tg;
  CLI::App* train_gen = app.add_subcommand("train-gen", "Train the generator on a series");
  train_gen->add_option("--data", tg.data.path, "Input series file")->required();
  train_gen->add_option("--row-width", tg.data.row_width,
                        "Treat input as windowed text with this row width");
  train_gen->add_option("--seed", tg.train.seed, "Random seed")->required();
  train_gen->add_option("--out", tg.out, "Output directory")->required();
  train_gen->add_option("--epochs", tg.train.g_epochs, "Training epochs");
  train_gen->add_option("--window", tg.train.tbptt_window, "Truncated BPTT window");
  train_gen->add_option("--stride", tg.stride, "Window stride (default: half window)");
  train_gen->add_option("--mixtures", tg.model.mixtures, "Mixture components");
  train_gen->add_option("--layers", tg.model.layers, "LSTM layers");
  train_gen->add_option("--units", tg.model.units, "LSTM units per layer");
  train_gen->add_option("--fc-units", tg.model.fc_units, "Dense layer width");
  train_gen->add_option("--head", tg.model.head, "Head mode: sigmoid|linear");
  train_gen->add_option("--sigma-floor", tg.model.sigma_floor, "Lower clamp on sigma");
  train_gen->add_option("--channel", tg.channel, "Channel label for metadata");
  train_gen->add_option("--sample-rate", tg.sample_rate_hz, "Sample rate (Hz) for metadata");
  add_train_flags(train_gen, tg.train);
  train_gen->callback([&tg] { cmd_train_gen(tg); });

  TrainDiscArgs td;
  CLI::App* train_disc =
      app.add_subcommand("train-disc", "Train the discriminator on real vs fake series");
  train_disc->add_option("--real", td.real.path, "Real series file")->required();
  train_disc->add_option("--fake", td.fake.path, "Fake series file")->required();
  train_disc->add_option("--row-width", td.real.row_width,
                         "Treat inputs as windowed text with this row width");
  train_disc->add_option("--seed", td.train.seed, "Random seed")->required();
  train_disc->add_option("--out", td.out, "Output directory")->required();
  train_disc->add_option("--epochs", td.train.d_epochs, "Training epochs");
  train_disc->add_option("--window", td.window, "Scoring window length");
  train_disc->add_option("--stride", td.stride, "Window stride (default: window length)");
  train_disc->add_option("--units", td.units, "LSTM units");
  train_disc->add_option("--fc-units", td.fc_units, "Dense layer width");
  add_train_flags(train_disc, td.train);
  train_disc->callback([&td] {
    TrainDiscArgs args = td;
    args.fake.row_width = args.real.row_width;
    cmd_train_disc(args);
  });

  AlternateArgs al;
  CLI::App* alternate =
      app.add_subcommand("alternate", "Alternating discriminator/generator training");
  alternate->add_option("--data", al.data.path, "Input series file")->required();
  alternate->add_option("--row-width", al.data.row_width,
                        "Treat input as windowed text with this row width");
  alternate->add_option("--seed", al.train.seed, "Random seed")->required();
  alternate->add_option("--out", al.out, "Output directory")->required();
  alternate->add_option("--rounds", al.train.rounds, "Outer rounds");
  alternate->add_option("--window", al.window, "Discriminator window length");
  alternate->add_option("--tbptt", al.train.tbptt_window, "Generator BPTT window");
  alternate->add_option("--epochs-d", al.train.d_epochs, "Discriminator epochs per round");
  alternate->add_option("--epochs-g", al.train.g_epochs, "Generator epochs per round");
  alternate->add_option("--mb-per-round", al.train.minibatches_per_round,
                        "Minibatches sampled per round");
  alternate->add_option("--mixtures", al.gen.mixtures, "Mixture components");
  alternate->add_option("--layers", al.gen.layers, "Generator LSTM layers");
  alternate->add_option("--units", al.gen.units, "Generator LSTM units");
  alternate->add_option("--fc-units", al.gen.fc_units, "Generator dense width");
  alternate->add_option("--head", al.gen.head, "Generator head mode: sigmoid|linear");
  alternate->add_option("--sigma-floor", al.gen.sigma_floor, "Lower clamp on sigma");
  alternate->add_option("--d-units", al.d_units, "Discriminator LSTM units");
  alternate->add_option("--d-fc-units", al.d_fc_units, "Discriminator dense width");
  alternate->add_flag("--d-reset", al.train.d_reset_per_round,
                      "Retrain the discriminator from scratch each round");
  add_train_flags(alternate, al.train);
  alternate->callback([&al] { cmd_alternate(al); });

  GenerateArgs ge;
  CLI::App* generate_cmd = app.add_subcommand("generate", "Sample traces from a checkpoint");
  generate_cmd->add_option("--checkpoint", ge.checkpoint, "Generator checkpoint")->required();
  generate_cmd->add_option("--seed", ge.seed, "Random seed")->required();
  generate_cmd->add_option("--out", ge.out, "Output directory")->required();
  generate_cmd->add_option("--length", ge.length, "Trace length");
  generate_cmd->add_option("--count", ge.count, "Number of traces");
  generate_cmd->callback([&ge] { cmd_generate(ge); });

  EvaluateArgs ev;
  CLI::App* evaluate_cmd =
      app.add_subcommand("evaluate", "Score real vs fake series with a discriminator");
  evaluate_cmd->add_option("--checkpoint", ev.checkpoint, "Discriminator checkpoint")
      ->required();
  evaluate_cmd->add_option("--real", ev.real.path, "Real series file")->required();
  evaluate_cmd->add_option("--fake", ev.fake.path, "Fake series file")->required();
  evaluate_cmd->add_option("--row-width", ev.real.row_width,
                           "Treat inputs as windowed text with this row width");
  evaluate_cmd->add_option("--out", ev.out, "Output directory")->required();
  evaluate_cmd->callback([&ev] {
    EvaluateArgs args = ev;
    args.fake.row_width = args.real.row_width;
    cmd_evaluate(args);
  });

  SynthArgs sy;
  CLI::App* synth = app.add_subcommand("synth-data", "Write a synthetic series");
  synth->add_option("--kind", sy.kind, "sine|ar1|bimodal")->required();
  synth->add_option("--length", sy.length, "Series length")->required();
  synth->add_option("--seed", sy.seed, "Random seed")->required();
  synth->add_option("--out", sy.out, "Output file")->required();
  synth->add_option("--amplitude", sy.params.amplitude, "Amplitude");
  synth->add_option("--frequency", sy.params.frequency, "Cycles per step (sine)");
  synth->add_option("--noise", sy.params.noise, "Noise sigma");
  synth->add_option("--phi", sy.params.ar_phi, "AR(1) coefficient");
  synth->callback([&sy] { cmd_synth_data(sy); });

  try {
    read_log_level();
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  log_debug("done");
  return 0;
}

}  // namespace sensegen
