#include "sensegen/discriminator.hpp"

#include <cmath>
#include <string>

#include "sensegen/errors.hpp"

namespace sensegen {

namespace {

constexpr double kScoreClamp = 1e-12;

void check_window(const DiscriminatorConfig& cfg, std::size_t len) {
  if (len == 0) throw ContractError("discriminator: empty window");
  if (cfg.strict_window && len != cfg.window_len) {
    throw ContractError("discriminator: window length " + std::to_string(len) +
                        " differs from configured " + std::to_string(cfg.window_len));
  }
}

void check_batches(std::size_t n_real, std::size_t n_fake) {
  if (n_real == 0 || n_fake == 0) {
    throw ContractError("discriminator: real and fake batches must be non-empty");
  }
  if (n_real != n_fake) {
    throw ContractError("discriminator: batch sizes differ, " + std::to_string(n_real) +
                        " real vs " + std::to_string(n_fake) + " fake");
  }
}

}  // namespace

void DiscriminatorConfig::validate() const {
  if (lstm_units == 0 || fc_units == 0 || window_len == 0) {
    throw ConfigError("discriminator config: all counts must be >= 1");
  }
}

DiscriminatorModel DiscriminatorModel::init(const DiscriminatorConfig& cfg,
                                            std::uint64_t seed) {
  cfg.validate();
  Rng rng = Rng(seed).fork("discriminator-init");
  DiscriminatorModel m;
  m.config = cfg;
  m.lstm = init_lstm(1, cfg.lstm_units, rng);
  m.fc = init_dense(cfg.fc_units, cfg.lstm_units, Activation::sigmoid, rng);
  m.out = init_dense(1, cfg.fc_units, Activation::sigmoid, rng);
  return m;
}

DiscriminatorModel DiscriminatorModel::zeros(const DiscriminatorConfig& cfg) {
  cfg.validate();
  DiscriminatorModel m;
  m.config = cfg;
  m.lstm = zeros_lstm(1, cfg.lstm_units);
  m.fc = zeros_dense(cfg.fc_units, cfg.lstm_units, Activation::sigmoid);
  m.out = zeros_dense(1, cfg.fc_units, Activation::sigmoid);
  return m;
}

std::vector<ParamRef> DiscriminatorModel::parameters() {
  std::vector<ParamRef> refs = params_of(lstm, "lstm");
  auto f = params_of(fc, "fc");
  refs.insert(refs.end(), f.begin(), f.end());
  auto o = params_of(out, "out");
  refs.insert(refs.end(), o.begin(), o.end());
  return refs;
}

void DiscriminatorModel::validate() const {
  config.validate();
  if (lstm.input_dim() != 1 || lstm.hidden_dim() != config.lstm_units) {
    throw ConfigError("discriminator: LSTM layer must map 1 -> " +
                      std::to_string(config.lstm_units));
  }
  if (fc.input_dim() != config.lstm_units || fc.output_dim() != config.fc_units) {
    throw ConfigError("discriminator: fc must map " + std::to_string(config.lstm_units) +
                      " -> " + std::to_string(config.fc_units));
  }
  if (out.input_dim() != config.fc_units || out.output_dim() != 1) {
    throw ConfigError("discriminator: output layer must map " +
                      std::to_string(config.fc_units) + " -> 1");
  }
}

double score(const DiscriminatorModel& m, std::span<const double> window) {
  m.validate();
  check_window(m.config, window.size());
  LSTMState s = LSTMState::zeros(m.config.lstm_units);
  for (double x : window) {
    s = lstm_step(m.lstm, Tensor::vector({x}), s);
  }
  Tensor hidden = dense_forward(m.fc, s.h);
  return dense_forward(m.out, hidden)[0];
}

double bce_loss(const DiscriminatorModel& m,
                std::span<const std::vector<double>> real,
                std::span<const std::vector<double>> fake) {
  check_batches(real.size(), fake.size());
  double total = 0.0;
  for (std::size_t i = 0; i < real.size(); ++i) {
    double sr = std::clamp(score(m, real[i]), kScoreClamp, 1.0 - kScoreClamp);
    double sf = std::clamp(1.0 - score(m, fake[i]), kScoreClamp, 1.0 - kScoreClamp);
    total += std::log(sr) + std::log(sf);
  }
  return -total;
}

double accuracy(const DiscriminatorModel& m,
                std::span<const std::vector<double>> real,
                std::span<const std::vector<double>> fake, double threshold) {
  if (real.empty() || fake.empty()) {
    throw ContractError("accuracy: real and fake batches must be non-empty");
  }
  std::size_t correct = 0;
  for (const auto& w : real) {
    if (score(m, w) > threshold) ++correct;
  }
  for (const auto& w : fake) {
    if (score(m, w) <= threshold) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(real.size() + fake.size());
}

std::vector<Var> DiscriminatorVars::flat() const {
  std::vector<Var> all = vars_of(lstm);
  auto f = vars_of(fc);
  all.insert(all.end(), f.begin(), f.end());
  auto o = vars_of(out);
  all.insert(all.end(), o.begin(), o.end());
  return all;
}

DiscriminatorVars lift(Tape& tape, const DiscriminatorModel& m) {
  m.validate();
  return DiscriminatorVars{lift(tape, m.lstm), lift(tape, m.fc), lift(tape, m.out)};
}

Var score(const DiscriminatorModel& m, const DiscriminatorVars& v,
          std::span<const double> window) {
  check_window(m.config, window.size());
  Tape& tape = *v.fc.w.tape;
  LSTMStateVars s = lift(tape, LSTMState::zeros(m.config.lstm_units));
  for (double x : window) {
    s = lstm_step(v.lstm, tape.leaf(Tensor::vector({x})), s);
  }
  return dense_forward(v.out, dense_forward(v.fc, s.h));
}

Var bce_loss(const DiscriminatorModel& m, const DiscriminatorVars& v,
             std::span<const std::vector<double>> real,
             std::span<const std::vector<double>> fake) {
  check_batches(real.size(), fake.size());
  Var total{};
  for (std::size_t i = 0; i < real.size(); ++i) {
    Var sr = clamp(score(m, v, real[i]), kScoreClamp, 1.0 - kScoreClamp);
    Var sf = clamp(axpb(score(m, v, fake[i]), -1.0, 1.0), kScoreClamp, 1.0 - kScoreClamp);
    Var term = add(log(sr), log(sf));
    total = i == 0 ? term : add(total, term);
  }
  return axpb(total, -1.0, 0.0);
}

}  // namespace sensegen
