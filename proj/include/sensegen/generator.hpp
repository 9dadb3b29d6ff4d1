#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sensegen/mdn.hpp"
#include "sensegen/nn.hpp"

namespace sensegen {

enum class HeadMode {
  // The head layer passes through a sigmoid before the softmax/exp split,
  // which pins mu to (0,1) and sigma to (1,e). Requires [0,1] data.
  sigmoid_literal,
  // Raw affine head, standard MDN practice.
  linear,
};

struct GeneratorConfig {
  std::size_t lstm_layers = 3;
  std::size_t lstm_units = 256;
  std::size_t fc_units = 128;
  std::size_t mixtures = 24;
  HeadMode head = HeadMode::sigmoid_literal;
  // clamp on sigma after exp; 0 disables (oracle tests)
  double sigma_floor = 1e-4;

  std::size_t head_width() const { return 3 * mixtures; }
  void validate() const;
};

// Scalar-input generator: LSTM stack -> sigmoid dense -> head dense -> GMM.
struct GeneratorModel {
  GeneratorConfig config;
  std::vector<LSTMParams> stack;
  DenseParams fc4;
  DenseParams fc5;

  static GeneratorModel init(const GeneratorConfig& cfg, std::uint64_t seed);
  static GeneratorModel zeros(const GeneratorConfig& cfg);

  std::vector<ParamRef> parameters();
  void validate() const;
};

struct GeneratorOutput {
  std::vector<GMMParams> mixtures;
  std::vector<LSTMState> states;
};

// Plain forward over a scalar sequence; empty states mean zeros.
GeneratorOutput forward(const GeneratorModel& m, std::span<const double> xs,
                        std::vector<LSTMState> states = {});

// NLL of window: forward on x_1..x_{T-1}, scored against x_2..x_T.
double sequence_nll(const GeneratorModel& m, std::span<const double> window);

// Autoregressive synthesis: start from seed_value, sample the mixture, feed
// the sample back. Samples are clamped to the model's normalized [0,1]
// domain before reuse and output.
std::vector<double> generate(const GeneratorModel& m, std::size_t length,
                             double seed_value, Rng& rng);

// ---- taped (training) path ----

struct GeneratorVars {
  std::vector<LSTMVars> stack;
  DenseVars fc4;
  DenseVars fc5;

  // leaf order matches GeneratorModel::parameters()
  std::vector<Var> flat() const;
};

GeneratorVars lift(Tape& tape, const GeneratorModel& m);
std::vector<GMMVars> forward(const GeneratorModel& m, const GeneratorVars& v,
                             std::span<const double> xs);
Var sequence_nll(const GeneratorModel& m, const GeneratorVars& v,
                 std::span<const double> window);

}  // namespace sensegen
